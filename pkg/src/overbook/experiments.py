"""Vectorized Monte Carlo trial engines behind the experiment harness.

Each engine runs trials in fixed-size seeded batches (see `seeding`), keeping
per-trial memory bounded while the estimate stays bit-reproducible for a
given master seed. The scalar selectors in `prophet`, `secretary`, and
`mechanisms` define the semantics; these engines replicate them with
array ops so desk-scale trial counts finish in seconds. Trace-equivalence
between both formulations is covered by the test suite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .distributions import (
    ProductInstance,
    ValueDistribution,
    max_quantile,
    max_quantile_inf,
    monopoly_price,
    virtual_value_array,
)
from .prophet import TWO_THIRDS
from .secretary import BetaVector, interval_index
from .seeding import BATCH_SIZE, batch_indices, trial_rng


class _PairedRatio:
    """Streaming ratio-of-means estimator with a delta-method stderr.

    Accumulates per-trial pairs (a, b) and reports R = sum(a)/sum(b) with
    stderr(R) = sd(a - R*b) / (sqrt(T) * mean(b)).
    """

    def __init__(self):
        self.count = 0
        self.sa = self.sb = 0.0
        self.saa = self.sbb = self.sab = 0.0

    def add(self, a: np.ndarray, b: np.ndarray) -> None:
        self.count += len(a)
        self.sa += float(a.sum())
        self.sb += float(b.sum())
        self.saa += float((a * a).sum())
        self.sbb += float((b * b).sum())
        self.sab += float((a * b).sum())

    def result(self) -> tuple[float, float]:
        t = self.count
        mean_b = self.sb / t
        ratio = self.sa / self.sb
        if t < 2:
            return ratio, 0.0
        var_a = max(0.0, (self.saa - self.sa**2 / t) / (t - 1))
        var_b = max(0.0, (self.sbb - self.sb**2 / t) / (t - 1))
        cov = (self.sab - self.sa * self.sb / t) / (t - 1)
        var_resid = max(0.0, var_a - 2 * ratio * cov + ratio**2 * var_b)
        return ratio, math.sqrt(var_resid / t) / mean_b


def _mean_stderr(total: float, total_sq: float, count: int) -> tuple[float, float]:
    mean = total / count
    if count < 2:
        return mean, 0.0
    var = max(0.0, (total_sq - count * mean**2) / (count - 1))
    return mean, math.sqrt(var / count)


def _binomial(successes: int, count: int) -> tuple[float, float]:
    p = successes / count
    return p, math.sqrt(max(0.0, p * (1 - p)) / count)


def _top_ell_sums(matrix: np.ndarray, ell: int) -> np.ndarray:
    n = matrix.shape[1]
    if ell >= n:
        return matrix.sum(axis=1)
    return np.partition(matrix, n - ell, axis=1)[:, n - ell :].sum(axis=1)


# ---- prophet: single-sample threshold ----


def alg_tau_trials(
    instance: ProductInstance,
    ell: int,
    k: int,
    tau: int,
    trials: int,
    master_seed: int,
    batch: int = BATCH_SIZE,
) -> tuple[float, float]:
    """Ratio of the selector's expected top-ell value to the offline top-ell
    benchmark, both estimated on the same realized award vectors.

    Assumes atomless components, where the uniform-priority tie-break rule
    almost surely never fires and can be skipped.
    """
    n = instance.n
    acc = _PairedRatio()
    for b_idx, b_size in batch_indices(trials, batch):
        rng = trial_rng(master_seed, b_idx)
        samples = instance.sample_matrix(rng, b_size)
        values = instance.sample_matrix(rng, b_size)
        thr = np.partition(samples, n - tau, axis=1)[:, n - tau]
        above = values > thr[:, None]
        chosen = above & (np.cumsum(above, axis=1) <= k)
        acc.add(_top_ell_sums(np.where(chosen, values, 0.0), ell),
                _top_ell_sums(values, ell))
    return acc.result()


# ---- prophet: max-distribution threshold ----


def alg_max_trials(
    instance: ProductInstance,
    ell: int,
    k: int,
    trials: int,
    master_seed: int,
    batch: int = BATCH_SIZE,
) -> tuple[float, float]:
    """Ratio for the atomless max-distribution selector (accept first k
    values strictly above the (2/3)^(k-1) quantile of the max)."""
    threshold = max_quantile(instance, TWO_THIRDS ** (k - 1))
    acc = _PairedRatio()
    for b_idx, b_size in batch_indices(trials, batch):
        rng = trial_rng(master_seed, b_idx)
        values = instance.sample_matrix(rng, b_size)
        above = values > threshold
        chosen = above & (np.cumsum(above, axis=1) <= k)
        acc.add(_top_ell_sums(np.where(chosen, values, 0.0), ell),
                _top_ell_sums(values, ell))
    return acc.result()


def alg_max_atoms_trials(
    instance: ProductInstance,
    ell: int,
    k: int,
    trials: int,
    master_seed: int,
    batch: int = BATCH_SIZE,
) -> tuple[float, float]:
    """Ratio for the mass-point variant: accept the first value >= T, then
    the first k-1 later values strictly above T."""
    threshold = max_quantile_inf(instance, TWO_THIRDS ** (k - 2))
    n = instance.n
    positions = np.arange(n)
    acc = _PairedRatio()
    for b_idx, b_size in batch_indices(trials, batch):
        rng = trial_rng(master_seed, b_idx)
        values = instance.sample_matrix(rng, b_size)
        ge = values >= threshold
        has_first = ge.any(axis=1)
        first = ge.argmax(axis=1)
        # strictly-above acceptances after the first >= acceptance
        later = ge & (values > threshold) & (positions[None, :] > first[:, None])
        later &= np.cumsum(later, axis=1) <= k - 1
        chosen_vals = np.where(later, values, 0.0)
        rows = np.nonzero(has_first)[0]
        chosen_vals[rows, first[rows]] = values[rows, first[rows]]
        acc.add(_top_ell_sums(chosen_vals, ell), _top_ell_sums(values, ell))
    return acc.result()


# ---- secretary: interval selector under random arrival ----


@dataclass
class SecretaryTrialStats:
    """Aggregates over random-arrival trials of the interval selector."""

    ratio: float
    ratio_stderr: float
    prob_capacity_differs: float       # Pr[bounded and unbounded runs differ]
    prob_capacity_differs_stderr: float
    prob_ell_missed: float             # Pr[unbounded run misses the ell-th largest]
    prob_ell_missed_stderr: float
    trials: int


def secretary_trials(
    values: np.ndarray,
    beta: BetaVector,
    k: int,
    trials: int,
    master_seed: int,
    batch: int = BATCH_SIZE,
) -> SecretaryTrialStats:
    """Simulate the interval selector over uniformly random arrival orders.

    Decisions depend only on relative ranks, so the engine permutes distinct
    ranks (duplicates in `values` get distinct ranks by sorted position,
    which realizes the earlier-arrival-wins tie rule under a uniform
    permutation) and maps accepted ranks back to values at the end.
    """
    vals_desc = np.sort(np.asarray(values, dtype=float))[::-1]
    n = len(vals_desc)
    ell = beta.ell
    if beta.n != n:
        raise ValueError("beta.n must match the number of values")
    bench = float(vals_desc[:ell].sum())
    b_of = np.array([interval_index(beta, i) for i in range(1, n + 1)])
    vals_ext = np.append(vals_desc, 0.0)  # sentinel rank n -> contributes 0

    total = total_sq = 0.0
    n_differ = 0
    n_missed = 0
    count = 0
    for b_idx, b_size in batch_indices(trials, batch):
        rng = trial_rng(master_seed, b_idx)
        # ranks[:, pos] = global rank (0 = largest) arriving at position pos
        ranks = np.argsort(rng.random((b_size, n)), axis=1)
        top_seen = np.full((b_size, ell), n, dtype=np.int64)
        acc_top = np.full((b_size, ell), n, dtype=np.int64)
        cnt_unb = np.zeros(b_size, dtype=np.int64)
        cnt_cap = np.zeros(b_size, dtype=np.int64)
        ell_taken = np.zeros(b_size, dtype=bool)
        for pos in range(n):
            r = ranks[:, pos]
            j = b_of[pos]
            if j > 0:
                better = (top_seen < r[:, None]).sum(axis=1)
                acc_u = better < j
                acc_c = acc_u & (cnt_cap < k)
                cnt_unb += acc_u
                cnt_cap += acc_c
                ell_taken |= acc_u & (r == ell - 1)
                rows = np.nonzero(acc_c)[0]
                if len(rows):
                    slot = acc_top[rows].argmax(axis=1)
                    worst = acc_top[rows, slot]
                    upd = r[rows] < worst
                    acc_top[rows[upd], slot[upd]] = r[rows][upd]
            # maintain the ell smallest ranks seen so far
            slot = top_seen.argmax(axis=1)
            all_rows = np.arange(b_size)
            worst = top_seen[all_rows, slot]
            upd = r < worst
            top_seen[all_rows[upd], slot[upd]] = r[upd]
        ell_vals = vals_ext[acc_top].sum(axis=1)
        total += float(ell_vals.sum())
        total_sq += float((ell_vals**2).sum())
        n_differ += int((cnt_unb > k).sum())
        n_missed += int((~ell_taken).sum())
        count += b_size

    mean, se = _mean_stderr(total, total_sq, count)
    p_diff, se_diff = _binomial(n_differ, count)
    p_miss, se_miss = _binomial(n_missed, count)
    return SecretaryTrialStats(mean / bench, se / bench, p_diff, se_diff,
                               p_miss, se_miss, count)


# ---- mechanisms ----


@dataclass
class WelfareTrialStats:
    ratio: float
    ratio_stderr: float
    trace_mismatches: int  # trials where mechanism welfare != selector value
    trials: int


def mechanism_welfare_trials(
    instance: ProductInstance,
    ell: int,
    k: int,
    trials: int,
    master_seed: int,
    source: str = "alg_max",
    tau: Optional[int] = None,
    batch: int = BATCH_SIZE,
) -> WelfareTrialStats:
    """Welfare ratio of the two-phase mechanism, plus a per-trial check that
    mechanism welfare equals the generating selector's top-ell value.

    The ticket threshold comes from the max-distribution quantile
    (source="alg_max", fixed across trials) or from the tau-th highest entry
    of a fresh sample vector per trial (source="alg_tau-sample").
    """
    n = instance.n
    fixed_threshold = None
    if source == "alg_max":
        fixed_threshold = max_quantile(instance, TWO_THIRDS ** (k - 1))
    elif source != "alg_tau-sample":
        raise ValueError(f"unknown threshold source: {source!r}")
    acc = _PairedRatio()
    mismatches = 0
    for b_idx, b_size in batch_indices(trials, batch):
        rng = trial_rng(master_seed, b_idx)
        if fixed_threshold is None:
            samples = instance.sample_matrix(rng, b_size)
            threshold = np.partition(samples, n - tau, axis=1)[:, n - tau : n - tau + 1]
        else:
            threshold = fixed_threshold
        values = instance.sample_matrix(rng, b_size)
        # selector path
        above = values > threshold
        chosen = above & (np.cumsum(above, axis=1) <= k)
        alg_vals = _top_ell_sums(np.where(chosen, values, 0.0), ell)
        # mechanism path: phase-1 tickets, then the top ell ticket holders win
        tickets = np.where(chosen, values, 0.0)
        ticket_sorted = -np.sort(-tickets, axis=1)
        welfare = ticket_sorted[:, :ell].sum(axis=1)
        mismatches += int((np.abs(welfare - alg_vals) > 1e-9).sum())
        acc.add(welfare, _top_ell_sums(values, ell))
    ratio, se = acc.result()
    return WelfareTrialStats(ratio, se, mismatches, trials)


@dataclass
class RevenueTrialStats:
    ratio: float                 # MC revenue / MC optimal revenue
    ratio_stderr: float
    revenue_mean: float
    revenue_stderr: float
    optimal_mean: float
    optimal_stderr: float
    identity_gap: float          # mean(revenue - winner virtual surplus)
    identity_gap_stderr: float
    trials: int


def mechanism_revenue_trials(
    prior: ValueDistribution,
    n: int,
    ell: int,
    k: int,
    tau: int,
    trials: int,
    master_seed: int,
    batch: int = BATCH_SIZE,
) -> RevenueTrialStats:
    """Expected revenue of the two-phase mechanism with a fresh sample-based
    threshold per trial, against the optimal-revenue benchmark (expected
    top-ell positive virtual surplus), plus the Myerson payment-identity gap.
    """
    phat = monopoly_price(prior)
    acc = _PairedRatio()
    rev_tot = rev_sq = 0.0
    opt_tot = opt_sq = 0.0
    gap_tot = gap_sq = 0.0
    count = 0
    col = np.arange(ell)
    for b_idx, b_size in batch_indices(trials, batch):
        rng = trial_rng(master_seed, b_idx)
        samples = prior.sample_n(rng, (b_size, n))
        values = prior.sample_n(rng, (b_size, n))
        thr = np.maximum(phat, np.partition(samples, n - tau, axis=1)[:, n - tau])
        above = values > thr[:, None]
        tickets = above & (np.cumsum(above, axis=1) <= k)
        n_tickets = tickets.sum(axis=1)
        tv_sorted = -np.sort(-np.where(tickets, values, -1.0), axis=1)
        n_win = np.minimum(n_tickets, ell)
        price = np.where(n_tickets > ell,
                         np.maximum(thr, tv_sorted[:, ell]), thr)
        revenue = n_win * price
        win_mask = col[None, :] < n_win[:, None]
        surplus = (virtual_value_array(prior, tv_sorted[:, :ell]) * win_mask).sum(axis=1)
        optimal = _top_ell_sums(np.maximum(virtual_value_array(prior, values), 0.0), ell)
        gap = revenue - surplus
        acc.add(revenue, optimal)
        rev_tot += float(revenue.sum()); rev_sq += float((revenue**2).sum())
        opt_tot += float(optimal.sum()); opt_sq += float((optimal**2).sum())
        gap_tot += float(gap.sum()); gap_sq += float((gap**2).sum())
        count += b_size
    ratio, ratio_se = acc.result()
    rev_mean, rev_se = _mean_stderr(rev_tot, rev_sq, count)
    opt_mean, opt_se = _mean_stderr(opt_tot, opt_sq, count)
    gap_mean, gap_se = _mean_stderr(gap_tot, gap_sq, count)
    return RevenueTrialStats(ratio, ratio_se, rev_mean, rev_se, opt_mean, opt_se,
                             gap_mean, gap_se, count)
