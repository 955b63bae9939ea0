import json
import math

import numpy as np
import pytest

from overbook.cli import main
from overbook.harness import (
    CSV_COLUMNS,
    ExperimentReport,
    ExperimentSpec,
    InvalidSpecError,
    emit_report,
    hard_instance_bound,
    load_config,
    max_selector_bound,
    run_experiment,
    run_experiments,
    secretary_bound,
    secretary_upper_bound,
    tau_selector_bound,
)
from overbook.seeding import BATCH_SIZE, derive_seed, trial_rng

UNIFORM = {"kind": "uniform-interval", "params": {"lo": 0.0, "hi": 1.0}}


class TestSeeding:
    def test_deterministic(self):
        assert derive_seed(7, 3).generate_state(4).tolist() == \
            derive_seed(7, 3).generate_state(4).tolist()

    def test_distinct_across_batches_and_masters(self):
        seeds = {tuple(derive_seed(m, b).generate_state(4))
                 for m in range(4) for b in range(16)}
        assert len(seeds) == 64

    def test_schedule_independence(self):
        # batch streams never depend on how many batches run before them
        a = trial_rng(9, 5).random(4)
        b = trial_rng(9, 5).random(4)
        assert np.array_equal(a, b)

    def test_batch_size_constant(self):
        assert BATCH_SIZE == 20_000


class TestExperimentSpec:
    def test_rejects_k_below_ell(self):
        spec = ExperimentSpec(kind="prophet-max", n=4, ell=3, k=2,
                              trials=10, master_seed=1)
        with pytest.raises(InvalidSpecError, match="k:"):
            spec.validate()

    def test_rejects_unknown_kind(self):
        spec = ExperimentSpec(kind="nope", n=4, ell=1, k=2, trials=10, master_seed=1)
        with pytest.raises(InvalidSpecError, match="kind:"):
            spec.validate()

    def test_rejects_bad_tau(self):
        spec = ExperimentSpec(kind="prophet-tau", n=4, ell=1, k=2,
                              trials=10, master_seed=1, tau=5)
        with pytest.raises(InvalidSpecError, match="tau:"):
            spec.validate()

    def test_json_round_trip(self):
        spec = ExperimentSpec(kind="prophet-max", n=4, ell=1, k=2, trials=10,
                              master_seed=1, distribution={"iid": UNIFORM})
        assert ExperimentSpec.from_json(json.loads(json.dumps(spec.to_json()))) == spec


class TestBounds:
    def test_tau_bound_formula(self):
        ell, k, tau = 2, 200, 101
        expect = 1 - 4 * ell * math.exp(-min(k - tau, tau - ell) ** 2 / (8 * k))
        assert tau_selector_bound(ell, k, tau) == pytest.approx(expect)

    def test_max_bound_formula(self):
        assert max_selector_bound(12) == pytest.approx(1 - 1.5 * math.exp(-2))
        assert max_selector_bound(13, atoms_variant=True) == pytest.approx(
            1 - 1.5 * math.exp(-2))

    def test_secretary_bound_formula(self):
        s = (40 - 16) / (2 + 2 * math.log(2))
        assert secretary_bound(2, 40) == pytest.approx(
            1 - 2 * math.exp(-s) - math.exp(-40 / 6))

    def test_hard_instance_bound(self):
        assert hard_instance_bound(1) == pytest.approx(1 - 1 / 24)

    def test_secretary_upper_bound(self):
        assert secretary_upper_bound(10, 2) == pytest.approx(
            1.1 * (1 - math.exp(-2.0)))


class TestRunExperiment:
    def test_hard_instance_k1_exact(self):
        spec = ExperimentSpec(kind="hard-instance-dp", n=2, ell=1, k=1,
                              trials=1, master_seed=0)
        report = run_experiment(spec)
        assert report.ratio_estimate == pytest.approx(0.9, abs=1e-12)
        assert report.stderr == 0.0
        assert report.passed

    def test_secretary_small_k_vacuous(self):
        spec = ExperimentSpec(kind="secretary", n=50, ell=2, k=4,
                              trials=200, master_seed=3,
                              values={"kind": "geometric", "n": 50, "ratio": 2.0})
        report = run_experiment(spec)
        assert report.vacuous and report.passed

    def test_parallel_matches_serial(self):
        specs = [
            ExperimentSpec(kind="hard-instance-dp", n=k + 1, ell=k, k=k,
                           trials=1, master_seed=0)
            for k in (1, 2, 3)
        ]
        serial = run_experiments(specs, jobs=1)
        parallel = run_experiments(specs, jobs=3)
        assert [r.ratio_estimate for r in serial] == [r.ratio_estimate for r in parallel]

    def test_mc_experiment_reproducible(self):
        spec = ExperimentSpec(kind="prophet-max", n=20, ell=1, k=5,
                              trials=3000, master_seed=42,
                              distribution={"iid": UNIFORM})
        r1, r2 = run_experiment(spec), run_experiment(spec)
        assert r1.ratio_estimate == r2.ratio_estimate
        assert r1.stderr == r2.stderr


class TestEmitReport:
    def _report(self):
        spec = ExperimentSpec(kind="hard-instance-dp", n=2, ell=1, k=1,
                              trials=1, master_seed=0)
        return run_experiment(spec)

    def test_csv_header_and_row(self, tmp_path):
        path = tmp_path / "out.csv"
        emit_report([self._report()], "csv", str(path))
        lines = path.read_text().strip().splitlines()
        assert lines[0] == ",".join(CSV_COLUMNS)
        assert lines[1].split(",")[0] == "hard-instance-dp"
        assert lines[1].endswith("true")

    def test_empty_csv_is_header_only(self, tmp_path):
        path = tmp_path / "empty.csv"
        emit_report([], "csv", str(path))
        assert path.read_text().strip() == ",".join(CSV_COLUMNS)

    def test_json_round_trip(self, tmp_path):
        path = tmp_path / "out.json"
        report = self._report()
        emit_report([report], "json", str(path))
        loaded = [ExperimentReport.from_json(o) for o in json.loads(path.read_text())]
        assert loaded[0].spec == report.spec
        assert loaded[0].ratio_estimate == report.ratio_estimate
        assert loaded[0].passed == report.passed

    def test_bad_format(self, tmp_path):
        with pytest.raises(ValueError):
            emit_report([], "xml", str(tmp_path / "x"))


class TestCli:
    def _write_config(self, tmp_path, trials=2000):
        cfg = {
            "experiments": [
                {"kind": "hard-instance-dp", "n": 2, "ell": 1, "k": 1,
                 "trials": 1, "master_seed": 0},
                {"kind": "prophet-max", "n": 10, "ell": 1, "k": 4,
                 "trials": trials, "master_seed": 11,
                 "distribution": {"iid": UNIFORM}},
            ]
        }
        path = tmp_path / "config.json"
        path.write_text(json.dumps(cfg))
        return str(path)

    def test_run_exit_zero_and_csv(self, tmp_path, capsys):
        cfg = self._write_config(tmp_path)
        out = tmp_path / "report.csv"
        code = main(["run", "--config", cfg, "--out", str(out), "--format", "csv"])
        printed = capsys.readouterr().out
        assert code == 0
        assert printed.count("[PASS]") == 2
        assert out.read_text().startswith(",".join(CSV_COLUMNS))

    def test_run_byte_identical_across_invocations(self, tmp_path, capsys):
        cfg = self._write_config(tmp_path)
        out1, out2 = tmp_path / "r1.csv", tmp_path / "r2.csv"
        main(["run", "--config", cfg, "--out", str(out1), "--jobs", "1"])
        main(["run", "--config", cfg, "--out", str(out2), "--jobs", "2"])
        capsys.readouterr()
        assert out1.read_bytes() == out2.read_bytes()

    def test_run_seed_override_changes_estimate(self, tmp_path, capsys):
        cfg = self._write_config(tmp_path)
        o1, o2 = tmp_path / "a.json", tmp_path / "b.json"
        main(["run", "--config", cfg, "--out", str(o1), "--format", "json",
              "--seed", "101"])
        main(["run", "--config", cfg, "--out", str(o2), "--format", "json",
              "--seed", "202"])
        capsys.readouterr()
        r1 = json.loads(o1.read_text())
        r2 = json.loads(o2.read_text())
        assert r1[1]["ratio_estimate"] != r2[1]["ratio_estimate"]
        assert r1[0]["ratio_estimate"] == r2[0]["ratio_estimate"]  # exact oracle

    def test_oracle_dp_subcommand(self, tmp_path, capsys):
        from overbook.distributions import hard_prophet_instance
        inst = hard_prophet_instance(1, 2)
        path = tmp_path / "instance.json"
        path.write_text(json.dumps(
            {"components": inst.to_json(), "ell": 1, "k": 1}))
        code = main(["oracle", "dp", "--instance", str(path)])
        out = json.loads(capsys.readouterr().out)
        assert code == 0
        assert out["expected_value"] == pytest.approx(1.5, abs=1e-12)

    def test_mechanism_simulate_subcommand(self, tmp_path, capsys):
        path = tmp_path / "mech.json"
        path.write_text(json.dumps({
            "ell": 1, "k": 2, "threshold": 3.0, "values": [6, 2, 4, 9],
        }))
        code = main(["mechanism", "simulate", "--config", str(path)])
        out = json.loads(capsys.readouterr().out)
        assert code == 0
        assert out["winners"] == [0] and out["payments"] == {"0": 4.0}

    def test_load_config_list_form(self, tmp_path):
        path = tmp_path / "list.json"
        path.write_text(json.dumps([
            {"kind": "hard-instance-dp", "n": 2, "ell": 1, "k": 1,
             "trials": 1, "master_seed": 0},
        ]))
        specs = load_config(str(path))
        assert len(specs) == 1 and specs[0].kind == "hard-instance-dp"
