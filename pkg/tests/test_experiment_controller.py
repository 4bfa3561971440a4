"""
Bergman Toolkit - Experiment Controller Tests
Config validation, trial planning, error records, cross-trial checks and end-to-end runs
"""

import json

import pytest
from pydantic import ValidationError

from bergman_toolkit.exceptions import SubmoduleDegeneracyError
from bergman_toolkit.experiment_controller import (
    TASKS,
    ExperimentConfig,
    ExperimentRunner,
    Trial,
    run,
    run_trial,
)
from bergman_toolkit.inequalities import estimate_Cnm
from bergman_toolkit.reports import read_jsonl


@pytest.fixture
def commutator_config(tmp_path):
    """p = 1 in one variable, where the spectrum has a closed form"""
    return ExperimentConfig(
        kind="commutator",
        n=1,
        polynomials=["1"],
        B_list=[24, 20],
        q_list=[2.0, 3.0],
        kernel_points=0,
        seed=7,
        output_dir=str(tmp_path / "commutator"),
        workers=1,
    )


class TestExperimentConfig:
    """Test cases for config validation"""

    def test_defaults_filled(self):
        cfg = ExperimentConfig(kind="commutator", n=3, seed=1)
        assert cfg.q_list == [3.0, 3.5, 4.0, 6.0]
        assert cfg.seed == 1

    def test_unknown_claim(self):
        with pytest.raises(ValidationError, match="unknown claim ids"):
            ExperimentConfig(kind="verify", claims=["prop-9.9"])

    def test_zero_polynomial(self):
        with pytest.raises(ValidationError, match="polynomials\\[0\\]"):
            ExperimentConfig(kind="verify", polynomials=["z1 - z1"])

    def test_malformed_polynomial(self):
        with pytest.raises(ValidationError):
            ExperimentConfig(kind="verify", n=1, polynomials=["z2"])

    def test_unknown_field(self):
        with pytest.raises(ValidationError):
            ExperimentConfig(kind="verify", colour="blue")

    def test_cover_scales_checked(self):
        with pytest.raises(ValidationError):
            ExperimentConfig(kind="cover", r=0.5, c=0.2)

    def test_cover_needs_samples(self):
        with pytest.raises(ValidationError):
            ExperimentConfig(kind="cover", samples=0)

    def test_non_positive_exponent(self):
        with pytest.raises(ValidationError):
            ExperimentConfig(kind="commutator", q_list=[0.0])

    def test_file_round_trip(self, tmp_path):
        cfg = ExperimentConfig(kind="constants", n=1, degree=3, seed=42)
        path = cfg.to_file(tmp_path / "nested" / "config.json")
        assert ExperimentConfig.from_file(path) == cfg


class TestPlanning:
    """Test cases for trial plans"""

    def test_verify_plan_covers_claims(self):
        cfg = ExperimentConfig(kind="verify", n=1, claims=["prop-2.1", "lemma-3.6"], max_degree=2, seed=3)
        trials = ExperimentRunner(cfg).plan()
        assert [t.trial_id for t in trials] == list(range(len(trials)))
        assert {t.task for t in trials} == {"prop-2.1", "lemma-3.6"}
        assert sum(t.task == "prop-2.1" for t in trials) == 3

    def test_random_polynomials_are_seeded(self):
        cfg = ExperimentConfig(kind="commutator", n=2, degree=2, random_count=3, seed=11)
        first = ExperimentRunner(cfg).polynomial_literals()
        assert len(first) == 3
        assert first == ExperimentRunner(cfg).polynomial_literals()

    def test_literals_come_first(self):
        cfg = ExperimentConfig(kind="commutator", n=2, polynomials=["z1*z2"], random_count=1, seed=2)
        literals = ExperimentRunner(cfg).polynomial_literals()
        assert literals[0] == "z1*z2"
        assert len(literals) == 2

    def test_commutator_plan_sorted_by_truncation(self, commutator_config):
        trials = ExperimentRunner(commutator_config).plan()
        assert [t.payload["B"] for t in trials] == [20, 24]
        assert all(t.payload["pairs"] == [(1, 1)] for t in trials)

    def test_cover_plan_batches_pairs(self):
        cfg = ExperimentConfig(kind="cover", n=2, pairs=1200, samples=10, seed=1)
        tasks = [t.task for t in ExperimentRunner(cfg).plan()]
        assert tasks == ["lemma-3.4"] * 3 + ["disk-intersection", "cover"]

    def test_commutator_bound_uses_estimated_constant(self):
        cfg = ExperimentConfig(kind="verify", n=2, claims=["prop-2.4"], polynomials=["z1*z2"], trials=4, seed=6)
        trials = ExperimentRunner(cfg).plan()
        assert len(trials) == 2
        payload = trials[0].payload
        estimate, _ = estimate_Cnm(2, 2, 4, cfg.k_max, payload["constant_seed"])
        assert payload["m"] == 2
        assert payload["constant"] == max(estimate.constant, 1.0)
        assert all(t.payload["constant"] == payload["constant"] for t in trials)

    def test_constants_plan_has_two_seed_batches(self):
        cfg = ExperimentConfig(kind="constants", n=1, degree=2, trials=5, seed=4)
        trials = ExperimentRunner(cfg).plan()
        assert len(trials) == 2
        assert trials[0].payload["seed"] != trials[1].payload["seed"]


class TestTrials:
    """Test cases for single trials and their failure records"""

    def test_records_carry_trial_id(self):
        records = run_trial(Trial(4, "lemma-3.6", {"l_max": 3}))
        assert len(records) == 3
        assert all(r["trial_id"] == 4 and r["passed"] for r in records)

    def test_failure_becomes_error_record(self):
        records = run_trial(Trial(2, "prop-2.1", {}))
        assert len(records) == 1
        assert records[0]["trial_id"] == 2
        assert not records[0]["passed"]
        assert "degenerate" not in records[0]

    def test_commutator_bound_reaches_geometric_regime(self):
        """n = 3 and an estimated constant of 1.2 satisfy n + l >= 2C with l = 0"""
        payload = {"n": 3, "p": "z1", "f": "1", "k_max": 2, "constant": 1.2, "m": 1, "constant_seed": 0}
        records = run_trial(Trial(0, "prop-2.4", payload))
        series = records[-1]
        assert series["claim_id"] == "prop-2.4-series"
        assert series["parameters"]["constant"] == 1.2
        assert series["details"]["geometric_regime"]
        assert all(r["parameters"]["constant"] == 1.2 for r in records)

    def test_degeneracy_is_flagged(self, mocker):
        def degenerate(payload):
            raise SubmoduleDegeneracyError("pivot ratio below threshold", 1e-20, 1.0)

        mocker.patch.dict(TASKS, {"spectrum": degenerate})
        records = run_trial(Trial(0, "spectrum", {}))
        assert records[0]["degenerate"]
        assert records[0]["error"] == "pivot ratio below threshold"

    def test_runner_reports_error_exit(self, mocker, commutator_config):
        mocker.patch.dict(TASKS, {"spectrum": lambda payload: 1 / 0})
        assert run(commutator_config) == 1
        records = read_jsonl(commutator_config.output_dir + "/reports.jsonl")
        assert all("error" in r for r in records)


class TestCrossTrialChecks:
    """Test cases for decay and stability records"""

    @staticmethod
    def _estimates(a, b):
        return [
            {"claim_id": "constant-estimate", "constant": a, "passed": True},
            {"claim_id": "constant-estimate", "constant": b, "passed": True},
        ]

    def test_stable_constants(self):
        runner = ExperimentRunner(ExperimentConfig(kind="constants", n=1, seed=1))
        record = runner.post_process(self._estimates(2.0, 2.1))[0]
        assert record["claim_id"] == "constant-stability"
        assert record["passed"]
        assert record["constant"] == 2.1

    def test_unstable_constants(self):
        runner = ExperimentRunner(ExperimentConfig(kind="constants", n=1, seed=1))
        record = runner.post_process(self._estimates(2.0, 3.0))[0]
        assert not record["passed"]
        assert not record["details"]["stable"]

    def test_stability_can_be_advisory(self):
        cfg = ExperimentConfig(kind="constants", n=1, seed=1, require_stability=False)
        record = ExperimentRunner(cfg).post_process(self._estimates(2.0, 3.0))[0]
        assert record["passed"]

    def test_verify_has_no_cross_trial_records(self):
        runner = ExperimentRunner(ExperimentConfig(kind="verify", seed=1))
        assert runner.post_process(self._estimates(1.0, 1.0)) == []


class TestEndToEnd:
    """Test cases for complete runs with files written to a temporary directory"""

    def test_verify_run(self, tmp_path):
        out = tmp_path / "verify"
        cfg = ExperimentConfig(kind="verify", n=2, claims=["prop-2.1"], max_degree=2, seed=1, output_dir=str(out))
        assert run(cfg) == 0
        records = read_jsonl(out / "reports.jsonl")
        assert len(records) == 6 * 6 * 2
        assert (out / "summary.csv").exists()
        assert ExperimentConfig.from_file(out / "config.json") == cfg

    def test_commutator_run(self, commutator_config):
        assert run(commutator_config) == 0
        out = commutator_config.output_dir
        records = read_jsonl(out + "/reports.jsonl")
        spectra = [r for r in records if r["claim_id"] == "commutator-spectrum"]
        decay = [r for r in records if r["claim_id"] == "commutator-decay"]
        assert [r["parameters"]["B"] for r in spectra] == [20, 24]
        assert all(r["details"]["oracle_error"] <= 1e-12 for r in spectra)
        assert len(decay) == 1 and decay[0]["details"]["non_stabilizing"] == []

    def test_spectra_exported(self, commutator_config, tmp_path):
        run(commutator_config)
        spectrum_file = tmp_path / "commutator" / "spectra" / "p0_B20_11.csv"
        assert spectrum_file.read_text().splitlines()[0] == "index,value,contaminated"

    def test_cover_run(self, tmp_path):
        out = tmp_path / "cover"
        cfg = ExperimentConfig(
            kind="cover", n=1, samples=200, pairs=40, probes=100, probe_pairs=5, seed=3, output_dir=str(out)
        )
        assert run(cfg) == 0
        claims = {r["claim_id"] for r in read_jsonl(out / "reports.jsonl")}
        assert claims == {"lemma-3.4", "box-intersection-disk", "prop-3.5"}
        diagnostics = json.loads((out / "cover.json").read_text())
        assert diagnostics["disjoint"]

    def test_parallel_matches_serial(self, tmp_path):
        def records_for(workers):
            out = tmp_path / f"w{workers}"
            cfg = ExperimentConfig(
                kind="verify", n=1, claims=["lemma-3.6", "slice-formula"], max_degree=2, t_max=1,
                seed=5, workers=workers, output_dir=str(out),
            )
            run(cfg)
            return (out / "reports.jsonl").read_text()

        assert records_for(1) == records_for(2)
