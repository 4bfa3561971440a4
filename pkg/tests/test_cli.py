"""
Bergman Toolkit - Command Line Tests
Argument layering, exit codes and the report subcommand
"""

import pytest

from bergman_toolkit.cli import build_parser, load_config, main
from bergman_toolkit.experiment_controller import ExperimentConfig
from bergman_toolkit.reports import VerificationReport, read_jsonl, write_jsonl


@pytest.fixture
def commutator_file(tmp_path):
    cfg = ExperimentConfig(
        kind="commutator",
        n=1,
        polynomials=["1"],
        B_list=[12, 16],
        q_list=[2.0],
        kernel_points=0,
        seed=1,
        output_dir=str(tmp_path / "from-file"),
    )
    return cfg.to_file(tmp_path / "commutator.json")


class TestArguments:
    """Test cases for parsing and config layering"""

    def test_flags_override_file(self, commutator_file, tmp_path):
        args = build_parser().parse_args(
            ["commutator", "--config", str(commutator_file), "--seed", "9", "--out", str(tmp_path / "x")]
        )
        cfg = load_config(args)
        assert cfg.seed == 9
        assert cfg.output_dir == str(tmp_path / "x")
        assert cfg.B_list == [12, 16]

    def test_repeatable_polynomials(self):
        args = build_parser().parse_args(["verify", "--n", "2", "--poly", "z1", "--poly", "z1*z2 - 1/2"])
        cfg = load_config(args)
        assert cfg.kind == "verify"
        assert cfg.polynomials == ["z1", "z1*z2 - 1/2"]

    def test_claims_and_truncations(self):
        parser = build_parser()
        assert load_config(parser.parse_args(["verify", "--claims", "lemma-3.6", "prop-2.1"])).claims == [
            "lemma-3.6",
            "prop-2.1",
        ]
        assert load_config(parser.parse_args(["commutator", "--B", "4", "8"])).B_list == [4, 8]

    def test_subcommand_required(self):
        with pytest.raises(SystemExit):
            build_parser().parse_args([])


class TestExitCodes:
    """Test cases for main()"""

    def test_verify_passes(self, tmp_path):
        out = tmp_path / "verify"
        code = main(["--log-level", "WARNING", "verify", "--n", "1", "--claims", "lemma-3.6", "--out", str(out)])
        assert code == 0
        assert (out / "reports.jsonl").exists()

    def test_config_file_run(self, commutator_file, tmp_path):
        assert main(["commutator", "--config", str(commutator_file)]) == 0
        assert (tmp_path / "from-file" / "summary.csv").exists()

    def test_invalid_config(self, capsys, tmp_path):
        code = main(["cover", "--samples", "0", "--out", str(tmp_path)])
        assert code == 2
        assert "invalid config: samples" in capsys.readouterr().err

    def test_missing_config_file(self, tmp_path):
        assert main(["constants", "--config", str(tmp_path / "absent.json")]) == 2


class TestReportCommand:
    """Test cases for re-summarizing an existing reports file"""

    def test_summary_printed(self, tmp_path, capsys):
        path = write_jsonl(
            [
                VerificationReport.build("lemma-3.1", 1.0, 2.0, True, ratio=0.5, scalar_kind="float"),
                VerificationReport.build("lemma-3.1", 1.0, 4.0, True, ratio=0.25, scalar_kind="float"),
            ],
            tmp_path / "reports.jsonl",
        )
        assert main(["report", str(path)]) == 0
        assert "lemma-3.1" in capsys.readouterr().out
        assert (tmp_path / "summary.csv").exists()

    def test_failures_exit_nonzero(self, tmp_path):
        path = write_jsonl([{"trial_id": 0, "error": "boom", "passed": False}], tmp_path / "reports.jsonl")
        assert main(["report", str(path), "--out", str(tmp_path / "s.csv")]) == 1
        assert len(read_jsonl(path)) == 1

    def test_missing_reports_file(self, tmp_path):
        assert main(["report", str(tmp_path / "nope.jsonl")]) == 2
