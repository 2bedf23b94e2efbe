"""
Tests for cli module.
"""

import json
import os
from unittest.mock import MagicMock, patch

import pytest

from src import __version__
from src.cli import EXIT_INPUT_ERROR, EXIT_OK, EXIT_VIOLATIONS, main, parse_relations
from src.exceptions import UnknownRelationError
from src.linalg_core import matrix_to_dict
from src.quantum_model import SIGMA_X, SIGMA_Y
from src.relations import RELATION_IDS


@pytest.fixture
def pauli_problem(tmp_path):
    path = tmp_path / "pauli.json"
    path.write_text(
        json.dumps(
            {
                "dim": 2,
                "observables": [matrix_to_dict(SIGMA_X), matrix_to_dict(SIGMA_Y)],
                "state": {"pure": [[1, 0], [0, 0]]},
            }
        )
    )
    return path


class TestParsing:
    """Test cases for argument helpers."""

    def test_parse_relations(self):
        assert parse_relations("all") == list(RELATION_IDS)
        assert parse_relations("robertson_sup, row_sum_bound") == [
            "robertson_sup",
            "row_sum_bound",
        ]

    def test_parse_unknown_relation(self):
        with pytest.raises(UnknownRelationError):
            parse_relations("robertson_sup,nope")


class TestCommands:
    """Test cases for the subcommands and their exit codes."""

    def test_version(self, capsys):
        assert main(["version"]) == EXIT_OK
        assert __version__ in capsys.readouterr().out

    def test_demo(self, capsys):
        """Test the gram-example demo output."""
        assert main(["demo", "--case", "gram-example", "--theta", "0.0"]) == EXIT_OK
        assert "det = -0.75" in capsys.readouterr().out

    def test_unknown_demo_is_usage_error(self):
        assert main(["demo", "--case", "nope"]) == EXIT_INPUT_ERROR

    def test_missing_command(self):
        assert main([]) == EXIT_INPUT_ERROR

    def test_eval_pauli(self, pauli_problem, tmp_path, capsys):
        """Test eval on the Pauli problem writes a report with satisfied relations."""
        output = tmp_path / "report.json"
        code = main(["eval", "--input", str(pauli_problem), "--output", str(output)])
        assert code == EXIT_OK
        report = json.loads(output.read_text())
        assert report["version"] == "1"
        assert report["violations"] == 0
        robertson = report["relations"]["robertson_sup"][0]
        assert robertson["lhs"] == pytest.approx(1.0)
        assert robertson["rhs"] == pytest.approx(1.0)
        assert "robertson_sup" in capsys.readouterr().out

    def test_eval_selected_relations_to_stdout(self, pauli_problem, capsys):
        code = main(["eval", "--input", str(pauli_problem), "--relations", "frobenius_chain"])
        assert code == EXIT_OK
        assert '"frobenius_chain"' in capsys.readouterr().out

    def test_eval_input_errors(self, tmp_path):
        """Test exit code 2 for malformed input and unknown relations."""
        broken = tmp_path / "broken.json"
        broken.write_text("{")
        assert main(["eval", "--input", str(broken)]) == EXIT_INPUT_ERROR
        assert main(["eval", "--input", str(tmp_path / "missing.json")]) == EXIT_INPUT_ERROR

    def test_eval_unknown_relation(self, pauli_problem):
        args = ["eval", "--input", str(pauli_problem), "--relations", "nope"]
        assert main(args) == EXIT_INPUT_ERROR

    def test_fuzz_report_and_csv(self, tmp_path):
        """Test a small fuzz run writing both the JSON report and the CSV."""
        output = tmp_path / "report.json"
        csv = tmp_path / "tightness.csv"
        code = main(
            [
                "fuzz", "--dims", "2,3", "--num-obs", "2,3", "--trials", "10",
                "--seed", "42", "--state", "mixed-full-rank",
                "--output", str(output), "--csv", str(csv),
            ]
        )
        assert code == EXIT_OK
        report = json.loads(output.read_text())
        assert report["config"]["trials"] == 10
        assert set(report["relations"]) == set(RELATION_IDS)
        assert csv.exists()

    def test_fuzz_byte_identical_across_threads(self, tmp_path):
        """Test identical report bytes for repeated runs with different UR_THREADS."""
        paths = []
        for threads in ("1", "4"):
            path = tmp_path / f"report_{threads}.json"
            with patch.dict(os.environ, {"UR_THREADS": threads}):
                args = [
                    "fuzz", "--dims", "2,3", "--num-obs", "2,3", "--trials", "12",
                    "--seed", "42", "--relations", "robertson_sup,norm_bound",
                    "--output", str(path),
                ]
                assert main(args) == EXIT_OK
            paths.append(path)
        assert paths[0].read_bytes() == paths[1].read_bytes()

    def test_fuzz_config_file(self, tmp_path):
        """Test that --config values are used and flags override them."""
        config = tmp_path / "campaign.json"
        config.write_text(json.dumps({"dims": [2], "num_observables": [2], "trials": 50}))
        output = tmp_path / "report.json"
        code = main(["fuzz", "--config", str(config), "--trials", "3", "--output", str(output)])
        assert code == EXIT_OK
        report = json.loads(output.read_text())
        assert report["config"]["trials"] == 3
        assert report["config"]["dims"] == [2]

    def test_fuzz_invalid_config(self):
        assert main(["fuzz", "--trials", "0"]) == EXIT_INPUT_ERROR
        assert main(["fuzz", "--dims", "1,2"]) == EXIT_INPUT_ERROR
        assert main(["fuzz", "--dims", "two"]) == EXIT_INPUT_ERROR

    @patch("src.cli.run_campaign")
    def test_fuzz_violations_exit_code(self, mock_run_campaign, capsys):
        """Test exit code 1 when the campaign reports violations."""
        result = MagicMock()
        result.has_violations = True
        result.to_report.return_value = {"relations": {}, "version": "1"}
        mock_run_campaign.return_value = result

        assert main(["fuzz", "--trials", "1"]) == EXIT_VIOLATIONS
        assert '"version": "1"' in capsys.readouterr().out
