"""Tests for the command-line interface."""

import json

import pytest

from scalecheck.app import EXIT_INPUT_ERROR, EXIT_NOT_CONVERGED, EXIT_OK, main
from scalecheck.commands.audit import INTERACTION_BANNER
from scalecheck.core.scalecheck_exceptions import ConvergenceError
from scalecheck.utils.text_tables import format_number


def _arguments(command, sample_data_dir, example, n, *extra):
    return [
        command,
        "--cov",
        str(sample_data_dir / f"{example}_cov.txt"),
        "--n",
        str(n),
        "--model",
        str(sample_data_dir / f"{example}_model.txt"),
        *extra,
    ]


class TestAuditCommand:
    """Test suite for ``scalecheck audit``."""

    def test_two_factor_text_report(self, sample_data_dir, capsys):
        """Test the text audit report of the two-factor example."""
        constraints = str(sample_data_dir / "example1_constraints.txt")
        code = main(_arguments("audit", sample_data_dir, "example1", 200, "--constraints", constraints))
        output = capsys.readouterr().out
        assert code == EXIT_OK
        assert INTERACTION_BANNER in output
        assert "Tested constraint: A->X2 = B->X4" in output
        assert "H0: (A->X2)*sqrt(Var(A)) = (B->X4)*sqrt(Var(B))" in output
        assert "Equivalent hypotheses: Marker 1 ≡ Effects" in output

    def test_json_matches_text(self, sample_data_dir, tmp_path, capsys):
        """Test that the JSON and text audit reports agree."""
        constraints = str(sample_data_dir / "example2_constraints.txt")
        json_path = tmp_path / "audit.json"
        common = ("--constraints", constraints)
        json_arguments = ("--format", "json", "--out", str(json_path))
        assert main(_arguments("audit", sample_data_dir, "example2", 150, *common, *json_arguments)) == EXIT_OK
        assert main(_arguments("audit", sample_data_dir, "example2", 150, *common)) == EXIT_OK
        text = capsys.readouterr().out

        report = json.loads(json_path.read_text())
        assert [record["scaling"] for record in report["records"]] == [
            "Marker 1",
            "Marker 3",
            "Marker 4",
            "Factor",
            "Effects",
        ]
        assert report["interaction_detected"] is True
        assert report["records"][2]["difference"]["delta_chi_square"] == pytest.approx(2.72338, abs=1e-2)
        for record in report["records"]:
            assert format_number(record["restricted"]["chi_square"]) in text
            assert record["decision"] in text

    def test_alpha_changes_decisions(self, sample_data_dir, tmp_path):
        """Test that --alpha changes the audit decisions."""
        constraints = str(sample_data_dir / "example2_constraints.txt")
        json_path = tmp_path / "strict.json"
        code = main(
            _arguments(
                "audit", sample_data_dir, "example2", 150,
                "--constraints", constraints, "--alpha", "0.01", "--format", "json", "--out", str(json_path),
            )
        )
        assert code == EXIT_OK
        decisions = {record["scaling"]: record["decision"] for record in json.loads(json_path.read_text())["records"]}
        assert decisions["Factor"] == "accept"
        assert decisions["Marker 1"] == "reject"

    def test_missing_equal_line(self, sample_data_dir, tmp_path, capsys):
        """Test an audit without an equal line."""
        constraints = tmp_path / "constraints.txt"
        constraints.write_text("effects A\n")
        code = main(_arguments("audit", sample_data_dir, "example1", 200, "--constraints", str(constraints)))
        assert code == EXIT_INPUT_ERROR
        assert "equal" in capsys.readouterr().err

    def test_convergence_failure_exit_code(self, sample_data_dir, monkeypatch):
        """Test the exit code of a non-converged fit."""
        def failing_fit(*args, **kwargs):
            raise ConvergenceError("stalled")

        monkeypatch.setattr("scalecheck.core.auditor.fit", failing_fit)
        constraints = str(sample_data_dir / "example1_constraints.txt")
        code = main(_arguments("audit", sample_data_dir, "example1", 200, "--constraints", constraints))
        assert code == EXIT_NOT_CONVERGED


class TestFitCommand:
    """Test suite for ``scalecheck fit``."""

    def test_default_scaling_json(self, sample_data_dir, tmp_path):
        """Test the JSON fit report under the default scaling."""
        out = tmp_path / "fit.json"
        code = main(_arguments("fit", sample_data_dir, "example1", 200, "--format", "json", "--out", str(out)))
        assert code == EXIT_OK
        report = json.loads(out.read_text())
        assert report["scaling"] == "Marker 1"
        assert report["statistics"]["df"] == 1
        assert report["statistics"]["chi_square"] == pytest.approx(0.0, abs=1e-4)
        rows = {row["parameter"]: row for row in report["parameters"]}
        assert len(rows) == 11
        assert rows["A->X1"]["fixed"] is True
        assert rows["A->X2"]["value"] == pytest.approx(0.625, abs=1e-4)
        assert rows["A->X2"]["interpretation"] == "X2 loads on A 0.62500 as much as does X1"

    def test_fixed_factor_with_tested_constraint(self, sample_data_dir, capsys):
        """Test a fixed-factor fit with the tested constraint added."""
        constraints = str(sample_data_dir / "example1_constraints.txt")
        code = main(
            _arguments(
                "fit", sample_data_dir, "example1", 200,
                "--scaling", "fixed-factor", "--constraints", constraints,
            )
        )
        output = capsys.readouterr().out
        assert code == EXIT_OK
        assert "Estimated model parameters (Factor)" in output
        assert "A~~A (fixed)" in output
        assert "0.17383" in output

    def test_dimension_mismatch(self, sample_data_dir, tmp_path, capsys):
        """Test a model whose indicators do not match the covariance."""
        model = tmp_path / "model.txt"
        model.write_text("A =~ X1 + X2 + X3\n")
        code = main(["fit", "--cov", str(sample_data_dir / "example1_cov.txt"), "--n", "200", "--model", str(model)])
        assert code == EXIT_INPUT_ERROR
        assert "dimension mismatch" in capsys.readouterr().err


class TestInterpretCommand:
    """Test suite for ``scalecheck interpret``."""

    def test_all_standard_scalings(self, sample_data_dir, tmp_path):
        """Test interpret across all standard scalings."""
        out = tmp_path / "interpret.json"
        code = main(_arguments("interpret", sample_data_dir, "example1", 200, "--format", "json", "--out", str(out)))
        assert code == EXIT_OK
        report = json.loads(out.read_text())
        assert report["scalings"] == ["Marker 1", "Marker 2", "Factor", "Effects"]
        correlation = next(row for row in report["combinations"] if row["label"] == "Corr(A,B)")
        assert correlation["values"] == pytest.approx([0.68041] * 4, abs=1e-4)
        factor = report["sections"][2]
        assert [row["parameter"] for row in factor["fixed_parameters"]] == ["A~~A", "B~~B"]

    def test_single_scaling_text(self, sample_data_dir, capsys):
        """Test interpret under one scaling."""
        code = main(_arguments("interpret", sample_data_dir, "example1", 200, "--scaling", "effects-coding"))
        output = capsys.readouterr().out
        assert code == EXIT_OK
        assert "Effects: free parameters" in output
        assert "X1 loads 23.077% stronger on A than A's average indicator does" in output
        assert "Scaling-invariant combinations" in output


class TestArgumentErrors:
    """Test suite for input validation in the CLI."""

    def test_no_command(self, capsys):
        """Test running without a command."""
        assert main([]) == EXIT_INPUT_ERROR

    def test_invalid_alpha(self, sample_data_dir):
        """Test an alpha outside (0, 1)."""
        assert main(_arguments("fit", sample_data_dir, "example1", 200, "--alpha", "1.5")) == EXIT_INPUT_ERROR

    def test_sample_size_too_small(self, sample_data_dir):
        """Test a sample size below 2."""
        assert main(_arguments("fit", sample_data_dir, "example1", 1)) == EXIT_INPUT_ERROR

    def test_unknown_format(self, sample_data_dir):
        """Test an unknown output format."""
        assert main(_arguments("fit", sample_data_dir, "example1", 200, "--format", "xml")) == EXIT_INPUT_ERROR

    def test_missing_file(self, sample_data_dir, tmp_path, capsys):
        """Test that a missing file is named."""
        model = str(sample_data_dir / "example1_model.txt")
        code = main(["fit", "--cov", str(tmp_path / "none.txt"), "--n", "200", "--model", model])
        assert code == EXIT_INPUT_ERROR
        assert "none.txt" in capsys.readouterr().err

    def test_missing_required_argument(self):
        """Test a missing required argument."""
        with pytest.raises(SystemExit):
            main(["fit", "--n", "200"])


class TestInputErrorsNameFiles:
    """Test suite for input error messages that point at the offending file."""

    def test_broken_model_file(self, sample_data_dir, tmp_path, capsys):
        """Test that a model file error names the file and the line."""
        model = tmp_path / "broken_model.txt"
        model.write_text("A =~ X1 + X2\nB =~ X3 + X4\nthis is wrong\n")
        code = main(["fit", "--cov", str(sample_data_dir / "example1_cov.txt"), "--n", "200", "--model", str(model)])
        err = capsys.readouterr().err
        assert code == EXIT_INPUT_ERROR
        assert "broken_model.txt" in err
        assert "line 3" in err

    def test_bad_constraints_file(self, sample_data_dir, tmp_path, capsys):
        """Test that a constraints file error names the file."""
        constraints = tmp_path / "bad_constraints.txt"
        constraints.write_text("equal A->X2, B->X9\n")
        code = main(_arguments("audit", sample_data_dir, "example1", 200, "--constraints", str(constraints)))
        err = capsys.readouterr().err
        assert code == EXIT_INPUT_ERROR
        assert "bad_constraints.txt" in err
        assert "line 1" in err

    def test_singular_covariance_file(self, sample_data_dir, tmp_path, capsys):
        """Test that a covariance matrix that is not positive definite names its file."""
        cov = tmp_path / "singular_cov.txt"
        cov.write_text("1\n1 1\n0 0 1\n0 0 0 1\n")
        model = str(sample_data_dir / "example1_model.txt")
        code = main(["fit", "--cov", str(cov), "--n", "200", "--model", model])
        err = capsys.readouterr().err
        assert code == EXIT_INPUT_ERROR
        assert "singular_cov.txt" in err
        assert "not positive definite" in err

    def test_two_equal_lines(self, sample_data_dir, tmp_path, capsys):
        """Test that an audit with two equal lines is rejected and names the file."""
        constraints = tmp_path / "two_equalities.txt"
        constraints.write_text("equal A->X2, B->X4\nequal A->X1, B->X3\n")
        code = main(_arguments("audit", sample_data_dir, "example1", 200, "--constraints", str(constraints)))
        err = capsys.readouterr().err
        assert code == EXIT_INPUT_ERROR
        assert "two_equalities.txt" in err
        assert "found 2" in err
