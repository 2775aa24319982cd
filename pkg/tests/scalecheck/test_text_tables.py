"""Tests for plain-text report helpers."""

from scalecheck.utils.text_tables import format_number, render_table, section


class TestFormatNumber:
    """Test suite for format_number."""

    def test_default_decimals(self):
        """Test the default number of decimals."""
        assert format_number(0.625) == "0.62500"

    def test_negative_zero(self):
        """Test negative zero."""
        assert format_number(-0.000001) == "0.00000"

    def test_missing_values(self):
        """Test missing values."""
        assert format_number(None) == "n/a"
        assert format_number(float("nan")) == "n/a"

    def test_explicit_decimals(self):
        """Test explicit decimals."""
        assert format_number(3.39411, decimals=2) == "3.39"


def test_render_table_alignment():
    """Test right-aligned numeric columns."""
    table = render_table(["Name", "Value"], [["chi-square", "14.08728"], ["df", "2"]])
    lines = table.splitlines()
    assert lines[0] == "Name           Value"
    assert lines[2] == "chi-square  14.08728"
    assert lines[3] == "df                 2"


def test_section_underlines_title():
    """Test the section underline."""
    assert section("Fit", "body") == "Fit\n===\nbody\n"


def test_render_table_left_aligns_text_columns():
    """Test that sentence columns are left-aligned while numbers stay right-aligned."""
    rows = [
        ["A->X1", "1.00000", "fixed to 1"],
        ["A->X2", "0.62500", "X2 loads on A 0.62500 as much as does X1"],
    ]
    lines = render_table(["Parameter", "Estimate", "Interpretation"], rows).splitlines()
    assert lines[0] == "Parameter  Estimate  Interpretation"
    assert lines[2] == "A->X1       1.00000  fixed to 1"
    assert lines[3] == "A->X2       0.62500  X2 loads on A 0.62500 as much as does X1"
