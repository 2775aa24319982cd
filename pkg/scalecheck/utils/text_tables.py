"""Aligned plain-text tables for CLI reports."""

import math
from typing import List, Optional, Sequence

from scalecheck.core.scalecheck_config import scalecheck_config


def format_number(value: Optional[float], decimals: Optional[int] = None) -> str:
    """Fixed-point with the configured number of decimals; ``-0.00000`` prints as ``0.00000``."""
    if value is None or (isinstance(value, float) and math.isnan(value)):
        return "n/a"
    decimals = scalecheck_config.display_decimals if decimals is None else decimals
    text = f"{value:.{decimals}f}"
    if text.startswith("-") and float(text) == 0.0:
        text = text[1:]
    return text


def _is_number(cell: str) -> bool:
    token = cell.split(" ", 1)[0]
    try:
        float(token)
    except ValueError:
        return token == "n/a"
    return True


def render_table(headers: Sequence[str], rows: Sequence[Sequence[str]]) -> str:
    """Right-align columns holding numbers; left-align the first column and text columns."""
    widths = [len(header) for header in headers]
    for row in rows:
        for i, cell in enumerate(row):
            widths[i] = max(widths[i], len(cell))
    numeric = [i > 0 and any(_is_number(row[i]) for row in rows) for i in range(len(headers))]

    def line(cells: Sequence[str]) -> str:
        parts: List[str] = []
        for i, cell in enumerate(cells):
            parts.append(cell.rjust(widths[i]) if numeric[i] else cell.ljust(widths[i]))
        return "  ".join(parts).rstrip()

    separator = "  ".join("-" * width for width in widths)
    return "\n".join([line(headers), separator] + [line(row) for row in rows])


def section(title: str, body: str) -> str:
    return f"{title}\n{'=' * len(title)}\n{body}\n"
