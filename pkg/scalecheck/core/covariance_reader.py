"""Module for reading covariance matrices and text inputs from files."""

import re
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

import numpy as np

from scalecheck.core.scalecheck_exceptions import CovarianceInputError, ScaleCheckInputError
from scalecheck.utils.logging_decorators import log_file_loading

ASYMMETRY_TOLERANCE = 1e-10
_SEPARATOR = re.compile(r"[,\s]+")


def _is_number(token: str) -> bool:
    try:
        float(token)
    except ValueError:
        return False
    return True


@log_file_loading
def read_text_file(file_path: str | Path) -> str:
    """Read a UTF-8 model or constraints file."""
    try:
        with open(file_path, "r", encoding="utf-8") as file:
            return file.read()
    except (OSError, UnicodeDecodeError) as e:
        raise ScaleCheckInputError(f"{file_path}: cannot read file ({e})") from e


def parse_covariance_text(
    text: str, indicators: Optional[Sequence[str]] = None, source: Optional[str] = None
) -> Tuple[np.ndarray, List[str]]:
    """Parse a full or lower-triangular covariance matrix.

    Values are separated by commas and/or whitespace. An optional first row of
    names gives the indicator order, which must match ``indicators``.

    Returns:
        Tuple of (symmetric matrix, indicator names)

    Raises:
        CovarianceInputError: On malformed, asymmetric or mismatched input
    """
    rows: List[List[str]] = []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if line:
            rows.append([token for token in _SEPARATOR.split(line) if token])
    if not rows:
        raise CovarianceInputError("no matrix rows found", source)

    header: Optional[List[str]] = None
    if not all(_is_number(token) for token in rows[0]):
        header, rows = rows[0], rows[1:]

    p = len(rows)
    if p == 0:
        raise CovarianceInputError("header without matrix rows", source)
    try:
        values = [[float(token) for token in row] for row in rows]
    except ValueError as e:
        raise CovarianceInputError(f"non-numeric entry ({e})", source) from e

    matrix = np.zeros((p, p))
    if all(len(row) == i + 1 for i, row in enumerate(values)):
        for i, row in enumerate(values):
            matrix[i, : i + 1] = row
        matrix = matrix + np.tril(matrix, -1).T
    elif all(len(row) == p for row in values):
        matrix = np.array(values)
        scale = max(float(np.max(np.abs(matrix))), 1.0)
        if np.max(np.abs(matrix - matrix.T)) > ASYMMETRY_TOLERANCE * scale:
            raise CovarianceInputError("matrix is not symmetric", source)
        matrix = (matrix + matrix.T) / 2.0
    else:
        raise CovarianceInputError("rows must form a full square or a lower triangle", source)

    if header is not None and len(header) != p:
        raise CovarianceInputError(f"header names {len(header)} variables but matrix has {p} rows", source)

    names = list(header) if header is not None else list(indicators or [f"V{i + 1}" for i in range(p)])
    if indicators is not None:
        if len(indicators) != p:
            raise CovarianceInputError(
                f"dimension mismatch: matrix is {p}x{p} but the model has {len(indicators)} indicators",
                source,
            )
        if header is not None and list(header) != list(indicators):
            raise CovarianceInputError(
                f"header order {header} does not match model indicators {list(indicators)}", source
            )
    return matrix, names


@log_file_loading
def read_covariance_file(
    file_path: str | Path, indicators: Optional[Sequence[str]] = None
) -> Tuple[np.ndarray, List[str]]:
    """Read a covariance matrix file; see :func:`parse_covariance_text`."""
    try:
        text = Path(file_path).read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as e:
        raise CovarianceInputError(f"cannot read file ({e})", str(file_path)) from e
    return parse_covariance_text(text, indicators, source=str(file_path))
