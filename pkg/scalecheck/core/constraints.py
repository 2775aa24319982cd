"""Linear equality constraints and their elimination by null-space substitution."""

import logging
import re
from dataclasses import dataclass, field
from typing import Dict, List, Sequence, Tuple, Union

import numpy as np
from scipy import linalg

from scalecheck.core.model_spec import (
    NAME_PATTERN,
    LatentCov,
    Loading,
    ModelSpec,
    ParameterAddress,
    ResidualCov,
)
from scalecheck.core.scalecheck_exceptions import (
    ConstraintError,
    IdentificationError,
    InconsistentConstraintError,
    ModelSpecError,
)

logger = logging.getLogger(__name__)

RANK_TOLERANCE = 1e-10

_ADDRESS = rf"({NAME_PATTERN})\s*(->|~~)\s*({NAME_PATTERN})"
_FIX_LINE = re.compile(rf"^fix\s+{_ADDRESS}\s*=\s*(\S+)$")
_EQUAL_LINE = re.compile(rf"^equal\s+{_ADDRESS}\s*,\s*{_ADDRESS}$")
_EFFECTS_LINE = re.compile(rf"^effects\s+({NAME_PATTERN})$")


@dataclass(frozen=True)
class FixValue:
    """Fix ``parameter`` to ``value``."""

    parameter: ParameterAddress
    value: float

    def __str__(self) -> str:
        return f"{self.parameter} = {self.value:g}"


@dataclass(frozen=True)
class Equal:
    """Require two parameters to be equal."""

    first: ParameterAddress
    second: ParameterAddress

    def __str__(self) -> str:
        return f"{self.first} = {self.second}"


@dataclass(frozen=True)
class LinearSum:
    """Require ``sum(coefficient * parameter) == target``."""

    terms: Tuple[Tuple[ParameterAddress, float], ...]
    target: float

    def __str__(self) -> str:
        lhs = " + ".join(f"{coefficient:g}*{address}" for address, coefficient in self.terms)
        return f"{lhs} = {self.target:g}"


Constraint = Union[FixValue, Equal, LinearSum]


def effects_coding_constraint(spec: ModelSpec, factor: str) -> LinearSum:
    """Sum of the factor's loadings equals its number of indicators (mean loading 1)."""
    indicators = spec.indicators_of(factor)
    if not indicators:
        raise ConstraintError(f"unknown factor '{factor}'")
    terms = tuple((Loading(factor, indicator), 1.0) for indicator in indicators)
    return LinearSum(terms=terms, target=float(len(indicators)))


@dataclass(frozen=True)
class ParameterIndex:
    """Map between the reduced (free) vector and the full parameter vector.

    ``full = basis @ reduced + offset`` satisfies every compiled constraint.
    """

    spec: ModelSpec
    constraints: Tuple[Constraint, ...]
    addresses: Tuple[ParameterAddress, ...]
    basis: np.ndarray
    offset: np.ndarray
    fixed_values: Dict[ParameterAddress, float] = field(default_factory=dict)

    @property
    def n_full(self) -> int:
        return len(self.addresses)

    @property
    def n_free(self) -> int:
        return self.basis.shape[1]

    def position(self, address: ParameterAddress) -> int:
        """Position of ``address`` in the full vector."""
        canonical = self.spec.canonical(address)
        try:
            return self.addresses.index(canonical)
        except ValueError:
            raise ConstraintError(f"unknown parameter '{address}'") from None

    def is_fixed(self, address: ParameterAddress) -> bool:
        """Whether the constraints determine ``address`` completely."""
        return not np.any(np.abs(self.basis[self.position(address)]) > RANK_TOLERANCE)

    def expand(self, reduced: np.ndarray) -> np.ndarray:
        """Full parameter vector for a reduced vector."""
        return self.basis @ np.asarray(reduced, dtype=float) + self.offset

    def project(self, full: np.ndarray) -> np.ndarray:
        """Reduced vector whose expansion is closest to ``full``."""
        reduced, *_ = np.linalg.lstsq(self.basis, np.asarray(full, dtype=float) - self.offset, rcond=None)
        return reduced

    def constraint_residuals(self, full: np.ndarray) -> np.ndarray:
        """``A @ full - b`` for the compiled constraint system."""
        matrix, target = _constraint_system(self.spec, self.addresses, self.constraints)
        return matrix @ np.asarray(full, dtype=float) - target

    def with_constraints(self, extra: Sequence[Constraint]) -> "ParameterIndex":
        """Compile a new index with ``extra`` added to the existing constraints."""
        return compile_constraints(self.spec, list(self.constraints) + list(extra))


def _constraint_rows(
    constraint: Constraint, positions: Dict[ParameterAddress, int], spec: ModelSpec, width: int
) -> Tuple[np.ndarray, float]:
    def locate(address: ParameterAddress) -> int:
        try:
            return positions[spec.canonical(address)]
        except (KeyError, ModelSpecError):
            raise ConstraintError(f"constraint '{constraint}' references unknown parameter '{address}'") from None

    row = np.zeros(width)
    if isinstance(constraint, FixValue):
        row[locate(constraint.parameter)] = 1.0
        return row, float(constraint.value)
    if isinstance(constraint, Equal):
        first, second = locate(constraint.first), locate(constraint.second)
        if first == second:
            raise ConstraintError(f"constraint '{constraint}' equates a parameter with itself")
        row[first] += 1.0
        row[second] -= 1.0
        return row, 0.0
    if isinstance(constraint, LinearSum):
        for address, coefficient in constraint.terms:
            row[locate(address)] += coefficient
        return row, float(constraint.target)
    raise ConstraintError(f"unsupported constraint type {type(constraint).__name__}")


def _constraint_system(
    spec: ModelSpec, addresses: Sequence[ParameterAddress], constraints: Sequence[Constraint]
) -> Tuple[np.ndarray, np.ndarray]:
    positions = {address: i for i, address in enumerate(addresses)}
    rows = [_constraint_rows(constraint, positions, spec, len(addresses)) for constraint in constraints]
    if not rows:
        return np.zeros((0, len(addresses))), np.zeros(0)
    matrix = np.vstack([row for row, _ in rows])
    target = np.array([value for _, value in rows])
    return matrix, target


def compile_constraints(spec: ModelSpec, constraints: Sequence[Constraint]) -> ParameterIndex:
    """Eliminate linear equality constraints from the parameter vector.

    Args:
        spec: Model whose parameters the constraints address
        constraints: Fix, equality and linear-sum constraints

    Returns:
        ParameterIndex with an orthonormal null-space basis

    Raises:
        ConstraintError: If a constraint references an unknown parameter
        InconsistentConstraintError: If the constraint system has no solution
    """
    addresses = spec.parameters()
    matrix, target = _constraint_system(spec, addresses, constraints)
    n_full = len(addresses)

    if matrix.shape[0] == 0:
        return ParameterIndex(
            spec=spec,
            constraints=tuple(constraints),
            addresses=addresses,
            basis=np.eye(n_full),
            offset=np.zeros(n_full),
        )

    rank = np.linalg.matrix_rank(matrix, tol=RANK_TOLERANCE)
    augmented_rank = np.linalg.matrix_rank(np.column_stack([matrix, target]), tol=RANK_TOLERANCE)
    if augmented_rank > rank:
        raise InconsistentConstraintError(
            "constraints are inconsistent: " + "; ".join(str(constraint) for constraint in constraints)
        )
    if rank < matrix.shape[0]:
        logger.warning(f"{matrix.shape[0] - rank} redundant constraint(s) ignored")

    offset, *_ = np.linalg.lstsq(matrix, target, rcond=None)
    basis = linalg.null_space(matrix, rcond=RANK_TOLERANCE)
    if basis.shape[1] != n_full - rank:
        raise ConstraintError(f"null-space basis has {basis.shape[1]} columns, expected {n_full - rank}")
    if basis.shape[1] and np.linalg.matrix_rank(basis, tol=RANK_TOLERANCE) < basis.shape[1]:
        raise ConstraintError("null-space basis is rank deficient")

    # Directly fixed parameters are pinned exactly rather than up to rounding.
    fixed_values: Dict[ParameterAddress, float] = {}
    for constraint in constraints:
        if isinstance(constraint, FixValue):
            address = spec.canonical(constraint.parameter)
            position = addresses.index(address)
            basis[position, :] = 0.0
            offset[position] = constraint.value
            fixed_values[address] = float(constraint.value)

    logger.debug(f"Compiled {len(constraints)} constraint(s): {n_full} parameters, {basis.shape[1]} free")
    return ParameterIndex(
        spec=spec,
        constraints=tuple(constraints),
        addresses=addresses,
        basis=basis,
        offset=offset,
        fixed_values=fixed_values,
    )


def degrees_of_freedom(spec: ModelSpec, index: ParameterIndex) -> int:
    """Distinct sample moments minus free parameters.

    Raises:
        IdentificationError: If the model has more free parameters than moments
    """
    df = spec.n_moments - index.n_free
    if df < 0:
        raise IdentificationError(
            f"model has {index.n_free} free parameters but only {spec.n_moments} sample moments"
        )
    return df


def _address(spec: ModelSpec, left: str, operator: str, right: str, line_number: int) -> ParameterAddress:
    if operator == "->":
        return Loading(left, right)
    if left in spec.factors and right in spec.factors:
        return LatentCov(left, right)
    if left in spec.indicators and right in spec.indicators:
        return ResidualCov(left, right)
    raise ModelSpecError(f"'{left}~~{right}' must name two factors or two indicators", line_number)


def parse_constraints(text: str, spec: ModelSpec) -> List[Constraint]:
    """Parse a constraints file.

    Lines are ``fix F->X = 1.0``, ``equal F->X, G->Y`` or ``effects F``;
    ``#`` starts a comment.

    Raises:
        ModelSpecError: On syntax errors or unknown parameters, with the line number
    """
    constraints: List[Constraint] = []
    for line_number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue

        if match := _FIX_LINE.match(line):
            try:
                value = float(match.group(4))
            except ValueError:
                raise ModelSpecError(f"invalid value '{match.group(4)}'", line_number) from None
            constraint: Constraint = FixValue(_address(spec, *match.group(1, 2, 3), line_number), value)
        elif match := _EQUAL_LINE.match(line):
            constraint = Equal(
                _address(spec, *match.group(1, 2, 3), line_number),
                _address(spec, *match.group(4, 5, 6), line_number),
            )
        elif match := _EFFECTS_LINE.match(line):
            if match.group(1) not in spec.factors:
                raise ModelSpecError(f"unknown factor '{match.group(1)}'", line_number)
            constraint = effects_coding_constraint(spec, match.group(1))
        else:
            raise ModelSpecError(f"cannot parse '{line}'", line_number)

        try:
            _constraint_system(spec, spec.parameters(), [constraint])
        except ConstraintError as e:
            raise ModelSpecError(str(e), line_number) from e
        constraints.append(constraint)
    return constraints


def tested_equality(constraints: Sequence[Constraint]) -> Equal:
    """The single equality constraint under test.

    Raises:
        ConstraintError: If ``constraints`` holds no equality or more than one
    """
    equalities = [constraint for constraint in constraints if isinstance(constraint, Equal)]
    if len(equalities) != 1:
        raise ConstraintError(f"expected exactly one 'equal' line, found {len(equalities)}")
    return equalities[0]
