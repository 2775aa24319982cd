"""Latent scaling methods and their compilation to parameter constraints."""

import itertools
import logging
from dataclasses import dataclass
from enum import Enum
from typing import List, Optional, Sequence, Tuple

from scalecheck.core.constraints import Constraint, Equal, FixValue, effects_coding_constraint
from scalecheck.core.model_spec import LatentCov, Loading, ModelSpec
from scalecheck.core.scalecheck_config import ScaleCheckConfig, scalecheck_config
from scalecheck.core.scalecheck_exceptions import ConstraintError

logger = logging.getLogger(__name__)


class ScalingKind(Enum):
    FIXED_MARKER = "fixed-marker"
    FIXED_FACTOR = "fixed-factor"
    EFFECTS_CODING = "effects-coding"


@dataclass(frozen=True)
class ScalingMethod:
    """One identification convention for all factors of a model.

    ``markers`` holds one loading per factor for fixed-marker scaling and is
    empty otherwise.
    """

    kind: ScalingKind
    markers: Tuple[Loading, ...] = ()

    @classmethod
    def fixed_factor(cls) -> "ScalingMethod":
        return cls(ScalingKind.FIXED_FACTOR)

    @classmethod
    def effects_coding(cls) -> "ScalingMethod":
        return cls(ScalingKind.EFFECTS_CODING)

    @classmethod
    def marker_position(cls, spec: ModelSpec, position: int) -> "ScalingMethod":
        """Fixed marker using the ``position``-th indicator (1-based) of every factor."""
        markers = []
        for factor in spec.factors:
            indicators = spec.indicators_of(factor)
            if not 1 <= position <= len(indicators):
                raise ConstraintError(f"factor '{factor}' has no indicator at position {position}")
            markers.append(Loading(factor, indicators[position - 1]))
        return cls(ScalingKind.FIXED_MARKER, tuple(markers))

    @classmethod
    def marker_indicators(cls, spec: ModelSpec, indicators: Sequence[str]) -> "ScalingMethod":
        """Fixed marker from explicitly named marker indicators, one per factor."""
        markers = []
        for name in indicators:
            if name not in spec.indicators:
                raise ConstraintError(f"unknown marker indicator '{name}'")
            markers.append(Loading(spec.factor_of(name), name))
        markers.sort(key=lambda loading: spec.factors.index(loading.factor))
        return cls(ScalingKind.FIXED_MARKER, tuple(markers))

    @property
    def is_marker(self) -> bool:
        return self.kind is ScalingKind.FIXED_MARKER

    def marker_of(self, factor: str) -> Loading:
        for marker in self.markers:
            if marker.factor == factor:
                return marker
        raise ConstraintError(f"no marker chosen for factor '{factor}'")

    def common_position(self, spec: ModelSpec) -> Optional[int]:
        """Shared within-factor marker position, or None for mixed markers."""
        positions = {spec.position_of(marker) for marker in self.markers}
        return positions.pop() if len(positions) == 1 else None

    def label(self, spec: ModelSpec) -> str:
        """Short column label: ``Marker 1``, ``Marker(X1,X7)``, ``Factor`` or ``Effects``."""
        if self.kind is ScalingKind.FIXED_FACTOR:
            return "Factor"
        if self.kind is ScalingKind.EFFECTS_CODING:
            return "Effects"
        position = self.common_position(spec)
        if position is not None:
            return f"Marker {position}"
        return f"Marker({','.join(marker.indicator for marker in self.markers)})"

    def cli_name(self, spec: ModelSpec) -> str:
        if not self.is_marker:
            return self.kind.value
        position = self.common_position(spec)
        if position is not None:
            return f"{self.kind.value}:{position}"
        return f"{self.kind.value}:{','.join(marker.indicator for marker in self.markers)}"


def parse_scaling(name: str, spec: ModelSpec) -> ScalingMethod:
    """Parse ``fixed-marker[:position|:X1,X3]``, ``fixed-factor`` or ``effects-coding``.

    Raises:
        ConstraintError: On unknown names or invalid marker choices
    """
    kind_name, _, argument = name.strip().partition(":")
    try:
        kind = ScalingKind(kind_name)
    except ValueError:
        choices = ", ".join(kind.value for kind in ScalingKind)
        raise ConstraintError(f"unknown scaling '{name}' (choose from {choices})") from None

    if kind is ScalingKind.FIXED_FACTOR:
        return ScalingMethod.fixed_factor()
    if kind is ScalingKind.EFFECTS_CODING:
        return ScalingMethod.effects_coding()
    if not argument:
        return ScalingMethod.marker_position(spec, 1)
    if argument.isdigit():
        return ScalingMethod.marker_position(spec, int(argument))
    return ScalingMethod.marker_indicators(spec, [item.strip() for item in argument.split(",")])


def scaling_constraints(spec: ModelSpec, method: ScalingMethod) -> List[Constraint]:
    """Constraints that set the scale of every factor.

    Raises:
        ConstraintError: If a marker does not belong to its factor or a factor
            has no or several markers
    """
    if method.kind is ScalingKind.FIXED_FACTOR:
        return [FixValue(LatentCov(factor, factor), 1.0) for factor in spec.factors]
    if method.kind is ScalingKind.EFFECTS_CODING:
        return [effects_coding_constraint(spec, factor) for factor in spec.factors]

    for marker in method.markers:
        if marker.factor not in spec.factors or marker.indicator not in spec.indicators_of(marker.factor):
            raise ConstraintError(f"marker '{marker.indicator}' is not an indicator of '{marker.factor}'")
    chosen = [marker.factor for marker in method.markers]
    for factor in spec.factors:
        if chosen.count(factor) != 1:
            raise ConstraintError(f"factor '{factor}' needs exactly one marker, got {chosen.count(factor)}")
    return [FixValue(marker, 1.0) for marker in method.markers]


def tested_loadings(spec: ModelSpec, tested: Constraint) -> Tuple[Loading, Loading]:
    """Loadings equated by a tested constraint.

    Raises:
        ConstraintError: If ``tested`` is not an equality of two model loadings
    """
    if not isinstance(tested, Equal):
        raise ConstraintError(f"tested constraint must be an equality, got '{tested}'")
    if not isinstance(tested.first, Loading) or not isinstance(tested.second, Loading):
        raise ConstraintError(f"tested constraint '{tested}' must equate two loadings")
    for loading in (tested.first, tested.second):
        if loading not in spec.loadings:
            raise ConstraintError(f"'{loading}' is not a loading of this model")
    return tested.first, tested.second


def enumerate_scalings(
    spec: ModelSpec, tested: Constraint, config: Optional[ScaleCheckConfig] = None
) -> List[ScalingMethod]:
    """All scalings under which ``tested`` is audited.

    Fixed-marker scalings use the same within-factor position in every factor
    and skip positions holding a tested loading; fixed factor and effects
    coding follow. With ``allow_mixed_markers`` every per-factor combination
    of non-tested markers is used instead.

    Raises:
        ConstraintError: If ``tested`` does not equate two loadings
    """
    config = config or scalecheck_config
    first, second = tested_loadings(spec, tested)
    excluded_loadings = {first, second}

    markers: List[ScalingMethod] = []
    if config.allow_mixed_markers:
        choices = [
            [
                Loading(factor, name)
                for name in spec.indicators_of(factor)
                if Loading(factor, name) not in excluded_loadings
            ]
            for factor in spec.factors
        ]
        markers = [
            ScalingMethod(ScalingKind.FIXED_MARKER, tuple(combination)) for combination in itertools.product(*choices)
        ]
    else:
        excluded_positions = {spec.position_of(first), spec.position_of(second)}
        shared = min(len(spec.indicators_of(factor)) for factor in spec.factors)
        markers = [
            ScalingMethod.marker_position(spec, position)
            for position in range(1, shared + 1)
            if position not in excluded_positions
        ]

    scalings = markers + [ScalingMethod.fixed_factor(), ScalingMethod.effects_coding()]
    logger.debug(f"Enumerated scalings: {', '.join(method.label(spec) for method in scalings)}")
    return scalings


def standard_scalings(spec: ModelSpec) -> List[ScalingMethod]:
    """Same-position markers for every position shared by all factors, then fixed factor and effects coding."""
    shared = min(len(spec.indicators_of(factor)) for factor in spec.factors)
    markers = [ScalingMethod.marker_position(spec, position) for position in range(1, shared + 1)]
    return markers + [ScalingMethod.fixed_factor(), ScalingMethod.effects_coding()]
