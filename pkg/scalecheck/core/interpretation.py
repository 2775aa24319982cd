"""What each estimated parameter measures, and the scaling-invariant combinations.

A loading or latent (co)variance estimate is a transformation of population
quantities that depends on the scaling method. Combinations such as loading
ratios within a factor, loading times latent standard deviation, or latent
correlations come out identical under every scaling of the same model, which
makes them the natural bridge between fits.
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable, List, Optional, Tuple

import numpy as np

from scalecheck.core.estimator import ParameterEstimate
from scalecheck.core.model_spec import LatentCov, Loading, ModelSpec, ParameterAddress, ResidualCov
from scalecheck.core.scalecheck_config import ScaleCheckConfig, scalecheck_config
from scalecheck.core.scaling import ScalingKind, ScalingMethod

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class InvariantCombination:
    """A parameter combination whose estimate does not depend on the scaling.

    ``flagged`` is set when the value is undefined (division by a loading
    below the zero tolerance, or a negative latent variance) and ``value`` is NaN.
    """

    label: str
    value: float
    operands: Tuple[ParameterAddress, ...]
    flagged: bool = False


class Transformation(Enum):
    LOADING_RATIO_TO_MARKER = "loading-ratio-to-marker"
    LOADING_TIMES_FACTOR_SD = "loading-times-factor-sd"
    LOADING_RATIO_TO_AVERAGE = "loading-ratio-to-average"
    VARIANCE_TIMES_SQUARED_MARKER_LOADING = "variance-times-squared-marker-loading"
    VARIANCE_TIMES_SQUARED_AVERAGE_LOADING = "variance-times-squared-average-loading"
    COVARIANCE_TIMES_MARKER_LOADINGS = "covariance-times-marker-loadings"
    COVARIANCE_TIMES_AVERAGE_LOADINGS = "covariance-times-average-loadings"
    LATENT_CORRELATION = "latent-correlation"
    RESIDUAL_COVARIANCE = "plain-residual-(co)variance"
    FIXED_TO_ONE = "fixed-to-one"


@dataclass(frozen=True)
class InterpretationEntry:
    """Population quantity estimated by one model parameter under one scaling."""

    parameter: ParameterAddress
    transformation: Transformation
    operands: Tuple[ParameterAddress, ...]
    formula: str
    rendered_text: str


def _mean_formula(spec: ModelSpec, factor: str) -> str:
    return f"mean({factor}->{{{','.join(spec.indicators_of(factor))}}})"


def _sd(factor: str) -> str:
    return f"sqrt(Var({factor}))"


class _Combinations:
    """Collects invariant combinations from one estimate."""

    def __init__(self, estimate: ParameterEstimate, tolerance: float):
        self.estimate = estimate
        self.tolerance = tolerance
        self.items: List[InvariantCombination] = []

    def add(self, label: str, operands: Tuple[ParameterAddress, ...], compute: Callable[[], Optional[float]]) -> None:
        value = compute()
        flagged = value is None or not math.isfinite(value)
        if flagged:
            logger.warning(f"Combination {label} is undefined at this estimate")
        self.items.append(
            InvariantCombination(
                label=label,
                value=float("nan") if flagged else float(value),
                operands=operands,
                flagged=flagged,
            )
        )

    def ratio(self, numerator: float, denominator: float) -> Optional[float]:
        if abs(denominator) < self.tolerance:
            return None
        return numerator / denominator

    def sd(self, factor: str) -> Optional[float]:
        variance = self.estimate.latent(factor)
        return math.sqrt(variance) if variance >= 0.0 else None


def invariant_combinations(
    estimate: ParameterEstimate, spec: ModelSpec, config: Optional[ScaleCheckConfig] = None
) -> List[InvariantCombination]:
    """Scaling-invariant combinations of an unrestricted estimate.

    Per factor: loading ratios λj/λi, λj·sd, λj/mean(λ), Var·λi² and
    Var·mean(λ)². Per factor pair: Cov·λi·λi for every shared marker
    position, the latent correlation and Cov·mean·mean.
    """
    config = config or scalecheck_config
    combos = _Combinations(estimate, config.zero_loading_tolerance)

    def loading(factor: str, indicator: str) -> float:
        return estimate.loading(factor, indicator)

    def mean_loading(factor: str) -> float:
        return float(np.mean([loading(factor, name) for name in spec.indicators_of(factor)]))

    for factor in spec.factors:
        indicators = spec.indicators_of(factor)
        variance_address = LatentCov(factor, factor)
        loadings = tuple(Loading(factor, name) for name in indicators)
        for marker in indicators:
            for name in indicators:
                if name == marker:
                    continue
                combos.add(
                    f"{factor}->{name} / {factor}->{marker}",
                    (Loading(factor, name), Loading(factor, marker)),
                    lambda n=name, m=marker, f=factor: combos.ratio(loading(f, n), loading(f, m)),
                )
        for name in indicators:
            combos.add(
                f"{factor}->{name} * {_sd(factor)}",
                (Loading(factor, name), variance_address),
                lambda n=name, f=factor: None if combos.sd(f) is None else loading(f, n) * combos.sd(f),
            )
        for name in indicators:
            combos.add(
                f"{factor}->{name} / {_mean_formula(spec, factor)}",
                loadings,
                lambda n=name, f=factor: combos.ratio(loading(f, n), mean_loading(f)),
            )
        for name in indicators:
            combos.add(
                f"Var({factor}) * ({factor}->{name})^2",
                (variance_address, Loading(factor, name)),
                lambda n=name, f=factor: estimate.latent(f) * loading(f, n) ** 2,
            )
        combos.add(
            f"Var({factor}) * {_mean_formula(spec, factor)}^2",
            (variance_address,) + loadings,
            lambda f=factor: estimate.latent(f) * mean_loading(f) ** 2,
        )

    for i, first in enumerate(spec.factors):
        for second in spec.factors[i + 1 :]:
            covariance = LatentCov(first, second)
            first_indicators, second_indicators = spec.indicators_of(first), spec.indicators_of(second)
            for position in range(1, min(len(first_indicators), len(second_indicators)) + 1):
                a, b = first_indicators[position - 1], second_indicators[position - 1]
                combos.add(
                    f"Cov({first},{second}) * {first}->{a} * {second}->{b}",
                    (covariance, Loading(first, a), Loading(second, b)),
                    lambda f=first, g=second, x=a, y=b: estimate.latent(f, g) * loading(f, x) * loading(g, y),
                )
            combos.add(
                f"Corr({first},{second})",
                (covariance, LatentCov(first, first), LatentCov(second, second)),
                lambda f=first, g=second: (
                    None
                    if combos.sd(f) is None or combos.sd(g) is None
                    else combos.ratio(estimate.latent(f, g), combos.sd(f) * combos.sd(g))
                ),
            )
            combos.add(
                f"Cov({first},{second}) * {_mean_formula(spec, first)} * {_mean_formula(spec, second)}",
                (covariance,)
                + tuple(Loading(first, n) for n in first_indicators)
                + tuple(Loading(second, n) for n in second_indicators),
                lambda f=first, g=second: estimate.latent(f, g) * mean_loading(f) * mean_loading(g),
            )
    return combos.items


def find_combination(combinations: List[InvariantCombination], label: str) -> InvariantCombination:
    """Combination with the given label."""
    for combination in combinations:
        if combination.label == label:
            return combination
    raise KeyError(label)


def _residual_entry(address: ResidualCov) -> InterpretationEntry:
    if address.is_variance:
        return InterpretationEntry(
            parameter=address,
            transformation=Transformation.RESIDUAL_COVARIANCE,
            operands=(address,),
            formula=f"Var(E_{address.first})",
            rendered_text=f"variance of {address.first}'s residual",
        )
    return InterpretationEntry(
        parameter=address,
        transformation=Transformation.RESIDUAL_COVARIANCE,
        operands=(address,),
        formula=f"Cov(E_{address.first},E_{address.second})",
        rendered_text=f"covariance of the residuals of {address.first} and {address.second}",
    )


def _loading_entry(spec: ModelSpec, scaling: ScalingMethod, address: Loading) -> InterpretationEntry:
    factor, name = address.factor, address.indicator
    if scaling.kind is ScalingKind.FIXED_MARKER:
        marker = scaling.marker_of(factor)
        if marker == address:
            return InterpretationEntry(
                parameter=address,
                transformation=Transformation.FIXED_TO_ONE,
                operands=(address,),
                formula="1",
                rendered_text=f"fixed to 1; {name} is the marker variable of {factor}",
            )
        return InterpretationEntry(
            parameter=address,
            transformation=Transformation.LOADING_RATIO_TO_MARKER,
            operands=(address, marker),
            formula=f"({address})/({marker})",
            rendered_text=f"how much {name} loads on {factor} relative to {marker.indicator}",
        )
    if scaling.kind is ScalingKind.FIXED_FACTOR:
        return InterpretationEntry(
            parameter=address,
            transformation=Transformation.LOADING_TIMES_FACTOR_SD,
            operands=(address, LatentCov(factor, factor)),
            formula=f"({address})*{_sd(factor)}",
            rendered_text=f"product of {name}'s factor loading on {factor} and {factor}'s standard deviation",
        )
    return InterpretationEntry(
        parameter=address,
        transformation=Transformation.LOADING_RATIO_TO_AVERAGE,
        operands=(address,) + tuple(Loading(factor, n) for n in spec.indicators_of(factor)),
        formula=f"({address})/{_mean_formula(spec, factor)}",
        rendered_text=f"ratio of {name}'s factor loading on {factor} to the average loading of {factor}'s indicators",
    )


def _latent_entry(spec: ModelSpec, scaling: ScalingMethod, address: LatentCov) -> InterpretationEntry:
    first, second = address.first, address.second
    if address.is_variance:
        if scaling.kind is ScalingKind.FIXED_FACTOR:
            return InterpretationEntry(
                parameter=address,
                transformation=Transformation.FIXED_TO_ONE,
                operands=(address,),
                formula="1",
                rendered_text=f"fixed to 1 to set the scale of {first}",
            )
        if scaling.kind is ScalingKind.FIXED_MARKER:
            marker = scaling.marker_of(first)
            return InterpretationEntry(
                parameter=address,
                transformation=Transformation.VARIANCE_TIMES_SQUARED_MARKER_LOADING,
                operands=(address, marker),
                formula=f"Var({first})*({marker})^2",
                rendered_text=f"variance of {first} times the squared loading of its marker {marker.indicator}",
            )
        return InterpretationEntry(
            parameter=address,
            transformation=Transformation.VARIANCE_TIMES_SQUARED_AVERAGE_LOADING,
            operands=(address,) + tuple(Loading(first, n) for n in spec.indicators_of(first)),
            formula=f"Var({first})*{_mean_formula(spec, first)}^2",
            rendered_text=f"variance of {first} times the squared average loading of its indicators",
        )

    if scaling.kind is ScalingKind.FIXED_FACTOR:
        return InterpretationEntry(
            parameter=address,
            transformation=Transformation.LATENT_CORRELATION,
            operands=(address, LatentCov(first, first), LatentCov(second, second)),
            formula=f"Corr({first},{second})",
            rendered_text=f"correlation of {first} and {second}",
        )
    if scaling.kind is ScalingKind.FIXED_MARKER:
        first_marker, second_marker = scaling.marker_of(first), scaling.marker_of(second)
        return InterpretationEntry(
            parameter=address,
            transformation=Transformation.COVARIANCE_TIMES_MARKER_LOADINGS,
            operands=(address, first_marker, second_marker),
            formula=f"Cov({first},{second})*({first_marker})*({second_marker})",
            rendered_text=(
                f"covariance of {first} and {second} times the loadings of their markers "
                f"{first_marker.indicator} and {second_marker.indicator}"
            ),
        )
    return InterpretationEntry(
        parameter=address,
        transformation=Transformation.COVARIANCE_TIMES_AVERAGE_LOADINGS,
        operands=(address,)
        + tuple(Loading(first, n) for n in spec.indicators_of(first))
        + tuple(Loading(second, n) for n in spec.indicators_of(second)),
        formula=f"Cov({first},{second})*{_mean_formula(spec, first)}*{_mean_formula(spec, second)}",
        rendered_text=f"covariance of {first} and {second} times the average loadings of their indicators",
    )


def interpretation_report(spec: ModelSpec, scaling: ScalingMethod) -> List[InterpretationEntry]:
    """One entry per model parameter, in parameter-vector order."""
    entries: List[InterpretationEntry] = []
    for address in spec.parameters():
        if isinstance(address, Loading):
            entries.append(_loading_entry(spec, scaling, address))
        elif isinstance(address, LatentCov):
            entries.append(_latent_entry(spec, scaling, address))
        else:
            entries.append(_residual_entry(address))
    return entries


def describe_estimate(entry: InterpretationEntry, value: float, decimals: int = 5) -> str:
    """Plain-language reading of an estimated value.

    For example ``X2 loads on A 0.62500 as much as does X1``.
    """
    number = f"{value:.{decimals}f}"
    transformation = entry.transformation
    if transformation is Transformation.LOADING_RATIO_TO_MARKER:
        address, marker = entry.operands[0], entry.operands[1]
        return f"{address.indicator} loads on {address.factor} {number} as much as does {marker.indicator}"
    if transformation is Transformation.LOADING_RATIO_TO_AVERAGE:
        address = entry.operands[0]
        percent = abs(value - 1.0) * 100.0
        direction = "stronger" if value >= 1.0 else "weaker"
        return (
            f"{address.indicator} loads {percent:.3f}% {direction} on {address.factor} "
            f"than {address.factor}'s average indicator does"
        )
    if transformation is Transformation.FIXED_TO_ONE:
        return entry.rendered_text
    return f"the {entry.rendered_text} is {number}"
