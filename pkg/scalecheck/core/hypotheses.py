"""Null hypotheses actually tested by a loading equality under each scaling."""

import itertools
import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from scalecheck.core.constraints import Constraint, Equal
from scalecheck.core.estimator import ParameterEstimate, SampleMoments, ml_discrepancy, model_implied_covariance
from scalecheck.core.model_spec import Loading, ModelSpec
from scalecheck.core.scalecheck_exceptions import ConstraintError, ScaleCheckInputError
from scalecheck.core.scaling import ScalingKind, ScalingMethod, tested_loadings

logger = logging.getLogger(__name__)


def cross_factor_loadings(spec: ModelSpec, tested: Constraint) -> Tuple[Loading, Loading]:
    """Loadings of a tested equality, which must lie on different factors.

    Raises:
        ConstraintError: If ``tested`` is not an equality of loadings on two factors
    """
    first, second = tested_loadings(spec, tested)
    if first.factor == second.factor:
        raise ConstraintError(f"tested constraint '{tested}' must equate loadings of two different factors")
    return first, second


def _mean(estimate: ParameterEstimate, factor: str) -> float:
    return float(np.mean([estimate.loading(factor, name) for name in estimate.spec.indicators_of(factor)]))


def _remaining_sum(estimate: ParameterEstimate, loading: Loading) -> float:
    return sum(
        estimate.loading(loading.factor, name)
        for name in estimate.spec.indicators_of(loading.factor)
        if name != loading.indicator
    )


def _ratio(numerator: float, denominator: float) -> float:
    return numerator / denominator if denominator != 0.0 else math.nan


@dataclass(frozen=True)
class TestedHypothesis:
    """H0 implied by equating two loadings under one scaling.

    Both sides are written in population quantities, so they can be evaluated
    from the estimate of any scaling of the same model.
    """

    scaling: ScalingMethod
    first: Loading
    second: Loading
    left: str
    right: str
    comparison: str

    __test__ = False

    @property
    def text(self) -> str:
        return f"H0: {self.left} = {self.right}"

    @property
    def cross_multiplied_text(self) -> str:
        """Equivalent form comparing the two tested loadings directly."""
        return f"H0: ({self.first})/({self.second}) = {self.comparison}"

    def evaluate(self, estimate: ParameterEstimate) -> Tuple[float, float]:
        """Left and right side of :attr:`text` at an estimate."""
        a, b = self.first, self.second
        la, lb = estimate.loading(a.factor, a.indicator), estimate.loading(b.factor, b.indicator)
        kind = self.scaling.kind
        if kind is ScalingKind.FIXED_MARKER:
            ma, mb = self.scaling.marker_of(a.factor), self.scaling.marker_of(b.factor)
            return (
                _ratio(la, estimate.loading(ma.factor, ma.indicator)),
                _ratio(lb, estimate.loading(mb.factor, mb.indicator)),
            )
        if kind is ScalingKind.FIXED_FACTOR:
            return (
                la * math.sqrt(max(estimate.latent(a.factor), 0.0)),
                lb * math.sqrt(max(estimate.latent(b.factor), 0.0)),
            )
        return _ratio(la, _mean(estimate, a.factor)), _ratio(lb, _mean(estimate, b.factor))

    def evaluate_cross_multiplied(self, estimate: ParameterEstimate) -> Tuple[float, float]:
        """Both sides of :attr:`cross_multiplied_text` at an estimate."""
        a, b = self.first, self.second
        spec = estimate.spec
        ratio = _ratio(estimate.loading(a.factor, a.indicator), estimate.loading(b.factor, b.indicator))
        kind = self.scaling.kind
        if kind is ScalingKind.FIXED_MARKER:
            ma, mb = self.scaling.marker_of(a.factor), self.scaling.marker_of(b.factor)
            return ratio, _ratio(estimate.loading(ma.factor, ma.indicator), estimate.loading(mb.factor, mb.indicator))
        if kind is ScalingKind.FIXED_FACTOR:
            return ratio, _ratio(
                math.sqrt(max(estimate.latent(b.factor), 0.0)), math.sqrt(max(estimate.latent(a.factor), 0.0))
            )
        if len(spec.indicators_of(a.factor)) == len(spec.indicators_of(b.factor)):
            return ratio, _ratio(_remaining_sum(estimate, a), _remaining_sum(estimate, b))
        return ratio, _ratio(_mean(estimate, a.factor), _mean(estimate, b.factor))


def tested_hypothesis(spec: ModelSpec, tested: Equal, scaling: ScalingMethod) -> TestedHypothesis:
    """Render the hypothesis that ``tested`` actually tests under ``scaling``."""
    a, b = cross_factor_loadings(spec, tested)
    if scaling.kind is ScalingKind.FIXED_MARKER:
        ma, mb = scaling.marker_of(a.factor), scaling.marker_of(b.factor)
        left, right = f"({a})/({ma})", f"({b})/({mb})"
        comparison = f"({ma})/({mb})"
    elif scaling.kind is ScalingKind.FIXED_FACTOR:
        left, right = f"({a})*sqrt(Var({a.factor}))", f"({b})*sqrt(Var({b.factor}))"
        comparison = f"sqrt(Var({b.factor}))/sqrt(Var({a.factor}))"
    else:
        left = f"({a})/mean({a.factor}->{{{','.join(spec.indicators_of(a.factor))}}})"
        right = f"({b})/mean({b.factor}->{{{','.join(spec.indicators_of(b.factor))}}})"
        if len(spec.indicators_of(a.factor)) == len(spec.indicators_of(b.factor)):
            rest_a = " + ".join(f"({a.factor}->{n})" for n in spec.indicators_of(a.factor) if n != a.indicator)
            rest_b = " + ".join(f"({b.factor}->{n})" for n in spec.indicators_of(b.factor) if n != b.indicator)
            comparison = f"[{rest_a}]/[{rest_b}]"
        else:
            comparison = (
                f"mean({a.factor}->{{{','.join(spec.indicators_of(a.factor))}}})"
                f"/mean({b.factor}->{{{','.join(spec.indicators_of(b.factor))}}})"
            )
    return TestedHypothesis(scaling=scaling, first=a, second=b, left=left, right=right, comparison=comparison)


@dataclass(frozen=True)
class HypothesisEquivalence:
    """Two scalings whose tested hypotheses are algebraically equivalent."""

    first_label: str
    second_label: str
    reason: str


def hypothesis_equivalence_check(
    spec: ModelSpec, tested: Constraint, scalings: Sequence[ScalingMethod]
) -> List[HypothesisEquivalence]:
    """Provable equivalences between the hypotheses tested under ``scalings``.

    When both factors of the tested loadings have exactly two indicators, the
    effects-coded ratio is 2r/(1 + r) of the marker ratio r, a one-to-one map,
    so fixed marker and effects coding test the same hypothesis. No other
    equivalence is claimed.

    Raises:
        ConstraintError: If ``tested`` is not a cross-factor loading equality
    """
    a, b = cross_factor_loadings(spec, tested)
    if len(spec.indicators_of(a.factor)) != 2 or len(spec.indicators_of(b.factor)) != 2:
        return []
    effects = [method for method in scalings if method.kind is ScalingKind.EFFECTS_CODING]
    if not effects:
        return []
    equivalences = []
    for method in scalings:
        if not method.is_marker:
            continue
        if method.marker_of(a.factor) == a or method.marker_of(b.factor) == b:
            continue
        equivalences.append(
            HypothesisEquivalence(
                first_label=method.label(spec),
                second_label=effects[0].label(spec),
                reason="both factors of the tested loadings have exactly two indicators",
            )
        )
    return equivalences


@dataclass(frozen=True)
class DiagnosticRatio:
    """A divergence term; values far from 1 mean the scalings test very different hypotheses."""

    label: str
    formula: str
    value: float


def divergence_terms(
    spec: ModelSpec, tested: Constraint, estimate: ParameterEstimate
) -> List[DiagnosticRatio]:
    """Divergence terms between the hypotheses tested under different scalings.

    For every marker position i usable in both factors of the tested loadings:
    (A->Xi)·sd(A) / ((B->Xi)·sd(B)), which separates fixed marker at i from
    fixed factor. For every pair i < k of such positions, once:
    (A->Xk / A->Xi)·(B->Xi / B->Xk), which separates marker i from marker k.
    """
    a, b = cross_factor_loadings(spec, tested)
    first_indicators, second_indicators = spec.indicators_of(a.factor), spec.indicators_of(b.factor)
    excluded = {spec.position_of(a), spec.position_of(b)}
    positions = [
        position
        for position in range(1, min(len(first_indicators), len(second_indicators)) + 1)
        if position not in excluded
    ]

    def loading_a(position: int) -> float:
        return estimate.loading(a.factor, first_indicators[position - 1])

    def loading_b(position: int) -> float:
        return estimate.loading(b.factor, second_indicators[position - 1])

    sd_a = math.sqrt(max(estimate.latent(a.factor), 0.0))
    sd_b = math.sqrt(max(estimate.latent(b.factor), 0.0))

    terms: List[DiagnosticRatio] = []
    for i in positions:
        xa, xb = first_indicators[i - 1], second_indicators[i - 1]
        terms.append(
            DiagnosticRatio(
                label=f"marker {i} vs factor",
                formula=f"(({a.factor}->{xa})*sqrt(Var({a.factor})))/(({b.factor}->{xb})*sqrt(Var({b.factor})))",
                value=_ratio(loading_a(i) * sd_a, loading_b(i) * sd_b),
            )
        )
    for i, k in itertools.combinations(positions, 2):
        ai, ak = first_indicators[i - 1], first_indicators[k - 1]
        bi, bk = second_indicators[i - 1], second_indicators[k - 1]
        terms.append(
            DiagnosticRatio(
                label=f"marker {i} vs marker {k}",
                formula=f"(({a.factor}->{ak})/({a.factor}->{ai}))*(({b.factor}->{bi})/({b.factor}->{bk}))",
                value=_ratio(loading_a(k), loading_a(i)) * _ratio(loading_b(i), loading_b(k)),
            )
        )
    return terms


@dataclass(frozen=True)
class NonIdentifiabilityDemonstration:
    """Two parameter sets compared through their implied covariances."""

    implied_covariances: Tuple[np.ndarray, ...]
    max_abs_difference: float
    discrepancies: Tuple[float, ...]
    equality_holds: Tuple[Optional[bool], ...]

    @property
    def indistinguishable(self) -> bool:
        return max(self.discrepancies) - min(self.discrepancies) < 1e-6


def demonstrate_nonidentifiability(
    spec: ModelSpec,
    moments: SampleMoments,
    estimates: Sequence[ParameterEstimate],
    tested: Optional[Equal] = None,
    tolerance: float = 1e-4,
) -> NonIdentifiabilityDemonstration:
    """Compare the implied covariances of several parameter sets.

    If sets on both sides of the tested equality imply the same covariance
    matrix, no sample of the indicators can tell them apart and the raw
    equality is empirically untestable.

    Raises:
        ScaleCheckInputError: If fewer than two parameter sets are given
    """
    if len(estimates) < 2:
        raise ScaleCheckInputError("need at least two parameter sets to compare")
    sigmas = tuple(model_implied_covariance(estimate) for estimate in estimates)
    difference = max(float(np.max(np.abs(sigma - sigmas[0]))) for sigma in sigmas[1:])
    discrepancies = tuple(ml_discrepancy(moments, sigma) for sigma in sigmas)

    equality: Tuple[Optional[bool], ...] = tuple(None for _ in estimates)
    if tested is not None:
        a, b = cross_factor_loadings(spec, tested)
        equality = tuple(
            abs(estimate.loading(a.factor, a.indicator) - estimate.loading(b.factor, b.indicator)) < tolerance
            for estimate in estimates
        )
    logger.info(f"Implied covariances differ by at most {difference:.3e}; discrepancies {discrepancies}")
    return NonIdentifiabilityDemonstration(
        implied_covariances=sigmas,
        max_abs_difference=difference,
        discrepancies=discrepancies,
        equality_holds=equality,
    )
