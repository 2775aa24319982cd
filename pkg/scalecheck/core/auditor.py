"""Audit of a loading equality across every applicable scaling method."""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from enum import Enum
from typing import List, Optional, Sequence, Tuple

from scalecheck.core.constraints import Constraint, Equal, compile_constraints, degrees_of_freedom
from scalecheck.core.estimator import ParameterEstimate, SampleMoments, fit, model_implied_covariance
from scalecheck.core.fitstats import (
    BaselineFit,
    DifferenceStatistics,
    FitStatistics,
    chi_square_statistic,
    compute_fit_statistics,
    difference_test,
    fit_baseline,
)
from scalecheck.core.hypotheses import (
    DiagnosticRatio,
    HypothesisEquivalence,
    TestedHypothesis,
    cross_factor_loadings,
    divergence_terms,
    hypothesis_equivalence_check,
    tested_hypothesis,
)
from scalecheck.core.model_spec import ModelSpec
from scalecheck.core.scalecheck_config import ScaleCheckConfig, scalecheck_config
from scalecheck.core.scalecheck_exceptions import AuditError, ScaleCheckError, ScaleCheckInputError
from scalecheck.core.scaling import ScalingMethod, enumerate_scalings, scaling_constraints
from scalecheck.utils.logging_decorators import log_function_call

logger = logging.getLogger(__name__)

UNRESTRICTED_AGREEMENT_TOLERANCE = 1e-4


class Decision(Enum):
    REJECT = "reject"
    ACCEPT = "accept"


def decide(p_value: float, alpha: float) -> Decision:
    return Decision.REJECT if p_value < alpha else Decision.ACCEPT


@dataclass(frozen=True)
class ScalingAuditRecord:
    """Unrestricted and restricted fit of one scaling."""

    scaling: ScalingMethod
    label: str
    unrestricted: FitStatistics
    restricted: FitStatistics
    difference: DifferenceStatistics
    decision: Decision
    hypothesis: TestedHypothesis
    unrestricted_estimate: ParameterEstimate
    restricted_estimate: ParameterEstimate


@dataclass(frozen=True)
class DivergenceSummary:
    max_delta_chi_square: float
    max_label: str
    min_delta_chi_square: float
    min_label: str


@dataclass(frozen=True)
class AuditReport:
    """Per-scaling results for one tested equality.

    ``interaction_detected`` only says the decisions differ across scalings;
    its absence does not certify that the raw equality is testable.
    """

    tested: Equal
    records: Tuple[ScalingAuditRecord, ...]
    alpha: float
    interaction_detected: bool
    divergence_summary: DivergenceSummary
    diagnostics: Tuple[DiagnosticRatio, ...]
    equivalences: Tuple[HypothesisEquivalence, ...]
    baseline: BaselineFit

    def with_alpha(self, alpha: float) -> "AuditReport":
        """Decisions at another significance level from the stored p-values."""
        if not 0.0 < alpha < 1.0:
            raise ScaleCheckInputError(f"alpha must lie in (0, 1), got {alpha}")
        records = tuple(replace(record, decision=decide(record.difference.p_value, alpha)) for record in self.records)
        return replace(
            self,
            records=records,
            alpha=alpha,
            interaction_detected=_interaction(records),
        )

    def record(self, label: str) -> ScalingAuditRecord:
        for record in self.records:
            if record.label == label:
                return record
        raise KeyError(label)


def _interaction(records: Sequence[ScalingAuditRecord]) -> bool:
    return len({record.decision for record in records}) > 1


def divergence_diagnostic(
    spec: ModelSpec, tested: Constraint, estimates: Sequence[ParameterEstimate]
) -> List[DiagnosticRatio]:
    """Divergence terms from the unrestricted fits.

    The terms are scaling invariant, so any converged unrestricted estimate
    gives the same values; the first one is used.
    """
    if not estimates:
        return []
    return divergence_terms(spec, tested, estimates[0])


def _fit_statistics(
    moments: SampleMoments, estimate: ParameterEstimate, df: int, baseline: BaselineFit
) -> FitStatistics:
    return compute_fit_statistics(
        chi_square_statistic(estimate.discrepancy, moments.n),
        df,
        moments.n,
        baseline,
        moments.s,
        model_implied_covariance(estimate),
    )


def _audit_scaling(
    moments: SampleMoments,
    spec: ModelSpec,
    tested: Equal,
    scaling: ScalingMethod,
    extra_constraints: Sequence[Constraint],
    baseline: BaselineFit,
    alpha: float,
    config: ScaleCheckConfig,
) -> ScalingAuditRecord:
    label = scaling.label(spec)
    try:
        unrestricted_index = compile_constraints(spec, scaling_constraints(spec, scaling) + list(extra_constraints))
        restricted_index = unrestricted_index.with_constraints([tested])
        unrestricted_df = degrees_of_freedom(spec, unrestricted_index)
        restricted_df = degrees_of_freedom(spec, restricted_index)

        unrestricted_estimate = fit(moments, spec, unrestricted_index, config)
        restricted_estimate = fit(moments, spec, restricted_index, config)

        unrestricted = _fit_statistics(moments, unrestricted_estimate, unrestricted_df, baseline)
        restricted = _fit_statistics(moments, restricted_estimate, restricted_df, baseline)
        difference = difference_test(unrestricted, restricted, config)
    except ScaleCheckError as e:
        raise AuditError(str(e), label) from e

    logger.info(f"{label}: Δχ² = {difference.delta_chi_square:.5f}, p = {difference.p_value:.5f}")
    return ScalingAuditRecord(
        scaling=scaling,
        label=label,
        unrestricted=unrestricted,
        restricted=restricted,
        difference=difference,
        decision=decide(difference.p_value, alpha),
        hypothesis=tested_hypothesis(spec, tested, scaling),
        unrestricted_estimate=unrestricted_estimate,
        restricted_estimate=restricted_estimate,
    )


@log_function_call
def audit(
    moments: SampleMoments,
    spec: ModelSpec,
    tested: Equal,
    alpha: Optional[float] = None,
    extra_constraints: Sequence[Constraint] = (),
    config: Optional[ScaleCheckConfig] = None,
) -> AuditReport:
    """Test ``tested`` under every enumerated scaling.

    Args:
        moments: Sample covariance and size
        spec: Model
        tested: Equality of two loadings on different factors
        alpha: Significance level (defaults to the configured one)
        extra_constraints: User constraints added to every fit
        config: Estimation settings

    Returns:
        AuditReport with records in enumeration order

    Raises:
        ConstraintError: If ``tested`` is not a cross-factor loading equality
        AuditError: If any fit fails; the message names the scaling
    """
    config = config or scalecheck_config
    alpha = config.default_alpha if alpha is None else alpha
    if not 0.0 < alpha < 1.0:
        raise ScaleCheckInputError(f"alpha must lie in (0, 1), got {alpha}")
    cross_factor_loadings(spec, tested)

    scalings = enumerate_scalings(spec, tested, config)
    baseline = fit_baseline(moments)
    logger.info(f"Auditing '{tested}' under {len(scalings)} scalings")

    with ThreadPoolExecutor(max_workers=max(1, config.max_workers)) as executor:
        records = tuple(
            executor.map(
                lambda scaling: _audit_scaling(
                    moments, spec, tested, scaling, extra_constraints, baseline, alpha, config
                ),
                scalings,
            )
        )

    unrestricted_chi_squares = [record.unrestricted.chi_square for record in records]
    spread = max(unrestricted_chi_squares) - min(unrestricted_chi_squares)
    if spread > UNRESTRICTED_AGREEMENT_TOLERANCE:
        logger.warning(f"Unrestricted χ² differ across scalings by {spread:.3e}")

    largest = max(records, key=lambda record: record.difference.delta_chi_square)
    smallest = min(records, key=lambda record: record.difference.delta_chi_square)
    report = AuditReport(
        tested=tested,
        records=records,
        alpha=alpha,
        interaction_detected=_interaction(records),
        divergence_summary=DivergenceSummary(
            max_delta_chi_square=largest.difference.delta_chi_square,
            max_label=largest.label,
            min_delta_chi_square=smallest.difference.delta_chi_square,
            min_label=smallest.label,
        ),
        diagnostics=tuple(divergence_diagnostic(spec, tested, [record.unrestricted_estimate for record in records])),
        equivalences=tuple(hypothesis_equivalence_check(spec, tested, scalings)),
        baseline=baseline,
    )
    if report.interaction_detected:
        logger.warning(f"Constraint interaction detected for '{tested}'")
    return report
