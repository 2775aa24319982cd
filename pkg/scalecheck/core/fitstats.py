"""χ² statistic, fit indices, independence baseline and nested difference tests."""

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import special

from scalecheck.core.constraints import compile_constraints
from scalecheck.core.estimator import SampleMoments, fit
from scalecheck.core.model_spec import ModelSpec
from scalecheck.core.scalecheck_config import ScaleCheckConfig, scalecheck_config
from scalecheck.core.scalecheck_exceptions import NestingViolationError, ScaleCheckInputError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class FitStatistics:
    """Absolute fit of one model.

    ``rmsea_defined`` is False for saturated models (df = 0), where RMSEA is
    reported as 0.
    """

    chi_square: float
    df: int
    p_value: float
    cfi: float
    rmsea: float
    srmr: float
    rmsea_defined: bool = True


@dataclass(frozen=True)
class DifferenceStatistics:
    """Restricted minus unrestricted fit for a nested pair."""

    delta_chi_square: float
    delta_df: int
    p_value: float
    delta_cfi: float
    delta_rmsea: float
    delta_srmr: float


@dataclass(frozen=True)
class BaselineFit:
    """χ² and df of the independence model."""

    chi_square: float
    df: int


def chi_square_statistic(discrepancy: float, n: int) -> float:
    """T = N·F_ML (maximum likelihood convention, divisor N)."""
    return n * discrepancy


def chi_square_upper_tail(x: float, df: int) -> float:
    """Upper-tail probability of χ²(df), Q(df/2, x/2).

    Raises:
        ScaleCheckInputError: If ``df < 1``
    """
    if df < 1:
        raise ScaleCheckInputError(f"degrees of freedom must be at least 1, got {df}")
    if x <= 0.0:
        return 1.0
    return float(special.gammaincc(df / 2.0, x / 2.0))


def fit_baseline(moments: SampleMoments) -> BaselineFit:
    """Independence baseline by direct evaluation at Σ = diag(S).

    At that point tr(SΣ⁻¹) = p, so F = Σ ln sᵢᵢ − ln|S|.
    """
    discrepancy = float(np.sum(np.log(np.diag(moments.s))) - moments.log_det_s)
    p = moments.p
    return BaselineFit(
        chi_square=chi_square_statistic(max(discrepancy, 0.0), moments.n),
        df=p * (p - 1) // 2,
    )


def fit_baseline_by_optimization(
    moments: SampleMoments, config: Optional[ScaleCheckConfig] = None
) -> BaselineFit:
    """Independence baseline by running the general estimator on the independence model."""
    spec = ModelSpec.independence(tuple(f"V{i + 1}" for i in range(moments.p)), moments.n)
    index = compile_constraints(spec, [])
    estimate = fit(moments, spec, index, config)
    return BaselineFit(
        chi_square=chi_square_statistic(estimate.discrepancy, moments.n),
        df=spec.n_moments - index.n_free,
    )


def standardized_rmr(s: np.ndarray, sigma: np.ndarray) -> float:
    """SRMR over the p(p+1)/2 lower-triangle elements, diagonal included."""
    scale = np.sqrt(np.outer(np.diag(s), np.diag(s)))
    residuals = (s - sigma) / scale
    rows, cols = np.tril_indices(s.shape[0])
    return float(np.sqrt(np.mean(residuals[rows, cols] ** 2)))


def compute_fit_statistics(
    chi2: float,
    df: int,
    n: int,
    baseline: BaselineFit,
    s: np.ndarray,
    sigma: np.ndarray,
) -> FitStatistics:
    """CFI, RMSEA and SRMR for one fitted model.

    Args:
        chi2: Model χ²
        df: Model degrees of freedom
        n: Sample size (RMSEA uses N)
        baseline: Independence fit on the same moments
        s: Sample covariance
        sigma: Model-implied covariance

    Returns:
        FitStatistics
    """
    excess = max(chi2 - df, 0.0)
    denominator = max(baseline.chi_square - baseline.df, excess, 0.0)
    cfi = 1.0 if denominator == 0.0 else 1.0 - excess / denominator

    if df > 0:
        p_value = chi_square_upper_tail(chi2, df)
        rmsea = float(np.sqrt(excess / (df * n)))
        rmsea_defined = True
    else:
        p_value, rmsea, rmsea_defined = 1.0, 0.0, False
        logger.debug("Saturated model: RMSEA reported as 0")

    return FitStatistics(
        chi_square=chi2,
        df=df,
        p_value=p_value,
        cfi=cfi,
        rmsea=rmsea,
        srmr=standardized_rmr(s, sigma),
        rmsea_defined=rmsea_defined,
    )


def difference_test(
    unrestricted: FitStatistics,
    restricted: FitStatistics,
    config: Optional[ScaleCheckConfig] = None,
) -> DifferenceStatistics:
    """χ²-difference test of a restricted model against its unrestricted parent.

    Raises:
        NestingViolationError: If the restricted model has no extra df or fits
            better than its parent beyond numerical slack
    """
    config = config or scalecheck_config
    delta_df = restricted.df - unrestricted.df
    if delta_df < 1:
        raise NestingViolationError(
            f"restricted model must have more df than the unrestricted one ({restricted.df} vs {unrestricted.df})"
        )
    delta_chi_square = restricted.chi_square - unrestricted.chi_square
    if delta_chi_square < -config.nesting_slack:
        raise NestingViolationError(f"restricted model fits better than its parent (Δχ² = {delta_chi_square:.3e})")

    return DifferenceStatistics(
        delta_chi_square=delta_chi_square,
        delta_df=delta_df,
        p_value=chi_square_upper_tail(max(delta_chi_square, 0.0), delta_df),
        delta_cfi=restricted.cfi - unrestricted.cfi,
        delta_rmsea=restricted.rmsea - unrestricted.rmsea,
        delta_srmr=restricted.srmr - unrestricted.srmr,
    )
