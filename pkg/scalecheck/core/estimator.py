"""Model-implied covariance and maximum likelihood estimation."""

import logging
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from scipy import linalg

from scalecheck.core.constraints import ParameterIndex, degrees_of_freedom
from scalecheck.core.model_spec import (
    LatentCov,
    Loading,
    ModelSpec,
    ParameterAddress,
    ResidualCov,
)
from scalecheck.core.optimizer import minimize_bfgs
from scalecheck.core.scalecheck_config import ScaleCheckConfig, scalecheck_config
from scalecheck.core.scalecheck_exceptions import (
    ConvergenceError,
    CovarianceInputError,
    EstimationError,
    NotPositiveDefiniteError,
    ScaleCheckInputError,
)
from scalecheck.utils.logging_decorators import log_fit_outcome

logger = logging.getLogger(__name__)

SYMMETRY_TOLERANCE = 1e-10
SIGN_TOLERANCE = 1e-9


@dataclass(frozen=True)
class SampleMoments:
    """Sample covariance matrix with its size and cached log-determinant.

    ``s`` is the maximum likelihood covariance (divisor N).
    """

    s: np.ndarray
    n: int
    log_det_s: float

    @classmethod
    def from_matrix(cls, s: np.ndarray, n: int) -> "SampleMoments":
        """Validate ``s`` and build moments.

        Raises:
            ScaleCheckInputError: If ``n < 2``
            CovarianceInputError: If ``s`` is not symmetric positive definite
        """
        if n < 2:
            raise ScaleCheckInputError(f"sample size must be at least 2, got {n}")
        s = np.array(s, dtype=float)
        if s.ndim != 2 or s.shape[0] != s.shape[1]:
            raise CovarianceInputError(f"covariance matrix must be square, got shape {s.shape}")
        scale = max(float(np.max(np.abs(s))), 1.0)
        if np.max(np.abs(s - s.T)) > SYMMETRY_TOLERANCE * scale:
            raise CovarianceInputError("covariance matrix is not symmetric")
        s = (s + s.T) / 2.0
        try:
            factor, _ = linalg.cho_factor(s, lower=True)
        except linalg.LinAlgError as e:
            raise CovarianceInputError("sample covariance matrix is not positive definite") from e
        log_det_s = 2.0 * float(np.sum(np.log(np.diag(factor))))
        return cls(s=s, n=int(n), log_det_s=log_det_s)

    @property
    def p(self) -> int:
        return self.s.shape[0]


@dataclass(frozen=True)
class ParameterEstimate:
    """Λ, Φ, Θ at the ML optimum plus convergence metadata."""

    spec: ModelSpec
    full: np.ndarray
    lambda_: np.ndarray
    phi: np.ndarray
    theta: np.ndarray
    discrepancy: float
    converged: bool
    iterations: int
    gradient_norm: float

    @classmethod
    def from_matrices(
        cls,
        spec: ModelSpec,
        lambda_: np.ndarray,
        phi: np.ndarray,
        theta: np.ndarray,
        discrepancy: float = 0.0,
    ) -> "ParameterEstimate":
        """Wrap hand-specified Λ, Φ, Θ (entries outside the model pattern are ignored)."""
        lambda_, phi, theta = (np.asarray(matrix, dtype=float) for matrix in (lambda_, phi, theta))
        full = np.empty(len(spec.parameters()))
        for k, address in enumerate(spec.parameters()):
            if isinstance(address, Loading):
                full[k] = lambda_[spec.indicators.index(address.indicator), spec.factors.index(address.factor)]
            elif isinstance(address, LatentCov):
                full[k] = phi[spec.factors.index(address.first), spec.factors.index(address.second)]
            else:
                full[k] = theta[spec.indicators.index(address.first), spec.indicators.index(address.second)]
        lambda_, phi, theta = unpack(spec, full)
        return cls(
            spec=spec,
            full=full,
            lambda_=lambda_,
            phi=phi,
            theta=theta,
            discrepancy=discrepancy,
            converged=True,
            iterations=0,
            gradient_norm=0.0,
        )

    def value(self, address: ParameterAddress) -> float:
        """Estimated value of a single parameter."""
        address = self.spec.canonical(address)
        if isinstance(address, Loading):
            return float(
                self.lambda_[
                    self.spec.indicators.index(address.indicator), self.spec.factors.index(address.factor)
                ]
            )
        if isinstance(address, LatentCov):
            return float(
                self.phi[self.spec.factors.index(address.first), self.spec.factors.index(address.second)]
            )
        return float(
            self.theta[self.spec.indicators.index(address.first), self.spec.indicators.index(address.second)]
        )

    def loading(self, factor: str, indicator: str) -> float:
        return self.value(Loading(factor, indicator))

    def latent(self, first: str, second: Optional[str] = None) -> float:
        return self.value(LatentCov(first, second or first))

    @property
    def implied_covariance(self) -> np.ndarray:
        return model_implied_covariance(self)


def unpack(spec: ModelSpec, full: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Split a full parameter vector into Λ (p×m), Φ (m×m) and Θ (p×p)."""
    p, m = spec.n_indicators, len(spec.factors)
    lambda_, phi, theta = np.zeros((p, m)), np.zeros((m, m)), np.zeros((p, p))
    for value, address in zip(full, spec.parameters()):
        if isinstance(address, Loading):
            lambda_[spec.indicators.index(address.indicator), spec.factors.index(address.factor)] = value
        elif isinstance(address, LatentCov):
            i, j = spec.factors.index(address.first), spec.factors.index(address.second)
            phi[i, j] = phi[j, i] = value
        else:
            i, j = spec.indicators.index(address.first), spec.indicators.index(address.second)
            theta[i, j] = theta[j, i] = value
    return lambda_, phi, theta


def implied_covariance(lambda_: np.ndarray, phi: np.ndarray, theta: np.ndarray) -> np.ndarray:
    """Λ Φ Λ′ + Θ, symmetrized."""
    sigma = lambda_ @ phi @ lambda_.T + theta
    return (sigma + sigma.T) / 2.0


def model_implied_covariance(estimate: ParameterEstimate) -> np.ndarray:
    """Model-implied covariance of an estimate."""
    return implied_covariance(estimate.lambda_, estimate.phi, estimate.theta)


def _cholesky(sigma: np.ndarray) -> np.ndarray:
    try:
        factor, _ = linalg.cho_factor(sigma, lower=True)
    except linalg.LinAlgError as e:
        raise NotPositiveDefiniteError("implied covariance is not positive definite") from e
    return np.tril(factor)


def ml_discrepancy(moments: SampleMoments, sigma: np.ndarray) -> float:
    """F_ML = ln|Σ| + tr(SΣ⁻¹) − ln|S| − p.

    Evaluated as Σ(dᵢ − ln(1 + dᵢ)) over the eigenvalues dᵢ of
    L⁻¹(S − Σ)L⁻ᵀ with Σ = LLᵀ, which stays accurate near a perfect fit.

    Raises:
        NotPositiveDefiniteError: If ``sigma`` is not positive definite
    """
    chol = _cholesky(sigma)
    scaled = linalg.solve_triangular(chol, moments.s - sigma, lower=True)
    scaled = linalg.solve_triangular(chol, scaled.T, lower=True)
    d = linalg.eigvalsh((scaled + scaled.T) / 2.0)
    if np.any(d <= -1.0):
        raise NotPositiveDefiniteError("sample covariance is singular relative to the implied covariance")
    return float(max(np.sum(d - np.log1p(d)), 0.0))


def _full_gradient(spec: ModelSpec, moments: SampleMoments, full: np.ndarray) -> np.ndarray:
    lambda_, phi, theta = unpack(spec, full)
    sigma = implied_covariance(lambda_, phi, theta)
    chol = _cholesky(sigma)
    sigma_inv = linalg.cho_solve((chol, True), np.eye(spec.n_indicators))
    weight = sigma_inv - sigma_inv @ moments.s @ sigma_inv
    weight = (weight + weight.T) / 2.0

    loading_part = 2.0 * weight @ lambda_ @ phi
    latent_part = lambda_.T @ weight @ lambda_

    gradient = np.empty(len(full))
    for k, address in enumerate(spec.parameters()):
        if isinstance(address, Loading):
            gradient[k] = loading_part[
                spec.indicators.index(address.indicator), spec.factors.index(address.factor)
            ]
        elif isinstance(address, LatentCov):
            i, j = spec.factors.index(address.first), spec.factors.index(address.second)
            gradient[k] = latent_part[i, j] * (1.0 if i == j else 2.0)
        else:
            i, j = spec.indicators.index(address.first), spec.indicators.index(address.second)
            gradient[k] = weight[i, j] * (1.0 if i == j else 2.0)
    return gradient


def discrepancy_gradient(moments: SampleMoments, reduced: np.ndarray, index: ParameterIndex) -> np.ndarray:
    """Gradient of F_ML with respect to the reduced parameters.

    Uses dF = tr[(Σ⁻¹ − Σ⁻¹SΣ⁻¹) dΣ] chained through the basis map.

    Raises:
        NotPositiveDefiniteError: If the implied covariance is not positive definite
    """
    return index.basis.T @ _full_gradient(index.spec, moments, index.expand(reduced))


def discrepancy_at(moments: SampleMoments, reduced: np.ndarray, index: ParameterIndex) -> float:
    """F_ML at a reduced parameter vector."""
    return ml_discrepancy(moments, implied_covariance(*unpack(index.spec, index.expand(reduced))))


def start_values(moments: SampleMoments, index: ParameterIndex) -> np.ndarray:
    """Reduced starting vector with a positive definite implied covariance.

    Loadings start at 1, or at half the first indicator's sample standard
    deviation when the factor's variance is fixed; free latent variances at
    half the first indicator's sample variance; residual variances at half
    the sample variances; all covariances at 0. The vector is then projected
    onto the constraint set.
    """
    if index.n_free == 0:
        return np.zeros(0)
    spec = index.spec
    variances = np.diag(moments.s)
    full = np.zeros(index.n_full)
    for k, address in enumerate(index.addresses):
        if isinstance(address, Loading):
            first = spec.indicators_of(address.factor)[0]
            variance_fixed = LatentCov(address.factor, address.factor) in index.fixed_values
            first_variance = variances[spec.indicators.index(first)]
            full[k] = np.sqrt(first_variance) / 2.0 if variance_fixed else 1.0
        elif isinstance(address, LatentCov) and address.is_variance:
            first = spec.indicators_of(address.first)[0]
            full[k] = variances[spec.indicators.index(first)] / 2.0
        elif isinstance(address, ResidualCov) and address.is_variance:
            full[k] = variances[spec.indicators.index(address.first)] / 2.0
    return index.project(full)


def _flip_factors(spec: ModelSpec, full: np.ndarray, factors: set) -> np.ndarray:
    flipped = full.copy()
    for k, address in enumerate(spec.parameters()):
        if isinstance(address, Loading) and address.factor in factors:
            flipped[k] = -flipped[k]
        elif isinstance(address, LatentCov) and not address.is_variance:
            if (address.first in factors) != (address.second in factors):
                flipped[k] = -flipped[k]
    return flipped


def apply_sign_convention(index: ParameterIndex, full: np.ndarray) -> np.ndarray:
    """Make each factor's first-declared loading positive where the constraints allow.

    Flipping a factor's loading column and the signs of its latent
    covariances leaves the implied covariance unchanged; a flip is kept only
    if the result still satisfies every constraint.
    """
    spec = index.spec

    def admissible(candidate: np.ndarray) -> bool:
        residuals = index.constraint_residuals(candidate)
        return residuals.size == 0 or float(np.max(np.abs(residuals))) < SIGN_TOLERANCE

    negative = {
        factor
        for factor in spec.factors
        if full[index.position(Loading(factor, spec.indicators_of(factor)[0]))] < 0.0
    }
    for factor in sorted(negative, key=spec.factors.index):
        candidate = _flip_factors(spec, full, {factor})
        if admissible(candidate):
            full = candidate
    remaining = {
        factor
        for factor in negative
        if full[index.position(Loading(factor, spec.indicators_of(factor)[0]))] < 0.0
    }
    if remaining:
        candidate = _flip_factors(spec, full, remaining)
        if admissible(candidate):
            full = candidate
    return full


def build_estimate(
    index: ParameterIndex,
    full: np.ndarray,
    discrepancy: float,
    converged: bool = True,
    iterations: int = 0,
    gradient_norm: float = 0.0,
) -> ParameterEstimate:
    """Assemble a :class:`ParameterEstimate` from a full vector."""
    lambda_, phi, theta = unpack(index.spec, full)
    return ParameterEstimate(
        spec=index.spec,
        full=np.asarray(full, dtype=float),
        lambda_=lambda_,
        phi=phi,
        theta=theta,
        discrepancy=discrepancy,
        converged=converged,
        iterations=iterations,
        gradient_norm=gradient_norm,
    )


@log_fit_outcome
def fit(
    moments: SampleMoments,
    spec: ModelSpec,
    index: ParameterIndex,
    config: Optional[ScaleCheckConfig] = None,
) -> ParameterEstimate:
    """Fit the model by minimizing F_ML over the reduced parameter vector.

    Args:
        moments: Sample covariance and size
        spec: Model description; must match ``index.spec``
        index: Compiled constraints
        config: Optimizer settings

    Returns:
        Converged ParameterEstimate with the sign convention applied

    Raises:
        IdentificationError: If df < 0
        EstimationError: If the implied covariance is singular at the start
        ConvergenceError: If the optimizer stops before convergence
    """
    config = config or scalecheck_config
    if index.spec is not spec and index.spec != spec:
        raise EstimationError("parameter index was compiled for a different model")
    if moments.p != spec.n_indicators:
        raise CovarianceInputError(
            f"dimension mismatch: covariance is {moments.p}x{moments.p} "
            f"but the model has {spec.n_indicators} indicators"
        )
    degrees_of_freedom(spec, index)

    x0 = start_values(moments, index)
    try:
        discrepancy_at(moments, x0, index)
    except NotPositiveDefiniteError as e:
        raise EstimationError("implied covariance is singular at the starting values") from e

    result = minimize_bfgs(
        lambda reduced: discrepancy_at(moments, reduced, index),
        lambda reduced: discrepancy_gradient(moments, reduced, index),
        x0,
        config,
    )
    full = apply_sign_convention(index, index.expand(result.x))
    estimate = build_estimate(
        index,
        full,
        discrepancy=result.fun,
        converged=result.converged,
        iterations=result.iterations,
        gradient_norm=result.gradient_norm,
    )
    if not result.converged:
        logger.warning(f"Estimation did not converge: {result.message}")
        raise ConvergenceError(f"estimation did not converge: {result.message}", estimate=estimate)
    return estimate
