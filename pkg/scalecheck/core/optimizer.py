"""Quasi-Newton (BFGS) minimization with a feasibility-aware backtracking line search."""

import logging
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from scalecheck.core.scalecheck_config import ScaleCheckConfig, scalecheck_config
from scalecheck.core.scalecheck_exceptions import EstimationError, NotPositiveDefiniteError

logger = logging.getLogger(__name__)

# Accepted as converged when the line search stalls at this gradient norm.
STALLED_GRADIENT_TOLERANCE = 1e-6
CURVATURE_EPSILON = 1e-12


@dataclass(frozen=True)
class OptimizationResult:
    """Outcome of :func:`minimize_bfgs`."""

    x: np.ndarray
    fun: float
    gradient: np.ndarray
    iterations: int
    converged: bool
    message: str

    @property
    def gradient_norm(self) -> float:
        return float(np.linalg.norm(self.gradient))


class _LineSearchError(RuntimeError):
    pass


class BFGSMinimizer:
    """BFGS on an unconstrained vector.

    The objective may raise :class:`NotPositiveDefiniteError` for points
    outside its domain; such trial steps are halved like rejected ones.
    """

    def __init__(self, config: Optional[ScaleCheckConfig] = None):
        self.config = config or scalecheck_config

    def minimize(
        self,
        fun: Callable[[np.ndarray], float],
        grad: Callable[[np.ndarray], np.ndarray],
        x0: np.ndarray,
    ) -> OptimizationResult:
        """Minimize ``fun`` from ``x0``.

        Raises:
            EstimationError: If the objective is undefined at ``x0``
        """
        x = np.asarray(x0, dtype=float).copy()
        try:
            f = float(fun(x))
        except NotPositiveDefiniteError as e:
            raise EstimationError(f"objective undefined at starting point: {e}") from e
        g = grad(x)

        n = x.size
        identity = np.eye(n)
        hess_inv = identity.copy()
        is_reset = True
        message = "maximum number of iterations reached"
        converged = False
        k = 0

        while k < self.config.max_iterations:
            gnorm = float(np.linalg.norm(g))
            if gnorm < self.config.gradient_tolerance:
                converged, message = True, "gradient norm below tolerance"
                break

            direction = -hess_inv @ g
            slope = float(g @ direction)
            if slope >= 0.0:
                hess_inv, is_reset = identity.copy(), True
                direction, slope = -g, -gnorm**2

            try:
                x_new, f_new = self._backtrack(fun, x, f, direction, slope)
            except _LineSearchError:
                if not is_reset:
                    logger.debug(f"Line search stalled at iteration {k}; resetting inverse Hessian")
                    hess_inv, is_reset = identity.copy(), True
                    continue
                converged = gnorm < STALLED_GRADIENT_TOLERANCE
                message = f"line search stalled with gradient norm {gnorm:.3e}"
                break

            g_new = grad(x_new)
            step, change = x_new - x, g_new - g
            f_old = f
            x, f, g = x_new, f_new, g_new
            k += 1

            curvature = float(step @ change)
            if curvature > CURVATURE_EPSILON * np.linalg.norm(step) * np.linalg.norm(change):
                if is_reset:
                    hess_inv = (curvature / float(change @ change)) * identity
                rho = 1.0 / curvature
                v = identity - rho * np.outer(step, change)
                hess_inv = v @ hess_inv @ v.T + rho * np.outer(step, step)
                is_reset = False

            if abs(f_old - f) <= self.config.relative_f_tolerance * max(abs(f_old), abs(f)) and f > 0.0:
                converged, message = True, "relative change of objective below tolerance"
                break

        result = OptimizationResult(
            x=x, fun=f, gradient=g, iterations=k, converged=converged, message=message
        )
        logger.debug(f"BFGS finished: {message} (f={f:.6g}, |g|={result.gradient_norm:.3e}, k={k})")
        return result

    def _backtrack(
        self,
        fun: Callable[[np.ndarray], float],
        x: np.ndarray,
        f: float,
        direction: np.ndarray,
        slope: float,
    ) -> tuple[np.ndarray, float]:
        """Armijo backtracking by halving; infeasible trial points are rejected."""
        t = 1.0
        while t >= self.config.min_step:
            trial = x + t * direction
            try:
                f_trial = float(fun(trial))
            except NotPositiveDefiniteError:
                t *= 0.5
                continue
            if np.isfinite(f_trial) and f_trial <= f + self.config.armijo_c1 * t * slope:
                return trial, f_trial
            t *= 0.5
        raise _LineSearchError("no acceptable step")


def minimize_bfgs(
    fun: Callable[[np.ndarray], float],
    grad: Callable[[np.ndarray], np.ndarray],
    x0: np.ndarray,
    config: Optional[ScaleCheckConfig] = None,
) -> OptimizationResult:
    """Minimize ``fun`` with BFGS using the default or given configuration."""
    return BFGSMinimizer(config).minimize(fun, grad, x0)
