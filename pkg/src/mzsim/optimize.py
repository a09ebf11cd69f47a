"""Damped Gauss-Newton (Levenberg-Marquardt) least squares.

Small and deliberately boring: dense normal equations with multiplicative
damping, error-weighted residuals, and an absolute covariance from
(J^T J)^-1 at the optimum. The models in this package have at most four
parameters and analytic Jacobians, which keeps this solver more than
sufficient.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DegenerateDataError, FitError

MAX_ITERATIONS = 200
STEP_TOL = 1e-10
_FTOL = 1e-6
_GRAD_TOL = 1e-8
_LAMBDA_MAX = 1e12


@dataclass
class LMResult:
    params: np.ndarray
    covariance: np.ndarray
    chi2: float
    n_iter: int


def weighted_covariance(
    jac: Callable[[np.ndarray, np.ndarray], np.ndarray],
    x: np.ndarray,
    params: np.ndarray,
    sigma: np.ndarray,
) -> np.ndarray:
    """(J^T J)^-1 with J the sigma-weighted model Jacobian at params.

    Uses the pseudo-inverse so weakly identified directions yield large
    (not undefined) uncertainties.
    """
    j = jac(x, params) / sigma[:, None]
    return np.linalg.pinv(j.T @ j)


def levenberg_marquardt(
    model: Callable[[np.ndarray, np.ndarray], np.ndarray],
    jac: Callable[[np.ndarray, np.ndarray], np.ndarray],
    x: np.ndarray,
    y: np.ndarray,
    sigma: np.ndarray,
    p0,
    max_iter: int = MAX_ITERATIONS,
    step_tol: float = STEP_TOL,
    lower=None,
    upper=None,
) -> LMResult:
    """Minimize sum(((y - model(x, p)) / sigma)^2) starting from p0.

    lower/upper, when given, are per-parameter identifiability boxes:
    trial steps are projected onto them. They exist to stop degenerate
    data (a dip fit on featureless noise, say) from running a parameter
    ridge off to infinity; well-posed fits never touch them.

    Raises FitError if the iteration cap is hit without meeting the step
    tolerance, and DegenerateDataError when the data carry no variation.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    sigma = np.asarray(sigma, dtype=float)
    if np.any(sigma <= 0):
        raise ValueError("sigma must be strictly positive (apply the count floor first)")
    if np.ptp(y) == 0.0:
        raise DegenerateDataError("data have zero variation; nothing to fit")

    p = np.array(p0, dtype=float)
    lo = np.full(p.size, -np.inf) if lower is None else np.asarray(lower, dtype=float)
    hi = np.full(p.size, np.inf) if upper is None else np.asarray(upper, dtype=float)
    p = np.clip(p, lo, hi)
    inv_sigma = 1.0 / sigma

    def chi2_at(params: np.ndarray) -> float:
        r = (y - model(x, params)) * inv_sigma
        return float(r @ r)

    chi2 = chi2_at(p)
    lam = 1e-3
    for n_iter in range(1, max_iter + 1):
        j = jac(x, p) * inv_sigma[:, None]
        r = (y - model(x, p)) * inv_sigma
        jtj = j.T @ j
        grad = j.T @ r
        diag = np.maximum(np.diag(jtj), 1e-14 * max(np.max(np.diag(jtj)), 1.0))

        # escalate damping until a step improves chi2 (or give up)
        step = None
        while lam <= _LAMBDA_MAX:
            try:
                delta = np.linalg.solve(jtj + lam * np.diag(diag), grad)
            except np.linalg.LinAlgError:
                lam *= 10.0
                continue
            trial = np.clip(p + delta, lo, hi)
            delta = trial - p
            trial_chi2 = chi2_at(trial)
            if np.isfinite(trial_chi2) and trial_chi2 <= chi2:
                step = delta
                p = trial
                improvement = chi2 - trial_chi2
                chi2 = trial_chi2
                lam = max(lam / 3.0, 1e-12)
                break
            lam *= 10.0

        if step is None:
            # no downhill step exists: converged if the gradient agrees
            if np.max(np.abs(grad)) <= _GRAD_TOL * max(1.0, chi2):
                return _finish(jac, x, p, sigma, chi2, n_iter)
            raise FitError(
                "no descent step found before reaching the damping limit",
                diagnostics={"params": p.tolist(), "chi2": chi2, "n_iter": n_iter},
            )

        if np.linalg.norm(step) <= step_tol * (np.linalg.norm(p) + step_tol):
            return _finish(jac, x, p, sigma, chi2, n_iter)
        # chi2 reduction at the noise floor: further digging only tunes noise
        if n_iter > 1 and improvement <= _FTOL * chi2 + 1e-12:
            return _finish(jac, x, p, sigma, chi2, n_iter)

    raise FitError(
        f"did not converge within {max_iter} iterations",
        diagnostics={"params": p.tolist(), "chi2": chi2, "n_iter": max_iter},
    )


def _finish(jac, x, p, sigma, chi2, n_iter) -> LMResult:
    cov = weighted_covariance(jac, x, p, sigma)
    return LMResult(params=p, covariance=cov, chi2=chi2, n_iter=n_iter)
