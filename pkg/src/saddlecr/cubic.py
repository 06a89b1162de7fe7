"""Cubic-regularized Newton step for monotone operators.

Solves ``g + J (z - z_hat) + 6 H ||z - z_hat|| (z - z_hat) = 0`` by the
standard reduction to a scalar secular equation: the step has the form
``delta = -(J + theta I)^{-1} g`` where the shift couples back through
``theta = 6 H ||delta||``.  The scalar residual

    phi(theta) = ||(J + theta I)^{-1} g|| - theta / (6 H)

is strictly decreasing and convex for theta > 0 when the symmetric part
of J is positive semidefinite, so a safeguarded scalar Newton iteration
finds its unique root.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import lu_factor, lu_solve

_THETA_MIN = 1e-12
_THETA_MAX = 1e12

DEFAULT_PHI_TOL = 1e-11
DEFAULT_NEWTON_CAP = 100


class SecularSolveError(RuntimeError):
    """Scalar Newton iteration failed to converge within its cap."""


@dataclass
class CubicStepResult:
    z_new: np.ndarray
    theta: float
    step_norm: float
    residual: float
    newton_iters: int
    bisection_fallbacks: int


def secular_phi(
    g: np.ndarray, J: np.ndarray, H: float, theta: float
) -> tuple[float, float]:
    """Evaluate the secular residual and its derivative at ``theta``.

    One LU factorization of ``J + theta I`` serves both the solve for
    ``w = (J + theta I)^{-1} g`` and the derivative solve for
    ``u = (J + theta I)^{-1} w``; the derivative is
    ``-w.u / ||w|| - 1/(6H)``.
    """
    if theta <= 0:
        raise ValueError(f"theta must be > 0, got {theta}")
    shifted = np.array(J, dtype=float, copy=True)
    shifted[np.diag_indices_from(shifted)] += theta
    lu = lu_factor(shifted)
    w = lu_solve(lu, g)
    wnorm = float(np.linalg.norm(w))
    phi = wnorm - theta / (6.0 * H)
    if wnorm == 0.0:
        dphi = -1.0 / (6.0 * H)
    else:
        u = lu_solve(lu, w)
        dphi = -float(w @ u) / wnorm - 1.0 / (6.0 * H)
    return phi, dphi


def _phi_with_factorization(g, J, H, theta):
    """Like :func:`secular_phi` but also returns the factorization and w."""
    shifted = np.array(J, dtype=float, copy=True)
    shifted[np.diag_indices_from(shifted)] += theta
    lu = lu_factor(shifted)
    w = lu_solve(lu, g)
    wnorm = float(np.linalg.norm(w))
    phi = wnorm - theta / (6.0 * H)
    if wnorm == 0.0:
        dphi = -1.0 / (6.0 * H)
    else:
        u = lu_solve(lu, w)
        dphi = -float(w @ u) / wnorm - 1.0 / (6.0 * H)
    return phi, dphi, w


def _solve_theta(
    g: np.ndarray,
    J: np.ndarray,
    H: float,
    tol: float,
    theta_hint: float | None,
    max_iter: int,
):
    """Safeguarded Newton on the secular equation.

    Returns ``(theta, w, iters, fallbacks)`` where ``w`` is the solve at
    the final theta, so the caller can form the step without an extra
    factorization.  Returns theta = 0 (and w = 0) for negligible ``g``.
    """
    if H <= 0:
        raise ValueError(f"H must be > 0, got {H}")
    gnorm = float(np.linalg.norm(g))
    jnorm = float(np.linalg.norm(J, "fro"))
    if gnorm <= 1e-14 * (1.0 + jnorm):
        return 0.0, np.zeros_like(g), 0, 0

    if theta_hint is not None and np.isfinite(theta_hint) and theta_hint > 0:
        theta = min(max(theta_hint, _THETA_MIN), _THETA_MAX)
    else:
        theta = min(max(6.0 * H * gnorm / (1.0 + jnorm), _THETA_MIN), _THETA_MAX)

    # phi > 0 to the left of the root, phi < 0 to the right.
    lo = 0.0
    hi = np.inf
    fallbacks = 0
    best = None

    for it in range(1, max_iter + 1):
        try:
            phi, dphi, w = _phi_with_factorization(g, J, H, theta)
        except np.linalg.LinAlgError:
            # Singular shift; the root lies strictly above it.
            lo = max(lo, theta)
            theta = theta * 2.0 if hi == np.inf else 0.5 * (lo + hi)
            fallbacks += 1
            continue

        if best is None or abs(phi) < best[0]:
            best = (abs(phi), theta, w, it, fallbacks)

        if phi > 0.0:
            lo = max(lo, theta)
        else:
            hi = min(hi, theta)

        # Tight enough that both the residual contract and the coupling
        # theta = 6 H ||delta|| hold well below 1e-8 relative.
        if abs(phi) <= tol * (1.0 + gnorm) and 6.0 * H * abs(phi) <= tol * (
            1.0 + theta
        ):
            return theta, w, it, fallbacks

        if np.isfinite(hi) and hi - lo <= 1e-15 * max(1.0, hi):
            # Bracket at roundoff width; phi is at its attainable floor.
            return theta, w, it, fallbacks

        if dphi < 0.0 and np.isfinite(dphi):
            candidate = theta - phi / dphi
        else:
            candidate = np.nan
        if not np.isfinite(candidate) or candidate <= lo or candidate >= hi:
            fallbacks += 1
            candidate = theta * 2.0 if hi == np.inf else 0.5 * (lo + hi)
        theta = candidate

    if best is not None and best[0] <= 1e-6 * (1.0 + gnorm):
        _, theta, w, it, fb = best
        return theta, w, max_iter, fb
    raise SecularSolveError(
        f"secular Newton failed after {max_iter} iterations; "
        f"bracket [{lo:.6g}, {hi:.6g}]"
    )


def solve_theta(
    g: np.ndarray,
    J: np.ndarray,
    H: float,
    tol: float = DEFAULT_PHI_TOL,
    theta_hint: float | None = None,
) -> float:
    """Root of the secular equation; 0 when ``g`` is negligible."""
    theta, _, _, _ = _solve_theta(g, J, H, tol, theta_hint, DEFAULT_NEWTON_CAP)
    return theta


def solve_cubic_step(
    z_hat: np.ndarray,
    g: np.ndarray,
    J: np.ndarray,
    H: float,
    theta_hint: float | None = None,
) -> CubicStepResult:
    """Solve one cubic-regularized step at ``z_hat``.

    The returned point satisfies ``(J + theta I)(z_new - z_hat) = -g``
    with ``theta = 6 H ||z_new - z_hat||``; for ``g = 0`` the step
    degenerates to ``z_new = z_hat`` with theta = 0.
    """
    theta, w, iters, fallbacks = _solve_theta(
        g, J, H, DEFAULT_PHI_TOL, theta_hint, DEFAULT_NEWTON_CAP
    )
    if theta == 0.0:
        return CubicStepResult(
            z_new=np.array(z_hat, dtype=float, copy=True),
            theta=0.0,
            step_norm=0.0,
            residual=float(np.linalg.norm(g)),
            newton_iters=iters,
            bisection_fallbacks=fallbacks,
        )
    delta = -w
    z_new = z_hat + delta
    residual = step_residual(z_hat, z_new, g, J, H)
    return CubicStepResult(
        z_new=z_new,
        theta=theta,
        step_norm=float(np.linalg.norm(delta)),
        residual=residual,
        newton_iters=iters,
        bisection_fallbacks=fallbacks,
    )


def step_residual(
    z_hat: np.ndarray,
    z_new: np.ndarray,
    g: np.ndarray,
    J: np.ndarray,
    H: float,
) -> float:
    """Norm of ``g + J delta + 6 H ||delta|| delta`` for delta = z_new - z_hat."""
    delta = z_new - z_hat
    return float(
        np.linalg.norm(g + J @ delta + 6.0 * H * np.linalg.norm(delta) * delta)
    )
