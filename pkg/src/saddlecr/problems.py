"""Benchmark saddle-point problems with ground-truth metadata.

The main instance is the cubic-bilinear problem

    f(x, y) = rho/6 ||x||^3 + y.(A x - b)

whose saddle point is known in closed form, plus a one-dimensional
version of it for hand-checkable tests and a purely bilinear problem as
the zero-curvature edge case.

Randomness is drawn from numpy's PCG64 via ``default_rng``.  Stream
splitting is by seed sequence: ``(seed, 0)`` generates the right-hand
side b, ``(seed, 1)`` generates the initial-point offset c, so the two
draws never alias.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import Matrix, Point, ProblemDims, ProblemOracle, Vector

_B_STREAM = 0
_C_STREAM = 1


class CubicBilinearProblem(ProblemOracle):
    """f(x, y) = rho/6 ||x||^3 + y.(A x - b) with invertible A."""

    def __init__(self, rho: float, A: Matrix, b: Vector, seed: int | None = None):
        A = np.array(A, dtype=float)
        b = np.array(b, dtype=float)
        n = A.shape[0]
        if A.shape != (n, n):
            raise ValueError(f"A must be square, got shape {A.shape}")
        if b.shape != (n,):
            raise ValueError(f"b must have length {n}, got shape {b.shape}")
        if rho <= 0:
            raise ValueError(f"rho must be > 0, got {rho}")
        # Fails on singular A; also caches the solves for the saddle point.
        try:
            x_star = np.linalg.solve(A, b)
        except np.linalg.LinAlgError as exc:
            raise ValueError("A must be invertible") from exc
        self.n = n
        self.rho = float(rho)
        self.A = A
        self.b = b
        self.seed = seed
        self.dims = ProblemDims(n, n)
        y_star = -0.5 * rho * np.linalg.norm(x_star) * np.linalg.solve(A.T, x_star)
        self._saddle = Point(np.concatenate([x_star, y_star]), self.dims)

    def value(self, z: Vector) -> float:
        x, y = z[: self.n], z[self.n :]
        return self.rho / 6.0 * float(np.linalg.norm(x)) ** 3 + float(
            y @ (self.A @ x - self.b)
        )

    def operator(self, z: Vector) -> Vector:
        x, y = z[: self.n], z[self.n :]
        gx = 0.5 * self.rho * np.linalg.norm(x) * x + self.A.T @ y
        gy = self.A @ x - self.b
        return np.concatenate([gx, -gy])

    def jacobian(self, z: Vector) -> Matrix:
        x = z[: self.n]
        n = self.n
        jac = np.zeros((2 * n, 2 * n))
        xnorm = np.linalg.norm(x)
        if xnorm > 0.0:
            # Hessian of rho/6 ||x||^3; continuous limit 0 at x = 0.
            jac[:n, :n] = 0.5 * self.rho * (xnorm * np.eye(n) + np.outer(x, x) / xnorm)
        jac[:n, n:] = self.A.T
        jac[n:, :n] = -self.A
        return jac

    def known_saddle(self) -> Point:
        return self._saddle

    def hessian_lipschitz(self) -> float:
        return self.rho


class ScalarToyProblem(CubicBilinearProblem):
    """One-dimensional cubic-bilinear instance f = rho/6 |x|^3 + y (a x - b)."""

    def __init__(self, rho: float = 2.0, a: float = 1.0, b: float = 1.0):
        if a == 0:
            raise ValueError("a must be nonzero")
        super().__init__(rho, np.array([[float(a)]]), np.array([float(b)]))
        self.a = float(a)
        self.b_scalar = float(b)


class BilinearToyProblem(ProblemOracle):
    """f(x, y) = y.(A x): constant Jacobian, zero Hessian-Lipschitz constant."""

    def __init__(self, A: Matrix):
        A = np.array(A, dtype=float)
        n = A.shape[0]
        if A.shape != (n, n):
            raise ValueError(f"A must be square, got shape {A.shape}")
        self.n = n
        self.A = A
        self.dims = ProblemDims(n, n)
        jac = np.zeros((2 * n, 2 * n))
        jac[:n, n:] = A.T
        jac[n:, :n] = -A
        self._jac = jac
        self._invertible = np.linalg.matrix_rank(A) == n

    def value(self, z: Vector) -> float:
        return float(z[self.n :] @ (self.A @ z[: self.n]))

    def operator(self, z: Vector) -> Vector:
        x, y = z[: self.n], z[self.n :]
        return np.concatenate([self.A.T @ y, -(self.A @ x)])

    def jacobian(self, z: Vector) -> Matrix:
        return self._jac.copy()

    def known_saddle(self) -> Point | None:
        if self._invertible:
            return Point(np.zeros(2 * self.n), self.dims)
        return None

    def hessian_lipschitz(self) -> float:
        return 0.0


def make_cubic_bilinear(
    n: int, rho: float, A: Matrix | None = None, b_seed: int | Vector = 0
) -> CubicBilinearProblem:
    """Construct a cubic-bilinear instance.

    ``b_seed`` is either an explicit right-hand side vector or an integer
    seed from which b is drawn uniformly from [-1, 1] on the b stream.
    """
    if A is None:
        A = np.eye(n)
    if np.ndim(b_seed) == 1:
        b = np.array(b_seed, dtype=float)
        seed = None
    else:
        seed = int(b_seed)
        rng = np.random.default_rng(np.random.SeedSequence([seed, _B_STREAM]))
        b = rng.uniform(-1.0, 1.0, size=n)
    return CubicBilinearProblem(rho, A, b, seed=seed)


def initial_point(problem: ProblemOracle, seed: int) -> Point:
    """z0 = z* + 0.1 c with c uniform in [-1, 1] on the c stream."""
    saddle = problem.known_saddle()
    if saddle is None:
        raise ValueError("problem has no known saddle point")
    rng = np.random.default_rng(np.random.SeedSequence([int(seed), _C_STREAM]))
    c = rng.uniform(-1.0, 1.0, size=saddle.dims.total)
    return saddle.replace(saddle.data + 0.1 * c)


@dataclass(frozen=True)
class GapQuery:
    """Ball radius and reference saddle for the restricted gap."""

    beta: float
    reference: Point

    def __post_init__(self) -> None:
        if self.beta < 0:
            raise ValueError(f"beta must be >= 0, got {self.beta}")


@dataclass
class GapResult:
    gap: float
    x_solver_converged: bool
    x_solver_tol: float


def default_beta(problem: ProblemOracle, z0: Point) -> float:
    """Ball radius 7 ||z0 - z*|| covering every iterate of the solvers."""
    saddle = problem.known_saddle()
    if saddle is None:
        raise ValueError("problem has no known saddle point")
    return 7.0 * float(np.linalg.norm(z0.data - saddle.data))


def restricted_gap(
    problem: CubicBilinearProblem,
    z_hat: Point,
    query: GapQuery,
    tol: float = 1e-8,
    max_iters: int = 100_000,
) -> GapResult:
    """Restricted primal-dual gap of the cubic-bilinear problem.

    max over y in a ball around y* of f(x_hat, y), minus min over x in a
    ball around x* of f(x, y_hat).  The y side is linear and closed
    form; the x side is convex and solved by projected gradient descent
    with a fixed step below the inverse local curvature bound.
    """
    n = problem.n
    rho = problem.rho
    beta = query.beta
    x_hat = z_hat.x
    y_hat = z_hat.y
    x_star = query.reference.x
    y_star = query.reference.y

    # y maximization: linear objective over a ball.
    r = problem.A @ x_hat - problem.b
    rnorm = np.linalg.norm(r)
    y_opt = y_star + beta * r / rnorm if rnorm > 0 else y_star
    max_val = rho / 6.0 * float(np.linalg.norm(x_hat)) ** 3 + float(y_opt @ r)

    # x minimization: rho/6 ||x||^3 + y_hat.(A x) + const over the ball.
    lin = problem.A.T @ y_hat
    lip = rho * (np.linalg.norm(x_star) + beta) + 1e-12
    step = 1.0 / lip

    def grad(x):
        return 0.5 * rho * np.linalg.norm(x) * x + lin

    def project(x):
        d = x - x_star
        dn = np.linalg.norm(d)
        return x if dn <= beta else x_star + beta * d / dn

    x = project(np.array(x_hat, dtype=float, copy=True))
    converged = False
    achieved = np.inf
    for _ in range(max_iters):
        x_next = project(x - step * grad(x))
        # Gradient-mapping norm is the natural stationarity measure here.
        achieved = np.linalg.norm(x_next - x) / step
        x = x_next
        if achieved <= tol * (1.0 + np.linalg.norm(lin)):
            converged = True
            break
    min_val = rho / 6.0 * float(np.linalg.norm(x)) ** 3 + float(
        y_hat @ (problem.A @ x - problem.b)
    )
    return GapResult(
        gap=max_val - min_val, x_solver_converged=converged, x_solver_tol=float(achieved)
    )


def save_instance(problem: CubicBilinearProblem, path: str) -> None:
    """Write a replayable plain-text description of a problem instance."""
    fmt = "%.17g"
    lines = [
        "format=saddlecr-cubic-bilinear-v1",
        f"n={problem.n}",
        "rho=" + fmt % problem.rho,
        f"b_seed={'none' if problem.seed is None else problem.seed}",
        "A=" + " ".join(fmt % v for v in problem.A.ravel(order="C")),
        "b=" + " ".join(fmt % v for v in problem.b),
    ]
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def load_instance(path: str) -> CubicBilinearProblem:
    """Read an instance file written by :func:`save_instance`."""
    fields = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key, _, value = line.partition("=")
            fields[key] = value
    if fields.get("format") != "saddlecr-cubic-bilinear-v1":
        raise ValueError(f"unrecognized instance format in {path}")
    n = int(fields["n"])
    rho = float(fields["rho"])
    A = np.array([float(v) for v in fields["A"].split()]).reshape(n, n)
    b = np.array([float(v) for v in fields["b"].split()])
    seed = None if fields["b_seed"] == "none" else int(fields["b_seed"])
    return CubicBilinearProblem(rho, A, b, seed=seed)
