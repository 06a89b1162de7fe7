"""Shared domain types for saddle-point problems.

A problem is described by an oracle exposing the scalar objective, the
monotone operator built from its partial gradients (dual block negated),
and the Jacobian of that operator.  All algorithms consume only the
oracle interface; ground-truth metadata (saddle point, Hessian Lipschitz
constant) is optional and reserved for tests and diagnostics.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

Vector = np.ndarray
Matrix = np.ndarray

# Operator values are plain vectors of length m + n and Jacobians dense
# (m+n) x (m+n) matrices; no wrapper types are needed beyond Point.
OperatorValue = Vector
JacobianValue = Matrix


@dataclass(frozen=True)
class ProblemDims:
    """Dimension split of the joint variable z = [x; y]."""

    m: int
    n: int

    def __post_init__(self) -> None:
        if self.m < 1 or self.n < 1:
            raise ValueError(f"dimensions must be >= 1, got m={self.m}, n={self.n}")

    @property
    def total(self) -> int:
        return self.m + self.n


@dataclass(frozen=True)
class Point:
    """A joint primal-dual vector z = [x; y]."""

    data: Vector
    dims: ProblemDims

    def __post_init__(self) -> None:
        data = np.asarray(self.data, dtype=float)
        if data.ndim != 1 or data.shape[0] != self.dims.total:
            raise ValueError(
                f"point has length {np.asarray(self.data).shape}, "
                f"expected {self.dims.total}"
            )
        object.__setattr__(self, "data", data)

    @property
    def x(self) -> Vector:
        return self.data[: self.dims.m]

    @property
    def y(self) -> Vector:
        return self.data[self.dims.m :]

    def replace(self, data: Vector) -> "Point":
        return Point(np.asarray(data, dtype=float), self.dims)


class ProblemOracle:
    """Evaluation contract for a convex-concave saddle problem.

    Subclasses implement ``value``, ``operator`` and ``jacobian`` as pure
    deterministic functions of the joint vector.  ``known_saddle`` and
    ``hessian_lipschitz`` are test-only metadata and must never be read
    by the solvers themselves.
    """

    dims: ProblemDims

    def value(self, z: Vector) -> float:
        raise NotImplementedError

    def operator(self, z: Vector) -> Vector:
        """F(z) = [grad_x f; -grad_y f] evaluated at z."""
        raise NotImplementedError

    def jacobian(self, z: Vector) -> Matrix:
        raise NotImplementedError

    def known_saddle(self) -> Point | None:
        return None

    def hessian_lipschitz(self) -> float | None:
        return None


class RegularizedOracle(ProblemOracle):
    """Proximal wrapper adding sigma/2 ||x - cx||^2 - sigma/2 ||y - cy||^2.

    The wrapper shifts the operator by ``sigma * (z - center)`` and the
    Jacobian by ``sigma * I``; with sigma = 0 it is transparent.
    """

    def __init__(self, base: ProblemOracle, sigma: float, center: Point):
        if sigma < 0:
            raise ValueError(f"sigma must be >= 0, got {sigma}")
        if center.dims != base.dims:
            raise ValueError("center dimensions do not match base oracle")
        self.base = base
        self.sigma = float(sigma)
        self.center = center
        self.dims = base.dims

    def value(self, z: Vector) -> float:
        m = self.dims.m
        dx = z[:m] - self.center.data[:m]
        dy = z[m:] - self.center.data[m:]
        return self.base.value(z) + 0.5 * self.sigma * (dx @ dx - dy @ dy)

    def operator(self, z: Vector) -> Vector:
        return self.base.operator(z) + self.sigma * (z - self.center.data)

    def jacobian(self, z: Vector) -> Matrix:
        jac = np.array(self.base.jacobian(z), dtype=float, copy=True)
        jac[np.diag_indices_from(jac)] += self.sigma
        return jac

    def known_saddle(self) -> Point | None:
        if self.sigma == 0.0:
            return self.base.known_saddle()
        return None

    def hessian_lipschitz(self) -> float | None:
        # The proximal term is quadratic, so the constant is unchanged.
        return self.base.hessian_lipschitz()


class CountingOracle(ProblemOracle):
    """Pass-through wrapper counting value/operator/jacobian evaluations."""

    def __init__(self, base: ProblemOracle):
        self.base = base
        self.dims = base.dims
        self.value_evals = 0
        self.operator_evals = 0
        self.jacobian_evals = 0

    def value(self, z: Vector) -> float:
        self.value_evals += 1
        return self.base.value(z)

    def operator(self, z: Vector) -> Vector:
        self.operator_evals += 1
        return self.base.operator(z)

    def jacobian(self, z: Vector) -> Matrix:
        self.jacobian_evals += 1
        return self.base.jacobian(z)

    def known_saddle(self) -> Point | None:
        return self.base.known_saddle()

    def hessian_lipschitz(self) -> float | None:
        return self.base.hessian_lipschitz()


def _check_dims(oracle: ProblemOracle, z: Point) -> None:
    if z.dims != oracle.dims:
        raise ValueError(f"point dims {z.dims} do not match oracle dims {oracle.dims}")


def operator_f(oracle: ProblemOracle, z: Point) -> OperatorValue:
    """Evaluate the saddle operator [grad_x f; -grad_y f] at z."""
    _check_dims(oracle, z)
    return oracle.operator(z.data)


def jacobian_df(oracle: ProblemOracle, z: Point) -> JacobianValue:
    """Evaluate the operator Jacobian at z (dual rows negated)."""
    _check_dims(oracle, z)
    return oracle.jacobian(z.data)


def grad_norm(oracle: ProblemOracle, z: Point) -> float:
    """Norm of the full gradient of f at z.

    The dual-block sign flip in the operator preserves the Euclidean
    norm, so this equals ``||operator_f(z)||`` exactly.
    """
    _check_dims(oracle, z)
    return float(np.linalg.norm(oracle.operator(z.data)))


def regularize(base: ProblemOracle, sigma: float, center: Point) -> RegularizedOracle:
    """Wrap an oracle with a proximal term centered at ``center``."""
    return RegularizedOracle(base, sigma, center)


def finite_difference_check(
    oracle: ProblemOracle, z: Point, h: float
) -> tuple[float, float]:
    """Cross-check operator and Jacobian against central differences.

    Returns ``(grad_err, jac_err)``: the relative mismatch between the
    gradient implied by ``operator`` and central differences of
    ``value``, and between ``jacobian`` and central differences of
    ``operator``.  The caller must keep ``z`` away from nonsmooth loci
    of the problem.
    """
    if h <= 0:
        raise ValueError(f"h must be > 0, got {h}")
    _check_dims(oracle, z)
    d = z.dims.total
    m = z.dims.m
    z0 = z.data

    fd_grad = np.empty(d)
    for i in range(d):
        e = np.zeros(d)
        e[i] = h
        fd_grad[i] = (oracle.value(z0 + e) - oracle.value(z0 - e)) / (2.0 * h)

    op = oracle.operator(z0)
    implied_grad = np.concatenate([op[:m], -op[m:]])
    grad_err = float(
        np.linalg.norm(fd_grad - implied_grad) / (1.0 + np.linalg.norm(implied_grad))
    )

    fd_jac = np.empty((d, d))
    for j in range(d):
        e = np.zeros(d)
        e[j] = h
        fd_jac[:, j] = (oracle.operator(z0 + e) - oracle.operator(z0 - e)) / (2.0 * h)

    jac = oracle.jacobian(z0)
    jac_err = float(
        np.linalg.norm(fd_jac - jac, "fro") / (1.0 + np.linalg.norm(jac, "fro"))
    )
    return grad_err, jac_err
