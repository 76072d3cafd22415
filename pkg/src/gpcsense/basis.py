"""Jacobi orthogonal polynomials and multivariate polynomial bases.

Univariate Jacobi polynomials are evaluated with the classical three-term
recurrence and rescaled to be orthonormal under the Beta *probability*
measure on [-1, 1] (weight normalized to integrate to one).  Multivariate
basis functions are tensor products selected by a multi-index set with
total-order and/or per-dimension truncation.

A multi-index is a length-d tuple of non-negative integers giving the
polynomial order used in each dimension.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "JacobiParams",
    "BasisSet",
    "jacobi_eval",
    "jacobi_table",
    "jacobi_norm_sq",
    "build_basis",
    "eval_multivariate",
    "basis_matrix",
]

# Round-off slack allowed when clamping evaluation points onto [-1, 1].
_CLAMP_TOL = 1e-12


@dataclass(frozen=True)
class JacobiParams:
    """Jacobi weight exponents: ``(1 - t)**alpha * (1 + t)**beta`` on [-1, 1].

    Both exponents must be > -1 so the weight is integrable.  A Beta(p, q)
    variable on physical limits [a, b] maps to ``JacobiParams(alpha=q - 1,
    beta=p - 1)`` after the affine change of variable ``t = 2(x-a)/(b-a) - 1``.
    """

    alpha: float
    beta: float

    def __post_init__(self):
        if not (self.alpha > -1.0 and math.isfinite(self.alpha)):
            raise ValueError(f"alpha must be a finite real > -1, got {self.alpha}")
        if not (self.beta > -1.0 and math.isfinite(self.beta)):
            raise ValueError(f"beta must be a finite real > -1, got {self.beta}")


def _clamp_to_domain(t):
    """Clamp points onto [-1, 1], rejecting anything beyond round-off slack."""
    t = np.asarray(t, dtype=float)
    if np.any(np.abs(t) > 1.0 + _CLAMP_TOL) or not np.all(np.isfinite(t)):
        bad = t[np.abs(t) > 1.0 + _CLAMP_TOL] if np.all(np.isfinite(t)) else t
        raise ValueError(f"evaluation point outside [-1, 1]: {bad}")
    return np.clip(t, -1.0, 1.0)


def _classical_jacobi_table(max_order: int, params: JacobiParams, t: np.ndarray) -> np.ndarray:
    """Classical (unnormalized) Jacobi polynomials P_0..P_max at points t.

    Three-term recurrence; returns an array of shape ``(len(t), max_order + 1)``.
    """
    a, b = params.alpha, params.beta
    apb = a + b
    out = np.empty((t.size, max_order + 1))
    out[:, 0] = 1.0
    if max_order >= 1:
        out[:, 1] = 0.5 * (a - b + (apb + 2.0) * t)
    for k in range(2, max_order + 1):
        a1 = 2.0 * k * (k + apb) * (2.0 * k + apb - 2.0)
        a2 = (2.0 * k + apb - 1.0) * (a * a - b * b)
        a3 = (2.0 * k + apb - 2.0) * (2.0 * k + apb - 1.0) * (2.0 * k + apb)
        a4 = 2.0 * (k + a - 1.0) * (k + b - 1.0) * (2.0 * k + apb)
        out[:, k] = ((a2 + a3 * t) * out[:, k - 1] - a4 * out[:, k - 2]) / a1
    return out


def jacobi_norm_sq(order: int, params: JacobiParams) -> float:
    """Squared norm of the classical Jacobi polynomial under the Beta
    probability measure.

    The closed-form Gamma expression for the norm under the raw weight
    ``(1-t)**alpha * (1+t)**beta`` is divided by the order-0 weight integral
    ``2**(alpha+beta+1) * B(alpha+1, beta+1)``, so that order 0 has norm
    exactly one.  Evaluated in log space to avoid overflow at high orders.
    """
    if order < 0:
        raise ValueError("order must be non-negative")
    if order == 0:
        return 1.0
    a, b = params.alpha, params.beta
    apb = a + b
    log_h = (
        math.lgamma(order + a + 1.0)
        + math.lgamma(order + b + 1.0)
        - math.lgamma(order + 1.0)
        - math.lgamma(order + apb + 1.0)
        - math.log(2.0 * order + apb + 1.0)
    )
    log_h0 = math.lgamma(a + 1.0) + math.lgamma(b + 1.0) - math.lgamma(apb + 2.0)
    return math.exp(log_h - log_h0)


def jacobi_table(max_order: int, params: JacobiParams, t) -> np.ndarray:
    """Orthonormal Jacobi polynomials of all orders 0..max_order at points t.

    Parameters
    ----------
    max_order : int
        Highest polynomial order to evaluate.
    params : JacobiParams
        Weight exponents.
    t : array_like
        Points in [-1, 1] (round-off slack 1e-12 is clamped).

    Returns
    -------
    np.ndarray
        Shape ``(len(t), max_order + 1)``; column k holds the orthonormal
        order-k polynomial, so column 0 is identically one.
    """
    t = np.atleast_1d(_clamp_to_domain(t))
    table = _classical_jacobi_table(max_order, params, t)
    scale = np.array([1.0 / math.sqrt(jacobi_norm_sq(k, params)) for k in range(max_order + 1)])
    return table * scale


def jacobi_eval(order: int, params: JacobiParams, t):
    """Evaluate the orthonormal Jacobi polynomial of the given order.

    Orthonormal means unit norm under the Beta probability measure on
    [-1, 1], i.e. the integral of ``psi_m * psi_n`` against the normalized
    weight is the Kronecker delta.

    Parameters
    ----------
    order : int
        Polynomial order (>= 0).
    params : JacobiParams
        Weight exponents.
    t : float or array_like
        Point(s) in [-1, 1].

    Returns
    -------
    float or np.ndarray
        Scalar for scalar input, array for array input.
    """
    if order < 0:
        raise ValueError("order must be non-negative")
    scalar = np.isscalar(t) or (isinstance(t, np.ndarray) and t.ndim == 0)
    values = jacobi_table(order, params, t)[:, order]
    return float(values[0]) if scalar else values


@dataclass
class BasisSet:
    """Multivariate polynomial basis: multi-index set plus per-dimension
    Jacobi parameters.

    ``indices`` has shape ``(n_terms, dimension)`` in graded lexicographic
    order with the zero multi-index first.  Instances are treated as
    immutable after construction.
    """

    dimension: int
    indices: np.ndarray
    params_per_dim: tuple[JacobiParams, ...]
    max_total_order: int | None = None
    max_order_per_dim: tuple[int, ...] | None = None

    def __post_init__(self):
        self.indices = np.asarray(self.indices, dtype=int)
        self.params_per_dim = tuple(self.params_per_dim)
        if self.dimension < 1:
            raise ValueError("dimension must be >= 1")
        if self.indices.ndim != 2 or self.indices.shape[1] != self.dimension:
            raise ValueError("indices must have shape (n_terms, dimension)")
        if len(self.params_per_dim) != self.dimension:
            raise ValueError("params_per_dim length must equal dimension")
        if np.any(self.indices < 0):
            raise ValueError("multi-indices must be non-negative")
        if np.any(self.indices[0] != 0):
            raise ValueError("zero multi-index must be first")
        rows = {tuple(row) for row in self.indices}
        if len(rows) != self.indices.shape[0]:
            raise ValueError("duplicate multi-indices")
        if self.max_total_order is None and self.max_order_per_dim is None:
            raise ValueError("at least one truncation rule is required")
        if self.max_total_order is not None and np.any(
            self.indices.sum(axis=1) > self.max_total_order
        ):
            raise ValueError("index exceeds max_total_order")
        if self.max_order_per_dim is not None:
            caps = np.asarray(self.max_order_per_dim, dtype=int)
            if caps.shape != (self.dimension,):
                raise ValueError("max_order_per_dim length must equal dimension")
            if np.any(self.indices > caps):
                raise ValueError("index exceeds max_order_per_dim")
        self.indices.setflags(write=False)

    @property
    def n_terms(self) -> int:
        return self.indices.shape[0]

    def index_tuples(self) -> list[tuple[int, ...]]:
        return [tuple(int(v) for v in row) for row in self.indices]


def build_basis(
    d: int,
    params_per_dim,
    max_total_order: int | None = None,
    max_order_per_dim=None,
) -> BasisSet:
    """Build the truncated multi-index basis set.

    The retained set is ``{alpha : |alpha| <= max_total_order}`` intersected
    with ``{alpha : alpha_i <= max_order_per_dim[i]}`` for whichever rules
    are given (at least one is required).  Indices are ordered graded
    lexicographically: ascending total order, ties broken by descending
    lexicographic comparison, so the zero index is always first and the
    ordering is deterministic.

    Parameters
    ----------
    d : int
        Number of dimensions.
    params_per_dim : sequence of JacobiParams
        One weight definition per dimension.
    max_total_order : int, optional
        Cap on ``sum(alpha)``.
    max_order_per_dim : sequence of int, optional
        Per-dimension order caps.

    Returns
    -------
    BasisSet
    """
    if d < 1:
        raise ValueError("d must be >= 1")
    params_per_dim = tuple(params_per_dim)
    if len(params_per_dim) != d:
        raise ValueError(f"expected {d} JacobiParams, got {len(params_per_dim)}")
    if max_total_order is None and max_order_per_dim is None:
        raise ValueError("at least one of max_total_order / max_order_per_dim is required")
    if max_total_order is not None and max_total_order < 0:
        raise ValueError("max_total_order must be non-negative")

    if max_order_per_dim is not None:
        caps = tuple(int(c) for c in max_order_per_dim)
        if len(caps) != d:
            raise ValueError("max_order_per_dim length must equal d")
        if any(c < 0 for c in caps):
            raise ValueError("per-dimension orders must be non-negative")
    else:
        caps = tuple(int(max_total_order) for _ in range(d))

    candidates = itertools.product(*(range(c + 1) for c in caps))
    if max_total_order is not None:
        candidates = (a for a in candidates if sum(a) <= max_total_order)
    ordered = sorted(candidates, key=lambda a: (sum(a), tuple(-v for v in a)))

    return BasisSet(
        dimension=d,
        indices=np.array(ordered, dtype=int),
        params_per_dim=params_per_dim,
        max_total_order=max_total_order,
        max_order_per_dim=tuple(caps) if max_order_per_dim is not None else None,
    )


def basis_matrix(basis: BasisSet, t_std: np.ndarray) -> np.ndarray:
    """Evaluate every basis function at every standardized point.

    Parameters
    ----------
    basis : BasisSet
    t_std : np.ndarray
        Shape ``(n, d)`` points in [-1, 1]^d.

    Returns
    -------
    np.ndarray
        Shape ``(n, n_terms)``; column 0 is all ones.
    """
    t_std = np.atleast_2d(np.asarray(t_std, dtype=float))
    if t_std.shape[1] != basis.dimension:
        raise ValueError(
            f"points have dimension {t_std.shape[1]}, basis has {basis.dimension}"
        )
    max_per_dim = basis.indices.max(axis=0)
    tables = [
        jacobi_table(int(max_per_dim[j]), basis.params_per_dim[j], t_std[:, j])
        for j in range(basis.dimension)
    ]
    out = np.ones((t_std.shape[0], basis.n_terms))
    for k, alpha in enumerate(basis.indices):
        for j, order in enumerate(alpha):
            if order > 0:
                out[:, k] *= tables[j][:, order]
    return out


def eval_multivariate(basis: BasisSet, xi_std) -> np.ndarray:
    """Evaluate all multivariate basis functions at one standardized point.

    Component k is the product over dimensions of the univariate orthonormal
    polynomial of order ``indices[k, j]`` at ``xi_std[j]``; component 0 is 1.
    """
    xi_std = np.asarray(xi_std, dtype=float)
    if xi_std.shape != (basis.dimension,):
        raise ValueError(f"expected point of shape ({basis.dimension},), got {xi_std.shape}")
    return basis_matrix(basis, xi_std[None, :])[0]
