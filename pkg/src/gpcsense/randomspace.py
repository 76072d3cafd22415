"""Perturbation parameter spaces, Latin hypercube sampling, and the affine
map between physical coordinates and the standardized cube [-1, 1]^d.

Each parameter is a Beta(p, q) variable rescaled to physical limits
[lower, upper].  Sampling draws stratified uniforms per column (Latin
hypercube) and pushes them through the Beta inverse CDF.  All randomness
derives from the single space seed via per-column sub-seeding, so a given
(space, n) pair always produces the same matrix.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np
from scipy import special

from .basis import JacobiParams

__all__ = [
    "RandomParameter",
    "ParameterSpace",
    "SampleMatrix",
    "lhs_unit",
    "beta_icdf",
    "sample",
    "standardize",
    "destandardize",
    "write_samples_csv",
    "read_samples_csv",
]

# Decimal formatting used for all CSV artifacts; 17 significant digits
# round-trip binary doubles exactly.
FLOAT_FORMAT = ".17g"


@dataclass(frozen=True)
class RandomParameter:
    """One perturbation variable: Beta(p, q) shapes on physical limits.

    Units are whatever the perturbation uses (scale factor, degrees, ...).
    The default shapes p = q = 1 give a uniform distribution.
    """

    name: str
    lower: float
    upper: float
    p: float = 1.0
    q: float = 1.0

    def __post_init__(self):
        if not self.name:
            raise ValueError("parameter name must be non-empty")
        if not self.lower < self.upper:
            raise ValueError(f"{self.name}: lower must be < upper")
        if not (self.p > 0 and self.q > 0):
            raise ValueError(f"{self.name}: Beta shapes must be positive")

    def jacobi_params(self) -> JacobiParams:
        """Matching Jacobi weight exponents: Beta(p, q) -> (alpha=q-1, beta=p-1)."""
        return JacobiParams(alpha=self.q - 1.0, beta=self.p - 1.0)


@dataclass(frozen=True)
class ParameterSpace:
    """Ordered collection of perturbation parameters plus the sampling seed."""

    parameters: tuple[RandomParameter, ...]
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "parameters", tuple(self.parameters))
        if len(self.parameters) < 1:
            raise ValueError("parameter space needs at least one parameter")
        names = [p.name for p in self.parameters]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate parameter names: {names}")
        if not (0 <= int(self.seed) < 2**64):
            raise ValueError("seed must fit in an unsigned 64-bit integer")

    @property
    def dimension(self) -> int:
        return len(self.parameters)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(p.name for p in self.parameters)

    @property
    def lowers(self) -> np.ndarray:
        return np.array([p.lower for p in self.parameters])

    @property
    def uppers(self) -> np.ndarray:
        return np.array([p.upper for p in self.parameters])

    def jacobi_params_per_dim(self) -> tuple[JacobiParams, ...]:
        return tuple(p.jacobi_params() for p in self.parameters)


@dataclass
class SampleMatrix:
    """n x d matrix of physical-coordinate samples tied to its space."""

    values: np.ndarray
    space: ParameterSpace

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim != 2 or self.values.shape[1] != self.space.dimension:
            raise ValueError("values must have shape (n, d)")
        if self.values.shape[0] < 1:
            raise ValueError("sample matrix needs at least one row")
        lo, hi = self.space.lowers, self.space.uppers
        if np.any(self.values < lo) or np.any(self.values > hi):
            raise ValueError("sample values outside parameter limits")

    @property
    def n(self) -> int:
        return self.values.shape[0]


def lhs_unit(n: int, d: int, seed: int) -> np.ndarray:
    """Latin hypercube sample of shape (n, d) on [0, 1).

    Each column places exactly one point uniformly at random inside each of
    the n strata [k/n, (k+1)/n), with an independent random permutation of
    strata per column.  Column j draws from a child generator sub-seeded as
    ``SeedSequence(seed, spawn_key=(j,))``, so the result is fully
    determined by (n, d, seed) and column j is unaffected by the presence
    of other columns.
    """
    if n < 1 or d < 1:
        raise ValueError("n and d must be >= 1")
    out = np.empty((n, d))
    for j in range(d):
        rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(j,)))
        strata = rng.permutation(n)
        offsets = rng.random(n)
        out[:, j] = (strata + offsets) / n
    return out


def beta_icdf(u, p: float, q: float):
    """Inverse CDF of the Beta(p, q) distribution on [0, 1].

    Solves regularized-incomplete-Beta(x; p, q) = u to well below 1e-12
    absolute (scipy's inverse regularized incomplete Beta).
    """
    if not (p > 0 and q > 0):
        raise ValueError("Beta shapes must be positive")
    u_arr = np.asarray(u, dtype=float)
    if np.any((u_arr < 0) | (u_arr > 1)):
        raise ValueError("u must lie in [0, 1]")
    x = special.betaincinv(p, q, u_arr)
    if not np.all(np.isfinite(x)):
        raise ArithmeticError(f"Beta inverse CDF failed to converge for p={p}, q={q}")
    return float(x) if np.isscalar(u) else x


def sample(space: ParameterSpace, n: int) -> SampleMatrix:
    """Draw n Latin hypercube samples from the space, in physical units.

    Column j is ``lower_j + (upper_j - lower_j) * beta_icdf(u, p_j, q_j)``
    applied to the stratified uniforms of :func:`lhs_unit` under the space
    seed.
    """
    u = lhs_unit(n, space.dimension, space.seed)
    values = np.empty_like(u)
    for j, par in enumerate(space.parameters):
        values[:, j] = par.lower + (par.upper - par.lower) * beta_icdf(u[:, j], par.p, par.q)
    return SampleMatrix(values=values, space=space)


def _check_limits(space: ParameterSpace, xi_phys: np.ndarray) -> np.ndarray:
    lo, hi = space.lowers, space.uppers
    slack = 1e-9 * (hi - lo)
    if np.any(xi_phys < lo - slack) or np.any(xi_phys > hi + slack):
        raise ValueError(
            f"point outside parameter limits: {xi_phys} not within [{lo}, {hi}]"
        )
    return np.clip(xi_phys, lo, hi)


def standardize(space: ParameterSpace, xi_phys) -> np.ndarray:
    """Map physical coordinates to the standardized cube [-1, 1]^d.

    Accepts a single point of shape (d,) or a batch of shape (n, d).
    Points must lie within limits (round-off slack 1e-9 of the range).
    """
    xi_phys = np.asarray(xi_phys, dtype=float)
    single = xi_phys.ndim == 1
    pts = _check_limits(space, np.atleast_2d(xi_phys))
    lo, hi = space.lowers, space.uppers
    t = 2.0 * (pts - lo) / (hi - lo) - 1.0
    return t[0] if single else t


def destandardize(space: ParameterSpace, t_std) -> np.ndarray:
    """Inverse of :func:`standardize`; exact affine round trip."""
    t_std = np.asarray(t_std, dtype=float)
    single = t_std.ndim == 1
    pts = np.atleast_2d(t_std)
    if np.any(np.abs(pts) > 1.0 + 1e-12):
        raise ValueError("standardized point outside [-1, 1]")
    lo, hi = space.lowers, space.uppers
    xi = lo + (np.clip(pts, -1.0, 1.0) + 1.0) * (hi - lo) / 2.0
    return xi[0] if single else xi


def write_samples_csv(path, samples: SampleMatrix, config_digest: str | None = None) -> None:
    """Write samples as CSV: parameter-name header then one row per sample.

    When given, the config digest is embedded as a leading ``#`` comment
    line so downstream stages can cross-check artifact provenance.
    """
    buf = io.StringIO()
    if config_digest is not None:
        buf.write(f"# config_digest={config_digest}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(samples.space.names)
    for row in samples.values:
        writer.writerow([format(v, FLOAT_FORMAT) for v in row])
    with open(path, "w", newline="") as fh:
        fh.write(buf.getvalue())


def read_samples_csv(path, space: ParameterSpace) -> tuple[SampleMatrix, str | None]:
    """Read a samples CSV back; returns (samples, embedded digest or None).

    The header must match the space's parameter names in order.
    """
    with open(path, newline="") as fh:
        first = fh.readline()
        digest = None
        if first.startswith("#"):
            if "config_digest=" in first:
                digest = first.split("config_digest=", 1)[1].strip()
            first = fh.readline()
        header = next(csv.reader([first]))
        if tuple(header) != space.names:
            raise ValueError(
                f"sample file header {header} does not match space parameters {space.names}"
            )
        rows = [[float(v) for v in row] for row in csv.reader(fh) if row]
    return SampleMatrix(values=np.array(rows), space=space), digest
