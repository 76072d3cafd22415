"""Least-squares polynomial chaos surrogate and the logit/logistic link.

Coefficients are estimated by Moore-Penrose pseudoinverse regression on the
design matrix of orthonormal basis evaluations.  Probability-valued model
outputs are mapped to the real line with the logit link before fitting and
back with the logistic function for reporting, so the expansion (and hence
the variance decomposition) lives in logit space.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .basis import BasisSet, basis_matrix
from .randomspace import ParameterSpace, RandomParameter, SampleMatrix, standardize

__all__ = [
    "LinkSpec",
    "FitInfo",
    "Surrogate",
    "design_matrix",
    "fit",
    "predict",
    "nrmsd",
    "logit",
    "logistic",
    "save_surrogate",
    "load_surrogate",
]

SURROGATE_FORMAT_VERSION = 1

# Rows held out for the drift-check refit: every 10th sample when n >= 50.
_HOLDOUT_MIN_N = 50
_HOLDOUT_STRIDE = 10


@dataclass(frozen=True)
class LinkSpec:
    """Output link: identity for unbounded targets, logit for probabilities.

    ``epsilon`` clamps probabilities into [eps, 1-eps] before the logit,
    since classifiers routinely emit exact 0/1 where the logit diverges.
    """

    kind: str = "identity"
    epsilon: float = 1e-6

    def __post_init__(self):
        if self.kind not in ("identity", "logit"):
            raise ValueError(f"unknown link kind: {self.kind}")
        if not (0.0 < self.epsilon < 0.5):
            raise ValueError("epsilon must lie in (0, 0.5)")


def logit(p, link: LinkSpec = LinkSpec(kind="logit")):
    """Clamped log-odds: ``log(p / (1 - p))`` after clamping into
    [epsilon, 1 - epsilon].

    Raises for p outside [0, 1].
    """
    p_arr = np.asarray(p, dtype=float)
    if np.any((p_arr < 0.0) | (p_arr > 1.0)) or not np.all(np.isfinite(p_arr)):
        raise ValueError("probabilities must lie in [0, 1]")
    eps = link.epsilon
    # clamp numerator and complement separately: forming 1 - clamp(p) loses
    # ~1e-11 to cancellation when p is within eps of 1
    hi = np.clip(p_arr, eps, 1.0 - eps)
    lo = np.clip(1.0 - p_arr, eps, 1.0 - eps)
    out = np.log(hi) - np.log(lo)
    return float(out) if np.isscalar(p) else out


def logistic(z):
    """Inverse of the logit: ``1 / (1 + exp(-z))``, overflow-safe for any z."""
    z_arr = np.asarray(z, dtype=float)
    out = np.empty_like(z_arr)
    pos = z_arr >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z_arr[pos]))
    ez = np.exp(z_arr[~pos])
    out[~pos] = ez / (1.0 + ez)
    return float(out) if np.isscalar(z) else out


@dataclass
class FitInfo:
    """Metadata recorded by :func:`fit`."""

    n_samples: int
    in_sample_nrmsd: float
    holdout_nrmsd: float | None = None
    svd_cutoff: float = 0.0
    seed: int = 0
    extras: dict = field(default_factory=dict)


@dataclass
class Surrogate:
    """Fitted polynomial chaos expansion: basis, space, and coefficients."""

    basis: BasisSet
    space: ParameterSpace
    coeffs: np.ndarray
    fit_info: FitInfo

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=float)
        if self.coeffs.shape != (self.basis.n_terms,):
            raise ValueError(
                f"coefficient vector length {self.coeffs.shape} does not match "
                f"basis size {self.basis.n_terms}"
            )
        if not np.all(np.isfinite(self.coeffs)):
            raise ValueError("coefficients must be finite")
        if self.basis.dimension != self.space.dimension:
            raise ValueError("basis and space dimension mismatch")


def design_matrix(basis: BasisSet, space: ParameterSpace, samples) -> np.ndarray:
    """Row i = multivariate basis evaluated at the standardized sample i.

    ``samples`` is a SampleMatrix or a plain (n, d) array of physical
    coordinates.  Shape (n, n_terms); column 0 is all ones.
    """
    values = samples.values if isinstance(samples, SampleMatrix) else np.asarray(samples, dtype=float)
    t_std = standardize(space, values)
    return basis_matrix(basis, t_std)


def _nrmsd_values(y: np.ndarray, y_hat: np.ndarray) -> float:
    y = np.asarray(y, dtype=float)
    rms_y = float(np.sqrt(np.mean(y**2)))
    if rms_y == 0.0:
        raise ValueError("normalized error undefined: data has zero RMS")
    return float(np.sqrt(np.mean((y - y_hat) ** 2)) / rms_y)


def fit(basis: BasisSet, space: ParameterSpace, samples: SampleMatrix, y) -> Surrogate:
    """Estimate expansion coefficients by pseudoinverse least squares.

    The design matrix pseudoinverse is computed by SVD with singular values
    below ``rcond * sigma_max`` zeroed, ``rcond = machine_eps * max(n,
    n_terms)``; underdetermined systems get the minimum-norm solution.  Any
    output link must already be applied to ``y`` by the caller.

    ``fit_info.in_sample_nrmsd`` is the RMS-over-RMS error on the training
    samples.  When n >= 50 a drift check is recorded as well: every 10th
    row is held out, the model is refitted on the rest, and the normalized
    error on the held-out rows is stored as ``holdout_nrmsd`` (the returned
    coefficients always come from the full fit).
    """
    y = np.asarray(y, dtype=float)
    if y.shape != (samples.n,):
        raise ValueError(f"y must have shape ({samples.n},), got {y.shape}")
    if not np.all(np.isfinite(y)):
        raise ValueError("y must be finite (apply the link before fitting)")

    A = design_matrix(basis, space, samples)
    if not np.any(A):
        raise ValueError("design matrix is identically zero")

    def solve(mat: np.ndarray, rhs: np.ndarray) -> tuple[np.ndarray, float]:
        rcond = np.finfo(float).eps * max(mat.shape)
        return np.linalg.pinv(mat, rcond=rcond) @ rhs, rcond

    coeffs, rcond = solve(A, y)

    holdout_nrmsd = None
    if samples.n >= _HOLDOUT_MIN_N:
        hold = np.zeros(samples.n, dtype=bool)
        hold[::_HOLDOUT_STRIDE] = True
        coeffs_train, _ = solve(A[~hold], y[~hold])
        y_hold = y[hold]
        if np.any(y_hold != 0.0):
            holdout_nrmsd = _nrmsd_values(y_hold, A[hold] @ coeffs_train)

    surrogate = Surrogate(
        basis=basis,
        space=space,
        coeffs=coeffs,
        fit_info=FitInfo(
            n_samples=samples.n,
            in_sample_nrmsd=float("nan"),
            holdout_nrmsd=holdout_nrmsd,
            svd_cutoff=rcond,
            seed=space.seed,
        ),
    )
    surrogate.fit_info.in_sample_nrmsd = nrmsd(surrogate, samples, y)
    return surrogate


def predict(s: Surrogate, xi_phys):
    """Evaluate the expansion at physical point(s) within the limits.

    Accepts one point of shape (d,) returning a float, or a batch (n, d)
    returning an array.  Points outside the limits are rejected; the
    surrogate does not extrapolate.
    """
    xi_phys = np.asarray(xi_phys, dtype=float)
    single = xi_phys.ndim == 1
    t_std = standardize(s.space, xi_phys)
    values = basis_matrix(s.basis, np.atleast_2d(t_std)) @ s.coeffs
    return float(values[0]) if single else values


def nrmsd(s: Surrogate, samples: SampleMatrix, y) -> float:
    """Normalized error: RMS of (y - prediction) over RMS of y."""
    return _nrmsd_values(np.asarray(y, dtype=float), predict(s, samples.values))


def _surrogate_to_dict(s: Surrogate, config_digest: str | None = None) -> dict:
    doc = {
        "format_version": SURROGATE_FORMAT_VERSION,
        "space": {
            "seed": int(s.space.seed),
            "parameters": [
                {"name": p.name, "p": p.p, "q": p.q, "lower": p.lower, "upper": p.upper}
                for p in s.space.parameters
            ],
        },
        "basis": {
            "max_total_order": s.basis.max_total_order,
            "max_order_per_dim": list(s.basis.max_order_per_dim)
            if s.basis.max_order_per_dim is not None
            else None,
            "indices": [[int(v) for v in row] for row in s.basis.indices],
        },
        "coeffs": [float(c) for c in s.coeffs],
        "fit_info": {
            "n_samples": s.fit_info.n_samples,
            "in_sample_nrmsd": s.fit_info.in_sample_nrmsd,
            "holdout_nrmsd": s.fit_info.holdout_nrmsd,
            "svd_cutoff": s.fit_info.svd_cutoff,
            "seed": int(s.fit_info.seed),
            **({"extras": s.fit_info.extras} if s.fit_info.extras else {}),
        },
    }
    if config_digest is not None:
        doc["config_digest"] = config_digest
    return doc


def _surrogate_from_dict(doc: dict) -> Surrogate:
    space = ParameterSpace(
        parameters=tuple(
            RandomParameter(
                name=p["name"], lower=p["lower"], upper=p["upper"], p=p["p"], q=p["q"]
            )
            for p in doc["space"]["parameters"]
        ),
        seed=doc["space"]["seed"],
    )
    b = doc["basis"]
    basis = BasisSet(
        dimension=space.dimension,
        indices=np.array(b["indices"], dtype=int),
        params_per_dim=space.jacobi_params_per_dim(),
        max_total_order=b["max_total_order"],
        max_order_per_dim=tuple(b["max_order_per_dim"])
        if b["max_order_per_dim"] is not None
        else None,
    )
    info = doc["fit_info"]
    return Surrogate(
        basis=basis,
        space=space,
        coeffs=np.array(doc["coeffs"], dtype=float),
        fit_info=FitInfo(
            n_samples=info["n_samples"],
            in_sample_nrmsd=info["in_sample_nrmsd"],
            holdout_nrmsd=info["holdout_nrmsd"],
            svd_cutoff=info["svd_cutoff"],
            seed=info["seed"],
            extras=info.get("extras", {}),
        ),
    )


def save_surrogate(path, s: Surrogate, config_digest: str | None = None) -> None:
    """Serialize to JSON.  Floats are written at full round-trip precision,
    so a load reproduces predictions bit for bit."""
    with open(path, "w") as fh:
        json.dump(_surrogate_to_dict(s, config_digest), fh, indent=2)
        fh.write("\n")


def load_surrogate(path) -> tuple[Surrogate, str | None]:
    """Load a serialized surrogate; returns (surrogate, config digest or None)."""
    with open(path) as fh:
        doc = json.load(fh)
    return _surrogate_from_dict(doc), doc.get("config_digest")
