"""Variance decomposition of a fitted surrogate into Sobol indices.

With an orthonormal basis the output variance is the sum of squared
coefficients over all non-constant terms, and the share attributable to a
variable subset tau is the sum over multi-indices whose support is exactly
tau.  Every subset realizable under the basis truncation is reported, even
when its share is zero, so interaction tables are complete and diffable.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass

import numpy as np

from .surrogate import Surrogate

__all__ = [
    "SobolEntry",
    "SobolReport",
    "DegenerateSurrogateError",
    "compute_sobol",
    "validate_report",
    "write_sobol_csv",
    "write_sobol_json",
]


class DegenerateSurrogateError(ValueError):
    """Raised when the surrogate is constant: zero variance, no indices."""


@dataclass(frozen=True)
class SobolEntry:
    """One variable subset with its absolute and relative variance share."""

    tau: tuple[int, ...]
    d_tau: float
    s_tau: float


@dataclass
class SobolReport:
    """All interaction subsets of one surrogate, sorted by descending share.

    ``tau`` holds 0-based dimension indices; ``names`` carries the matching
    parameter names for presentation.  ``per_variable_total_order[i]`` is
    the sum of relative shares over every subset containing variable i.
    """

    entries: list[SobolEntry]
    total_variance: float
    per_variable_total_order: np.ndarray
    names: tuple[str, ...]

    def share(self, tau) -> float:
        """Relative index for a subset given as dimension indices or names."""
        key = tuple(sorted(self.names.index(v) if isinstance(v, str) else int(v) for v in tau))
        for entry in self.entries:
            if entry.tau == key:
                return entry.s_tau
        raise KeyError(f"subset {tau} not realizable under the basis truncation")


def compute_sobol(s: Surrogate) -> SobolReport:
    """Decompose the surrogate's variance into per-subset Sobol indices.

    The basis is orthonormal, so the total variance is the sum of squared
    coefficients over non-zero multi-indices (the constant term is the mean
    and is excluded), and ``D_tau`` sums the squared coefficients of the
    multi-indices supported exactly on tau.  ``S_tau = D_tau / variance``.

    Raises
    ------
    DegenerateSurrogateError
        If every non-constant coefficient is zero.
    """
    if s.basis.n_terms < 2:
        raise DegenerateSurrogateError("surrogate has no non-constant basis term")

    d_by_subset: dict[tuple[int, ...], float] = {}
    for alpha, c in zip(s.basis.indices[1:], s.coeffs[1:]):
        tau = tuple(int(i) for i in np.flatnonzero(alpha))
        d_by_subset[tau] = d_by_subset.get(tau, 0.0) + float(c) ** 2

    total_variance = sum(d_by_subset.values())
    if total_variance == 0.0:
        raise DegenerateSurrogateError(
            "constant surrogate: total variance is zero, Sobol indices undefined"
        )

    entries = [
        SobolEntry(tau=tau, d_tau=d, s_tau=d / total_variance)
        for tau, d in d_by_subset.items()
    ]
    entries.sort(key=lambda e: (-e.s_tau, e.tau))

    d = s.space.dimension
    totals = np.zeros(d)
    for entry in entries:
        for i in entry.tau:
            totals[i] += entry.s_tau

    return SobolReport(
        entries=entries,
        total_variance=total_variance,
        per_variable_total_order=totals,
        names=s.space.names,
    )


def validate_report(report: SobolReport, tol: float) -> bool:
    """Check normalization: shares sum to one and each lies in [0, 1],
    both within tol."""
    total = sum(e.s_tau for e in report.entries)
    if not (1.0 - tol <= total <= 1.0 + tol):
        return False
    return all(-tol <= e.s_tau <= 1.0 + tol for e in report.entries)


def _subset_label(report: SobolReport, tau: tuple[int, ...]) -> str:
    return "*".join(report.names[i] for i in tau)


def write_sobol_csv(path, report: SobolReport, config_digest: str | None = None) -> None:
    """CSV with columns subset, D_tau, S_tau; subsets labeled by parameter
    names joined with '*'."""
    buf = io.StringIO()
    if config_digest is not None:
        buf.write(f"# config_digest={config_digest}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["subset", "D_tau", "S_tau"])
    for entry in report.entries:
        writer.writerow(
            [
                _subset_label(report, entry.tau),
                format(entry.d_tau, ".17g"),
                format(entry.s_tau, ".17g"),
            ]
        )
    with open(path, "w", newline="") as fh:
        fh.write(buf.getvalue())


def write_sobol_json(path, report: SobolReport, config_digest: str | None = None) -> None:
    """Full JSON record including total variance and total-order indices."""
    doc = {
        "total_variance": report.total_variance,
        "subsets": [
            {
                "variables": [report.names[i] for i in entry.tau],
                "dimensions": list(entry.tau),
                "D_tau": entry.d_tau,
                "S_tau": entry.s_tau,
            }
            for entry in report.entries
        ],
        "total_order": {
            name: float(v) for name, v in zip(report.names, report.per_variable_total_order)
        },
    }
    if config_digest is not None:
        doc["config_digest"] = config_digest
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")
