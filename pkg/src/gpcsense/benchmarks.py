"""Analytic sensitivity benchmarks: the Ishigami function and Sobol's
g-function.

Both have closed-form variance decompositions, so a fitted surrogate's
Sobol indices can be checked against exact values without any external
model.  They run in-process (no evaluator child), which separates math
errors from protocol errors when debugging a pipeline.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .randomspace import ParameterSpace, RandomParameter, sample
from .sobol import SobolReport, compute_sobol
from .surrogate import Surrogate, fit
from .basis import build_basis

__all__ = [
    "ishigami",
    "ishigami_space",
    "ishigami_analytic_sobol",
    "gfunction",
    "gfunction_space",
    "gfunction_analytic_sobol",
    "BenchmarkResult",
    "run_benchmark",
    "BENCHMARKS",
]

ISHIGAMI_A = 7.0
ISHIGAMI_B = 0.1
GFUNCTION_A = (0.0, 1.0, 4.5, 9.0)


def ishigami(x, a: float = ISHIGAMI_A, b: float = ISHIGAMI_B):
    """``sin(x1) + a*sin(x2)**2 + b*x3**4*sin(x1)`` rowwise on an (n, 3) array."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    return np.sin(x[:, 0]) + a * np.sin(x[:, 1]) ** 2 + b * x[:, 2] ** 4 * np.sin(x[:, 0])


def ishigami_space(seed: int = 0) -> ParameterSpace:
    """Three inputs uniform on [-pi, pi]."""
    return ParameterSpace(
        parameters=tuple(
            RandomParameter(name=f"x{i + 1}", lower=-math.pi, upper=math.pi) for i in range(3)
        ),
        seed=seed,
    )


def ishigami_analytic_sobol(a: float = ISHIGAMI_A, b: float = ISHIGAMI_B) -> dict:
    """Exact relative Sobol indices for every subset of the three inputs.

    Partial variances:
        V1  = b*pi^4/5 + b^2*pi^8/50 + 1/2
        V2  = a^2/8
        V13 = b^2*pi^8*(1/18 - 1/50)
    with all remaining subsets zero, and
        V = a^2/8 + b*pi^4/5 + b^2*pi^8/18 + 1/2.
    """
    pi4, pi8 = math.pi**4, math.pi**8
    v1 = b * pi4 / 5.0 + b**2 * pi8 / 50.0 + 0.5
    v2 = a**2 / 8.0
    v13 = b**2 * pi8 * (1.0 / 18.0 - 1.0 / 50.0)
    total = a**2 / 8.0 + b * pi4 / 5.0 + b**2 * pi8 / 18.0 + 0.5
    return {
        (0,): v1 / total,
        (1,): v2 / total,
        (2,): 0.0,
        (0, 1): 0.0,
        (0, 2): v13 / total,
        (1, 2): 0.0,
        (0, 1, 2): 0.0,
    }


def gfunction(x, a=GFUNCTION_A):
    """Sobol's g-function ``prod_i (|4*x_i - 2| + a_i) / (1 + a_i)`` rowwise."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    a = np.asarray(a, dtype=float)
    if x.shape[1] != a.size:
        raise ValueError(f"expected {a.size} columns, got {x.shape[1]}")
    return np.prod((np.abs(4.0 * x - 2.0) + a) / (1.0 + a), axis=1)


def gfunction_space(seed: int = 0, a=GFUNCTION_A) -> ParameterSpace:
    """One uniform [0, 1] input per coefficient."""
    return ParameterSpace(
        parameters=tuple(
            RandomParameter(name=f"x{i + 1}", lower=0.0, upper=1.0) for i in range(len(a))
        ),
        seed=seed,
    )


def gfunction_analytic_sobol(a=GFUNCTION_A) -> dict:
    """Exact relative Sobol indices: ``V_i = (1/3)/(1+a_i)^2``, interactions
    multiply, and ``V = prod(1 + V_i) - 1``."""
    a = np.asarray(a, dtype=float)
    v = (1.0 / 3.0) / (1.0 + a) ** 2
    total = float(np.prod(1.0 + v) - 1.0)
    out = {}
    d = a.size
    for mask in range(1, 2**d):
        tau = tuple(i for i in range(d) if mask >> i & 1)
        out[tau] = float(np.prod(v[list(tau)])) / total
    return out


BENCHMARKS = {
    "ishigami": (ishigami, ishigami_space, ishigami_analytic_sobol),
    "gfunction": (gfunction, gfunction_space, gfunction_analytic_sobol),
}


@dataclass
class BenchmarkResult:
    surrogate: Surrogate
    report: SobolReport
    analytic: dict
    name: str

    def rows(self) -> list[tuple[str, float, float, float]]:
        """(subset label, estimated, analytic, |deviation|) rows, every subset."""
        estimated = {e.tau: e.s_tau for e in self.report.entries}
        out = []
        for tau in sorted(set(estimated) | set(self.analytic), key=lambda t: (len(t), t)):
            est = estimated.get(tau, 0.0)
            ref = self.analytic.get(tau, 0.0)
            label = "*".join(self.report.names[i] for i in tau)
            out.append((label, est, ref, abs(est - ref)))
        return out


def run_benchmark(name: str, n: int, order: int, seed: int) -> BenchmarkResult:
    """Sample, evaluate, fit, and decompose one built-in benchmark function."""
    if name not in BENCHMARKS:
        raise ValueError(f"unknown benchmark '{name}': choose from {sorted(BENCHMARKS)}")
    func, make_space, analytic = BENCHMARKS[name]
    space = make_space(seed=seed)
    samples = sample(space, n)
    y = func(samples.values)
    basis = build_basis(space.dimension, space.jacobi_params_per_dim(), max_total_order=order)
    surrogate = fit(basis, space, samples, y)
    return BenchmarkResult(
        surrogate=surrogate,
        report=compute_sobol(surrogate),
        analytic=analytic(),
        name=name,
    )
