#!/usr/bin/env python3
"""Build the image-mode acceptance fixtures.

Writes ``tests/fixtures/acceptance_image.png`` (a deterministic synthetic
scene) and ``tests/fixtures/image_mode_oracle.json`` holding first-order
Sobol indices for the logit output of the synthetic classifier under the
brightness/rotation/tilt chain.  The indices are estimated by quasi-Monte
Carlo pick-freeze on >= 1e5 low-discrepancy points; the estimator itself is
validated against the Ishigami closed form before the image oracle is
trusted.

The classifier here mirrors the reference model runner: features are the
mean intensity m in [0, 1] and the fraction z of border pixels whose colour
channels are all zero, and p1 = logistic((w1*(2m-1) + w2*z) / temperature).

Run from the repository root:

    python3 scripts/make_image_oracle.py
"""

import json
import pathlib
import sys
import time

import numpy as np
from scipy.stats import qmc

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parent.parent / "src"))

from gpcsense.benchmarks import ishigami, ishigami_analytic_sobol
from gpcsense.perturb import Image, PerturbStep, PerturbationSpec, apply, write_png
from gpcsense.surrogate import LinkSpec, logit

FIXTURES = pathlib.Path(__file__).resolve().parent.parent / "tests" / "fixtures"

WEIGHTS = (4.0, 0.6)
TEMPERATURE = 1.0
LIMITS = {"bright": (0.92, 1.08), "rot": (-20.0, 20.0), "tilt_deg": (-20.0, 20.0)}
SPEC = PerturbationSpec(
    steps=(
        PerturbStep(kind="brightness", parameter="bright"),
        PerturbStep(kind="rotation", parameter="rot"),
        PerturbStep(kind="tilt", parameter="tilt_deg"),
    )
)
QMC_SEED = 20260814
N_BASE = 2**15  # evaluations = N_BASE * (2 + d) = 163840 >= 1e5


def build_scene() -> Image:
    """33x33 grayscale scene with bright content concentrated at the edges.

    Geometric perturbations push the bright bands out of frame, so rotation
    and tilt move the mean-intensity feature smoothly (a polynomial-friendly
    response); the zero-border feature stays secondary.  Byte values sit
    inside [24, 180] so brightness factors in [0.92, 1.08] neither clip to
    255 nor create new zero pixels; zero-valued border pixels can then only
    come from geometric fill.
    """
    h = w = 33
    rows, cols = np.mgrid[0:h, 0:w].astype(float)
    values = 40.0 + 60.0 * rows / (h - 1)
    values[rows <= 6] = 175.0
    values[rows >= 26] = 175.0
    ring = np.minimum.reduce([rows, cols, h - 1 - rows, w - 1 - cols])
    values[(ring <= 3) & (cols <= 3)] = 170.0
    values[(ring <= 3) & (cols >= 29)] = 170.0
    disk = (rows - 16.0) ** 2 + (cols - 21.0) ** 2 <= 5.0**2
    values[disk] = 150.0
    return Image(np.clip(values, 24.0, 180.0).astype(np.uint8)[:, :, None])


def classifier_p1(img: Image) -> float:
    pixels = img.pixels.astype(float)
    m = pixels.mean() / 255.0
    border = np.ones(pixels.shape[:2], dtype=bool)
    border[1:-1, 1:-1] = False
    zero = np.all(pixels == 0.0, axis=2)
    z = float(zero[border].mean())
    q = (WEIGHTS[0] * (2.0 * m - 1.0) + WEIGHTS[1] * z) / TEMPERATURE
    return 1.0 / (1.0 + np.exp(-q))


LINK = LinkSpec(kind="logit", epsilon=1e-6)


def chain_output(base: Image, xi: np.ndarray) -> float:
    params = dict(zip(LIMITS, xi))
    return float(logit(classifier_p1(apply(SPEC, base, params)), LINK))


def saltelli_first_order(func, limits, n_base: int, seed: int):
    """First- and total-order indices by Sobol'/Jansen pick-freeze.

    ``func`` maps one physical point (d,) to a scalar.  Returns
    (first_order, total_order, total_variance, n_evaluations).
    """
    d = len(limits)
    lo = np.array([a for a, _ in limits.values()])
    hi = np.array([b for _, b in limits.values()])
    unit = qmc.Sobol(d=2 * d, scramble=True, seed=seed).random_base2(
        m=int(np.log2(n_base))
    )
    a_mat = lo + unit[:, :d] * (hi - lo)
    b_mat = lo + unit[:, d:] * (hi - lo)

    def run(matrix, label):
        out = np.empty(len(matrix))
        started = time.perf_counter()
        for i, row in enumerate(matrix):
            out[i] = func(row)
        print(f"  {label}: {len(matrix)} evaluations in {time.perf_counter() - started:.1f}s")
        return out

    f_a = run(a_mat, "A")
    f_b = run(b_mat, "B")
    variance = float(np.var(np.concatenate([f_a, f_b])))
    first, total = {}, {}
    for i, name in enumerate(limits):
        ab = a_mat.copy()
        ab[:, i] = b_mat[:, i]
        f_ab = run(ab, f"A_B{i + 1}")
        first[name] = float(np.mean(f_b * (f_ab - f_a)) / variance)
        total[name] = float(0.5 * np.mean((f_a - f_ab) ** 2) / variance)
    return first, total, variance, n_base * (2 + d)


def self_test() -> None:
    """Estimator must reproduce the Ishigami closed form before it is trusted."""
    limits = {f"x{i}": (-np.pi, np.pi) for i in range(1, 4)}
    first, total, _, _ = saltelli_first_order(
        lambda row: float(ishigami(row[None, :])[0]), limits, n_base=2**13, seed=7
    )
    analytic = ishigami_analytic_sobol()
    checks = [
        abs(first["x1"] - analytic[(0,)]) < 0.01,
        abs(first["x2"] - analytic[(1,)]) < 0.01,
        abs(first["x3"] - 0.0) < 0.005,
        abs(total["x3"] - (analytic[(2,)] + analytic[(0, 2)])) < 0.01,
    ]
    if not all(checks):
        raise AssertionError(f"estimator self-test failed: {first} {total}")
    print(f"estimator self-test passed: S1={first['x1']:.4f} S2={first['x2']:.4f}")


def main() -> None:
    self_test()
    FIXTURES.mkdir(parents=True, exist_ok=True)
    scene = build_scene()
    image_path = FIXTURES / "acceptance_image.png"
    write_png(image_path, scene)
    print(f"wrote {image_path}")

    print(f"running image-chain oracle at {N_BASE * 5} evaluations ...")
    first, total, variance, n_evals = saltelli_first_order(
        lambda xi: chain_output(scene, xi), LIMITS, n_base=N_BASE, seed=QMC_SEED
    )
    doc = {
        "description": (
            "QMC pick-freeze Sobol indices of logit(p1) for the synthetic "
            "classifier under the brightness/rotation/tilt chain"
        ),
        "created": "2026-08-14",
        "image": "acceptance_image.png",
        "weights": ",".join(str(w) for w in WEIGHTS),
        "temperature": TEMPERATURE,
        "parameter_limits": {k: list(v) for k, v in LIMITS.items()},
        "perturbations": {s.kind: s.parameter for s in SPEC.steps},
        "link_epsilon": LINK.epsilon,
        "n_qmc_evaluations": n_evals,
        "qmc_seed": QMC_SEED,
        "total_variance": variance,
        "first_order": first,
        "total_order": total,
    }
    oracle_path = FIXTURES / "image_mode_oracle.json"
    oracle_path.write_text(json.dumps(doc, indent=2) + "\n")
    print(f"wrote {oracle_path}")
    for name in LIMITS:
        print(f"  S[{name}] = {first[name]:.4f}   ST[{name}] = {total[name]:.4f}")


if __name__ == "__main__":
    main()
