"""Pipeline command line: sample, transform, evaluate, fit, sobol, grid,
run, benchmark.

A run is described by a single YAML config (grammar documented in the
README, ``config_version: 1``).  All randomness flows from the one config
seed, every artifact embeds the SHA-256 digest of the resolved config, and
identical configs produce byte-identical artifact trees.

Exit codes: 0 success, 2 validation/config error, 3 evaluator failure.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import os
import sys
from dataclasses import dataclass, field

import numpy as np
import yaml

from . import benchmarks
from .adapter import EvalRecord, EvaluatorConfig, EvaluatorError, attach_logits, evaluate_batch
from .basis import build_basis
from .perturb import PerturbationSpec, PerturbStep, read_manifest, read_png, write_transformed_set
from .randomspace import (
    ParameterSpace,
    RandomParameter,
    read_samples_csv,
    sample,
    write_samples_csv,
)
from .sobol import compute_sobol, validate_report, write_sobol_csv, write_sobol_json
from .surrogate import (
    LinkSpec,
    fit,
    load_surrogate,
    logistic,
    predict,
    save_surrogate,
)

__all__ = [
    "ConfigError",
    "RunConfig",
    "GridRequest",
    "load_config",
    "cmd_sample",
    "cmd_transform",
    "cmd_evaluate",
    "cmd_fit",
    "cmd_sobol",
    "cmd_grid",
    "cmd_run",
    "cmd_benchmark",
    "main",
]

CONFIG_VERSION = 1
DEFAULT_GRID_RESOLUTION = 50

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_EVALUATOR = 3


class ConfigError(ValueError):
    """Invalid configuration or inconsistent pipeline inputs."""


@dataclass(frozen=True)
class GridRequest:
    """Two swept variables, a per-axis resolution, and pinned values for
    every remaining parameter."""

    var_x: str
    var_y: str
    resolution: int = DEFAULT_GRID_RESOLUTION
    fixed: dict = field(default_factory=dict)
    scale: str = "logit"

    def __post_init__(self):
        if self.var_x == self.var_y:
            raise ConfigError("grid variables must differ")
        if self.resolution < 2:
            raise ConfigError("grid resolution must be >= 2")
        if self.scale not in ("logit", "probability"):
            raise ConfigError(f"grid scale must be 'logit' or 'probability', got {self.scale}")


@dataclass
class RunConfig:
    """Fully resolved pipeline configuration."""

    mode: str
    space: ParameterSpace
    n_samples: int
    max_total_order: int | None
    max_order_per_dim: tuple[int, ...] | None
    link: LinkSpec
    target_class: int | None
    evaluator_builtin: str | None
    evaluator_command: tuple[str, ...] | None
    evaluator_timeout: float
    evaluator_max_inflight: int
    n_classes: int
    image_path: str | None
    perturb_spec: PerturbationSpec | None
    output_dir: str
    digest: str
    resolved: dict


def _require(cond: bool, message: str) -> None:
    if not cond:
        raise ConfigError(message)


def load_config(path, seed_override: int | None = None, out_override: str | None = None) -> RunConfig:
    """Parse and validate a YAML run config; applies CLI overrides before
    computing the digest so artifacts always match the effective settings."""
    try:
        with open(path) as fh:
            raw = yaml.safe_load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"invalid YAML in {path}: {exc}") from exc
    _require(isinstance(raw, dict), "config must be a mapping")
    _require(raw.get("config_version") == CONFIG_VERSION, f"config_version must be {CONFIG_VERSION}")

    mode = raw.get("mode")
    _require(mode in ("numeric", "image"), "mode must be 'numeric' or 'image'")

    seed = int(seed_override if seed_override is not None else raw.get("seed", 0))
    params_raw = raw.get("parameters")
    _require(isinstance(params_raw, list) and params_raw, "parameters must be a non-empty list")
    try:
        parameters = tuple(
            RandomParameter(
                name=str(p["name"]),
                lower=float(p["lower"]),
                upper=float(p["upper"]),
                p=float(p.get("p", 1.0)),
                q=float(p.get("q", 1.0)),
            )
            for p in params_raw
        )
        space = ParameterSpace(parameters=parameters, seed=seed)
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"invalid parameters: {exc}") from exc

    n_samples = int(raw.get("n_samples", 0))
    _require(n_samples >= 1, "n_samples must be >= 1")

    basis_raw = raw.get("basis") or {}
    max_total = basis_raw.get("max_total_order")
    per_dim = basis_raw.get("max_order_per_dim")
    _require(
        max_total is not None or per_dim is not None,
        "basis needs max_total_order and/or max_order_per_dim",
    )
    if per_dim is not None:
        per_dim = tuple(int(v) for v in per_dim)
        _require(len(per_dim) == space.dimension, "max_order_per_dim length must equal dimension")
    if max_total is not None:
        max_total = int(max_total)

    link_raw = raw.get("link") or {}
    default_kind = "logit" if mode == "image" else "identity"
    try:
        link = LinkSpec(
            kind=link_raw.get("kind", default_kind),
            epsilon=float(link_raw.get("epsilon", 1e-6)),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc

    ev = raw.get("evaluator") or {}
    builtin = ev.get("builtin")
    command = ev.get("command")
    _require(
        (builtin is None) != (command is None),
        "evaluator needs exactly one of 'builtin' or 'command'",
    )
    if builtin is not None:
        _require(mode == "numeric", "built-in evaluators are numeric-only")
        _require(builtin in benchmarks.BENCHMARKS, f"unknown builtin evaluator '{builtin}'")
    if command is not None:
        _require(isinstance(command, list) and command, "evaluator command must be a non-empty list")
        command = tuple(str(c) for c in command)
    timeout = float(ev.get("timeout", 60.0))
    max_inflight = int(ev.get("max_inflight", 8))
    n_classes = int(ev.get("n_classes", 2))

    target_class = raw.get("target_class")
    image_path = raw.get("image")
    perturb_spec = None
    if mode == "image":
        _require(target_class is not None, "image mode requires target_class")
        target_class = int(target_class)
        _require(0 <= target_class < n_classes, "target_class out of range for n_classes")
        _require(image_path, "image mode requires an input image path")
        steps_raw = raw.get("perturbations")
        _require(isinstance(steps_raw, list) and steps_raw, "image mode requires perturbations")
        try:
            perturb_spec = _canonical_spec(
                PerturbationSpec(
                    steps=tuple(
                        PerturbStep(kind=str(s["kind"]), parameter=str(s["parameter"]))
                        for s in steps_raw
                    )
                )
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"invalid perturbations: {exc}") from exc
        unknown = set(perturb_spec.parameter_names) - set(space.names)
        _require(not unknown, f"perturbation parameters not in parameter space: {sorted(unknown)}")
    else:
        _require(raw.get("perturbations") is None, "perturbations are image-mode only")

    output_dir = out_override or raw.get("output_dir") or "out"

    resolved = {
        "config_version": CONFIG_VERSION,
        "mode": mode,
        "seed": seed,
        "parameters": [
            {"name": p.name, "lower": p.lower, "upper": p.upper, "p": p.p, "q": p.q}
            for p in parameters
        ],
        "n_samples": n_samples,
        "basis": {
            "max_total_order": max_total,
            "max_order_per_dim": list(per_dim) if per_dim is not None else None,
        },
        "link": {"kind": link.kind, "epsilon": link.epsilon},
        "evaluator": {
            "builtin": builtin,
            "command": list(command) if command is not None else None,
            "timeout": timeout,
            "max_inflight": max_inflight,
            "n_classes": n_classes,
        },
        "target_class": target_class,
        "image": image_path,
        "perturbations": [
            {"kind": s.kind, "parameter": s.parameter} for s in perturb_spec.steps
        ]
        if perturb_spec is not None
        else None,
    }
    digest = hashlib.sha256(
        json.dumps(resolved, sort_keys=True, separators=(",", ":")).encode()
    ).hexdigest()

    return RunConfig(
        mode=mode,
        space=space,
        n_samples=n_samples,
        max_total_order=max_total,
        max_order_per_dim=per_dim,
        link=link,
        target_class=target_class,
        evaluator_builtin=builtin,
        evaluator_command=command,
        evaluator_timeout=timeout,
        evaluator_max_inflight=max_inflight,
        n_classes=n_classes,
        image_path=image_path,
        perturb_spec=perturb_spec,
        output_dir=output_dir,
        digest=digest,
        resolved=resolved,
    )


def _canonical_spec(spec: PerturbationSpec) -> PerturbationSpec:
    """Normalize step order to brightness, rotation, tilt."""
    rank = {"brightness": 0, "rotation": 1, "tilt": 2}
    return PerturbationSpec(steps=tuple(sorted(spec.steps, key=lambda s: rank[s.kind])))


def _build_basis(cfg: RunConfig):
    return build_basis(
        cfg.space.dimension,
        cfg.space.jacobi_params_per_dim(),
        max_total_order=cfg.max_total_order,
        max_order_per_dim=cfg.max_order_per_dim,
    )


# ---------------------------------------------------------------------------
# pipeline stages


def cmd_sample(cfg: RunConfig, out_dir) -> str:
    """Draw the configured samples and write samples.csv."""
    os.makedirs(out_dir, exist_ok=True)
    samples = sample(cfg.space, cfg.n_samples)
    path = os.path.join(out_dir, "samples.csv")
    write_samples_csv(path, samples, config_digest=cfg.digest)
    return path


def cmd_transform(cfg: RunConfig, samples_path, out_dir, image_path=None) -> str:
    """Apply the perturbation spec to the input image once per sample row."""
    _require(cfg.mode == "image", "transform requires image mode")
    image_path = image_path or cfg.image_path
    try:
        img = read_png(image_path)
    except (OSError, ValueError) as exc:
        raise ConfigError(f"cannot read input image {image_path}: {exc}") from exc
    samples, _ = read_samples_csv(samples_path, cfg.space)
    work_dir = os.path.join(out_dir, "transformed")
    return write_transformed_set(cfg.perturb_spec, img, samples, work_dir, config_digest=cfg.digest)


def _evaluate_numeric(cfg: RunConfig, samples) -> list[EvalRecord]:
    if cfg.evaluator_builtin is not None:
        func = benchmarks.BENCHMARKS[cfg.evaluator_builtin][0]
        y = func(samples.values)
        return [
            EvalRecord(index=i, xi_phys=row, y=float(y[i]))
            for i, row in enumerate(samples.values)
        ]
    evaluator = EvaluatorConfig(
        command=cfg.evaluator_command,
        mode="numeric",
        timeout=cfg.evaluator_timeout,
        max_inflight=cfg.evaluator_max_inflight,
    )
    return evaluate_batch(evaluator, [(i, row) for i, row in enumerate(samples.values)])


def _evaluate_image(cfg: RunConfig, manifest_path) -> list[EvalRecord]:
    rows, digest = read_manifest(manifest_path)
    if digest is not None and digest != cfg.digest:
        raise ConfigError(
            f"manifest digest {digest[:12]}... does not match config digest {cfg.digest[:12]}..."
        )
    base = os.path.dirname(os.path.abspath(manifest_path))
    evaluator = EvaluatorConfig(
        command=cfg.evaluator_command,
        mode="image",
        n_classes=cfg.n_classes,
        timeout=cfg.evaluator_timeout,
        max_inflight=cfg.evaluator_max_inflight,
    )
    requests = []
    for row in rows:
        xi = np.array([float(row[name]) for name in cfg.space.names])
        requests.append((int(row["index"]), os.path.join(base, row["file"]), xi))
    records = evaluate_batch(evaluator, requests)
    return attach_logits(records, cfg.target_class, cfg.link)


def cmd_evaluate(cfg: RunConfig, source_path, out_dir) -> str:
    """Evaluate the black-box model; source is samples.csv (numeric mode)
    or manifest.csv (image mode).  Writes evaluations.csv."""
    os.makedirs(out_dir, exist_ok=True)
    if cfg.mode == "numeric":
        samples, _ = read_samples_csv(source_path, cfg.space)
        records = _evaluate_numeric(cfg, samples)
    else:
        records = _evaluate_image(cfg, source_path)

    path = os.path.join(out_dir, "evaluations.csv")
    buf = io.StringIO()
    buf.write(f"# config_digest={cfg.digest}\n")
    writer = csv.writer(buf, lineterminator="\n")
    if cfg.mode == "numeric":
        writer.writerow(["index", *cfg.space.names, "y"])
        for r in records:
            writer.writerow(
                [r.index, *(format(v, ".17g") for v in r.xi_phys), format(r.y, ".17g")]
            )
    else:
        prob_cols = [f"prob_{k}" for k in range(cfg.n_classes)]
        writer.writerow(["index", *cfg.space.names, *prob_cols, "logit_value"])
        for r in records:
            writer.writerow(
                [
                    r.index,
                    *(format(v, ".17g") for v in r.xi_phys),
                    *(format(v, ".17g") for v in r.probs),
                    format(r.logit_value, ".17g"),
                ]
            )
    with open(path, "w", newline="") as fh:
        fh.write(buf.getvalue())
    return path


def _read_evaluations(cfg: RunConfig, path) -> tuple[np.ndarray, np.ndarray]:
    """Returns (xi matrix ordered by index, fit targets)."""
    with open(path, newline="") as fh:
        first = fh.readline()
        digest = None
        if first.startswith("#"):
            if "config_digest=" in first:
                digest = first.split("config_digest=", 1)[1].strip()
            first = fh.readline()
        if digest is not None and digest != cfg.digest:
            raise ConfigError("evaluations digest does not match config digest")
        header = next(csv.reader([first]))
        rows = [row for row in csv.reader(fh) if row]
    col = {name: k for k, name in enumerate(header)}
    target_col = "y" if cfg.mode == "numeric" else "logit_value"
    for needed in ("index", target_col, *cfg.space.names):
        _require(needed in col, f"evaluations file missing column '{needed}'")
    rows.sort(key=lambda row: int(row[col["index"]]))
    xi = np.array([[float(row[col[name]]) for name in cfg.space.names] for row in rows])
    y = np.array([float(row[col[target_col]]) for row in rows])
    return xi, y


def cmd_fit(cfg: RunConfig, samples_path, evaluations_path, out_dir, stream=None) -> str:
    """Fit the surrogate to the evaluation targets and write surrogate.json.

    Image-mode targets are the logit-space values; the probability-space
    error of the back-mapped predictions is recorded alongside.
    """
    stream = stream if stream is not None else sys.stdout
    os.makedirs(out_dir, exist_ok=True)
    samples, sample_digest = read_samples_csv(samples_path, cfg.space)
    if sample_digest is not None and sample_digest != cfg.digest:
        raise ConfigError("samples digest does not match config digest")
    xi, y = _read_evaluations(cfg, evaluations_path)
    if xi.shape[0] != samples.n or not np.allclose(xi, samples.values, atol=1e-12):
        raise ConfigError("evaluations do not match the sample matrix")

    surrogate = fit(_build_basis(cfg), cfg.space, samples, y)
    if cfg.mode == "image":
        probs_hat = logistic(predict(surrogate, samples.values))
        probs_obs = logistic(y)
        rms = float(np.sqrt(np.mean(probs_obs**2)))
        if rms > 0:
            surrogate.fit_info.extras["in_sample_nrmsd_probability"] = float(
                np.sqrt(np.mean((probs_obs - probs_hat) ** 2)) / rms
            )
    path = os.path.join(out_dir, "surrogate.json")
    save_surrogate(path, surrogate, config_digest=cfg.digest)
    print(f"fit: n={samples.n} terms={surrogate.basis.n_terms} "
          f"in-sample nrmsd={surrogate.fit_info.in_sample_nrmsd:.6g}", file=stream)
    if surrogate.fit_info.holdout_nrmsd is not None:
        print(f"fit: holdout nrmsd={surrogate.fit_info.holdout_nrmsd:.6g}", file=stream)
    return path


def cmd_sobol(surrogate_path, out_dir, check_samples=None) -> tuple[str, str]:
    """Decompose a saved surrogate into Sobol indices (sobol.csv + sobol.json).

    With ``check_samples``, the surrogate's embedded config digest must
    match the digest embedded in that samples file.
    """
    os.makedirs(out_dir, exist_ok=True)
    surrogate, digest = load_surrogate(surrogate_path)
    if check_samples is not None:
        with open(check_samples) as fh:
            first = fh.readline()
        other = None
        if first.startswith("#") and "config_digest=" in first:
            other = first.split("config_digest=", 1)[1].strip()
        if digest != other:
            raise ConfigError(
                f"digest mismatch: surrogate carries {digest!r}, samples file carries {other!r}"
            )
    report = compute_sobol(surrogate)
    if not validate_report(report, tol=1e-9):
        raise ConfigError("Sobol report failed normalization validation")
    csv_path = os.path.join(out_dir, "sobol.csv")
    json_path = os.path.join(out_dir, "sobol.json")
    write_sobol_csv(csv_path, report, config_digest=digest)
    write_sobol_json(json_path, report, config_digest=digest)
    return csv_path, json_path


def cmd_grid(surrogate_path, request: GridRequest, out_dir) -> str:
    """Sweep two variables over their limits and tabulate surrogate values.

    Writes grid.csv with ``resolution**2`` rows of (x, y, value); values
    pass through the logistic map when ``scale`` is 'probability'.
    """
    os.makedirs(out_dir, exist_ok=True)
    surrogate, digest = load_surrogate(surrogate_path)
    space = surrogate.space
    names = space.names
    for var in (request.var_x, request.var_y):
        _require(var in names, f"unknown grid variable '{var}'")
    remaining = [n for n in names if n not in (request.var_x, request.var_y)]
    missing = [n for n in remaining if n not in request.fixed]
    _require(not missing, f"grid request must fix remaining parameters: {missing}")
    unknown = set(request.fixed) - set(remaining)
    _require(not unknown, f"fixed values for unknown/swept parameters: {sorted(unknown)}")
    for name, value in request.fixed.items():
        par = space.parameters[names.index(name)]
        _require(par.lower <= float(value) <= par.upper, f"fixed value for '{name}' outside limits")

    ix, iy = names.index(request.var_x), names.index(request.var_y)
    par_x, par_y = space.parameters[ix], space.parameters[iy]
    xs = np.linspace(par_x.lower, par_x.upper, request.resolution)
    ys = np.linspace(par_y.lower, par_y.upper, request.resolution)

    base = np.empty(space.dimension)
    for name, value in request.fixed.items():
        base[names.index(name)] = float(value)
    points = np.tile(base, (request.resolution**2, 1))
    xx, yy = np.meshgrid(xs, ys, indexing="ij")
    points[:, ix] = xx.ravel()
    points[:, iy] = yy.ravel()

    values = predict(surrogate, points)
    if request.scale == "probability":
        values = logistic(values)

    path = os.path.join(out_dir, "grid.csv")
    buf = io.StringIO()
    if digest is not None:
        buf.write(f"# config_digest={digest}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow([request.var_x, request.var_y, "value"])
    for (x, y), v in zip(points[:, [ix, iy]], values):
        writer.writerow([format(x, ".17g"), format(y, ".17g"), format(v, ".17g")])
    with open(path, "w", newline="") as fh:
        fh.write(buf.getvalue())
    return path


def cmd_run(cfg: RunConfig, out_dir, stream=None) -> str:
    """Full pipeline under one seed; writes summary.json last.

    On evaluator failure the partial artifact set is labeled by a
    summary.json with status "failed" and the failing stage, and the
    evaluator error is re-raised.
    """
    stream = stream if stream is not None else sys.stdout
    os.makedirs(out_dir, exist_ok=True)
    stage = "sample"
    try:
        samples_path = cmd_sample(cfg, out_dir)
        source_path = samples_path
        if cfg.mode == "image":
            stage = "transform"
            source_path = cmd_transform(cfg, samples_path, out_dir)
        stage = "evaluate"
        eval_path = cmd_evaluate(cfg, source_path, out_dir)
        stage = "fit"
        surrogate_path = cmd_fit(cfg, samples_path, eval_path, out_dir, stream=stream)
        stage = "sobol"
        sobol_csv, sobol_json = cmd_sobol(surrogate_path, out_dir, check_samples=samples_path)
    except EvaluatorError as exc:
        _write_summary(
            out_dir,
            {
                "config_digest": cfg.digest,
                "status": "failed",
                "stage": stage,
                "error": str(exc),
            },
        )
        raise

    with open(sobol_json) as fh:
        report = json.load(fh)
    surrogate, _ = load_surrogate(surrogate_path)
    summary = {
        "config_digest": cfg.digest,
        "status": "ok",
        "mode": cfg.mode,
        "n_samples": cfg.n_samples,
        "basis_terms": surrogate.basis.n_terms,
        "in_sample_nrmsd": surrogate.fit_info.in_sample_nrmsd,
        "holdout_nrmsd": surrogate.fit_info.holdout_nrmsd,
        "artifacts": sorted(
            os.path.relpath(p, out_dir)
            for p in [samples_path, eval_path, surrogate_path, sobol_csv, sobol_json]
        ),
        "sobol_top": report["subsets"][:5],
    }
    if surrogate.fit_info.extras:
        summary["fit_extras"] = surrogate.fit_info.extras
    path = _write_summary(out_dir, summary)
    for entry in report["subsets"]:
        label = "*".join(entry["variables"])
        print(f"sobol: {label:30s} S={entry['S_tau']:.4f}", file=stream)
    return path


def _write_summary(out_dir, doc: dict) -> str:
    path = os.path.join(out_dir, "summary.json")
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def cmd_benchmark(name: str, n: int, order: int, seed: int, stream=None):
    """Run a built-in benchmark and print estimated vs analytic indices."""
    stream = stream if stream is not None else sys.stdout
    result = benchmarks.run_benchmark(name, n=n, order=order, seed=seed)
    print(
        f"benchmark {name}: n={n} order={order} seed={seed} "
        f"nrmsd={result.surrogate.fit_info.in_sample_nrmsd:.4g}",
        file=stream,
    )
    print(f"{'subset':<16}{'estimated':>12}{'analytic':>12}{'|deviation|':>13}", file=stream)
    for label, est, ref, dev in result.rows():
        print(f"{label:<16}{est:>12.4f}{ref:>12.4f}{dev:>13.2e}", file=stream)
    return result


# ---------------------------------------------------------------------------
# argument parsing


def _add_config_arg(p):
    p.add_argument("--config", required=True, help="YAML run config")
    p.add_argument("--out", default=None, help="output directory (overrides config)")
    p.add_argument("--seed", type=int, default=None, help="seed override")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gpcsense",
        description="Perturbation sensitivity analysis via polynomial chaos surrogates",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sample", help="draw Latin hypercube samples")
    _add_config_arg(p)

    p = sub.add_parser("transform", help="apply perturbations to the input image")
    _add_config_arg(p)
    p.add_argument("--samples", required=True, help="samples.csv from 'sample'")
    p.add_argument("--image", default=None, help="input PNG (overrides config)")

    p = sub.add_parser("evaluate", help="run samples through the model")
    _add_config_arg(p)
    p.add_argument("--samples", default=None, help="samples.csv (numeric mode)")
    p.add_argument("--manifest", default=None, help="manifest.csv (image mode)")

    p = sub.add_parser("fit", help="fit the polynomial chaos surrogate")
    _add_config_arg(p)
    p.add_argument("--samples", required=True)
    p.add_argument("--evaluations", required=True)

    p = sub.add_parser("sobol", help="variance decomposition of a surrogate")
    p.add_argument("--surrogate", required=True)
    p.add_argument("--out", default=".", help="output directory")
    p.add_argument(
        "--check-samples",
        default=None,
        help="samples.csv whose embedded config digest must match the surrogate's",
    )

    p = sub.add_parser("grid", help="tabulate the surrogate over two variables")
    p.add_argument("--surrogate", required=True)
    p.add_argument("--out", default=".", help="output directory")
    p.add_argument("--var-x", required=True)
    p.add_argument("--var-y", required=True)
    p.add_argument("--resolution", type=int, default=DEFAULT_GRID_RESOLUTION)
    p.add_argument(
        "--fixed",
        action="append",
        default=[],
        metavar="NAME=VALUE",
        help="pinned value for each remaining parameter (repeatable)",
    )
    p.add_argument("--scale", choices=("logit", "probability"), default="logit")

    p = sub.add_parser("run", help="full pipeline: sample through sobol")
    _add_config_arg(p)

    p = sub.add_parser("benchmark", help="built-in analytic benchmark")
    p.add_argument("--name", choices=sorted(benchmarks.BENCHMARKS), required=True)
    p.add_argument("--n", type=int, default=2000)
    p.add_argument("--order", type=int, default=6)
    p.add_argument("--seed", type=int, default=0)

    return parser


def _parse_fixed(pairs) -> dict:
    fixed = {}
    for pair in pairs:
        if "=" not in pair:
            raise ConfigError(f"--fixed expects NAME=VALUE, got {pair!r}")
        name, value = pair.split("=", 1)
        try:
            fixed[name.strip()] = float(value)
        except ValueError as exc:
            raise ConfigError(f"--fixed value for '{name}' is not a number: {value!r}") from exc
    return fixed


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "sample":
            cfg = load_config(args.config, args.seed, args.out)
            path = cmd_sample(cfg, cfg.output_dir)
            print(path)
        elif args.command == "transform":
            cfg = load_config(args.config, args.seed, args.out)
            path = cmd_transform(cfg, args.samples, cfg.output_dir, image_path=args.image)
            print(path)
        elif args.command == "evaluate":
            cfg = load_config(args.config, args.seed, args.out)
            if cfg.mode == "numeric":
                _require(args.samples is not None, "numeric mode needs --samples")
                source = args.samples
            else:
                _require(args.manifest is not None, "image mode needs --manifest")
                source = args.manifest
            path = cmd_evaluate(cfg, source, cfg.output_dir)
            print(path)
        elif args.command == "fit":
            cfg = load_config(args.config, args.seed, args.out)
            path = cmd_fit(cfg, args.samples, args.evaluations, cfg.output_dir)
            print(path)
        elif args.command == "sobol":
            csv_path, json_path = cmd_sobol(args.surrogate, args.out, check_samples=args.check_samples)
            print(csv_path)
            print(json_path)
        elif args.command == "grid":
            request = GridRequest(
                var_x=args.var_x,
                var_y=args.var_y,
                resolution=args.resolution,
                fixed=_parse_fixed(args.fixed),
                scale=args.scale,
            )
            path = cmd_grid(args.surrogate, request, args.out)
            print(path)
        elif args.command == "run":
            cfg = load_config(args.config, args.seed, args.out)
            path = cmd_run(cfg, cfg.output_dir)
            print(path)
        elif args.command == "benchmark":
            cmd_benchmark(args.name, args.n, args.order, args.seed)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ValueError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except EvaluatorError as exc:
        print(f"evaluator error: {exc}", file=sys.stderr)
        return EXIT_EVALUATOR
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
