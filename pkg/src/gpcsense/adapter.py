"""Client for the black-box evaluator protocol.

The model under analysis runs as a child process speaking line-delimited
JSON over stdin/stdout, one object per line, UTF-8:

* request (numeric mode):  ``{"id": <int>, "xi": [<floats>]}``
* request (image mode):    ``{"id": <int>, "path": "<string>"}``
* response:                ``{"id": <int>, "y": <float>}`` or
                           ``{"id": <int>, "probs": [<floats>]}``
* error response:          ``{"id": <int>, "error": "<message>"}``

Responses may arrive out of order; they are matched to requests by id.  At
most ``max_inflight`` requests are unanswered at any instant.  The child is
started with the inherited environment plus ``GPC_SENSE_MODE`` set to the
mode, and is owned exclusively by one batch call; pipelining within the
window is the only concurrency.
"""

from __future__ import annotations

import json
import os
import queue
import subprocess
import threading
import time
from dataclasses import dataclass, field

import numpy as np

from .surrogate import LinkSpec, logit

__all__ = [
    "EvaluatorConfig",
    "EvalRecord",
    "EvaluatorError",
    "EvaluatorTimeout",
    "EvaluatorProtocolError",
    "EvaluatorExit",
    "evaluate_batch",
    "attach_logits",
]

_PROB_SUM_TOL = 1e-6


class EvaluatorError(RuntimeError):
    """Base for evaluator failures; carries the offending request index."""

    def __init__(self, message: str, index: int | None = None):
        super().__init__(message if index is None else f"[request {index}] {message}")
        self.index = index


class EvaluatorTimeout(EvaluatorError):
    pass


class EvaluatorProtocolError(EvaluatorError):
    pass


class EvaluatorExit(EvaluatorError):
    pass


@dataclass(frozen=True)
class EvaluatorConfig:
    """How to start and talk to the evaluator child process."""

    command: tuple[str, ...]
    mode: str = "numeric"
    n_classes: int = 2
    timeout: float = 60.0
    max_inflight: int = 8

    def __post_init__(self):
        object.__setattr__(self, "command", tuple(self.command))
        if not self.command:
            raise ValueError("evaluator command must be non-empty")
        if self.mode not in ("numeric", "image"):
            raise ValueError(f"mode must be 'numeric' or 'image', got {self.mode}")
        if self.mode == "image" and self.n_classes < 1:
            raise ValueError("n_classes must be positive in image mode")
        if not self.timeout > 0:
            raise ValueError("timeout must be positive")
        if self.max_inflight < 1:
            raise ValueError("max_inflight must be >= 1")


@dataclass
class EvalRecord:
    """One evaluated sample: the input point and the model's output."""

    index: int
    xi_phys: np.ndarray | None = None
    y: float | None = None
    probs: np.ndarray | None = None
    target_class: int | None = None
    logit_value: float | None = None


def _validate_probs(raw, n_classes: int, index: int) -> np.ndarray:
    if not isinstance(raw, list) or len(raw) != n_classes:
        raise EvaluatorProtocolError(
            f"expected a probability list of length {n_classes}, got {raw!r}", index=index
        )
    probs = np.asarray(raw, dtype=float)
    if not np.all(np.isfinite(probs)) or np.any((probs < 0.0) | (probs > 1.0)):
        raise EvaluatorProtocolError(f"probabilities outside [0, 1]: {raw!r}", index=index)
    total = float(probs.sum())
    if abs(total - 1.0) > _PROB_SUM_TOL:
        raise EvaluatorProtocolError(
            f"probabilities sum to {total!r}, expected 1 within {_PROB_SUM_TOL}", index=index
        )
    return probs


class _Child:
    """Child process plus a reader thread feeding stdout lines to a queue."""

    _EOF = object()

    def __init__(self, cfg: EvaluatorConfig):
        env = dict(os.environ, GPC_SENSE_MODE=cfg.mode)
        try:
            self.proc = subprocess.Popen(
                cfg.command,
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                text=True,
                bufsize=1,
                env=env,
            )
        except OSError as exc:
            raise EvaluatorExit(f"could not start evaluator {cfg.command}: {exc}") from exc
        self.lines: queue.Queue = queue.Queue()
        self._reader = threading.Thread(target=self._read_loop, daemon=True)
        self._reader.start()

    def _read_loop(self):
        for line in self.proc.stdout:
            self.lines.put(line)
        self.lines.put(self._EOF)

    def send(self, obj: dict):
        try:
            self.proc.stdin.write(json.dumps(obj) + "\n")
            self.proc.stdin.flush()
        except (OSError, ValueError) as exc:  # broken pipe: the child is gone
            code = self.proc.poll()
            raise EvaluatorExit(
                f"evaluator exited (code {code}) before accepting the request: {exc}",
                index=int(obj["id"]),
            ) from exc

    def close(self):
        try:
            self.proc.stdin.close()
        except OSError:
            pass
        try:
            self.proc.wait(timeout=5.0)
        except subprocess.TimeoutExpired:
            self.proc.kill()
            self.proc.wait()


def evaluate_batch(cfg: EvaluatorConfig, requests) -> list[EvalRecord]:
    """Run every request through the evaluator child, preserving input order.

    Parameters
    ----------
    cfg : EvaluatorConfig
    requests : sequence of tuples
        ``(index, payload)`` or ``(index, payload, xi_phys)``.  The payload
        is the coordinate vector in numeric mode and the image file path in
        image mode; indices double as wire ids and must be unique.  In
        numeric mode the payload is also recorded as ``xi_phys``.

    Returns
    -------
    list of EvalRecord
        In the same order as ``requests``.

    Raises
    ------
    EvaluatorTimeout, EvaluatorProtocolError, EvaluatorExit
        All carry the offending request index where one is identifiable.
    """
    prepared = []
    for item in requests:
        index, payload = item[0], item[1]
        xi = item[2] if len(item) > 2 else (payload if cfg.mode == "numeric" else None)
        prepared.append((int(index), payload, xi))
    ids = [r[0] for r in prepared]
    if len(set(ids)) != len(ids):
        raise ValueError("request indices must be unique")

    child = _Child(cfg)
    records: dict[int, EvalRecord] = {}
    pending: dict[int, float] = {}  # id -> response deadline
    to_send = list(prepared)
    try:
        while to_send or pending:
            while to_send and len(pending) < cfg.max_inflight:
                index, payload, xi = to_send.pop(0)
                if cfg.mode == "numeric":
                    child.send({"id": index, "xi": [float(v) for v in np.asarray(payload)]})
                else:
                    child.send({"id": index, "path": str(payload)})
                pending[index] = time.monotonic() + cfg.timeout
                records[index] = EvalRecord(
                    index=index, xi_phys=None if xi is None else np.asarray(xi, dtype=float)
                )

            earliest = min(pending, key=pending.get)
            wait = pending[earliest] - time.monotonic()
            if wait <= 0:
                raise EvaluatorTimeout(
                    f"no response within {cfg.timeout}s", index=earliest
                )
            try:
                line = child.lines.get(timeout=wait)
            except queue.Empty:
                raise EvaluatorTimeout(
                    f"no response within {cfg.timeout}s", index=earliest
                ) from None
            if line is _Child._EOF:
                code = child.proc.poll()
                raise EvaluatorExit(
                    f"evaluator exited (code {code}) with {len(pending)} request(s) unanswered",
                    index=earliest,
                )
            line = line.strip()
            if not line:
                continue
            try:
                response = json.loads(line)
                if not isinstance(response, dict):
                    raise ValueError("not a JSON object")
            except ValueError as exc:
                raise EvaluatorProtocolError(
                    f"malformed response line {line!r}: {exc}", index=earliest
                ) from None

            rid = response.get("id")
            if not isinstance(rid, int) or rid not in records:
                raise EvaluatorProtocolError(
                    f"response id {rid!r} does not match any request", index=earliest
                )
            if rid not in pending:
                raise EvaluatorProtocolError("duplicate response id", index=rid)
            if "error" in response:
                raise EvaluatorProtocolError(
                    f"evaluator error: {response['error']}", index=rid
                )

            record = records[rid]
            if cfg.mode == "numeric":
                y = response.get("y")
                if not isinstance(y, (int, float)) or not np.isfinite(y):
                    raise EvaluatorProtocolError(
                        f"expected finite 'y', got {response!r}", index=rid
                    )
                record.y = float(y)
            else:
                record.probs = _validate_probs(response.get("probs"), cfg.n_classes, rid)
            del pending[rid]
    finally:
        child.close()

    return [records[i] for i in ids]


def attach_logits(records, target_class: int, link: LinkSpec) -> list[EvalRecord]:
    """Populate ``logit_value`` from the target class probability of each record."""
    out = []
    for record in records:
        if record.probs is None:
            raise ValueError(f"record {record.index} has no probabilities")
        if not (0 <= target_class < len(record.probs)):
            raise IndexError(
                f"target_class {target_class} out of range for {len(record.probs)} classes"
            )
        record.target_class = target_class
        record.logit_value = logit(float(record.probs[target_class]), link)
        out.append(record)
    return out
