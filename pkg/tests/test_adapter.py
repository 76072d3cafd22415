"""Wire-protocol client tests against a scriptable child evaluator
(tests/evaluator_fixture.py), covering ordering, pipelining backpressure,
fault injection, and lifecycle failures."""

import pathlib
import sys
import time

import numpy as np
import pytest

from gpcsense.adapter import (
    EvalRecord,
    EvaluatorConfig,
    EvaluatorError,
    EvaluatorExit,
    EvaluatorProtocolError,
    EvaluatorTimeout,
    attach_logits,
    evaluate_batch,
)
from gpcsense.perturb import Image, write_png
from gpcsense.surrogate import LinkSpec

FIXTURE = str(pathlib.Path(__file__).parent / "evaluator_fixture.py")


def fixture_cfg(*extra, mode="numeric", **kwargs):
    return EvaluatorConfig(command=(sys.executable, FIXTURE, *extra), mode=mode, **kwargs)


def numeric_requests(n, d=3, seed=0):
    rng = np.random.default_rng(seed)
    return [(i, rng.uniform(-2.0, 2.0, size=d)) for i in range(n)]


# ---------------------------------------------------------------------------
# happy paths


def test_numeric_batch_ordered_results():
    requests = numeric_requests(10)
    records = evaluate_batch(fixture_cfg("--fn", "sum"), requests)
    assert [r.index for r in records] == list(range(10))
    for record, (_, xi) in zip(records, requests):
        assert record.y == pytest.approx(float(np.sum(xi)), rel=1e-12)
        np.testing.assert_array_equal(record.xi_phys, xi)


def test_out_of_order_responses_are_matched_by_id():
    # child answers every 4 requests in reverse, well inside the window
    requests = numeric_requests(12, seed=1)
    records = evaluate_batch(
        fixture_cfg("--fn", "first", "--reverse-batch", "4", max_inflight=8), requests
    )
    assert [r.index for r in records] == list(range(12))
    for record, (_, xi) in zip(records, requests):
        assert record.y == pytest.approx(float(xi[0]), rel=1e-12)


def test_image_mode_probs(tmp_path):
    paths = []
    for k, level in enumerate((0, 128, 255)):
        path = tmp_path / f"img{k}.png"
        write_png(path, Image(np.full((8, 8), level, dtype=np.uint8)))
        paths.append(str(path))
    requests = [(k, p, np.array([float(k)])) for k, p in enumerate(paths)]
    records = evaluate_batch(
        fixture_cfg("--probs-from-image", mode="image"), requests
    )
    for record, level in zip(records, (0, 128, 255)):
        assert record.probs[1] == pytest.approx(level / 255.0, abs=1e-12)
        assert record.probs.sum() == pytest.approx(1.0, abs=1e-12)
        np.testing.assert_array_equal(record.xi_phys, [float(record.index)])


def test_empty_batch():
    assert evaluate_batch(fixture_cfg(), []) == []


def test_mode_env_var_reaches_child():
    # the child refuses to start unless GPC_SENSE_MODE says numeric
    records = evaluate_batch(fixture_cfg("--require-mode", "numeric"), numeric_requests(2))
    assert len(records) == 2
    with pytest.raises(EvaluatorExit):
        evaluate_batch(fixture_cfg("--require-mode", "image"), numeric_requests(2))


def test_backpressure_respects_window(tmp_path):
    track = tmp_path / "inflight.txt"
    requests = numeric_requests(24, seed=2)
    records = evaluate_batch(
        fixture_cfg(
            "--delay", "0.01", "--track-inflight", str(track), max_inflight=3
        ),
        requests,
    )
    assert len(records) == 24
    observed = int(track.read_text())
    assert 2 <= observed <= 3  # saturates the window, never exceeds it


# ---------------------------------------------------------------------------
# protocol fault injection


def test_probability_sum_violation():
    with pytest.raises(EvaluatorProtocolError) as err:
        evaluate_batch(
            fixture_cfg("--bad", "badsum", "--bad-id", "3", mode="image"),
            [(i, f"/nonexistent/{i}.png") for i in range(5)],
        )
    assert "[request 3]" in str(err.value)
    assert err.value.index == 3


def test_malformed_line():
    with pytest.raises(EvaluatorProtocolError) as err:
        evaluate_batch(fixture_cfg("--bad", "garbage", "--bad-id", "0"), numeric_requests(5))
    assert "malformed" in str(err.value)


def test_unknown_response_id():
    with pytest.raises(EvaluatorProtocolError) as err:
        evaluate_batch(fixture_cfg("--bad", "unknown", "--bad-id", "1"), numeric_requests(4))
    assert "does not match any request" in str(err.value)


def test_duplicate_response_id():
    with pytest.raises(EvaluatorProtocolError) as err:
        evaluate_batch(fixture_cfg("--bad", "dup", "--bad-id", "0"), numeric_requests(6))
    assert "duplicate" in str(err.value)
    assert err.value.index == 0


def test_error_response_carries_message_and_index():
    with pytest.raises(EvaluatorProtocolError) as err:
        evaluate_batch(fixture_cfg("--bad", "error", "--bad-id", "2"), numeric_requests(5))
    assert "synthetic failure" in str(err.value)
    assert err.value.index == 2


def test_non_finite_y_rejected():
    class_requests = numeric_requests(2)
    # respond with probs in numeric mode -> missing finite y
    with pytest.raises(EvaluatorProtocolError):
        evaluate_batch(
            fixture_cfg("--bad", "badsum", "--bad-id", "0", mode="numeric"), class_requests
        )


def test_wrong_probs_length():
    with pytest.raises(EvaluatorProtocolError) as err:
        evaluate_batch(
            fixture_cfg(mode="image", n_classes=3),
            [(0, "/nonexistent.png")],
        )
    assert "length 3" in str(err.value)


# ---------------------------------------------------------------------------
# lifecycle failures


def test_timeout_names_silent_request():
    start = time.monotonic()
    with pytest.raises(EvaluatorTimeout) as err:
        evaluate_batch(
            fixture_cfg("--bad", "silent", "--bad-id", "2", timeout=0.5),
            numeric_requests(3),
        )
    assert err.value.index == 2
    assert time.monotonic() - start < 5.0


def test_child_exit_mid_batch():
    with pytest.raises(EvaluatorExit) as err:
        evaluate_batch(fixture_cfg("--exit-after", "2"), numeric_requests(6))
    assert "exited" in str(err.value)


def test_unstartable_command():
    cfg = EvaluatorConfig(command=("/nonexistent-binary-xyz",), mode="numeric")
    with pytest.raises(EvaluatorExit):
        evaluate_batch(cfg, numeric_requests(1))


def test_immediate_exit_command():
    cfg = EvaluatorConfig(command=("/bin/false",), mode="numeric", timeout=5.0)
    with pytest.raises(EvaluatorError):
        evaluate_batch(cfg, numeric_requests(3))


def test_duplicate_request_indices_rejected():
    with pytest.raises(ValueError):
        evaluate_batch(fixture_cfg(), [(0, np.zeros(2)), (0, np.ones(2))])


def test_config_validation():
    with pytest.raises(ValueError):
        EvaluatorConfig(command=())
    with pytest.raises(ValueError):
        EvaluatorConfig(command=("x",), mode="audio")
    with pytest.raises(ValueError):
        EvaluatorConfig(command=("x",), timeout=0.0)
    with pytest.raises(ValueError):
        EvaluatorConfig(command=("x",), max_inflight=0)


# ---------------------------------------------------------------------------
# logit attachment


def test_attach_logits_known_values():
    link = LinkSpec(kind="logit", epsilon=1e-6)
    records = [
        EvalRecord(index=0, probs=np.array([0.5, 0.5])),
        EvalRecord(index=1, probs=np.array([1.0, 0.0])),
        EvalRecord(index=2, probs=np.array([0.2, 0.8])),
    ]
    attach_logits(records, target_class=0, link=link)
    assert records[0].logit_value == pytest.approx(0.0, abs=1e-14)
    assert records[1].logit_value == pytest.approx(13.815509557963773, rel=1e-12)
    assert records[0].target_class == 0

    attach_logits([records[2]], target_class=1, link=link)
    assert records[2].logit_value == pytest.approx(np.log(4.0), rel=1e-12)


def test_attach_logits_validation():
    link = LinkSpec(kind="logit")
    with pytest.raises(ValueError):
        attach_logits([EvalRecord(index=0)], target_class=0, link=link)
    with pytest.raises(IndexError):
        attach_logits(
            [EvalRecord(index=0, probs=np.array([0.4, 0.6]))], target_class=2, link=link
        )
