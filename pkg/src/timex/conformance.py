"""Machine-readable conformance checks for wire-protocol model servers.

Drives a server through the handshake, prediction, fault-recovery, and
shutdown paths and reports one pass/fail result per check.  Used by the
package's own tests and by adapter implementations wrapping user models.
"""

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .data import Task
from .errors import ProtocolError, TimexError
from .models import SubprocessModel


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str = ""


def _check(results: list[CheckResult], name: str, fn) -> bool:
    try:
        detail = fn() or ""
        results.append(CheckResult(name, True, detail))
        return True
    except AssertionError as exc:
        results.append(CheckResult(name, False, str(exc)))
    except TimexError as exc:
        results.append(CheckResult(name, False, f"{type(exc).__name__}: {exc}"))
    return False


def run_conformance(
    command: str,
    args: Sequence[str] = (),
    timeout: float = 30.0,
    seed: int = 0,
) -> list[CheckResult]:
    """Run every protocol check against ``command``; never raises on failures."""
    results: list[CheckResult] = []
    try:
        model = SubprocessModel(command, args, timeout=timeout, predict_timeout=timeout)
    except TimexError as exc:
        results.append(CheckResult("handshake", False, f"{type(exc).__name__}: {exc}"))
        return results
    results.append(CheckResult(
        "handshake", True,
        f"features={model.num_features} timesteps={model.sequence_length} task={model.task.value}",
    ))

    rng = np.random.default_rng(seed)
    batch = rng.standard_normal((7, model.num_features, model.sequence_length))

    def predict_basic():
        out = model.predict_values(batch)
        assert out.shape == (7,), f"expected 7 outputs, got {out.shape}"
        assert np.isfinite(out).all(), "outputs must be finite"
        if model.task == Task.CLASSIFICATION:
            assert ((out >= 0) & (out <= 1)).all(), "classification outputs must lie in [0, 1]"

    ok = _check(results, "predict-basic", predict_basic)

    def determinism():
        first = model.predict_values(batch)
        second = model.predict_values(batch)
        assert first.tobytes() == second.tobytes(), "repeat predictions differ"

    def batch_transparency():
        whole = model.predict_values(batch)
        parts = np.concatenate([model.predict_values(batch[:3]), model.predict_values(batch[3:])])
        assert whole.tobytes() == parts.tobytes(), "split-batch predictions differ"

    def order_preserved():
        reversed_out = model.predict_values(batch[::-1].copy())
        forward = model.predict_values(batch)
        assert reversed_out.tobytes() == forward[::-1].tobytes(), "outputs do not track instance order"

    def malformed_line_recovery():
        model._channel.write_line(b"this is not json")
        reply = model._read_message(timeout)
        assert reply.get("type") == "error", f"expected an error reply, got {reply!r}"
        assert reply.get("id") is None, "error for an unparseable line must carry id null"
        after = model.predict_values(batch)
        assert after.shape == (7,), "server did not survive a malformed line"

    if ok:
        _check(results, "determinism", determinism)
        _check(results, "batch-transparency", batch_transparency)
        _check(results, "order-preserved", order_preserved)
        _check(results, "malformed-line-recovery", malformed_line_recovery)

    def clean_shutdown():
        model.close(timeout=timeout)
        code = model.returncode
        assert code == 0, f"exit code {code} after shutdown"

    _check(results, "shutdown-clean", clean_shutdown)
    return results


def assert_conformant(command: str, args: Sequence[str] = (), timeout: float = 30.0) -> None:
    """Raise ``ProtocolError`` listing every failed check, if any."""
    results = run_conformance(command, args, timeout=timeout)
    failed = [r for r in results if not r.passed]
    if failed:
        summary = "; ".join(f"{r.name}: {r.detail}" for r in failed)
        raise ProtocolError(f"conformance failures: {summary}")
