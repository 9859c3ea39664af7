"""Black-box model handles: in-process callables and external subprocesses.

External models speak a line-delimited JSON protocol over stdin/stdout:

    engine -> model   {"type": "handshake", "version": 1}
    model  -> engine  {"type": "ready", "version": 1, "features": D,
                       "timesteps": L, "task": "regression"|"classification"}
    engine -> model   {"type": "predict", "id": N, "instances": [[[...]]]}
    model  -> engine  {"type": "prediction", "id": N, "outputs": [...]}
    model  -> engine  {"type": "error", "id": N|null, "message": "..."}
    engine -> model   {"type": "shutdown"}

One request is in flight at a time; large inputs are chunked into batches
(default 256 instances) by the handle.  Numbers are serialized with full
round-trip precision, so an external model wrapping the same function as an
in-process handle produces bit-identical analyses.  The model's stderr is
inherited and passes through for diagnostics.
"""

import json
import os
import select
import subprocess
import threading
import time
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .data import Task
from .errors import InvalidArgumentError, ModelStartupError, ProtocolError

PROTOCOL_VERSION = 1
DEFAULT_BATCH_SIZE = 256

BACKEND_IN_PROCESS = "in_process"
BACKEND_SUBPROCESS = "external_subprocess"


@dataclass
class PredictBatch:
    """A batch of instances, each a (features, timesteps) matrix."""

    instances: np.ndarray
    batch_id: int = 0

    def __post_init__(self):
        arr = np.ascontiguousarray(np.asarray(self.instances, dtype=np.float64))
        if arr.ndim != 3:
            raise InvalidArgumentError("batch instances must form a rank-3 array")
        if not np.isfinite(arr).all():
            raise InvalidArgumentError("batch contains non-finite values")
        if self.batch_id < 0:
            raise InvalidArgumentError("batch id must be non-negative")
        self.instances = arr


class ModelHandle(ABC):
    """Deterministic predictor over (batch, features, timesteps) arrays."""

    backend: str
    num_features: int
    sequence_length: int
    task: Task
    thread_safe: bool = False

    @abstractmethod
    def predict_values(self, values: np.ndarray) -> np.ndarray:
        """One output per instance, order-preserving."""

    def close(self) -> None:
        """Release resources; idempotent."""

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()
        return False

    def _check_input(self, values: np.ndarray) -> None:
        if values.ndim != 3 or values.shape[1:] != (self.num_features, self.sequence_length):
            raise InvalidArgumentError(
                f"batch shape {values.shape} does not match declared dims "
                f"({self.num_features}, {self.sequence_length})"
            )

    def _check_output(self, outputs: np.ndarray, expected: int) -> np.ndarray:
        outputs = np.asarray(outputs, dtype=np.float64)
        if outputs.shape != (expected,):
            raise ProtocolError(f"model returned {outputs.shape} outputs for {expected} instances")
        if not np.isfinite(outputs).all():
            raise ProtocolError("model returned non-finite outputs")
        if self.task == Task.CLASSIFICATION and ((outputs < 0.0) | (outputs > 1.0)).any():
            raise ProtocolError("classification model returned outputs outside [0, 1]")
        return outputs


def predict(model: ModelHandle, batch: PredictBatch) -> np.ndarray:
    """Run one batch through a handle, validating dimensions both ways."""
    model._check_input(batch.instances)
    return model.predict_values(batch.instances)


def shutdown(model: ModelHandle) -> None:
    """Shut a handle down; safe to call twice."""
    model.close()


class InProcessModel(ModelHandle):
    """Wraps a pure callable mapping a (B, D, L) array to B outputs."""

    backend = BACKEND_IN_PROCESS

    def __init__(
        self,
        fn: Callable[[np.ndarray], np.ndarray],
        num_features: int,
        sequence_length: int,
        task: Task = Task.REGRESSION,
        name: str = "in-process",
        thread_safe: bool = True,
    ):
        self._fn = fn
        self.num_features = int(num_features)
        self.sequence_length = int(sequence_length)
        self.task = Task(task)
        self.name = name
        self.thread_safe = thread_safe

    def predict_values(self, values: np.ndarray) -> np.ndarray:
        self._check_input(values)
        return self._check_output(self._fn(values), values.shape[0])


class _LineChannel:
    """Blocking line reader/writer over a subprocess's raw pipes."""

    def __init__(self, proc: subprocess.Popen):
        self._proc = proc
        self._buffer = bytearray()

    def write_line(self, payload: bytes) -> None:
        try:
            self._proc.stdin.write(payload + b"\n")
            self._proc.stdin.flush()
        except (BrokenPipeError, OSError) as exc:
            raise ProtocolError(f"model process pipe closed while writing: {exc}") from exc

    def read_line(self, timeout: float) -> bytes:
        deadline = time.monotonic() + timeout
        fd = self._proc.stdout.fileno()
        while True:
            newline = self._buffer.find(b"\n")
            if newline >= 0:
                line = bytes(self._buffer[:newline])
                del self._buffer[: newline + 1]
                return line
            remaining = deadline - time.monotonic()
            if remaining <= 0:
                raise ProtocolError(f"timed out after {timeout:.1f}s waiting for model reply")
            ready, _, _ = select.select([fd], [], [], remaining)
            if not ready:
                continue
            chunk = os.read(fd, 1 << 16)
            if not chunk:
                code = self._proc.poll()
                raise ProtocolError(f"model process closed its output (exit code {code})")
            self._buffer.extend(chunk)


def _dump_message(message: dict) -> bytes:
    return json.dumps(message, allow_nan=False, separators=(",", ":")).encode("utf-8")


class SubprocessModel(ModelHandle):
    """Handle for a model served by a child process over the wire protocol."""

    backend = BACKEND_SUBPROCESS
    thread_safe = False

    def __init__(
        self,
        command: str,
        args: Sequence[str] = (),
        timeout: float = 30.0,
        batch_size: int = DEFAULT_BATCH_SIZE,
        predict_timeout: float = 600.0,
    ):
        if batch_size < 1:
            raise InvalidArgumentError("batch_size must be >= 1")
        self.command = [command, *args]
        self.batch_size = int(batch_size)
        self.predict_timeout = float(predict_timeout)
        self._next_id = 0
        self._lock = threading.Lock()
        self._closed = False
        try:
            self._proc = subprocess.Popen(
                self.command,
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                stderr=None,  # inherited: model diagnostics pass through
                bufsize=0,
            )
        except OSError as exc:
            raise ModelStartupError(f"failed to spawn {command!r}: {exc}") from exc
        self._channel = _LineChannel(self._proc)
        try:
            self._handshake(timeout)
        except ProtocolError as exc:
            self._kill()
            raise ModelStartupError(f"handshake failed: {exc}") from exc
        except Exception:
            self._kill()
            raise

    def _handshake(self, timeout: float) -> None:
        self._channel.write_line(_dump_message({"type": "handshake", "version": PROTOCOL_VERSION}))
        reply = self._read_message(timeout)
        if reply.get("type") != "ready":
            raise ModelStartupError(f"expected ready message, got {reply!r}")
        version = reply.get("version")
        if version != PROTOCOL_VERSION:
            raise ModelStartupError(
                f"protocol version mismatch: engine speaks {PROTOCOL_VERSION}, model replied {version!r}"
            )
        try:
            self.num_features = int(reply["features"])
            self.sequence_length = int(reply["timesteps"])
            self.task = Task(reply["task"])
        except (KeyError, ValueError) as exc:
            raise ModelStartupError(f"malformed ready message {reply!r}: {exc}") from exc
        if self.num_features < 1 or self.sequence_length < 1:
            raise ModelStartupError(f"model declared invalid dims in {reply!r}")

    def _read_message(self, timeout: float) -> dict:
        line = self._channel.read_line(timeout)
        try:
            message = json.loads(line.decode("utf-8"))
        except ValueError as exc:
            raise ProtocolError(f"undecodable model reply: {exc}", raw=line.decode("utf-8", "replace")) from exc
        if not isinstance(message, dict):
            raise ProtocolError("model reply is not a JSON object", raw=line.decode("utf-8", "replace"))
        return message

    def predict_values(self, values: np.ndarray) -> np.ndarray:
        self._check_input(values)
        if self._closed:
            raise ProtocolError("predict on a closed model handle")
        outputs = np.empty(values.shape[0])
        with self._lock:
            for lo in range(0, values.shape[0], self.batch_size):
                hi = min(lo + self.batch_size, values.shape[0])
                outputs[lo:hi] = self._predict_chunk(values[lo:hi])
        return self._check_output(outputs, values.shape[0])

    def _predict_chunk(self, chunk: np.ndarray) -> np.ndarray:
        request_id = self._next_id
        self._next_id += 1
        self._channel.write_line(
            _dump_message({"type": "predict", "id": request_id, "instances": chunk.tolist()})
        )
        reply = self._read_message(self.predict_timeout)
        kind = reply.get("type")
        if kind == "error":
            raise ProtocolError(f"model error: {reply.get('message')!r}", raw=json.dumps(reply))
        if kind != "prediction":
            raise ProtocolError(f"expected prediction, got {kind!r}", raw=json.dumps(reply))
        if reply.get("id") != request_id:
            raise ProtocolError(
                f"reply id {reply.get('id')!r} does not match request id {request_id}",
                raw=json.dumps(reply),
            )
        out = reply.get("outputs")
        if not isinstance(out, list) or len(out) != chunk.shape[0]:
            raise ProtocolError(f"prediction carries {type(out)} of wrong length", raw=json.dumps(reply))
        try:
            return np.asarray(out, dtype=np.float64)
        except (TypeError, ValueError) as exc:
            raise ProtocolError(f"non-numeric outputs: {exc}", raw=json.dumps(reply)) from exc

    def close(self, timeout: float = 5.0) -> None:
        if self._closed:
            return
        self._closed = True
        try:
            self._channel.write_line(_dump_message({"type": "shutdown"}))
        except ProtocolError:
            pass
        try:
            self._proc.wait(timeout=timeout)
        except subprocess.TimeoutExpired:
            self._kill()
        self._close_pipes()

    def _kill(self) -> None:
        if self._proc.poll() is None:
            self._proc.terminate()
            try:
                self._proc.wait(timeout=2.0)
            except subprocess.TimeoutExpired:
                self._proc.kill()
                self._proc.wait()
        self._close_pipes()

    def _close_pipes(self) -> None:
        for pipe in (self._proc.stdin, self._proc.stdout):
            if pipe is not None:
                try:
                    pipe.close()
                except OSError:
                    pass

    @property
    def returncode(self):
        return self._proc.poll()


def spawn_external_model(
    command: str,
    args: Sequence[str] = (),
    timeout: float = 30.0,
    batch_size: int = DEFAULT_BATCH_SIZE,
    predict_timeout: float = 600.0,
) -> SubprocessModel:
    """Spawn and handshake an external model; the handle is ready to predict."""
    return SubprocessModel(command, args, timeout, batch_size, predict_timeout)
