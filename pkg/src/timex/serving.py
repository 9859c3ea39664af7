"""Serve an in-process model over the wire protocol (the model side).

Used by ``timex serve`` to put a synthetic model behind the subprocess
protocol; analyses through it are bit-identical to in-process runs.
"""

import json
import sys

import numpy as np

from .models import PROTOCOL_VERSION, ModelHandle


def _write(stream, message: dict) -> None:
    stream.write(json.dumps(message, allow_nan=False, separators=(",", ":")).encode("utf-8") + b"\n")
    stream.flush()


def serve_model(model: ModelHandle, stdin=None, stdout=None) -> int:
    """Answer protocol messages until shutdown or EOF; returns the exit code."""
    in_stream = stdin if stdin is not None else sys.stdin.buffer
    out_stream = stdout if stdout is not None else sys.stdout.buffer
    for raw in in_stream:
        try:
            message = json.loads(raw.decode("utf-8"))
            if not isinstance(message, dict):
                raise ValueError("message is not an object")
        except ValueError as exc:
            _write(out_stream, {"type": "error", "id": None, "message": f"bad message: {exc}"})
            continue
        kind = message.get("type")
        if kind == "handshake":
            if message.get("version") != PROTOCOL_VERSION:
                _write(out_stream, {
                    "type": "error", "id": None,
                    "message": f"unsupported protocol version {message.get('version')!r}",
                })
                continue
            _write(out_stream, {
                "type": "ready",
                "version": PROTOCOL_VERSION,
                "features": model.num_features,
                "timesteps": model.sequence_length,
                "task": model.task.value,
            })
        elif kind == "predict":
            request_id = message.get("id")
            try:
                values = np.asarray(message["instances"], dtype=np.float64)
                if values.ndim != 3:
                    raise ValueError(f"instances have rank {values.ndim}, expected 3")
                outputs = model.predict_values(values)
                _write(out_stream, {"type": "prediction", "id": request_id,
                                    "outputs": [float(v) for v in outputs]})
            except Exception as exc:  # noqa: BLE001 - reported to the peer
                _write(out_stream, {"type": "error", "id": request_id, "message": str(exc)})
        elif kind == "shutdown":
            return 0
        else:
            _write(out_stream, {"type": "error", "id": message.get("id"),
                                "message": f"unknown message type {kind!r}"})
    return 0
