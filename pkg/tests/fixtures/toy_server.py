#!/usr/bin/env python3
"""Minimal protocol servers for exercising the engine's subprocess client.

Modes:
  echo        conformant; returns each instance's first feature at timestep 1
  version2    replies to the handshake with protocol version 2
  hang        completes the handshake, then never answers predicts
  crash       exits abruptly on the first predict
  wrong-id    answers predicts with a mismatched request id
  nonfinite   returns NaN outputs
  error-once  replies with an error message to the first predict, then echoes
"""
import json
import sys
import time


def write(msg):
    sys.stdout.write(json.dumps(msg) + "\n")
    sys.stdout.flush()


def main():
    mode = sys.argv[1] if len(sys.argv) > 1 else "echo"
    features = int(sys.argv[2]) if len(sys.argv) > 2 else 1
    timesteps = int(sys.argv[3]) if len(sys.argv) > 3 else 3
    errored = False
    for line in sys.stdin:
        try:
            msg = json.loads(line)
        except ValueError:
            write({"type": "error", "id": None, "message": "bad json"})
            continue
        kind = msg.get("type")
        if kind == "handshake":
            version = 2 if mode == "version2" else 1
            write({"type": "ready", "version": version, "features": features,
                   "timesteps": timesteps, "task": "regression"})
        elif kind == "predict":
            if mode == "hang":
                time.sleep(3600)
            if mode == "crash":
                sys.exit(3)
            outputs = [row[0][0] for row in msg["instances"]]
            if mode == "nonfinite":
                # json.dumps emits a bare NaN token here, which the engine must reject
                write({"type": "prediction", "id": msg["id"], "outputs": [float("nan")] * len(outputs)})
                continue
            if mode == "error-once" and not errored:
                errored = True
                write({"type": "error", "id": msg["id"], "message": "transient failure"})
                continue
            reply_id = msg["id"] + 1 if mode == "wrong-id" else msg["id"]
            write({"type": "prediction", "id": reply_id, "outputs": outputs})
        elif kind == "shutdown":
            return 0
        else:
            write({"type": "error", "id": msg.get("id"), "message": f"unknown type {kind!r}"})
    return 0


if __name__ == "__main__":
    sys.exit(main())
