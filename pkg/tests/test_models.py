import json
import sys

import numpy as np
import pytest

from timex.conformance import run_conformance
from timex.data import Task
from timex.errors import InvalidArgumentError, ModelStartupError, ProtocolError
from timex.models import (
    InProcessModel,
    PredictBatch,
    predict,
    shutdown,
    spawn_external_model,
)

from conftest import constant_model, toy_server_cmd


class TestInProcessModel:
    def test_constant_five_instances(self):
        model = constant_model(2, 3, value=0.3)
        batch = PredictBatch(np.zeros((5, 2, 3)))
        np.testing.assert_array_equal(predict(model, batch), np.full(5, 0.3))

    def test_repeat_batches_identical(self):
        rng = np.random.default_rng(0)
        model = InProcessModel(lambda v: v.sum(axis=(1, 2)), 2, 4)
        batch = PredictBatch(rng.standard_normal((6, 2, 4)))
        assert predict(model, batch).tobytes() == predict(model, batch).tobytes()

    def test_dimension_mismatch(self):
        model = constant_model(2, 3)
        with pytest.raises(InvalidArgumentError):
            predict(model, PredictBatch(np.zeros((4, 3, 3))))

    def test_non_finite_output_is_protocol_error(self):
        model = InProcessModel(lambda v: np.full(v.shape[0], np.inf), 1, 1)
        with pytest.raises(ProtocolError):
            model.predict_values(np.zeros((2, 1, 1)))

    def test_classification_range_enforced(self):
        model = InProcessModel(lambda v: np.full(v.shape[0], 1.5), 1, 1,
                               task=Task.CLASSIFICATION)
        with pytest.raises(ProtocolError):
            model.predict_values(np.zeros((2, 1, 1)))

    def test_wrong_output_length(self):
        model = InProcessModel(lambda v: np.zeros(v.shape[0] + 1), 1, 1)
        with pytest.raises(ProtocolError):
            model.predict_values(np.zeros((2, 1, 1)))

    def test_batch_validation(self):
        with pytest.raises(InvalidArgumentError):
            PredictBatch(np.zeros((2, 2)))
        with pytest.raises(InvalidArgumentError):
            PredictBatch(np.array([[[np.nan]]]))


class TestSubprocessModel:
    def test_echo_model(self):
        cmd, args = toy_server_cmd("echo")
        with spawn_external_model(cmd, args) as model:
            assert (model.num_features, model.sequence_length) == (1, 3)
            values = np.zeros((2, 1, 3))
            values[0, 0, 0] = 1.0
            values[1, 0, 0] = 2.0
            out = predict(model, PredictBatch(values))
            np.testing.assert_array_equal(out, [1.0, 2.0])

    def test_determinism_same_batch_twice(self):
        cmd, args = toy_server_cmd("echo")
        with spawn_external_model(cmd, args) as model:
            values = np.random.default_rng(3).standard_normal((5, 1, 3))
            first = model.predict_values(values)
            second = model.predict_values(values)
            assert first.tobytes() == second.tobytes()

    def test_batching_transparent(self):
        cmd, args = toy_server_cmd("echo")
        with spawn_external_model(cmd, args, batch_size=2) as model:
            values = np.random.default_rng(4).standard_normal((7, 1, 3))
            chunked = model.predict_values(values)
        with spawn_external_model(cmd, args, batch_size=100) as model:
            whole = model.predict_values(values)
        assert chunked.tobytes() == whole.tobytes()

    def test_float_round_trip_precision(self):
        cmd, args = toy_server_cmd("echo")
        ugly = np.array([0.1, 1 / 3, np.pi, 1e-300, 123456789.123456789])
        values = np.zeros((5, 1, 3))
        values[:, 0, 0] = ugly
        with spawn_external_model(cmd, args) as model:
            out = model.predict_values(values)
        assert out.tobytes() == ugly.tobytes()

    def test_nonexistent_command(self):
        with pytest.raises(ModelStartupError):
            spawn_external_model("/nonexistent/model-binary")

    def test_version_mismatch(self):
        cmd, args = toy_server_cmd("version2")
        with pytest.raises(ModelStartupError, match="version"):
            spawn_external_model(cmd, args)

    def test_crash_is_protocol_error(self):
        cmd, args = toy_server_cmd("crash")
        model = spawn_external_model(cmd, args)
        with pytest.raises(ProtocolError):
            model.predict_values(np.zeros((2, 1, 3)))
        model.close()

    def test_wrong_reply_id(self):
        cmd, args = toy_server_cmd("wrong-id")
        model = spawn_external_model(cmd, args)
        with pytest.raises(ProtocolError, match="id") as info:
            model.predict_values(np.zeros((2, 1, 3)))
        assert info.value.raw is not None
        model.close()

    def test_non_finite_outputs_rejected(self):
        cmd, args = toy_server_cmd("nonfinite")
        model = spawn_external_model(cmd, args)
        with pytest.raises(ProtocolError, match="finite"):
            model.predict_values(np.zeros((2, 1, 3)))
        model.close()

    def test_error_reply_carries_message(self):
        cmd, args = toy_server_cmd("error-once")
        model = spawn_external_model(cmd, args)
        with pytest.raises(ProtocolError, match="transient failure"):
            model.predict_values(np.zeros((2, 1, 3)))
        # the server survives and answers the next request
        out = model.predict_values(np.ones((2, 1, 3)))
        np.testing.assert_array_equal(out, [1.0, 1.0])
        model.close()

    def test_clean_shutdown_exit_zero(self):
        cmd, args = toy_server_cmd("echo")
        model = spawn_external_model(cmd, args)
        shutdown(model)
        assert model.returncode == 0

    def test_double_shutdown_idempotent(self):
        cmd, args = toy_server_cmd("echo")
        model = spawn_external_model(cmd, args)
        shutdown(model)
        shutdown(model)
        assert model.returncode == 0

    def test_hung_server_killed(self):
        cmd, args = toy_server_cmd("hang")
        model = spawn_external_model(cmd, args, predict_timeout=0.5)
        with pytest.raises(ProtocolError, match="timed out"):
            model.predict_values(np.zeros((2, 1, 3)))
        model.close(timeout=0.5)
        assert model.returncode is not None

    def test_handshake_timeout(self):
        model = None
        with pytest.raises(ModelStartupError):
            model = spawn_external_model(sys.executable, ["-c", "import time; time.sleep(60)"],
                                         timeout=0.5)
        assert model is None


class TestConformanceSuite:
    def test_toy_echo_server_conformant(self):
        cmd, args = toy_server_cmd("echo")
        results = run_conformance(cmd, args, timeout=10.0)
        failures = [r for r in results if not r.passed]
        assert not failures, failures
        assert {r.name for r in results} >= {
            "handshake", "predict-basic", "determinism", "batch-transparency",
            "order-preserved", "malformed-line-recovery", "shutdown-clean",
        }

    def test_builtin_serve_conformant(self, tmp_path):
        from timex import synth
        from timex.data import Task

        ds, gens = synth.generate_dataset(30, 2, 4, seed=5)
        targets, spec, _ = synth.build_ground_truth(ds, gens, 1, seed=6, task=Task.CLASSIFICATION)
        spec = synth.finalize_spec(spec, ds.with_targets(targets, Task.CLASSIFICATION), 0.5)
        spec_path = tmp_path / "model.json"
        synth.save_model_spec(spec, spec_path)
        results = run_conformance(
            sys.executable, ["-m", "timex", "serve", "--builtin", str(spec_path)], timeout=30.0
        )
        failures = [r for r in results if not r.passed]
        assert not failures, failures

    def test_nonconformant_server_reported(self):
        cmd, args = toy_server_cmd("wrong-id")
        results = run_conformance(cmd, args, timeout=10.0)
        assert any(not r.passed for r in results)


def test_wire_messages_shape(tmp_path):
    # handshake and predict frames match the documented schema exactly
    script = tmp_path / "recorder.py"
    script.write_text(
        "import sys, json\n"
        "log = open(sys.argv[1], 'w')\n"
        "for line in sys.stdin:\n"
        "    msg = json.loads(line)\n"
        "    log.write(line); log.flush()\n"
        "    if msg['type'] == 'handshake':\n"
        "        print(json.dumps({'type': 'ready', 'version': 1, 'features': 1,"
        " 'timesteps': 2, 'task': 'regression'}), flush=True)\n"
        "    elif msg['type'] == 'predict':\n"
        "        print(json.dumps({'type': 'prediction', 'id': msg['id'],"
        " 'outputs': [0.0] * len(msg['instances'])}), flush=True)\n"
        "    else:\n"
        "        break\n"
    )
    log_path = tmp_path / "log.jsonl"
    model = spawn_external_model(sys.executable, [str(script), str(log_path)])
    model.predict_values(np.array([[[1.5, -2.5]]]))
    model.close()
    lines = [json.loads(l) for l in log_path.read_text().splitlines()]
    assert lines[0] == {"type": "handshake", "version": 1}
    assert lines[1]["type"] == "predict"
    assert lines[1]["id"] == 0
    assert lines[1]["instances"] == [[[1.5, -2.5]]]
    assert lines[2] == {"type": "shutdown"}
