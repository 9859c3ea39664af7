import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from timex.data import (
    FORMAT_BINARY,
    FORMAT_CSV_LONG,
    FeatureKind,
    FeatureMeta,
    LossKind,
    Task,
    TemporalDataset,
    Window,
    compute_loss,
    load_dataset,
    loss_vector,
    save_dataset,
)
from timex.errors import DataFormatError, InvalidArgumentError


class TestComputeLoss:
    def test_quadratic(self):
        assert compute_loss(LossKind.quadratic(), 1.0, 0.0) == 1.0

    def test_bce_perfect_prediction(self):
        assert compute_loss(LossKind.binary_cross_entropy(), 1.0, 1.0) <= -math.log(1 - 1e-12) + 1e-15

    def test_bce_half(self):
        assert compute_loss(LossKind.binary_cross_entropy(), 1.0, 0.5) == 0.6931471805599453

    def test_quadratic_zero_at_match(self):
        assert compute_loss(LossKind.quadratic(), 2.5, 2.5) == 0.0

    def test_non_finite_rejected(self):
        with pytest.raises(InvalidArgumentError):
            compute_loss(LossKind.quadratic(), float("nan"), 0.0)
        with pytest.raises(InvalidArgumentError):
            compute_loss(LossKind.quadratic(), 0.0, float("inf"))

    def test_bce_target_must_be_binary(self):
        with pytest.raises(InvalidArgumentError):
            compute_loss(LossKind.binary_cross_entropy(), 0.5, 0.5)

    @given(st.floats(-1e6, 1e6), st.floats(-1e6, 1e6))
    def test_quadratic_non_negative(self, t, o):
        assert compute_loss(LossKind.quadratic(), t, o) >= 0.0

    @given(st.sampled_from([0.0, 1.0]), st.floats(0.0, 1.0))
    def test_bce_non_negative(self, t, p):
        assert compute_loss(LossKind.binary_cross_entropy(), t, p) >= 0.0

    def test_loss_vector_matches_scalar(self):
        targets = np.array([0.0, 1.0, 1.0])
        outputs = np.array([0.2, 0.9, 0.4])
        for kind in (LossKind.quadratic(), LossKind.binary_cross_entropy()):
            vec = loss_vector(kind, targets, outputs)
            for i in range(3):
                assert vec[i] == compute_loss(kind, targets[i], outputs[i])


class TestWindow:
    def test_bounds_validated(self):
        with pytest.raises(InvalidArgumentError):
            Window(0, 3)
        with pytest.raises(InvalidArgumentError):
            Window(4, 3)

    def test_width_and_slice(self):
        w = Window(2, 4)
        assert w.width == 3
        assert w.indices == slice(1, 4)
        assert w.contains(2) and w.contains(4) and not w.contains(5)

    def test_full(self):
        assert Window.full(7) == Window(1, 7)
        assert Window(1, 7).is_full(7)


class TestDatasetInvariants:
    def test_requires_two_instances(self):
        with pytest.raises(InvalidArgumentError):
            TemporalDataset(np.zeros((1, 2, 3)), np.zeros(1))

    def test_rejects_non_finite(self):
        values = np.zeros((2, 1, 2))
        values[0, 0, 0] = np.nan
        with pytest.raises(InvalidArgumentError):
            TemporalDataset(values, np.zeros(2))

    def test_classification_targets_binary(self):
        with pytest.raises(InvalidArgumentError):
            TemporalDataset(np.zeros((2, 1, 2)), np.array([0.0, 0.5]), Task.CLASSIFICATION)

    def test_meta_length_checked(self):
        with pytest.raises(InvalidArgumentError):
            TemporalDataset(np.zeros((2, 2, 2)), np.zeros(2), feature_meta=(FeatureMeta("a"),))

    def test_values_read_only(self, tiny_dataset):
        with pytest.raises(ValueError):
            tiny_dataset.values[0, 0, 0] = 9.0

    def test_default_names(self, tiny_dataset):
        assert tiny_dataset.feature_names == ("f1",)
        assert tiny_dataset.feature_index("f1") == 0
        with pytest.raises(InvalidArgumentError):
            tiny_dataset.feature_index("nope")


class TestBinaryFormat:
    def test_indexing_round_trip(self, tiny_dataset, tmp_path):
        path = tmp_path / "d.tds"
        save_dataset(tiny_dataset, path, FORMAT_BINARY)
        loaded = load_dataset(path, FORMAT_BINARY)
        # values[1][0][2] = 6 with 1-based instance/timestep indexing
        assert loaded.values[1 - 1, 0, 3 - 1] == 3.0
        assert loaded.values[2 - 1, 0, 3 - 1] == 6.0
        np.testing.assert_array_equal(loaded.values, tiny_dataset.values)
        np.testing.assert_array_equal(loaded.targets, tiny_dataset.targets)
        assert loaded.task == tiny_dataset.task
        assert loaded.feature_meta == tiny_dataset.feature_meta

    def test_bad_magic(self, tmp_path):
        path = tmp_path / "bad.tds"
        path.write_bytes(b"NOPE" + b"\x00" * 64)
        with pytest.raises(DataFormatError, match="magic"):
            load_dataset(path, FORMAT_BINARY)

    def test_truncated(self, tiny_dataset, tmp_path):
        path = tmp_path / "d.tds"
        save_dataset(tiny_dataset, path)
        data = path.read_bytes()
        path.write_bytes(data[: len(data) - 10])
        with pytest.raises(DataFormatError, match="truncated|metadata"):
            load_dataset(path)

    def test_empty_path_errors(self, tiny_dataset):
        with pytest.raises(OSError):
            save_dataset(tiny_dataset, "")

    @settings(max_examples=25, deadline=None)
    @given(m=st.integers(2, 5), d=st.integers(1, 3), length=st.integers(1, 4),
           seed=st.integers(0, 2**31))
    def test_round_trip_bit_exact(self, tmp_path_factory, m, d, length, seed):
        rng = np.random.default_rng(seed)
        ds = TemporalDataset(rng.standard_normal((m, d, length)) * 10.0 ** float(rng.integers(-6, 6)),
                             rng.standard_normal(m))
        path = tmp_path_factory.mktemp("rt") / "d.tds"
        save_dataset(ds, path)
        loaded = load_dataset(path)
        assert loaded.values.tobytes() == ds.values.tobytes()
        assert loaded.targets.tobytes() == ds.targets.tobytes()


class TestCsvLongFormat:
    def test_round_trip_values_exact(self, tiny_dataset, tmp_path):
        path = tmp_path / "d.csv"
        save_dataset(tiny_dataset, path, FORMAT_CSV_LONG)
        loaded = load_dataset(path, FORMAT_CSV_LONG)
        assert loaded.values.tobytes() == tiny_dataset.values.tobytes()
        assert loaded.targets.tobytes() == tiny_dataset.targets.tobytes()

    def test_missing_cell_named(self, tiny_dataset, tmp_path):
        path = tmp_path / "d.csv"
        save_dataset(tiny_dataset, path, FORMAT_CSV_LONG)
        lines = path.read_text().splitlines()
        removed = lines.pop(3)  # a data row: instance 1, timestep 3
        path.write_text("\n".join(lines) + "\n")
        with pytest.raises(DataFormatError, match="missing value for instance"):
            load_dataset(path, FORMAT_CSV_LONG)
        assert removed.startswith("1,")

    def test_duplicate_cell_rejected(self, tiny_dataset, tmp_path):
        path = tmp_path / "d.csv"
        save_dataset(tiny_dataset, path, FORMAT_CSV_LONG)
        lines = path.read_text().splitlines()
        lines.append(lines[1])
        path.write_text("\n".join(lines) + "\n")
        with pytest.raises(DataFormatError, match="duplicate"):
            load_dataset(path, FORMAT_CSV_LONG)

    def test_missing_targets_file(self, tiny_dataset, tmp_path):
        path = tmp_path / "d.csv"
        save_dataset(tiny_dataset, path, FORMAT_CSV_LONG)
        (tmp_path / "d.targets.csv").unlink()
        with pytest.raises(DataFormatError, match="targets"):
            load_dataset(path, FORMAT_CSV_LONG)

    def test_binary_targets_infer_classification(self, tmp_path):
        ds = TemporalDataset(np.ones((2, 1, 1)), np.array([0.0, 1.0]), Task.CLASSIFICATION)
        path = tmp_path / "d.csv"
        save_dataset(ds, path, FORMAT_CSV_LONG)
        assert load_dataset(path, FORMAT_CSV_LONG).task == Task.CLASSIFICATION


def test_unknown_format_rejected(tiny_dataset, tmp_path):
    with pytest.raises(InvalidArgumentError):
        save_dataset(tiny_dataset, tmp_path / "x", "parquet")
    with pytest.raises(InvalidArgumentError):
        load_dataset(tmp_path / "x", "parquet")


def test_categorical_meta_round_trip(tmp_path):
    meta = (FeatureMeta("hr", FeatureKind.CONTINUOUS), FeatureMeta("code", FeatureKind.CATEGORICAL))
    ds = TemporalDataset(np.arange(8.0).reshape(2, 2, 2), np.array([1.0, 0.0]),
                         Task.CLASSIFICATION, meta)
    path = tmp_path / "d.tds"
    save_dataset(ds, path)
    assert load_dataset(path).feature_meta == meta
