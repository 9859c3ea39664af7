"""Datasets, windows, and loss functions.

A dataset is a dense ``(instances, features, timesteps)`` float64 tensor plus
one target per instance.  Timesteps are 1-based inclusive on every
user-facing surface (files, windows, reports); array indexing inside the
package is plain 0-based numpy.
"""

import csv
import json
import struct
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import numpy as np

from . import kernels
from .errors import DataFormatError, InvalidArgumentError


class Task(str, Enum):
    REGRESSION = "regression"
    CLASSIFICATION = "classification"


class FeatureKind(str, Enum):
    CONTINUOUS = "continuous"
    CATEGORICAL = "categorical"


@dataclass(frozen=True)
class FeatureMeta:
    name: str
    kind: FeatureKind = FeatureKind.CONTINUOUS


@dataclass(frozen=True)
class Window:
    """A contiguous inclusive range of 1-based timesteps."""

    start: int
    end: int

    def __post_init__(self):
        if not (1 <= self.start <= self.end):
            raise InvalidArgumentError(f"invalid window [{self.start}, {self.end}]")

    @property
    def width(self) -> int:
        return self.end - self.start + 1

    @property
    def indices(self) -> slice:
        """0-based slice over the timestep axis."""
        return slice(self.start - 1, self.end)

    def contains(self, timestep: int) -> bool:
        return self.start <= timestep <= self.end

    def is_full(self, sequence_length: int) -> bool:
        return self.start == 1 and self.end == sequence_length

    @staticmethod
    def full(sequence_length: int) -> "Window":
        return Window(1, sequence_length)

    def to_document(self) -> dict:
        return {"start": self.start, "end": self.end}


QUADRATIC = "quadratic"
BINARY_CROSS_ENTROPY = "binary_cross_entropy"


@dataclass(frozen=True)
class LossKind:
    """Loss selector: quadratic, or binary cross-entropy with probability clamp."""

    kind: str = QUADRATIC
    clamp_epsilon: float = 1e-12

    def __post_init__(self):
        if self.kind not in (QUADRATIC, BINARY_CROSS_ENTROPY):
            raise InvalidArgumentError(f"unknown loss kind {self.kind!r}")
        if not (0.0 < self.clamp_epsilon < 0.5):
            raise InvalidArgumentError("clamp_epsilon must lie in (0, 0.5)")

    @staticmethod
    def quadratic() -> "LossKind":
        return LossKind(QUADRATIC)

    @staticmethod
    def binary_cross_entropy(clamp_epsilon: float = 1e-12) -> "LossKind":
        return LossKind(BINARY_CROSS_ENTROPY, clamp_epsilon)

    @staticmethod
    def for_task(task: Task) -> "LossKind":
        if task == Task.CLASSIFICATION:
            return LossKind.binary_cross_entropy()
        return LossKind.quadratic()


def compute_loss(kind: LossKind, target: float, output: float) -> float:
    """Pointwise loss between one target and one model output."""
    if not (np.isfinite(target) and np.isfinite(output)):
        raise InvalidArgumentError("loss inputs must be finite")
    if kind.kind == QUADRATIC:
        d = target - output
        return float(d * d)
    if target not in (0.0, 1.0):
        raise InvalidArgumentError("binary cross-entropy target must be 0 or 1")
    return float(
        loss_vector(kind, np.asarray([target], dtype=np.float64), np.asarray([output], dtype=np.float64))[0]
    )


def loss_vector(kind: LossKind, targets: np.ndarray, outputs: np.ndarray) -> np.ndarray:
    """Elementwise loss over aligned target/output vectors."""
    if kind.kind == QUADRATIC:
        return kernels.quadratic_loss(targets, outputs)
    return kernels.bce_loss(targets, outputs, kind.clamp_epsilon)


@dataclass(frozen=True)
class TemporalDataset:
    """Immutable value tensor with per-instance targets.

    ``values`` has shape ``(num_instances, num_features, sequence_length)``;
    both arrays are float64 and marked read-only after construction.
    """

    values: np.ndarray
    targets: np.ndarray
    task: Task = Task.REGRESSION
    feature_meta: tuple[FeatureMeta, ...] = field(default=())

    def __post_init__(self):
        values = np.ascontiguousarray(np.asarray(self.values, dtype=np.float64))
        targets = np.ascontiguousarray(np.asarray(self.targets, dtype=np.float64))
        if values.ndim != 3:
            raise InvalidArgumentError("values must be a rank-3 (instance, feature, timestep) array")
        m, d, length = values.shape
        if m < 2:
            raise InvalidArgumentError("at least two instances are required for permutation analysis")
        if d < 1 or length < 1:
            raise InvalidArgumentError("dataset must have at least one feature and one timestep")
        if targets.shape != (m,):
            raise InvalidArgumentError(f"targets must have shape ({m},), got {targets.shape}")
        if not np.isfinite(values).all():
            raise InvalidArgumentError("values contain non-finite entries")
        if not np.isfinite(targets).all():
            raise InvalidArgumentError("targets contain non-finite entries")
        task = Task(self.task)
        if task == Task.CLASSIFICATION and not np.isin(targets, (0.0, 1.0)).all():
            raise InvalidArgumentError("classification targets must all be 0.0 or 1.0")
        meta = tuple(self.feature_meta) or tuple(
            FeatureMeta(f"f{j + 1}", FeatureKind.CONTINUOUS) for j in range(d)
        )
        if len(meta) != d:
            raise InvalidArgumentError(f"feature_meta has {len(meta)} entries for {d} features")
        if len({fm.name for fm in meta}) != d:
            raise InvalidArgumentError("feature names must be unique")
        values.setflags(write=False)
        targets.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "targets", targets)
        object.__setattr__(self, "task", task)
        object.__setattr__(self, "feature_meta", meta)

    @property
    def num_instances(self) -> int:
        return self.values.shape[0]

    @property
    def num_features(self) -> int:
        return self.values.shape[1]

    @property
    def sequence_length(self) -> int:
        return self.values.shape[2]

    @property
    def feature_names(self) -> tuple[str, ...]:
        return tuple(fm.name for fm in self.feature_meta)

    def feature_index(self, name: str) -> int:
        for j, fm in enumerate(self.feature_meta):
            if fm.name == name:
                return j
        raise InvalidArgumentError(f"unknown feature {name!r}")

    def with_targets(self, targets: np.ndarray, task: Task | None = None) -> "TemporalDataset":
        return TemporalDataset(self.values, targets, task or self.task, self.feature_meta)

    def subset(self, num_instances: int) -> "TemporalDataset":
        """First ``num_instances`` instances as a new dataset."""
        if not (2 <= num_instances <= self.num_instances):
            raise InvalidArgumentError("subset size out of range")
        return TemporalDataset(
            self.values[:num_instances].copy(), self.targets[:num_instances].copy(), self.task, self.feature_meta
        )


FORMAT_BINARY = "binary"
FORMAT_CSV_LONG = "csv_long"

_MAGIC = b"TDS1"
_TASK_CODES = {Task.REGRESSION: 0, Task.CLASSIFICATION: 1}
_TASK_FROM_CODE = {code: task for task, code in _TASK_CODES.items()}


def save_dataset(dataset: TemporalDataset, path, fmt: str = FORMAT_BINARY) -> None:
    """Write a dataset; ``load_dataset`` round-trips it bit-exactly."""
    if fmt == FORMAT_BINARY:
        _save_binary(dataset, Path(path))
    elif fmt == FORMAT_CSV_LONG:
        _save_csv_long(dataset, Path(path))
    else:
        raise InvalidArgumentError(f"unknown dataset format {fmt!r}")


def load_dataset(path, fmt: str = FORMAT_BINARY) -> TemporalDataset:
    if fmt == FORMAT_BINARY:
        return _load_binary(Path(path))
    if fmt == FORMAT_CSV_LONG:
        return _load_csv_long(Path(path))
    raise InvalidArgumentError(f"unknown dataset format {fmt!r}")


def _save_binary(dataset: TemporalDataset, path: Path) -> None:
    m, d, length = dataset.values.shape
    meta = json.dumps(
        {"features": [{"name": fm.name, "kind": fm.kind.value} for fm in dataset.feature_meta]}
    ).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(struct.pack("<4sIIIB", _MAGIC, m, d, length, _TASK_CODES[dataset.task]))
        fh.write(np.ascontiguousarray(dataset.targets, dtype="<f8").tobytes())
        fh.write(np.ascontiguousarray(dataset.values, dtype="<f8").tobytes())
        fh.write(struct.pack("<I", len(meta)))
        fh.write(meta)


def _read_exact(fh, count: int, what: str) -> bytes:
    data = fh.read(count)
    if len(data) != count:
        raise DataFormatError(f"truncated dataset file while reading {what}")
    return data


def _load_binary(path: Path) -> TemporalDataset:
    with open(path, "rb") as fh:
        header = _read_exact(fh, struct.calcsize("<4sIIIB"), "header")
        magic, m, d, length, task_code = struct.unpack("<4sIIIB", header)
        if magic != _MAGIC:
            raise DataFormatError(f"bad magic bytes {magic!r}; expected {_MAGIC!r}")
        if task_code not in _TASK_FROM_CODE:
            raise DataFormatError(f"unknown task code {task_code}")
        targets = np.frombuffer(_read_exact(fh, 8 * m, "targets"), dtype="<f8").copy()
        values = (
            np.frombuffer(_read_exact(fh, 8 * m * d * length, "values"), dtype="<f8")
            .reshape(m, d, length)
            .copy()
        )
        (meta_len,) = struct.unpack("<I", _read_exact(fh, 4, "metadata length"))
        raw_meta = _read_exact(fh, meta_len, "metadata")
        if fh.read(1):
            raise DataFormatError("trailing bytes after metadata")
    try:
        meta_doc = json.loads(raw_meta.decode("utf-8"))
        meta = tuple(
            FeatureMeta(entry["name"], FeatureKind(entry["kind"])) for entry in meta_doc["features"]
        )
    except (ValueError, KeyError, TypeError) as exc:
        raise DataFormatError(f"malformed feature metadata: {exc}") from exc
    try:
        return TemporalDataset(values, targets, _TASK_FROM_CODE[task_code], meta)
    except InvalidArgumentError as exc:
        raise DataFormatError(str(exc)) from exc


def _targets_path(path: Path) -> Path:
    return path.with_name(path.stem + ".targets.csv")


def _format_float(value: float) -> str:
    return repr(float(value))


def _save_csv_long(dataset: TemporalDataset, path: Path) -> None:
    # Long form keeps values and targets bit-exact; feature kinds and the
    # task flag are not representable and are re-inferred on load.
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["instance", "feature", "timestep", "value"])
        for i in range(dataset.num_instances):
            for j, fm in enumerate(dataset.feature_meta):
                for k in range(dataset.sequence_length):
                    writer.writerow([i + 1, fm.name, k + 1, _format_float(dataset.values[i, j, k])])
    with open(_targets_path(path), "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["instance", "target"])
        for i in range(dataset.num_instances):
            writer.writerow([i + 1, _format_float(dataset.targets[i])])


def _load_csv_long(path: Path) -> TemporalDataset:
    targets_file = _targets_path(path)
    if not targets_file.exists():
        raise DataFormatError(f"missing targets file {targets_file}")
    targets_by_instance: dict[int, float] = {}
    with open(targets_file, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != ["instance", "target"]:
            raise DataFormatError(f"bad targets header {reader.fieldnames} in {targets_file}")
        for row in reader:
            try:
                instance = int(row["instance"])
                target = float(row["target"])
            except (TypeError, ValueError) as exc:
                raise DataFormatError(f"bad targets row {row!r}: {exc}") from exc
            if instance in targets_by_instance:
                raise DataFormatError(f"duplicate target for instance {instance}")
            targets_by_instance[instance] = target
    m = len(targets_by_instance)
    if sorted(targets_by_instance) != list(range(1, m + 1)):
        raise DataFormatError("target instances must be exactly 1..M")

    feature_order: list[str] = []
    cells: dict[tuple[int, str, int], float] = {}
    max_timestep = 0
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != ["instance", "feature", "timestep", "value"]:
            raise DataFormatError(f"bad values header {reader.fieldnames} in {path}")
        for row in reader:
            try:
                instance = int(row["instance"])
                feature = row["feature"]
                timestep = int(row["timestep"])
                value = float(row["value"])
            except (TypeError, ValueError) as exc:
                raise DataFormatError(f"bad values row {row!r}: {exc}") from exc
            if feature not in feature_order:
                feature_order.append(feature)
            key = (instance, feature, timestep)
            if key in cells:
                raise DataFormatError(
                    f"duplicate value for instance {instance}, feature {feature!r}, timestep {timestep}"
                )
            cells[key] = value
            max_timestep = max(max_timestep, timestep)

    d, length = len(feature_order), max_timestep
    if d == 0 or length == 0:
        raise DataFormatError("values file contains no data rows")
    values = np.empty((m, d, length))
    for i in range(1, m + 1):
        for j, feature in enumerate(feature_order):
            for k in range(1, length + 1):
                try:
                    values[i - 1, j, k - 1] = cells.pop((i, feature, k))
                except KeyError:
                    raise DataFormatError(
                        f"missing value for instance {i}, feature {feature!r}, timestep {k}"
                    ) from None
    if cells:
        instance, feature, timestep = next(iter(cells))
        raise DataFormatError(
            f"out-of-range record: instance {instance}, feature {feature!r}, timestep {timestep}"
        )
    targets = np.asarray([targets_by_instance[i] for i in range(1, m + 1)])
    task = Task.CLASSIFICATION if np.isin(targets, (0.0, 1.0)).all() else Task.REGRESSION
    meta = tuple(FeatureMeta(name, FeatureKind.CONTINUOUS) for name in feature_order)
    try:
        return TemporalDataset(values, targets, task, meta)
    except InvalidArgumentError as exc:
        raise DataFormatError(str(exc)) from exc
