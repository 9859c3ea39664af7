"""Permutation schemes and importance-score estimation.

Feature importance is measured by swapping a feature's values (within a
window) across instances with a fixed-point-free permutation and averaging
the resulting increase in loss over rounds and instances.  Ordering
importance reorders a feature's values inside a window, with one shared
reordering applied to every instance per round.  All operations leave the
source dataset untouched.
"""

from dataclasses import dataclass

import numpy as np

from .data import LossKind, TemporalDataset, Window, loss_vector
from .errors import InvalidArgumentError
from .models import ModelHandle


@dataclass(frozen=True)
class InstancePermutation:
    """A 0-based permutation of instances with no fixed points."""

    mapping: np.ndarray

    def __post_init__(self):
        mapping = np.asarray(self.mapping, dtype=np.intp)
        m = mapping.shape[0]
        if m < 2:
            raise InvalidArgumentError("instance permutations need at least two instances")
        if not np.array_equal(np.sort(mapping), np.arange(m)):
            raise InvalidArgumentError("mapping is not a permutation of 0..M-1")
        if (mapping == np.arange(m)).any():
            raise InvalidArgumentError("mapping has fixed points")
        object.__setattr__(self, "mapping", mapping)

    @property
    def num_instances(self) -> int:
        return self.mapping.shape[0]

    def inverse(self) -> "InstancePermutation":
        inv = np.empty_like(self.mapping)
        inv[self.mapping] = np.arange(self.mapping.shape[0])
        return InstancePermutation(inv)


def draw_instance_permutation(num_instances: int, rng: np.random.Generator) -> InstancePermutation:
    """Draw a uniform permutation, then swap fixed points away until none remain.

    Each fixed point is swapped with a uniformly chosen other index; the scan
    repeats until the result is a derangement.  By symmetry the marginal
    distribution of each image stays uniform over the other M-1 indices.
    """
    if num_instances < 2:
        raise InvalidArgumentError("need at least two instances to permute")
    mapping = rng.permutation(num_instances)
    identity = np.arange(num_instances)
    while True:
        fixed = np.flatnonzero(mapping == identity)
        if fixed.size == 0:
            break
        for i in fixed:
            if mapping[i] != i:
                continue
            other = int(rng.integers(num_instances - 1))
            if other >= i:
                other += 1
            mapping[i], mapping[other] = mapping[other], mapping[i]
    return InstancePermutation(mapping)


@dataclass(frozen=True)
class TimestepPermutation:
    """A permuted ordering of the 1-based timesteps inside a window."""

    window: Window
    order: np.ndarray

    def __post_init__(self):
        order = np.asarray(self.order, dtype=np.intp)
        expected = np.arange(self.window.start, self.window.end + 1)
        if not np.array_equal(np.sort(order), expected):
            raise InvalidArgumentError(
                f"order must permute timesteps {self.window.start}..{self.window.end}"
            )
        object.__setattr__(self, "order", order)

    @property
    def is_identity(self) -> bool:
        return bool(
            np.array_equal(self.order, np.arange(self.window.start, self.window.end + 1))
        )


def draw_timestep_permutation(
    window: Window, rng: np.random.Generator, reject_identity: bool = True
) -> TimestepPermutation:
    """Uniform reordering of a window's timesteps; identity draws are redrawn."""
    if reject_identity and window.width < 2:
        raise InvalidArgumentError("ordering of a width-1 window is vacuous")
    base = np.arange(window.start, window.end + 1)
    while True:
        order = rng.permutation(base)
        if not (reject_identity and np.array_equal(order, base)):
            return TimestepPermutation(window, order)


def _check_feature(dataset: TemporalDataset, feature: int) -> None:
    if not (0 <= feature < dataset.num_features):
        raise InvalidArgumentError(f"feature index {feature} out of range")


def _check_window(dataset: TemporalDataset, window: Window) -> None:
    if window.end > dataset.sequence_length:
        raise InvalidArgumentError(
            f"window [{window.start}, {window.end}] exceeds sequence length {dataset.sequence_length}"
        )


def perturb_window_across_instances(
    dataset: TemporalDataset, feature: int, window: Window, perm: InstancePermutation
) -> np.ndarray:
    """Copy of the tensor with the feature's window values swapped across instances."""
    _check_feature(dataset, feature)
    _check_window(dataset, window)
    if perm.num_instances != dataset.num_instances:
        raise InvalidArgumentError("permutation length does not match the dataset")
    perturbed = dataset.values.copy()
    sl = window.indices
    perturbed[:, feature, sl] = dataset.values[perm.mapping, feature, sl]
    return perturbed


def perturb_ordering_within_window(
    dataset: TemporalDataset, feature: int, tperm: TimestepPermutation
) -> np.ndarray:
    """Copy of the tensor with the feature's in-window values reordered.

    The same reordering applies to every instance; cells outside the window
    are untouched.
    """
    _check_feature(dataset, feature)
    _check_window(dataset, tperm.window)
    perturbed = dataset.values.copy()
    perturbed[:, feature, tperm.window.indices] = dataset.values[:, feature, tperm.order - 1]
    return perturbed


def baseline_outputs(model: ModelHandle, dataset: TemporalDataset) -> np.ndarray:
    return model.predict_values(dataset.values)


def baseline_mean_loss(model: ModelHandle, dataset: TemporalDataset, loss: LossKind) -> float:
    """Mean loss of the model over the unperturbed dataset."""
    outputs = baseline_outputs(model, dataset)
    return float(np.mean(loss_vector(loss, dataset.targets, outputs)))


@dataclass(frozen=True)
class PermutationRoundResult:
    """Mean perturbed loss of one round, with optional per-instance deltas."""

    mean_perturbed_loss: float
    per_instance_delta: np.ndarray | None = None


@dataclass(frozen=True)
class ImportanceResult:
    """Windowed importance: mean increase in loss over rounds and instances."""

    score: float
    round_losses: np.ndarray
    baseline: float
    rounds_detail: tuple[PermutationRoundResult, ...] | None = None


def window_importance(
    model: ModelHandle,
    dataset: TemporalDataset,
    loss: LossKind,
    feature: int,
    window: Window,
    rounds: int,
    rng: np.random.Generator | None = None,
    *,
    perms: list[InstancePermutation] | None = None,
    baseline_losses: np.ndarray | None = None,
    keep_instance_deltas: bool = False,
) -> ImportanceResult:
    """Importance of ``window`` for ``feature``.

    Runs ``rounds`` permutation rounds.  Each round swaps the feature's
    in-window values across instances with a derangement (drawn from ``rng``
    or supplied via ``perms``), records the mean perturbed loss, and the
    score is the mean of those round losses minus the baseline mean loss.

    Parameters
    ----------
    perms : optional
        Pre-drawn per-round permutations; when given, ``rng`` is unused.
        Callers that compare windows against each other pass the same list
        for every window so the comparison is paired.
    baseline_losses : optional
        Per-instance baseline losses, to avoid re-predicting the baseline.
    """
    if rounds < 1:
        raise InvalidArgumentError("rounds must be >= 1")
    _check_feature(dataset, feature)
    _check_window(dataset, window)
    if perms is None:
        if rng is None:
            raise InvalidArgumentError("either rng or perms is required")
        perms = [draw_instance_permutation(dataset.num_instances, rng) for _ in range(rounds)]
    elif len(perms) != rounds:
        raise InvalidArgumentError(f"got {len(perms)} permutations for {rounds} rounds")
    if baseline_losses is None:
        baseline_losses = loss_vector(loss, dataset.targets, baseline_outputs(model, dataset))
    baseline = float(np.mean(baseline_losses))

    values = dataset.values
    scratch = values.copy()
    sl = window.indices
    round_losses = np.empty(rounds)
    detail: list[PermutationRoundResult] | None = [] if keep_instance_deltas else None
    for r in range(rounds):
        scratch[:, feature, sl] = values[perms[r].mapping, feature, sl]
        outputs = model.predict_values(scratch)
        losses = loss_vector(loss, dataset.targets, outputs)
        round_losses[r] = np.mean(losses)
        if detail is not None:
            detail.append(PermutationRoundResult(float(round_losses[r]), losses - baseline_losses))
    scratch[:, feature, sl] = values[:, feature, sl]
    score = float(np.mean(round_losses) - baseline)
    return ImportanceResult(
        score, round_losses, baseline, tuple(detail) if detail is not None else None
    )


@dataclass(frozen=True)
class OrderingResult:
    round_losses: np.ndarray
    baseline: float


def ordering_round_losses(
    model: ModelHandle,
    dataset: TemporalDataset,
    loss: LossKind,
    feature: int,
    window: Window,
    rounds: int,
    rng: np.random.Generator | None = None,
    *,
    orders: list[TimestepPermutation] | None = None,
    baseline_losses: np.ndarray | None = None,
) -> OrderingResult:
    """Mean losses under within-window reorderings of ``feature``.

    Each round draws a fresh non-identity timestep permutation, shared by all
    instances.  Requires a window of width >= 2.
    """
    if rounds < 1:
        raise InvalidArgumentError("rounds must be >= 1")
    _check_feature(dataset, feature)
    _check_window(dataset, window)
    if window.width < 2:
        raise InvalidArgumentError("ordering requires a window of width >= 2")
    if orders is None:
        if rng is None:
            raise InvalidArgumentError("either rng or orders is required")
        orders = [draw_timestep_permutation(window, rng) for _ in range(rounds)]
    elif len(orders) != rounds:
        raise InvalidArgumentError(f"got {len(orders)} orderings for {rounds} rounds")
    if baseline_losses is None:
        baseline_losses = loss_vector(loss, dataset.targets, baseline_outputs(model, dataset))
    baseline = float(np.mean(baseline_losses))

    values = dataset.values
    scratch = values.copy()
    sl = window.indices
    round_losses = np.empty(rounds)
    for r in range(rounds):
        scratch[:, feature, sl] = values[:, feature, orders[r].order - 1]
        outputs = model.predict_values(scratch)
        round_losses[r] = np.mean(loss_vector(loss, dataset.targets, outputs))
    scratch[:, feature, sl] = values[:, feature, sl]
    return OrderingResult(round_losses, baseline)
