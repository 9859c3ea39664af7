"""Localization of the window a model focuses on for one feature.

Two boundary searches, each a bisection.  Phase one finds the largest prior
window [1, b] whose importance stays below the acceptance threshold
((1 - gamma) / 2 times the feature's overall importance), probing b = L/2
first; the window start is b + 1.  Phase two finds the largest subsequent
window [c, L] under the same threshold, probing the largest candidate
c = start + 1 first; the window end is c - 1.  Empty candidate windows score
zero by definition and cost no model calls.  All candidate evaluations share
one set of per-round instance permutations, so their scores are paired.
"""

from dataclasses import dataclass

import numpy as np

from .data import LossKind, TemporalDataset, Window
from .errors import InvalidArgumentError
from .models import ModelHandle
from .perturb import InstancePermutation, draw_instance_permutation, window_importance


@dataclass(frozen=True)
class WindowSearchResult:
    window: Window
    overall_score: float
    window_score: float
    prior_score: float
    subsequent_score: float
    evaluations: int
    degenerate: bool = False


def find_important_window(
    model: ModelHandle,
    dataset: TemporalDataset,
    loss: LossKind,
    feature: int,
    gamma: float,
    rounds: int,
    rng: np.random.Generator | None = None,
    *,
    overall_score: float | None = None,
    perms: list[InstancePermutation] | None = None,
    baseline_losses: np.ndarray | None = None,
) -> WindowSearchResult:
    """Locate the smallest window outside of which ``feature`` has low importance.

    ``overall_score`` is the feature's full-sequence importance; callers that
    already measured it (the analysis pipeline always has) pass it in, which
    caps the number of window evaluations at 2*ceil(log2 L) + 2.  When it is
    omitted, one extra paired evaluation of [1, L] measures it first.

    A non-positive overall score makes the threshold meaningless; the search
    is then skipped and the full window is returned with ``degenerate`` set.
    """
    if not (0.0 < gamma < 1.0):
        raise InvalidArgumentError("gamma must lie strictly between 0 and 1")
    length = dataset.sequence_length
    if perms is None:
        if rng is None:
            raise InvalidArgumentError("either rng or perms is required")
        perms = [draw_instance_permutation(dataset.num_instances, rng) for _ in range(rounds)]

    evaluations = 0

    def paired_score(window: Window) -> float:
        nonlocal evaluations
        evaluations += 1
        return window_importance(
            model, dataset, loss, feature, window, rounds,
            perms=perms, baseline_losses=baseline_losses,
        ).score

    if overall_score is None:
        overall_score = paired_score(Window.full(length))
    if overall_score <= 0.0:
        return WindowSearchResult(
            Window.full(length), overall_score, overall_score, 0.0, 0.0, evaluations, degenerate=True
        )
    threshold = 0.5 * (1.0 - gamma) * overall_score

    # Phase one: largest feasible prior boundary b in {0..L-1}; b=0 is the
    # empty window and is feasible by definition.
    prior_cache = {0: 0.0}

    def prior_ok(b: int) -> bool:
        if b not in prior_cache:
            prior_cache[b] = paired_score(Window(1, b))
        return prior_cache[b] < threshold

    lo, hi = 0, length - 1
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if prior_ok(mid):
            lo = mid
        else:
            hi = mid - 1
    start = lo + 1
    prior_score = prior_cache.get(lo, 0.0)

    # Phase two: smallest feasible subsequent boundary c in {start+1..L+1},
    # probing the largest candidate window [start+1, L] first; c=L+1 is the
    # empty window and is feasible by definition.
    suffix_cache = {length + 1: 0.0}

    def suffix_ok(c: int) -> bool:
        if c not in suffix_cache:
            suffix_cache[c] = paired_score(Window(c, length))
        return suffix_cache[c] < threshold

    if start + 1 > length:
        end = length
    elif suffix_ok(start + 1):
        end = start
    else:
        lo2, hi2 = start + 2, length + 1
        while lo2 < hi2:
            mid = (lo2 + hi2) // 2
            if suffix_ok(mid):
                hi2 = mid
            else:
                lo2 = mid + 1
        end = lo2 - 1
    subsequent_score = suffix_cache.get(end + 1, 0.0)

    window = Window(start, end)
    if window.is_full(length):
        window_score = overall_score
    else:
        window_score = paired_score(window)
    return WindowSearchResult(
        window, overall_score, window_score, prior_score, subsequent_score, evaluations
    )
