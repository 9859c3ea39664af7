"""Empirical p-values, Benjamini-Hochberg, and hierarchical FDR control.

Tests are organized as a tree.  The top-level family is tested first and
corrected with BH at level q; the children of a rejected node form the next
family, tested at the same level; everything under a non-rejected node stays
untested.  The runner callback is invoked at most once per node, and never
for a node whose parent was not rejected.
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import AnalysisError, InvalidArgumentError


class TestKind(str, Enum):
    GROUP_IMPORTANCE = "group_importance"
    OVERALL_IMPORTANCE = "overall_importance"
    WINDOW_IMPORTANCE = "window_importance"
    FEATURE_ORDERING = "feature_ordering"
    WINDOW_ORDERING = "window_ordering"


class Decision(str, Enum):
    REJECTED = "rejected"
    ACCEPTED = "accepted"
    UNTESTED = "untested"


@dataclass
class TestNode:
    id: str
    kind: TestKind
    children: list["TestNode"] = field(default_factory=list)
    p_value: float | None = None
    decision: Decision = Decision.UNTESTED

    def walk(self) -> Iterable["TestNode"]:
        yield self
        for child in self.children:
            yield from child.walk()


@dataclass(frozen=True)
class FdrConfig:
    """Target false discovery rate for every sibling family (BH-corrected)."""

    q: float = 0.1

    def __post_init__(self):
        if not (0.0 < self.q < 1.0):
            raise InvalidArgumentError("q must lie strictly between 0 and 1")


def empirical_p(baseline_mean_loss: float, round_losses: Sequence[float]) -> float:
    """Permutation-test p-value: (#{rounds with loss <= baseline} + 1) / (P + 1)."""
    losses = np.asarray(round_losses, dtype=np.float64)
    if losses.size == 0:
        raise InvalidArgumentError("round_losses must be non-empty")
    if not (np.isfinite(losses).all() and np.isfinite(baseline_mean_loss)):
        raise InvalidArgumentError("losses must be finite")
    return (int(np.sum(losses <= baseline_mean_loss)) + 1) / (losses.size + 1)


def bh_reject(p_values: Sequence[float], q: float) -> set[int]:
    """Indices rejected by the Benjamini-Hochberg step-up rule at level q."""
    if not (0.0 < q < 1.0):
        raise InvalidArgumentError("q must lie strictly between 0 and 1")
    p = np.asarray(p_values, dtype=np.float64)
    if p.size == 0:
        return set()
    if ((p <= 0.0) | (p > 1.0)).any() or not np.isfinite(p).all():
        raise InvalidArgumentError("p-values must lie in (0, 1]")
    m = p.size
    order = np.argsort(p, kind="stable")
    sorted_p = p[order]
    thresholds = q * (np.arange(1, m + 1) / m)
    passing = np.flatnonzero(sorted_p <= thresholds)
    if passing.size == 0:
        return set()
    cutoff = sorted_p[passing[-1]]
    return set(np.flatnonzero(p <= cutoff).tolist())


def hierarchical_fdr(
    root_family: Sequence[TestNode],
    q: float,
    test_runner: Callable[[TestNode], float],
    map_fn: Callable | None = None,
) -> list[TestNode]:
    """Decide a test tree, descending only into rejected nodes.

    ``test_runner`` fills a node's p-value on demand; sibling (and cousin)
    invocations in the same wave may run concurrently through ``map_fn``
    (an ``Executor.map``-like callable; defaults to the builtin ``map``).
    Decisions are written onto the nodes, which are returned for convenience.
    """
    mapper = map_fn or (lambda fn, items: map(fn, items))
    frontier: list[list[TestNode]] = [list(root_family)]

    def run(node: TestNode) -> float:
        try:
            return float(test_runner(node))
        except AnalysisError:
            raise
        except Exception as exc:
            raise AnalysisError(f"test runner failed on {node.id!r}: {exc}", node_id=node.id) from exc

    while frontier:
        pending = [node for family in frontier for node in family]
        for node, p in zip(pending, list(mapper(run, pending))):
            if not (0.0 < p <= 1.0):
                raise AnalysisError(f"test runner returned invalid p={p!r}", node_id=node.id)
            node.p_value = p
        next_frontier: list[list[TestNode]] = []
        for family in frontier:
            rejected = bh_reject([node.p_value for node in family], q)
            for index, node in enumerate(family):
                if index in rejected:
                    node.decision = Decision.REJECTED
                    if node.children:
                        next_frontier.append(node.children)
                else:
                    node.decision = Decision.ACCEPTED
        frontier = next_frontier
    return list(root_family)
