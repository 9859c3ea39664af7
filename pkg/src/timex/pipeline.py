"""Full analysis pipeline: importance, window localization, ordering tests.

For every feature the pipeline measures overall importance with full-sequence
permutation rounds, then descends the per-feature test hierarchy under
hierarchical FDR control: a rejected overall test unlocks the feature's
ordering test and its window test (which first localizes the window, then
re-tests it with fresh permutation rounds); a rejected window test unlocks
the within-window ordering test.  Optional feature groups sit above the
per-feature trees and are tested by jointly permuting their members.

Every randomized step draws from a substream keyed by (seed, purpose,
feature, window, round), so reports are bit-identical across runs, worker
counts, and in-process versus subprocess models.
"""

import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from threading import Lock

import numpy as np

from .data import LossKind, TemporalDataset, Window, loss_vector
from .errors import AnalysisError, ConfigurationError, InvalidArgumentError
from .models import ModelHandle
from .perturb import (
    draw_instance_permutation,
    draw_timestep_permutation,
    ordering_round_losses,
    window_importance,
)
from .rng import substream
from .search import WindowSearchResult, find_important_window
from .stats import Decision, TestKind, TestNode, empirical_p, hierarchical_fdr


@dataclass(frozen=True)
class FeatureGroup:
    """A named group whose members are feature names or nested groups."""

    name: str
    members: tuple = ()

    def __post_init__(self):
        if not self.members:
            raise ConfigurationError(f"group {self.name!r} has no members")
        object.__setattr__(self, "members", tuple(self.members))

    def leaf_features(self) -> list[str]:
        leaves: list[str] = []
        for member in self.members:
            if isinstance(member, FeatureGroup):
                leaves.extend(member.leaf_features())
            else:
                leaves.append(member)
        return leaves

    def to_document(self) -> dict:
        return {
            "name": self.name,
            "members": [
                m.to_document() if isinstance(m, FeatureGroup) else m for m in self.members
            ],
        }

    @staticmethod
    def from_document(doc: dict) -> "FeatureGroup":
        members = tuple(
            FeatureGroup.from_document(m) if isinstance(m, dict) else str(m)
            for m in doc["members"]
        )
        return FeatureGroup(doc["name"], members)


@dataclass(frozen=True)
class AnalysisConfig:
    """Analysis knobs; defaults follow the evaluation protocol used throughout."""

    gamma: float = 0.99
    q: float = 0.1
    permutations: int = 50
    seed: int = 0
    loss: LossKind | None = None
    batch_size: int = 256
    parallelism: int = 1
    feature_groups: tuple[FeatureGroup, ...] | None = None

    def __post_init__(self):
        if not (0.0 < self.gamma < 1.0):
            raise ConfigurationError("gamma must lie strictly between 0 and 1")
        if not (0.0 < self.q < 1.0):
            raise ConfigurationError("q must lie strictly between 0 and 1")
        if self.permutations < 1:
            raise ConfigurationError("permutations must be >= 1")
        if self.batch_size < 1 or self.parallelism < 1:
            raise ConfigurationError("batch_size and parallelism must be >= 1")
        if not (0 <= self.seed < 2**64):
            raise ConfigurationError("seed must fit in 64 bits")
        if self.feature_groups is not None:
            object.__setattr__(self, "feature_groups", tuple(self.feature_groups))

    def to_document(self) -> dict:
        # parallelism and batch size are throughput knobs with no effect on
        # results, so they stay out of the result document.
        doc = {
            "gamma": self.gamma,
            "fdr": self.q,
            "permutations": self.permutations,
            "seed": self.seed,
            "loss": self.loss.kind if self.loss is not None else None,
        }
        if self.feature_groups is not None:
            doc["feature_groups"] = [g.to_document() for g in self.feature_groups]
        return doc


@dataclass(frozen=True)
class OrderingDecision:
    p_value: float
    important: bool

    def to_document(self) -> dict:
        return {"p": self.p_value, "important": self.important}


@dataclass
class FeatureReport:
    """Per-feature findings; window and ordering fields exist only when reached."""

    feature: str
    important: bool
    importance_score: float | None
    p_overall: float | None
    window: Window | None = None
    window_score: float | None = None
    p_window: float | None = None
    feature_ordering: OrderingDecision | None = None
    window_ordering: OrderingDecision | None = None
    trace: TestNode | None = None
    search: WindowSearchResult | None = field(default=None, repr=False)

    def to_document(self) -> dict:
        return {
            "name": self.feature,
            "important": self.important,
            "score": self.importance_score,
            "p_overall": self.p_overall,
            "window": self.window.to_document() if self.window is not None else None,
            "window_score": self.window_score,
            "p_window": self.p_window,
            "feature_ordering": (
                self.feature_ordering.to_document() if self.feature_ordering else None
            ),
            "window_ordering": (
                self.window_ordering.to_document() if self.window_ordering else None
            ),
        }


@dataclass
class AnalysisReport:
    features: list[FeatureReport]
    baseline_mean_loss: float
    config: AnalysisConfig
    evaluations: dict
    sequence_length: int = 1
    elapsed_seconds: float = 0.0
    group_nodes: list[TestNode] = field(default_factory=list, repr=False)

    def feature(self, name: str) -> FeatureReport:
        for report in self.features:
            if report.feature == name:
                return report
        raise InvalidArgumentError(f"no feature {name!r} in report")

    @property
    def important_features(self) -> list[FeatureReport]:
        return [f for f in self.features if f.important]

    def to_document(self) -> dict:
        return {
            "config": self.config.to_document(),
            "baseline_loss": self.baseline_mean_loss,
            "sequence_length": self.sequence_length,
            "features": [f.to_document() for f in self.features],
            "evaluations": dict(self.evaluations),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_document(), indent=2, allow_nan=False) + "\n"


class _CountingModel:
    """Serializes access to non-thread-safe handles and counts predictions."""

    def __init__(self, inner: ModelHandle):
        self._inner = inner
        self._serialize = not inner.thread_safe
        self._predict_lock = Lock()
        self._count_lock = Lock()
        self.calls = 0
        self.instances = 0

    def __getattr__(self, name):
        return getattr(self._inner, name)

    def predict_values(self, values: np.ndarray) -> np.ndarray:
        with self._count_lock:
            self.calls += 1
            self.instances += values.shape[0]
        if self._serialize:
            with self._predict_lock:
                return self._inner.predict_values(values)
        return self._inner.predict_values(values)


def _node_id(feature: str, suffix: str) -> str:
    return f"feature:{feature}:{suffix}"


class _Analysis:
    def __init__(self, model: ModelHandle, dataset: TemporalDataset, config: AnalysisConfig):
        if (model.num_features, model.sequence_length) != (
            dataset.num_features,
            dataset.sequence_length,
        ):
            raise ConfigurationError(
                f"model declares dims ({model.num_features}, {model.sequence_length}) but the "
                f"dataset has ({dataset.num_features}, {dataset.sequence_length})"
            )
        self.model = _CountingModel(model)
        self.dataset = dataset
        self.config = config
        self.loss = config.loss or LossKind.for_task(dataset.task)
        outputs = self.model.predict_values(dataset.values)
        self.baseline_losses = loss_vector(self.loss, dataset.targets, outputs)
        self.baseline = float(np.mean(self.baseline_losses))
        self.payload: dict[str, dict] = {}
        self._payload_lock = Lock()
        self.rounds = config.permutations
        self.full = Window.full(dataset.sequence_length)

    # -- substream helpers -------------------------------------------------

    def _importance_perms(self, feature: int, window: Window):
        m, seed = self.dataset.num_instances, self.config.seed
        return [
            draw_instance_permutation(
                m, substream(seed, "importance", feature, window.start, window.end, r)
            )
            for r in range(self.rounds)
        ]

    def _search_perms(self, feature: int):
        m, seed = self.dataset.num_instances, self.config.seed
        return [
            draw_instance_permutation(m, substream(seed, "search", feature, r))
            for r in range(self.rounds)
        ]

    def _ordering_draws(self, feature: int, window: Window):
        seed = self.config.seed
        return [
            draw_timestep_permutation(
                window, substream(seed, "ordering", feature, window.start, window.end, r)
            )
            for r in range(self.rounds)
        ]

    # -- node runners -------------------------------------------------------

    def _store(self, node_id: str, **payload) -> None:
        with self._payload_lock:
            self.payload[node_id] = payload

    def run_node(self, node: TestNode) -> float:
        feature_name = node.id.split(":")[1] if node.id.startswith("feature:") else None
        if node.kind == TestKind.GROUP_IMPORTANCE:
            return self._run_group(node)
        feature = self.dataset.feature_index(feature_name)
        if node.kind == TestKind.OVERALL_IMPORTANCE:
            return self._run_importance(node, feature, self.full, self._importance_perms(feature, self.full))
        if node.kind == TestKind.FEATURE_ORDERING:
            return self._run_ordering(node, feature, self.full)
        if node.kind == TestKind.WINDOW_IMPORTANCE:
            return self._run_window(node, feature, feature_name)
        if node.kind == TestKind.WINDOW_ORDERING:
            window = self.payload[_node_id(feature_name, "window")]["window"]
            return self._run_ordering(node, feature, window)
        raise AnalysisError(f"unknown test kind {node.kind!r}", node_id=node.id)

    def _run_importance(self, node: TestNode, feature: int, window: Window, perms) -> float:
        result = window_importance(
            self.model, self.dataset, self.loss, feature, window, self.rounds,
            perms=perms, baseline_losses=self.baseline_losses,
        )
        p = empirical_p(result.baseline, result.round_losses)
        self._store(node.id, score=result.score, window=window, p=p)
        return p

    def _run_ordering(self, node: TestNode, feature: int, window: Window) -> float:
        if window.width < 2:
            # reordering a single timestep is vacuous: decided without model calls
            self._store(node.id, window=window, p=1.0, vacuous=True)
            return 1.0
        result = ordering_round_losses(
            self.model, self.dataset, self.loss, feature, window, self.rounds,
            orders=self._ordering_draws(feature, window),
            baseline_losses=self.baseline_losses,
        )
        p = empirical_p(result.baseline, result.round_losses)
        self._store(node.id, window=window, p=p)
        return p

    def _run_window(self, node: TestNode, feature: int, feature_name: str) -> float:
        overall = self.payload[_node_id(feature_name, "overall")]
        search = find_important_window(
            self.model, self.dataset, self.loss, feature,
            self.config.gamma, self.rounds,
            overall_score=overall["score"],
            perms=self._search_perms(feature),
            baseline_losses=self.baseline_losses,
        )
        window = search.window
        fresh = window_importance(
            self.model, self.dataset, self.loss, feature, window, self.rounds,
            perms=self._importance_perms(feature, window),
            baseline_losses=self.baseline_losses,
        )
        p = empirical_p(fresh.baseline, fresh.round_losses)
        self._store(node.id, window=window, score=fresh.score, p=p, search=search)
        return p

    def _run_group(self, node: TestNode) -> float:
        members = self._group_members[node.id]
        values = self.dataset.values
        scratch = values.copy()
        round_losses = np.empty(self.rounds)
        for r in range(self.rounds):
            perm = draw_instance_permutation(
                self.dataset.num_instances, substream(self.config.seed, "group", node.id, r)
            )
            for j in members:
                scratch[:, j, :] = values[perm.mapping, j, :]
            outputs = self.model.predict_values(scratch)
            round_losses[r] = np.mean(loss_vector(self.loss, self.dataset.targets, outputs))
            for j in members:
                scratch[:, j, :] = values[:, j, :]
        p = empirical_p(self.baseline, round_losses)
        self._store(node.id, p=p)
        return p

    # -- tree construction ----------------------------------------------------

    def _feature_tree(self, name: str) -> TestNode:
        window_node = TestNode(
            _node_id(name, "window"), TestKind.WINDOW_IMPORTANCE,
            children=[TestNode(_node_id(name, "window_ordering"), TestKind.WINDOW_ORDERING)],
        )
        return TestNode(
            _node_id(name, "overall"), TestKind.OVERALL_IMPORTANCE,
            children=[
                TestNode(_node_id(name, "ordering"), TestKind.FEATURE_ORDERING),
                window_node,
            ],
        )

    def build_tree(self) -> list[TestNode]:
        names = self.dataset.feature_names
        groups = self.config.feature_groups
        self._group_members: dict[str, list[int]] = {}
        if groups is None:
            return [self._feature_tree(name) for name in names]
        leaves = [leaf for group in groups for leaf in group.leaf_features()]
        if sorted(leaves) != sorted(names):
            raise ConfigurationError(
                "feature group leaves must partition the dataset's features exactly"
            )

        def build_group(group: FeatureGroup) -> TestNode:
            node = TestNode(f"group:{group.name}", TestKind.GROUP_IMPORTANCE)
            if node.id in self._group_members:
                raise ConfigurationError(f"duplicate group name {group.name!r}")
            for member in group.members:
                if isinstance(member, FeatureGroup):
                    node.children.append(build_group(member))
                else:
                    node.children.append(self._feature_tree(member))
            self._group_members[node.id] = [self.dataset.feature_index(n) for n in group.leaf_features()]
            return node

        return [build_group(group) for group in groups]


def analyze(model: ModelHandle, dataset: TemporalDataset, config: AnalysisConfig) -> AnalysisReport:
    """Run the full analysis and assemble the per-feature report.

    The report is bit-identical across repeat runs with the same seed,
    regardless of ``config.parallelism`` or whether the model runs in-process
    or behind the subprocess protocol.
    """
    started = time.perf_counter()
    ctx = _Analysis(model, dataset, config)
    roots = ctx.build_tree()

    executor = None
    try:
        if config.parallelism > 1:
            executor = ThreadPoolExecutor(max_workers=config.parallelism)
            map_fn = lambda fn, items: executor.map(fn, items)  # noqa: E731
        else:
            map_fn = None
        hierarchical_fdr(roots, config.q, ctx.run_node, map_fn=map_fn)
    finally:
        if executor is not None:
            executor.shutdown(wait=True)

    nodes = {node.id: node for root in roots for node in root.walk()}
    reports = []
    for name in dataset.feature_names:
        overall = nodes[_node_id(name, "overall")]
        ordering = nodes[_node_id(name, "ordering")]
        window_node = nodes[_node_id(name, "window")]
        window_ordering = nodes[_node_id(name, "window_ordering")]
        overall_payload = ctx.payload.get(overall.id, {})
        report = FeatureReport(
            feature=name,
            important=overall.decision == Decision.REJECTED,
            importance_score=overall_payload.get("score"),
            p_overall=overall.p_value,
            trace=overall,
        )
        if window_node.decision != Decision.UNTESTED:
            window_payload = ctx.payload[window_node.id]
            report.window = window_payload["window"]
            report.window_score = window_payload["score"]
            report.p_window = window_node.p_value
            report.search = window_payload["search"]
        if ordering.decision != Decision.UNTESTED:
            report.feature_ordering = OrderingDecision(
                ordering.p_value, ordering.decision == Decision.REJECTED
            )
        if window_ordering.decision != Decision.UNTESTED:
            report.window_ordering = OrderingDecision(
                window_ordering.p_value, window_ordering.decision == Decision.REJECTED
            )
        reports.append(report)

    important = sorted(
        (r for r in reports if r.important), key=lambda r: (-r.importance_score, r.feature)
    )
    rest = sorted((r for r in reports if not r.important), key=lambda r: r.feature)
    tested_nodes = sum(1 for node in nodes.values() if node.decision != Decision.UNTESTED)
    group_roots = [root for root in roots if root.kind == TestKind.GROUP_IMPORTANCE]
    report = AnalysisReport(
        features=important + rest,
        baseline_mean_loss=ctx.baseline,
        config=config,
        evaluations={
            "predict_calls": ctx.model.calls,
            "predicted_instances": ctx.model.instances,
            "tested_nodes": tested_nodes,
        },
        sequence_length=dataset.sequence_length,
        group_nodes=group_roots,
    )
    report.elapsed_seconds = time.perf_counter() - started
    return report


def analyze_with_groups(
    model: ModelHandle, dataset: TemporalDataset, config: AnalysisConfig
) -> AnalysisReport:
    """``analyze`` for configurations that arrange features into groups."""
    if config.feature_groups is None:
        raise ConfigurationError("analyze_with_groups requires config.feature_groups")
    return analyze(model, dataset, config)
