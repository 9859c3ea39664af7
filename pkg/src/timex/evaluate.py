"""Scoring against ground truth, tabular permutation baselines, and the suite.

``score_report`` turns an analysis report plus a ground-truth record into
power/FDR at four levels: features, timesteps, feature ordering, and window
ordering.  ``perm_baseline`` is the tabular per-timestep permutation method;
its discoveries are selected either by top-n score ("perm") or by BH over
all per-cell p-values ("perm-f").  ``run_suite`` replicates the whole
generate/tune/analyze/score protocol and aggregates a comparison table.
"""

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .data import LossKind, Task, TemporalDataset, Window, loss_vector
from .errors import InvalidArgumentError
from .models import ModelHandle
from .perturb import baseline_outputs, draw_instance_permutation, window_importance
from .pipeline import AnalysisConfig, AnalysisReport, analyze
from .rng import stream_key, substream
from .stats import bh_reject, empirical_p
from . import synth

METHOD_TIMEX = "timex"
METHOD_TIMEX_N = "timex-n"
METHOD_PERM = "perm"
METHOD_PERM_F = "perm-f"
METHODS = (METHOD_TIMEX, METHOD_TIMEX_N, METHOD_PERM, METHOD_PERM_F)


@dataclass(frozen=True)
class EvalMetrics:
    """Confusion counts with derived power and FDR."""

    tp: int
    fp: int
    fn: int

    @property
    def power(self) -> float:
        return self.tp / max(1, self.tp + self.fn)

    @property
    def fdr(self) -> float:
        return self.fp / max(1, self.tp + self.fp)

    @staticmethod
    def from_sets(discovered: set, truth: set) -> "EvalMetrics":
        tp = len(discovered & truth)
        return EvalMetrics(tp=tp, fp=len(discovered) - tp, fn=len(truth) - tp)


@dataclass(frozen=True)
class GroundTruth:
    """Relevant features, their true windows, and ordering sensitivities."""

    relevant: frozenset[str]
    windows: dict[str, Window]
    window_ordering_sensitive: dict[str, bool]
    feature_ordering_sensitive: dict[str, bool]

    @staticmethod
    def from_record(record: dict) -> "GroundTruth":
        features = record["features"]
        return GroundTruth(
            relevant=frozenset(record["relevant"]),
            windows={
                name: Window(entry["window"]["start"], entry["window"]["end"])
                for name, entry in features.items()
            },
            window_ordering_sensitive={
                name: bool(entry["window_ordering_sensitive"]) for name, entry in features.items()
            },
            feature_ordering_sensitive={
                name: bool(entry["feature_ordering_sensitive"]) for name, entry in features.items()
            },
        )

    def timestep_truth(self) -> set[tuple[str, int]]:
        return {
            (name, k)
            for name in self.relevant
            for k in range(self.windows[name].start, self.windows[name].end + 1)
        }


def score_report(report: AnalysisReport, truth: GroundTruth) -> dict[str, EvalMetrics]:
    """Power/FDR of a report at the feature, timestep, and ordering levels.

    Ordering truths are restricted to relevant features; a truly
    ordering-sensitive feature whose test never ran counts as a miss.
    """
    names = {f.feature for f in report.features}
    if names != set(truth.windows):
        raise InvalidArgumentError("report and ground truth cover different features")

    discovered_features = {f.feature for f in report.features if f.important}
    discovered_cells = {
        (f.feature, k)
        for f in report.features
        if f.important and f.window is not None
        for k in range(f.window.start, f.window.end + 1)
    }
    flagged_feature_ordering = {
        f.feature for f in report.features if f.feature_ordering and f.feature_ordering.important
    }
    flagged_window_ordering = {
        f.feature for f in report.features if f.window_ordering and f.window_ordering.important
    }
    feature_ordering_truth = {
        name for name in truth.relevant if truth.feature_ordering_sensitive[name]
    }
    window_ordering_truth = {
        name for name in truth.relevant if truth.window_ordering_sensitive[name]
    }
    return {
        "feature": EvalMetrics.from_sets(discovered_features, set(truth.relevant)),
        "timestep": EvalMetrics.from_sets(discovered_cells, truth.timestep_truth()),
        "feature_ordering": EvalMetrics.from_sets(flagged_feature_ordering, feature_ordering_truth),
        "window_ordering": EvalMetrics.from_sets(flagged_window_ordering, window_ordering_truth),
    }


def select_top_n(scores: np.ndarray, n: int) -> set:
    """Indices of the up-to-n highest non-zero scores.

    Ties at the cutoff resolve to the lower index (row-major for 2-D score
    grids, where the returned indices are (row, column) pairs).
    """
    if n < 0:
        raise InvalidArgumentError("n must be >= 0")
    scores = np.asarray(scores, dtype=np.float64)
    flat = scores.reshape(-1)
    order = sorted(range(flat.size), key=lambda i: (-flat[i], i))
    chosen = [i for i in order if flat[i] != 0.0][:n]
    if scores.ndim == 1:
        return set(chosen)
    if scores.ndim == 2:
        width = scores.shape[1]
        return {(i // width, i % width) for i in chosen}
    raise InvalidArgumentError("scores must be 1-D or 2-D")


@dataclass
class PermBaselineResult:
    """Per-(feature, timestep) scores and p-values from tabular permutation."""

    scores: np.ndarray
    p_values: np.ndarray

    def feature_scores(self) -> np.ndarray:
        """Per-feature mean of the non-zero cell scores (zero when all cells are zero)."""
        out = np.zeros(self.scores.shape[0])
        for j in range(self.scores.shape[0]):
            nonzero = self.scores[j][self.scores[j] != 0.0]
            if nonzero.size:
                out[j] = nonzero.mean()
        return out


def perm_baseline(
    model: ModelHandle,
    dataset: TemporalDataset,
    loss: LossKind,
    rounds: int,
    seed: int,
) -> PermBaselineResult:
    """Permutation importance of every individual (feature, timestep) cell.

    Each cell is a width-1 window test, so on a length-1 sequence this is
    definitionally the same computation (and the same substreams) as the
    pipeline's overall importance test.
    """
    d, length = dataset.num_features, dataset.sequence_length
    baseline_losses = loss_vector(loss, dataset.targets, baseline_outputs(model, dataset))
    scores = np.empty((d, length))
    p_values = np.empty((d, length))
    for j in range(d):
        for k in range(1, length + 1):
            window = Window(k, k)
            perms = [
                draw_instance_permutation(
                    dataset.num_instances, substream(seed, "importance", j, k, k, r)
                )
                for r in range(rounds)
            ]
            result = window_importance(
                model, dataset, loss, j, window, rounds,
                perms=perms, baseline_losses=baseline_losses,
            )
            scores[j, k - 1] = result.score
            p_values[j, k - 1] = empirical_p(result.baseline, result.round_losses)
    return PermBaselineResult(scores, p_values)


def timex_n_metrics(
    report: AnalysisReport, truth: GroundTruth, feature_names: Sequence[str]
) -> dict[str, EvalMetrics]:
    """Report discoveries truncated to the ground-truth counts.

    Features are ranked by overall importance score; timestep cells by their
    feature's window score (each cell of a window shares it).  Ordering
    metrics are those of the untruncated report.
    """
    length = report.sequence_length
    feature_scores = np.zeros(len(feature_names))
    cell_scores = np.zeros((len(feature_names), length))
    for f in report.features:
        j = feature_names.index(f.feature)
        if f.important and f.importance_score is not None:
            feature_scores[j] = f.importance_score
        if f.important and f.window is not None and f.window_score is not None:
            cell_scores[j, f.window.start - 1 : f.window.end] = f.window_score
    top_features = {feature_names[j] for j in select_top_n(feature_scores, len(truth.relevant))}
    top_cells = {
        (feature_names[j], k + 1)
        for j, k in select_top_n(cell_scores, len(truth.timestep_truth()))
    }
    base = score_report(report, truth)
    return {
        "feature": EvalMetrics.from_sets(top_features, set(truth.relevant)),
        "timestep": EvalMetrics.from_sets(top_cells, truth.timestep_truth()),
        "feature_ordering": base["feature_ordering"],
        "window_ordering": base["window_ordering"],
    }


def perm_metrics(
    result: PermBaselineResult, truth: GroundTruth, feature_names: Sequence[str]
) -> dict[str, EvalMetrics]:
    """Top-n selection over the tabular baseline's scores."""
    top_features = {
        feature_names[j] for j in select_top_n(result.feature_scores(), len(truth.relevant))
    }
    top_cells = {
        (feature_names[j], k + 1)
        for j, k in select_top_n(result.scores, len(truth.timestep_truth()))
    }
    return {
        "feature": EvalMetrics.from_sets(top_features, set(truth.relevant)),
        "timestep": EvalMetrics.from_sets(top_cells, truth.timestep_truth()),
        "feature_ordering": _empty_ordering_metrics(truth),
        "window_ordering": _empty_window_ordering_metrics(truth),
    }


def perm_f_metrics(
    result: PermBaselineResult, truth: GroundTruth, feature_names: Sequence[str], q: float
) -> dict[str, EvalMetrics]:
    """BH-thresholded selection over the baseline's per-cell p-values.

    A feature counts as discovered when any of its cells is rejected.
    """
    length = result.scores.shape[1]
    rejected = bh_reject(result.p_values.reshape(-1), q)
    cells = {(feature_names[i // length], i % length + 1) for i in rejected}
    features = {name for name, _ in cells}
    return {
        "feature": EvalMetrics.from_sets(features, set(truth.relevant)),
        "timestep": EvalMetrics.from_sets(cells, truth.timestep_truth()),
        "feature_ordering": _empty_ordering_metrics(truth),
        "window_ordering": _empty_window_ordering_metrics(truth),
    }


@dataclass(frozen=True)
class SuiteConfig:
    """One evaluation suite: replicated generate/tune/analyze/score runs."""

    replicates: int = 3
    num_instances: int = 1000
    num_features: int = 10
    sequence_length: int = 20
    num_relevant: int = 5
    task: Task = Task.CLASSIFICATION
    methods: tuple[str, ...] = METHODS
    seed: int = 0
    target_metric: float = 0.9
    metric_tolerance: float = 0.005
    permutations: int = 50
    gamma: float = 0.99
    q: float = 0.1
    fraction_categorical: float = 0.5
    fraction_trend: float = 0.5
    jobs: int = 1

    def __post_init__(self):
        if self.replicates < 1:
            raise InvalidArgumentError("replicates must be >= 1")
        if self.num_relevant > self.num_features:
            raise InvalidArgumentError("num_relevant cannot exceed num_features")
        unknown = set(self.methods) - set(METHODS)
        if unknown:
            raise InvalidArgumentError(f"unknown methods {sorted(unknown)}; valid: {METHODS}")
        object.__setattr__(self, "task", Task(self.task))
        object.__setattr__(self, "methods", tuple(self.methods))


@dataclass
class ReplicateOutcome:
    index: int
    metrics: dict[str, dict[str, EvalMetrics]]
    runtimes: dict[str, float]
    beta: float
    error: str | None = None


@dataclass
class SuiteResult:
    config: SuiteConfig
    replicates: list[ReplicateOutcome] = field(default_factory=list)
    excluded: int = 0

    def mean_metric(self, method: str, level: str, attribute: str) -> float:
        values = [
            getattr(rep.metrics[method][level], attribute)
            for rep in self.replicates
            if rep.error is None
        ]
        return float(np.mean(values)) if values else float("nan")

    def median_runtime(self, method: str) -> float:
        values = [rep.runtimes[method] for rep in self.replicates if rep.error is None]
        return float(np.median(values)) if values else float("nan")


_CSV_HEADER = (
    "method,feature_power,feature_fdr,timestep_power,timestep_fdr,"
    "feature_ordering_power,feature_ordering_fdr,window_ordering_power,"
    "window_ordering_fdr,median_runtime_seconds"
)


def suite_csv(result: SuiteResult) -> str:
    lines = [_CSV_HEADER]
    for method in result.config.methods:
        cells = [method]
        for level in ("feature", "timestep", "feature_ordering", "window_ordering"):
            cells.append(repr(result.mean_metric(method, level, "power")))
            cells.append(repr(result.mean_metric(method, level, "fdr")))
        cells.append(repr(result.median_runtime(method)))
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def _run_replicate(cfg: SuiteConfig, index: int) -> ReplicateOutcome:
    gen_seed = stream_key(cfg.seed, "replicate", index, "generate")
    truth_seed = stream_key(cfg.seed, "replicate", index, "truth")
    analysis_seed = stream_key(cfg.seed, "replicate", index, "analysis")

    base, gen_specs = synth.generate_dataset(
        cfg.num_instances, cfg.num_features, cfg.sequence_length, gen_seed,
        cfg.fraction_categorical, cfg.fraction_trend,
    )
    targets, spec, _ = synth.build_ground_truth(
        base, gen_specs, cfg.num_relevant, truth_seed, cfg.task
    )
    dataset = base.with_targets(targets, cfg.task)
    metric = synth.ACCURACY if cfg.task == Task.CLASSIFICATION else synth.R_SQUARED
    beta = synth.tune_beta(spec, dataset, metric, cfg.target_metric, cfg.metric_tolerance)
    spec = synth.finalize_spec(spec, dataset, beta)
    truth = GroundTruth.from_record(synth.ground_truth_record(spec))
    model = synth.make_synthetic_model(spec)
    loss = LossKind.for_task(cfg.task)

    feature_names = dataset.feature_names

    metrics: dict[str, dict[str, EvalMetrics]] = {}
    runtimes: dict[str, float] = {}

    wants_timex = {METHOD_TIMEX, METHOD_TIMEX_N} & set(cfg.methods)
    if wants_timex:
        started = time.perf_counter()
        report = analyze(
            model, dataset,
            AnalysisConfig(gamma=cfg.gamma, q=cfg.q, permutations=cfg.permutations,
                           seed=analysis_seed, loss=loss),
        )
        elapsed = time.perf_counter() - started
        if METHOD_TIMEX in cfg.methods:
            metrics[METHOD_TIMEX] = score_report(report, truth)
            runtimes[METHOD_TIMEX] = elapsed
        if METHOD_TIMEX_N in cfg.methods:
            metrics[METHOD_TIMEX_N] = timex_n_metrics(report, truth, feature_names)
            runtimes[METHOD_TIMEX_N] = elapsed

    wants_perm = {METHOD_PERM, METHOD_PERM_F} & set(cfg.methods)
    if wants_perm:
        started = time.perf_counter()
        baseline = perm_baseline(model, dataset, loss, cfg.permutations, analysis_seed)
        elapsed = time.perf_counter() - started
        if METHOD_PERM in cfg.methods:
            metrics[METHOD_PERM] = perm_metrics(baseline, truth, feature_names)
            runtimes[METHOD_PERM] = elapsed
        if METHOD_PERM_F in cfg.methods:
            metrics[METHOD_PERM_F] = perm_f_metrics(baseline, truth, feature_names, cfg.q)
            runtimes[METHOD_PERM_F] = elapsed
    return ReplicateOutcome(index, metrics, runtimes, beta)


def _empty_ordering_metrics(truth: GroundTruth) -> EvalMetrics:
    missed = {n for n in truth.relevant if truth.feature_ordering_sensitive[n]}
    return EvalMetrics.from_sets(set(), missed)


def _empty_window_ordering_metrics(truth: GroundTruth) -> EvalMetrics:
    missed = {n for n in truth.relevant if truth.window_ordering_sensitive[n]}
    return EvalMetrics.from_sets(set(), missed)


def run_suite(cfg: SuiteConfig) -> SuiteResult:
    """Run every replicate and aggregate mean power/FDR plus median runtime.

    Replicates may run concurrently via ``cfg.jobs``; each replicate's
    methods run sequentially so runtimes are comparable.  A failed replicate
    is recorded with its error and excluded from the aggregates.
    """
    result = SuiteResult(cfg)

    def run_one(index: int) -> ReplicateOutcome:
        try:
            return _run_replicate(cfg, index)
        except Exception as exc:  # noqa: BLE001 - replicate failures are data
            return ReplicateOutcome(index, {}, {}, float("nan"), error=f"{type(exc).__name__}: {exc}")

    if cfg.jobs > 1:
        with ThreadPoolExecutor(max_workers=cfg.jobs) as pool:
            outcomes = list(pool.map(run_one, range(cfg.replicates)))
    else:
        outcomes = [run_one(i) for i in range(cfg.replicates)]
    result.replicates = outcomes
    result.excluded = sum(1 for o in outcomes if o.error is not None)
    return result
