"""Synthetic benchmark: Markov-chain datasets, ground truth, and noised models.

Each feature gets a random window and two Markov chains; the out-of-window
chain drives timesteps outside the window and the in-window chain drives the
rest.  Targets come from a linear combination of per-feature functions
(standardized interaction of a window aggregate) over a relevant subset of
features.  A synthetic model adds the irrelevant features' functions back in,
scaled by a noise multiplier ``beta`` that is tuned until the model hits a
target accuracy or R^2.
"""

import json
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from . import kernels
from .data import FeatureKind, FeatureMeta, Task, TemporalDataset, Window
from .errors import GenerationError, InvalidArgumentError, TuningError
from .models import InProcessModel
from .rng import substream

AGG_MAX = "max"
AGG_AVERAGE = "average"
AGG_MONOTONIC = "monotonic_weighted_average"
AGG_RANDOM = "random_weighted_average"
AGGREGATORS = (AGG_MAX, AGG_AVERAGE, AGG_MONOTONIC, AGG_RANDOM)
ORDER_SENSITIVE_AGGREGATORS = (AGG_MONOTONIC, AGG_RANDOM)

INTER_IDENTITY = "identity"
INTER_ABS = "absolute_value"
INTER_SQUARE = "square"
INTERACTIONS = (INTER_IDENTITY, INTER_ABS, INTER_SQUARE)

_AGG_CODES = {AGG_MAX: kernels.AGG_MAX, AGG_AVERAGE: kernels.AGG_AVERAGE,
              AGG_MONOTONIC: kernels.AGG_WEIGHTED, AGG_RANDOM: kernels.AGG_WEIGHTED}
_INTER_CODES = {INTER_IDENTITY: kernels.INTER_IDENTITY, INTER_ABS: kernels.INTER_ABS,
                INTER_SQUARE: kernels.INTER_SQUARE}

_MIN_STATES, _MAX_STATES = 2, 5


@dataclass(frozen=True)
class MarkovChainSpec:
    """States with Gaussian or integer emissions and a row-stochastic transition matrix."""

    transitions: np.ndarray
    initial: np.ndarray
    means: np.ndarray | None = None
    sds: np.ndarray | None = None
    values: np.ndarray | None = None

    def __post_init__(self):
        transitions = np.asarray(self.transitions, dtype=np.float64)
        initial = np.asarray(self.initial, dtype=np.float64)
        s = transitions.shape[0]
        if not (_MIN_STATES <= s <= _MAX_STATES):
            raise InvalidArgumentError(f"chains must have {_MIN_STATES}..{_MAX_STATES} states, got {s}")
        if transitions.shape != (s, s) or initial.shape != (s,):
            raise InvalidArgumentError("transition matrix and initial distribution shapes disagree")
        if np.abs(transitions.sum(axis=1) - 1.0).max() > 1e-12:
            raise InvalidArgumentError("transition rows must sum to 1 within 1e-12")
        if abs(initial.sum() - 1.0) > 1e-12:
            raise InvalidArgumentError("initial distribution must sum to 1 within 1e-12")
        if self.values is None:
            means = np.asarray(self.means, dtype=np.float64)
            sds = np.asarray(self.sds, dtype=np.float64)
            if means.shape != (s,) or sds.shape != (s,):
                raise InvalidArgumentError("per-state emission parameter shapes disagree")
            if (sds <= 0.0).any():
                raise InvalidArgumentError("emission standard deviations must be positive")
            object.__setattr__(self, "means", means)
            object.__setattr__(self, "sds", sds)
        else:
            values = np.asarray(self.values, dtype=np.float64)
            if values.shape != (s,):
                raise InvalidArgumentError("per-state emission value shape disagrees")
            object.__setattr__(self, "values", values)
        object.__setattr__(self, "transitions", transitions)
        object.__setattr__(self, "initial", initial)

    @property
    def num_states(self) -> int:
        return self.transitions.shape[0]

    @property
    def categorical(self) -> bool:
        return self.values is not None


@dataclass(frozen=True)
class FeatureGenSpec:
    """Generator for one feature: window, in/out chains, kind, trend flag."""

    name: str
    window: Window
    in_chain: MarkovChainSpec
    out_chain: MarkovChainSpec
    kind: FeatureKind
    trend: bool = False


def sample_chain(rng: np.random.Generator, categorical: bool) -> MarkovChainSpec:
    """Chain with 2-5 states and uniformly sampled emissions and transitions."""
    s = int(rng.integers(_MIN_STATES, _MAX_STATES + 1))
    transitions = rng.random((s, s))
    transitions /= transitions.sum(axis=1, keepdims=True)
    initial = np.full(s, 1.0 / s)
    initial /= initial.sum()
    if categorical:
        values = rng.choice(10, size=s, replace=False).astype(np.float64)
        return MarkovChainSpec(transitions, initial, values=values)
    means = rng.uniform(-1.0, 1.0, s)
    sds = rng.uniform(0.05, 1.0, s)
    return MarkovChainSpec(transitions, initial, means=means, sds=sds)


def _sample_window(rng: np.random.Generator, length: int) -> Window:
    if length < 2:
        return Window(1, 1)
    k1 = int(rng.integers(1, length))           # uniform over 1..L-1
    k2 = int(rng.integers(k1 + 1, length + 1))  # uniform over k1+1..L
    return Window(k1, k2)


def _cdf(probabilities: np.ndarray) -> np.ndarray:
    cdf = np.cumsum(probabilities)
    return cdf / cdf[-1]


def _walk_feature(spec: FeatureGenSpec, num_instances: int, length: int,
                  rng: np.random.Generator) -> np.ndarray:
    u = rng.random((num_instances, length))
    z = rng.standard_normal((num_instances, length))
    empty = np.zeros(1)
    in_c, out_c = spec.in_chain, spec.out_chain
    categorical = spec.kind == FeatureKind.CATEGORICAL
    return kernels.markov_walk(
        u, z, spec.window.start, spec.window.end,
        np.ascontiguousarray(np.vstack([_cdf(row) for row in in_c.transitions])),
        _cdf(in_c.initial),
        in_c.means if in_c.means is not None else empty,
        in_c.sds if in_c.sds is not None else empty,
        in_c.values if in_c.values is not None else empty,
        np.ascontiguousarray(np.vstack([_cdf(row) for row in out_c.transitions])),
        _cdf(out_c.initial),
        out_c.means if out_c.means is not None else empty,
        out_c.sds if out_c.sds is not None else empty,
        out_c.values if out_c.values is not None else empty,
        categorical, spec.trend,
    )


def generate_dataset(
    num_instances: int,
    num_features: int,
    sequence_length: int,
    seed: int,
    fraction_categorical: float = 0.5,
    fraction_trend: float = 0.5,
) -> tuple[TemporalDataset, list[FeatureGenSpec]]:
    """Sample generators and walk them into a dataset (targets are zeros).

    ``fraction_categorical`` of features are categorical in expectation;
    ``fraction_trend`` of the continuous ones accumulate their samples over
    time.  Targets are filled in later by ``build_ground_truth``.
    """
    if num_instances < 2 or num_features < 1 or sequence_length < 1:
        raise InvalidArgumentError("need at least 2 instances, 1 feature, and 1 timestep")
    for name, fraction in (("fraction_categorical", fraction_categorical),
                           ("fraction_trend", fraction_trend)):
        if not (0.0 <= fraction <= 1.0):
            raise InvalidArgumentError(f"{name} must lie in [0, 1]")

    kind_rng = substream(seed, "gen", "kinds")
    categorical_mask = kind_rng.random(num_features) < fraction_categorical
    trend_mask = ~categorical_mask & (kind_rng.random(num_features) < fraction_trend)

    specs: list[FeatureGenSpec] = []
    values = np.empty((num_instances, num_features, sequence_length))
    for j in range(num_features):
        feature_rng = substream(seed, "gen", "feature", j)
        window = _sample_window(feature_rng, sequence_length)
        kind = FeatureKind.CATEGORICAL if categorical_mask[j] else FeatureKind.CONTINUOUS
        spec = FeatureGenSpec(
            name=f"f{j + 1}",
            window=window,
            in_chain=sample_chain(feature_rng, categorical_mask[j]),
            out_chain=sample_chain(feature_rng, categorical_mask[j]),
            kind=kind,
            trend=bool(trend_mask[j]),
        )
        specs.append(spec)
        values[:, j, :] = _walk_feature(spec, num_instances, sequence_length,
                                        substream(seed, "gen", "walk", j))
    meta = tuple(FeatureMeta(spec.name, spec.kind) for spec in specs)
    dataset = TemporalDataset(values, np.zeros(num_instances), Task.REGRESSION, meta)
    return dataset, specs


@dataclass(frozen=True)
class FeatureFunctionSpec:
    """Standardized windowed aggregate: coefficient * ((interaction(agg) - mean) / sd)."""

    window: Window
    aggregator: str
    interaction: str
    standardize_mean: float
    standardize_sd: float
    alpha: float
    weights: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.aggregator not in AGGREGATORS:
            raise InvalidArgumentError(f"unknown aggregator {self.aggregator!r}")
        if self.interaction not in INTERACTIONS:
            raise InvalidArgumentError(f"unknown interaction {self.interaction!r}")
        if self.standardize_sd <= 0.0:
            raise InvalidArgumentError("standardizer sd must be positive")
        if not (-1.0 <= self.alpha <= 1.0):
            raise InvalidArgumentError("alpha must lie in [-1, 1]")
        if self.aggregator in ORDER_SENSITIVE_AGGREGATORS:
            if self.weights is None or len(self.weights) != self.window.width:
                raise InvalidArgumentError("weighted aggregators need one weight per window timestep")
            w = np.asarray(self.weights)
            if (w < 0.0).any() or abs(w.sum() - 1.0) > 1e-9:
                raise InvalidArgumentError("weights must be non-negative and sum to 1")
        elif self.weights is not None:
            raise InvalidArgumentError(f"{self.aggregator} takes no weights")

    @property
    def ordering_sensitive(self) -> bool:
        return self.aggregator in ORDER_SENSITIVE_AGGREGATORS


@dataclass(frozen=True)
class SyntheticModelSpec:
    """Full description of a synthetic model: functions, relevant set, noise level."""

    feature_names: tuple[str, ...]
    sequence_length: int
    functions: tuple[FeatureFunctionSpec, ...]
    relevant: tuple[str, ...]
    beta: float = 0.0
    task: Task = Task.REGRESSION
    threshold: float = 0.0
    link_scale: float = 1.0

    def __post_init__(self):
        if len(self.functions) != len(self.feature_names):
            raise InvalidArgumentError("one feature function per feature is required")
        for name, fn in zip(self.feature_names, self.functions):
            if fn.window.end > self.sequence_length:
                raise InvalidArgumentError(
                    f"window of {name!r} ends at {fn.window.end} but sequences have "
                    f"length {self.sequence_length}"
                )
        unknown = set(self.relevant) - set(self.feature_names)
        if unknown:
            raise InvalidArgumentError(f"relevant features {sorted(unknown)} not in feature set")
        if len(set(self.relevant)) != len(self.relevant):
            raise InvalidArgumentError("relevant feature names must be unique")
        if self.beta < 0.0:
            raise InvalidArgumentError("beta must be non-negative")

    @property
    def irrelevant(self) -> tuple[str, ...]:
        relevant = set(self.relevant)
        return tuple(n for n in self.feature_names if n not in relevant)

    def coefficients(self, beta: float | None = None) -> np.ndarray:
        """Per-feature coefficient: alpha for relevant, beta * alpha otherwise."""
        beta = self.beta if beta is None else beta
        relevant = set(self.relevant)
        return np.asarray([
            fn.alpha if name in relevant else beta * fn.alpha
            for name, fn in zip(self.feature_names, self.functions)
        ])


def _forward_arrays(spec: SyntheticModelSpec, beta: float | None = None):
    d, length = len(spec.feature_names), spec.sequence_length
    k1s = np.asarray([fn.window.start for fn in spec.functions], dtype=np.int64)
    k2s = np.asarray([fn.window.end for fn in spec.functions], dtype=np.int64)
    agg = np.asarray([_AGG_CODES[fn.aggregator] for fn in spec.functions], dtype=np.int64)
    inter = np.asarray([_INTER_CODES[fn.interaction] for fn in spec.functions], dtype=np.int64)
    weights = np.zeros((d, length))
    for j, fn in enumerate(spec.functions):
        if fn.weights is not None:
            weights[j, : len(fn.weights)] = fn.weights
    means = np.asarray([fn.standardize_mean for fn in spec.functions])
    sds = np.asarray([fn.standardize_sd for fn in spec.functions])
    coeffs = spec.coefficients(beta)
    return k1s, k2s, agg, weights, inter, means, sds, coeffs


def synthetic_forward(spec: SyntheticModelSpec, values: np.ndarray,
                      beta: float | None = None) -> np.ndarray:
    """Raw model response (before any classification link)."""
    k1s, k2s, agg, weights, inter, means, sds, coeffs = _forward_arrays(spec, beta)
    return kernels.synthetic_outputs(values, k1s, k2s, agg, weights, inter, means, sds, coeffs)


def _sigmoid(x: np.ndarray) -> np.ndarray:
    with np.errstate(over="ignore"):
        return 1.0 / (1.0 + np.exp(-x))


def make_synthetic_model(spec: SyntheticModelSpec, name: str = "synthetic") -> InProcessModel:
    """In-process handle computing the spec's response.

    Classification specs emit probabilities through a logistic link centered
    on the labeling threshold: sigmoid(link_scale * (f(X) - threshold)).
    """
    arrays = _forward_arrays(spec)
    k1s, k2s, agg, weights, inter, means, sds, coeffs = arrays
    if spec.task == Task.CLASSIFICATION:
        threshold, scale = spec.threshold, spec.link_scale

        def fn(values: np.ndarray) -> np.ndarray:
            raw = kernels.synthetic_outputs(values, k1s, k2s, agg, weights, inter, means, sds, coeffs)
            return _sigmoid(scale * (raw - threshold))
    else:
        def fn(values: np.ndarray) -> np.ndarray:
            return kernels.synthetic_outputs(values, k1s, k2s, agg, weights, inter, means, sds, coeffs)

    return InProcessModel(fn, len(spec.feature_names), spec.sequence_length, spec.task, name=name)


_STANDARDIZE_RETRIES = 10


def build_ground_truth(
    dataset: TemporalDataset,
    gen_specs: list[FeatureGenSpec],
    num_relevant: int,
    seed: int,
    task: Task = Task.REGRESSION,
) -> tuple[np.ndarray, SyntheticModelSpec, dict]:
    """Draw feature functions and targets for a generated dataset.

    Returns the targets (regression values, or median-thresholded labels for
    classification), a zero-noise model spec, and a JSON-friendly ground
    truth record.  Feature functions whose aggregate is constant over the
    dataset are redrawn a bounded number of times.
    """
    d = dataset.num_features
    if not (0 <= num_relevant <= d):
        raise InvalidArgumentError("num_relevant must lie in [0, num_features]")
    if len(gen_specs) != d:
        raise InvalidArgumentError("one generator spec per feature is required")
    task = Task(task)

    relevant_rng = substream(seed, "truth", "relevant")
    relevant_idx = np.sort(relevant_rng.choice(d, size=num_relevant, replace=False))
    relevant_names = tuple(gen_specs[j].name for j in relevant_idx)

    functions: list[FeatureFunctionSpec] = []
    for j, gen in enumerate(gen_specs):
        feature_rng = substream(seed, "truth", "feature", j)
        alpha = float(feature_rng.uniform(-1.0, 1.0))
        window = gen.window
        spec = None
        for _ in range(_STANDARDIZE_RETRIES):
            aggregator = AGGREGATORS[int(feature_rng.integers(len(AGGREGATORS)))]
            interaction = INTERACTIONS[int(feature_rng.integers(len(INTERACTIONS)))]
            weights = _draw_weights(aggregator, window, feature_rng)
            raw = kernels.feature_aggregate(
                dataset.values, j, window.start, window.end,
                _AGG_CODES[aggregator],
                np.asarray(weights) if weights is not None else np.zeros(window.width),
                _INTER_CODES[interaction],
            )
            mean, sd = float(np.mean(raw)), float(np.std(raw))
            if sd > 0.0:
                spec = FeatureFunctionSpec(window, aggregator, interaction, mean, sd, alpha, weights)
                break
        if spec is None:
            raise GenerationError(
                f"feature {gen.name!r} kept a zero-variance aggregate after "
                f"{_STANDARDIZE_RETRIES} redraws"
            )
        functions.append(spec)

    model_spec = SyntheticModelSpec(
        feature_names=tuple(g.name for g in gen_specs),
        sequence_length=dataset.sequence_length,
        functions=tuple(functions),
        relevant=relevant_names,
        beta=0.0,
        task=task,
    )
    y = synthetic_forward(model_spec, dataset.values)
    threshold = float(np.median(y))
    model_spec = replace(model_spec, threshold=threshold)
    if task == Task.CLASSIFICATION:
        targets = (y > threshold).astype(np.float64)
        model_spec = replace(model_spec, link_scale=_default_link_scale(y, threshold))
    else:
        targets = y
    return targets, model_spec, ground_truth_record(model_spec)


def fit_feature_function(
    dataset: TemporalDataset,
    feature: int,
    window: Window,
    aggregator: str,
    interaction: str = INTER_IDENTITY,
    alpha: float = 1.0,
    weights: tuple[float, ...] | None = None,
    rng: np.random.Generator | None = None,
) -> FeatureFunctionSpec:
    """Feature function with the standardizer fit on ``dataset``.

    Weighted aggregators take explicit ``weights``; otherwise the monotonic
    ramp is built for ``monotonic_weighted_average`` and ``rng`` draws the
    weights for ``random_weighted_average``.
    """
    if window.end > dataset.sequence_length:
        raise InvalidArgumentError(
            f"window [{window.start}, {window.end}] exceeds sequence length "
            f"{dataset.sequence_length}"
        )
    if weights is None:
        if aggregator == AGG_RANDOM and rng is None:
            raise InvalidArgumentError("random_weighted_average needs weights or an rng")
        weights = _draw_weights(aggregator, window, rng)
    raw = kernels.feature_aggregate(
        dataset.values, feature, window.start, window.end,
        _AGG_CODES[aggregator],
        np.asarray(weights) if weights is not None else np.zeros(window.width),
        _INTER_CODES[interaction],
    )
    sd = float(np.std(raw))
    if sd <= 0.0:
        raise GenerationError("aggregate is constant over the dataset; cannot standardize")
    return FeatureFunctionSpec(window, aggregator, interaction, float(np.mean(raw)), sd, alpha, weights)


def _draw_weights(aggregator: str, window: Window, rng: np.random.Generator):
    if aggregator == AGG_MONOTONIC:
        ramp = np.arange(1, window.width + 1, dtype=np.float64)
        return tuple(ramp / ramp.sum())
    if aggregator == AGG_RANDOM:
        w = rng.random(window.width)
        return tuple(w / w.sum())
    return None


def _default_link_scale(raw: np.ndarray, threshold: float) -> float:
    sd = float(np.std(raw - threshold))
    return 2.0 / sd if sd > 0.0 else 1.0


def ground_truth_record(spec: SyntheticModelSpec) -> dict:
    """JSON-friendly record of relevant features, windows, and sensitivities."""
    full = Window.full(spec.sequence_length)
    relevant = set(spec.relevant)
    features = {}
    for name, fn in zip(spec.feature_names, spec.functions):
        features[name] = {
            "window": fn.window.to_document(),
            "aggregator": fn.aggregator,
            "interaction": fn.interaction,
            "alpha": fn.alpha,
            "window_ordering_sensitive": fn.ordering_sensitive,
            "feature_ordering_sensitive": name in relevant and fn.window != full,
        }
    return {
        "task": spec.task.value,
        "sequence_length": spec.sequence_length,
        "relevant": list(spec.relevant),
        "beta": spec.beta,
        "threshold": spec.threshold,
        "features": features,
    }


def finalize_spec(spec: SyntheticModelSpec, dataset: TemporalDataset, beta: float) -> SyntheticModelSpec:
    """Freeze a tuned noise level (and, for classification, the link scale)."""
    spec = replace(spec, beta=float(beta))
    if spec.task == Task.CLASSIFICATION:
        raw = synthetic_forward(spec, dataset.values)
        spec = replace(spec, link_scale=_default_link_scale(raw, spec.threshold))
    return spec


ACCURACY = "accuracy"
R_SQUARED = "r_squared"


def model_metric(spec: SyntheticModelSpec, dataset: TemporalDataset, kind: str,
                 beta: float | None = None) -> float:
    """Accuracy (thresholded raw response) or R^2 of the spec on a dataset."""
    raw = synthetic_forward(spec, dataset.values, beta=beta)
    if kind == ACCURACY:
        predicted = raw > spec.threshold
        return float(np.mean(predicted == (dataset.targets > 0.5)))
    if kind == R_SQUARED:
        residual = dataset.targets - raw
        total = dataset.targets - dataset.targets.mean()
        denom = float(total @ total)
        if denom == 0.0:
            raise TuningError("R^2 is undefined: targets are constant")
        return 1.0 - float(residual @ residual) / denom
    raise InvalidArgumentError(f"unknown metric {kind!r}")


_BRACKET_CAP = 2.0**40


def tune_beta(
    spec: SyntheticModelSpec,
    dataset: TemporalDataset,
    metric: str,
    target: float = 0.9,
    tolerance: float = 0.005,
    max_iterations: int = 200,
) -> float:
    """Bisect the noise multiplier until the metric lands within tolerance.

    The metric must be (weakly) decreasing in beta, starting at a perfect fit
    for beta = 0; the upper bracket is found by doubling.  Raises
    ``TuningError`` with the evaluation trace when the target cannot be
    bracketed or bisection fails to converge, which covers non-monotone
    metrics and unreachably tight tolerances.
    """
    trace: list[tuple[float, float]] = []

    def measure(beta: float) -> float:
        value = model_metric(spec, dataset, metric, beta=beta)
        trace.append((beta, value))
        return value

    base = measure(0.0)
    if abs(base - target) <= tolerance:
        return 0.0
    if base < target:
        raise TuningError(
            f"target {metric}={target} exceeds the zero-noise value {base:.6f}", trace
        )
    if not spec.irrelevant:
        raise TuningError("no irrelevant features: the noise level cannot move the metric", trace)
    hi = 1.0
    while measure(hi) >= target:
        hi *= 2.0
        if hi > _BRACKET_CAP:
            raise TuningError(f"failed to bracket target {metric}={target}", trace)
    if abs(trace[-1][1] - target) <= tolerance:
        return hi
    lo = hi / 2.0 if hi > 1.0 else 0.0
    for _ in range(max_iterations):
        mid = 0.5 * (lo + hi)
        value = measure(mid)
        if abs(value - target) <= tolerance:
            return mid
        if value >= target:
            lo = mid
        else:
            hi = mid
    raise TuningError(
        f"bisection did not reach {metric}={target} +/- {tolerance} "
        f"after {max_iterations} iterations", trace
    )


def spec_to_document(spec: SyntheticModelSpec) -> dict:
    return {
        "feature_names": list(spec.feature_names),
        "sequence_length": spec.sequence_length,
        "task": spec.task.value,
        "relevant": list(spec.relevant),
        "beta": spec.beta,
        "threshold": spec.threshold,
        "link_scale": spec.link_scale,
        "functions": [
            {
                "window": fn.window.to_document(),
                "aggregator": fn.aggregator,
                "interaction": fn.interaction,
                "mean": fn.standardize_mean,
                "sd": fn.standardize_sd,
                "alpha": fn.alpha,
                "weights": list(fn.weights) if fn.weights is not None else None,
            }
            for fn in spec.functions
        ],
    }


def spec_from_document(doc: dict) -> SyntheticModelSpec:
    functions = tuple(
        FeatureFunctionSpec(
            window=Window(fn["window"]["start"], fn["window"]["end"]),
            aggregator=fn["aggregator"],
            interaction=fn["interaction"],
            standardize_mean=fn["mean"],
            standardize_sd=fn["sd"],
            alpha=fn["alpha"],
            weights=tuple(fn["weights"]) if fn.get("weights") is not None else None,
        )
        for fn in doc["functions"]
    )
    return SyntheticModelSpec(
        feature_names=tuple(doc["feature_names"]),
        sequence_length=int(doc["sequence_length"]),
        functions=functions,
        relevant=tuple(doc["relevant"]),
        beta=float(doc["beta"]),
        task=Task(doc["task"]),
        threshold=float(doc["threshold"]),
        link_scale=float(doc.get("link_scale", 1.0)),
    )


def save_model_spec(spec: SyntheticModelSpec, path) -> None:
    Path(path).write_text(json.dumps(spec_to_document(spec), indent=2) + "\n")


def load_model_spec(path) -> SyntheticModelSpec:
    return spec_from_document(json.loads(Path(path).read_text()))

