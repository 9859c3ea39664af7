import math

import numpy as np
import pytest

from timex.data import LossKind, TemporalDataset, Window
from timex.errors import InvalidArgumentError
from timex.models import InProcessModel
from timex.perturb import draw_instance_permutation, window_importance
from timex.rng import substream
from timex.search import find_important_window

from conftest import cell_model, mean_over_sequence_model, normal_dataset
from oracles import scan_all_windows

QUAD = LossKind.quadratic()


def paired_perms(m, rounds, seed):
    return [draw_instance_permutation(m, substream(seed, "search", 0, r)) for r in range(rounds)]


def run_search(model, ds, feature, rounds, seed, gamma, perms=None):
    perms = perms or paired_perms(ds.num_instances, rounds, seed)
    overall = window_importance(
        model, ds, QUAD, feature, Window.full(ds.sequence_length), rounds, perms=perms
    ).score
    result = find_important_window(
        model, ds, QUAD, feature, gamma, rounds, perms=perms, overall_score=overall
    )
    return result, perms, overall


class TestFindImportantWindow:
    def test_length_one_no_iterations(self):
        ds = normal_dataset(50, 1, 1, seed=0, targets=np.arange(50.0))
        model = cell_model(1, 1, 1, 1)
        result = find_important_window(
            model, ds, QUAD, 0, 0.95, 5,
            perms=paired_perms(50, 5, 3), overall_score=1.0,
        )
        assert result.window == Window(1, 1)
        assert result.evaluations == 0

    def test_uniform_model_returns_full_window(self):
        rng = np.random.default_rng(42)
        values = rng.standard_normal((1000, 1, 8))
        targets = values[:, 0, :].mean(axis=1)
        ds = TemporalDataset(values, targets)
        model = mean_over_sequence_model(1, 8)
        result, perms, overall = run_search(model, ds, 0, 25, seed=1, gamma=0.95)
        assert result.window == Window(1, 8)
        # oracle: no nonempty prior or subsequent window satisfies the threshold
        best, prior, suffix, threshold = scan_all_windows(model, ds, 0, 25, perms, 0.95, overall)
        assert best == Window(1, 8)
        assert all(score >= threshold for b, score in prior.items() if b > 0)
        assert all(score >= threshold for c, score in suffix.items() if c <= 8)

    def test_single_timestep_model_localized_exactly(self):
        rng = np.random.default_rng(7)
        values = rng.standard_normal((1000, 1, 8))
        targets = values[:, 0, 4].copy()
        ds = TemporalDataset(values, targets)
        model = cell_model(1, 8, 1, 5)
        result, perms, overall = run_search(model, ds, 0, 50, seed=2, gamma=0.95)
        assert result.window == Window(5, 5)
        best, prior, suffix, threshold = scan_all_windows(model, ds, 0, 50, perms, 0.95, overall)
        assert best == Window(5, 5)
        # windows not touching timestep 5 score exactly zero
        assert prior[4] == 0.0 and suffix[6] == 0.0
        assert prior[5] > threshold and suffix[5] > threshold
        assert result.prior_score == prior[4]
        assert result.subsequent_score == suffix[6]
        assert result.window_score > threshold

    def test_evaluation_budget(self):
        for length in (2, 3, 5, 8, 16, 20, 33):
            budget = 2 * math.ceil(math.log2(length)) + 2
            for model_timestep in (1, length // 2 + 1, length):
                ds = normal_dataset(40, 1, length, seed=length, targets=np.arange(40.0))
                values = ds.values.copy()
                targets = values[:, 0, model_timestep - 1].copy()
                ds = TemporalDataset(values, targets)
                model = cell_model(1, length, 1, model_timestep)
                result, _, _ = run_search(model, ds, 0, 10, seed=model_timestep, gamma=0.9)
                assert result.evaluations <= budget, (length, model_timestep, result)

    def test_deterministic_including_evaluation_count(self):
        ds = normal_dataset(200, 2, 12, seed=5)
        ds = TemporalDataset(ds.values, ds.values[:, 1, 3].copy())
        model = cell_model(2, 12, 2, 4)
        a, _, _ = run_search(model, ds, 1, 20, seed=9, gamma=0.95)
        b, _, _ = run_search(model, ds, 1, 20, seed=9, gamma=0.95)
        assert a == b

    def test_degenerate_overall_returns_full(self):
        ds = normal_dataset(30, 1, 6, seed=3, targets=np.arange(30.0))
        model = cell_model(1, 6, 1, 2)
        result = find_important_window(
            model, ds, QUAD, 0, 0.99, 5, perms=paired_perms(30, 5, 0), overall_score=-0.5
        )
        assert result.degenerate
        assert result.window == Window(1, 6)
        assert result.evaluations == 0

    def test_gamma_validated(self):
        ds = normal_dataset(10, 1, 4, seed=1, targets=np.arange(10.0))
        with pytest.raises(InvalidArgumentError):
            find_important_window(cell_model(1, 4, 1, 1), ds, QUAD, 0, 1.0, 3,
                                  substream(0), overall_score=1.0)

    def test_standalone_mode_measures_overall(self):
        # without overall_score the search spends one extra paired evaluation
        ds = normal_dataset(100, 1, 8, seed=11)
        ds = TemporalDataset(ds.values, ds.values[:, 0, 4].copy())
        model = cell_model(1, 8, 1, 5)
        perms = paired_perms(100, 20, 4)
        result = find_important_window(model, ds, QUAD, 0, 0.95, 20, perms=perms)
        assert result.window == Window(5, 5)
        expected_overall = window_importance(model, ds, QUAD, 0, Window(1, 8), 20, perms=perms).score
        assert result.overall_score == expected_overall


def test_window_score_reuses_overall_when_full():
    rng = np.random.default_rng(20)
    values = rng.standard_normal((400, 1, 8))
    targets = values[:, 0, :].mean(axis=1)
    ds = TemporalDataset(values, targets)
    model = mean_over_sequence_model(1, 8)
    result, _, overall = run_search(model, ds, 0, 20, seed=8, gamma=0.95)
    assert result.window == Window(1, 8)
    assert result.window_score == overall


def test_jaccard_overlap_on_synthetic_models():
    # sanity: on noised synthetic regression models at a large test size, the
    # recovered window overlaps the true window (Jaccard >= 0.5) in at least
    # 80% of trials
    from timex import synth
    from timex.data import Task

    trials, hits = 0, 0
    for seed in (0, 1):
        base, gens = synth.generate_dataset(6400, 8, 20, seed=seed)
        targets, spec, record = synth.build_ground_truth(base, gens, 6, seed=seed + 100,
                                                         task=Task.REGRESSION)
        ds = base.with_targets(targets)
        beta = synth.tune_beta(spec, ds, synth.R_SQUARED, 0.9, 0.005)
        spec = synth.finalize_spec(spec, ds, beta)
        model = synth.make_synthetic_model(spec)
        for j, name in enumerate(ds.feature_names):
            true_window = record["features"][name]["window"]
            perms = [draw_instance_permutation(6400, substream(seed, "jaccard", j, r))
                     for r in range(50)]
            overall = window_importance(model, ds, QUAD, j, Window(1, 20), 50, perms=perms).score
            if overall <= 0:
                continue
            found = find_important_window(model, ds, QUAD, j, 0.99, 50,
                                          perms=perms, overall_score=overall).window
            lo = max(found.start, true_window["start"])
            hi = min(found.end, true_window["end"])
            intersection = max(0, hi - lo + 1)
            union = found.width + (true_window["end"] - true_window["start"] + 1) - intersection
            trials += 1
            hits += intersection / union >= 0.5
    assert trials >= 10
    assert hits / trials >= 0.8, (hits, trials)
