"""Independent brute-force oracles shared by the unit and acceptance tests.

These deliberately avoid the library's own code paths: the BH oracle
enumerates rejection subsets, the confusion oracle counts units with double
loops, and the window-scan oracle scores every prior/suffix window directly.
"""

import itertools

import numpy as np

from timex.data import LossKind, Window
from timex.perturb import window_importance

QUAD = LossKind.quadratic()


def bh_oracle(p_values, q):
    """Largest self-consistent rejection set, by exhaustive enumeration."""
    m = len(p_values)
    best_size = 0
    for r in range(1, m + 1):
        for subset in itertools.combinations(range(m), r):
            if all(p_values[i] <= r * q / m for i in subset):
                best_size = max(best_size, r)
    if best_size == 0:
        return set()
    return {i for i in range(m) if p_values[i] <= best_size * q / m}


def confusion_counts(discovered, truth):
    """(tp, fp, fn) for two collections of hashable units, double loop."""
    tp = fp = fn = 0
    for unit in discovered:
        if unit in truth:
            tp += 1
        else:
            fp += 1
    for unit in truth:
        if unit not in discovered:
            fn += 1
    return tp, fp, fn


def scan_all_windows(model, ds, feature, rounds, perms, gamma, overall, loss=QUAD):
    """Score every prior window [1,b] and suffix [c,L] with paired
    permutations; return the smallest window whose prior and suffix both fall
    below the threshold, plus the raw scans."""
    length = ds.sequence_length
    threshold = 0.5 * (1 - gamma) * overall

    def score(window):
        return window_importance(model, ds, loss, feature, window, rounds, perms=perms).score

    prior = {0: 0.0}
    for b in range(1, length):
        prior[b] = score(Window(1, b))
    suffix = {length + 1: 0.0}
    for c in range(2, length + 1):
        suffix[c] = score(Window(c, length))

    best = None
    for k1 in range(1, length + 1):
        for k2 in range(k1, length + 1):
            if prior[k1 - 1] < threshold and suffix[k2 + 1 if k2 < length else length + 1] < threshold:
                if best is None or (k2 - k1) < (best.end - best.start):
                    best = Window(k1, k2)
    return best, prior, suffix, threshold


def random_truth_and_report(rng, make_truth, make_report):
    """One random (report, truth, entries, names, length) tuple for
    confusion-matrix cross-checks."""
    d = int(rng.integers(1, 6))
    length = int(rng.integers(1, 5))
    names = [f"f{i}" for i in range(d)]

    def rand_window():
        k1 = int(rng.integers(1, length + 1))
        return Window(k1, int(rng.integers(k1, length + 1)))

    truth = make_truth(
        names,
        {n for n in names if rng.random() < 0.5},
        [rand_window() for _ in names],
        rng.random(d) < 0.5,
        rng.random(d) < 0.5,
    )
    entries = {}
    for n in names:
        important = bool(rng.random() < 0.5)
        window = rand_window() if important else None
        ford = bool(rng.random() < 0.5) if important else None
        word = bool(rng.random() < 0.5) if (important and rng.random() < 0.8) else None
        entries[n] = (important, window, ford, word, float(rng.random()) if important else None)
    report = make_report(names, length, entries)
    return report, truth, entries, names, length
