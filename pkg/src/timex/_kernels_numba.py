"""Numba-compiled twins of the kernels in `_kernels_numpy`.

Sequential inner loops; no fastmath, so results are reproducible.  Kept in
lockstep with the numpy module: same signatures, same comparison directions
in the chain walk, same emission arithmetic.
"""

import numpy as np
from numba import njit

AGG_MAX = 0
AGG_AVERAGE = 1
AGG_WEIGHTED = 2

INTER_IDENTITY = 0
INTER_ABS = 1
INTER_SQUARE = 2

_JIT = dict(cache=True, nogil=True)


@njit(**_JIT)
def quadratic_loss(targets, outputs):
    out = np.empty(targets.shape[0])
    for i in range(targets.shape[0]):
        d = targets[i] - outputs[i]
        out[i] = d * d
    return out


@njit(**_JIT)
def bce_loss(targets, outputs, eps):
    out = np.empty(targets.shape[0])
    hi = 1.0 - eps
    for i in range(targets.shape[0]):
        p = outputs[i]
        if p < eps:
            p = eps
        elif p > hi:
            p = hi
        out[i] = -(targets[i] * np.log(p) + (1.0 - targets[i]) * np.log1p(-p))
    return out


@njit(**_JIT)
def feature_aggregate(values, feature, k1, k2, agg_kind, weights, inter_kind):
    num = values.shape[0]
    out = np.empty(num)
    width = k2 - k1 + 1
    buf = np.empty(width)
    for i in range(num):
        if agg_kind == AGG_MAX:
            g = values[i, feature, k1 - 1]
            for k in range(k1, k2):
                v = values[i, feature, k]
                if v > g:
                    g = v
        elif agg_kind == AGG_AVERAGE:
            # summed in ascending order (insertion sort: windows are short):
            # invariant under window reorderings
            for k in range(width):
                v = values[i, feature, k1 - 1 + k]
                pos = k
                while pos > 0 and buf[pos - 1] > v:
                    buf[pos] = buf[pos - 1]
                    pos -= 1
                buf[pos] = v
            s = 0.0
            for k in range(width):
                s += buf[k]
            g = s / width
        else:
            s = 0.0
            for k in range(width):
                s += values[i, feature, k1 - 1 + k] * weights[k]
            g = s
        if inter_kind == INTER_ABS:
            g = abs(g)
        elif inter_kind == INTER_SQUARE:
            g = g * g
        out[i] = g
    return out


@njit(**_JIT)
def synthetic_outputs(values, k1s, k2s, agg_kinds, weights, inter_kinds, means, sds, coeffs):
    num = values.shape[0]
    out = np.zeros(num)
    for j in range(coeffs.shape[0]):
        c = coeffs[j]
        if c == 0.0:
            continue
        g = feature_aggregate(values, j, k1s[j], k2s[j], agg_kinds[j], weights[j], inter_kinds[j])
        for i in range(num):
            out[i] += c * ((g[i] - means[j]) / sds[j])
    return out


@njit(**_JIT)
def markov_walk(u, z, k1, k2, in_cdf, in_init_cdf, in_mu, in_sd, in_values,
                out_cdf, out_init_cdf, out_mu, out_sd, out_values,
                categorical, trend):
    num_instances, length = u.shape
    series = np.empty((num_instances, length))
    n_in = in_init_cdf.shape[0]
    n_out = out_init_cdf.shape[0]
    for i in range(num_instances):
        in_state = -1
        out_state = -1
        running = 0.0
        for t in range(length):
            ut = u[i, t]
            inside = (k1 - 1) <= t and t <= (k2 - 1)
            if inside:
                if in_state >= 0:
                    s = 0
                    while s < n_in - 1 and in_cdf[in_state, s] <= ut:
                        s += 1
                    in_state = s
                else:
                    s = 0
                    while s < n_in - 1 and in_init_cdf[s] <= ut:
                        s += 1
                    in_state = s
                if categorical:
                    x = in_values[in_state]
                else:
                    x = in_mu[in_state] + in_sd[in_state] * z[i, t]
            else:
                if out_state >= 0:
                    s = 0
                    while s < n_out - 1 and out_cdf[out_state, s] <= ut:
                        s += 1
                    out_state = s
                else:
                    s = 0
                    while s < n_out - 1 and out_init_cdf[s] <= ut:
                        s += 1
                    out_state = s
                if categorical:
                    x = out_values[out_state]
                else:
                    x = out_mu[out_state] + out_sd[out_state] * z[i, t]
            if trend:
                x = x + running
                running = running + x
            series[i, t] = x
    return series
