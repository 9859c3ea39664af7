"""Pure-numpy implementations of the hot kernels.

Mirrors `_kernels_numba`; every function here must keep the same signature
and semantics as its compiled twin.  Aggregation kinds: 0=max, 1=average,
2=weighted mean.  Interaction kinds: 0=identity, 1=absolute value, 2=square.
Window bounds are 1-based inclusive.
"""

import numpy as np

AGG_MAX = 0
AGG_AVERAGE = 1
AGG_WEIGHTED = 2

INTER_IDENTITY = 0
INTER_ABS = 1
INTER_SQUARE = 2


def quadratic_loss(targets, outputs):
    d = targets - outputs
    return d * d


def bce_loss(targets, outputs, eps):
    p = np.minimum(np.maximum(outputs, eps), 1.0 - eps)
    return -(targets * np.log(p) + (1.0 - targets) * np.log1p(-p))


def feature_aggregate(values, feature, k1, k2, agg_kind, weights, inter_kind):
    seg = values[:, feature, k1 - 1 : k2]
    if agg_kind == AGG_MAX:
        g = seg.max(axis=1)
    elif agg_kind == AGG_AVERAGE:
        # summed in sorted order so the result is invariant, bit for bit,
        # under reorderings of the window values
        g = np.sort(seg, axis=1).sum(axis=1) / (k2 - k1 + 1)
    else:
        g = seg @ weights[: k2 - k1 + 1]
    if inter_kind == INTER_ABS:
        g = np.abs(g)
    elif inter_kind == INTER_SQUARE:
        g = g * g
    return g


def synthetic_outputs(values, k1s, k2s, agg_kinds, weights, inter_kinds, means, sds, coeffs):
    out = np.zeros(values.shape[0])
    for j in range(coeffs.shape[0]):
        c = coeffs[j]
        if c == 0.0:
            continue
        g = feature_aggregate(values, j, k1s[j], k2s[j], agg_kinds[j], weights[j], inter_kinds[j])
        out += c * ((g - means[j]) / sds[j])
    return out


def _next_states(cdf_rows, u):
    # number of cdf entries <= u, capped at the last state
    idx = np.sum(cdf_rows <= u[:, None], axis=1)
    return np.minimum(idx, cdf_rows.shape[1] - 1)


def markov_walk(u, z, k1, k2, in_cdf, in_init_cdf, in_mu, in_sd, in_values,
                out_cdf, out_init_cdf, out_mu, out_sd, out_values,
                categorical, trend):
    num_instances, length = u.shape
    series = np.empty((num_instances, length))
    in_state = np.zeros(num_instances, np.int64)
    out_state = np.zeros(num_instances, np.int64)
    in_started = False
    out_started = False
    running = np.zeros(num_instances)
    for t in range(length):
        ut = u[:, t]
        inside = (k1 - 1) <= t <= (k2 - 1)
        if inside:
            if in_started:
                in_state = _next_states(in_cdf[in_state], ut)
            else:
                in_state = _next_states(in_init_cdf[None, :], ut)
                in_started = True
            if categorical:
                x = in_values[in_state]
            else:
                x = in_mu[in_state] + in_sd[in_state] * z[:, t]
        else:
            if out_started:
                out_state = _next_states(out_cdf[out_state], ut)
            else:
                out_state = _next_states(out_init_cdf[None, :], ut)
                out_started = True
            if categorical:
                x = out_values[out_state]
            else:
                x = out_mu[out_state] + out_sd[out_state] * z[:, t]
        if trend:
            x = x + running
            running = running + x
        series[:, t] = x
    return series
