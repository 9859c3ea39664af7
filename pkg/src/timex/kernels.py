"""Kernel dispatch: numba-compiled or pure-numpy, chosen at import time."""

from . import accel

if accel.USING_NUMBA:
    from . import _kernels_numba as _impl
else:  # pragma: no cover - exercised via the env flag in tests
    from . import _kernels_numpy as _impl

USING_NUMBA = accel.USING_NUMBA

AGG_MAX = _impl.AGG_MAX
AGG_AVERAGE = _impl.AGG_AVERAGE
AGG_WEIGHTED = _impl.AGG_WEIGHTED
INTER_IDENTITY = _impl.INTER_IDENTITY
INTER_ABS = _impl.INTER_ABS
INTER_SQUARE = _impl.INTER_SQUARE

quadratic_loss = _impl.quadratic_loss
bce_loss = _impl.bce_loss
feature_aggregate = _impl.feature_aggregate
synthetic_outputs = _impl.synthetic_outputs
markov_walk = _impl.markov_walk
