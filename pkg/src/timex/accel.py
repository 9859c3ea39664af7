"""Selection of the accelerated kernel path.

The hot numeric kernels (chain walks, window aggregation, loss vectors) are
compiled with numba when it is importable and neither ``TIMEX_DISABLE_NUMBA``
nor ``NUMBA_DISABLE_JIT`` is set in the environment; otherwise vectorized
pure-numpy implementations are used.  The two paths agree to floating-point
roundoff (see ``benchmarks/bench_kernels.py`` for a timing comparison), and
each path is individually deterministic.
"""

import os

_TRUTHY = ("1", "true", "yes", "on")


def env_disabled() -> bool:
    """True when an environment flag requests the pure-numpy path."""
    for var in ("TIMEX_DISABLE_NUMBA", "NUMBA_DISABLE_JIT"):
        if os.environ.get(var, "").strip().lower() in _TRUTHY:
            return True
    return False


try:
    import numba  # noqa: F401

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAS_NUMBA = False

USING_NUMBA = HAS_NUMBA and not env_disabled()
