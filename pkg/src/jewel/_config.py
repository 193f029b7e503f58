"""Environment-driven settings.

``JEWEL_DISABLE_NUMBA=1`` forces the pure-numpy kernels even when numba is
importable.  ``JEWEL_SOLVER_TOL`` overrides the default SDP tolerances.
"""

import os

DEFAULT_SOLVER_TOL = 1e-8


def _truthy(value):
    return value.strip().lower() in ("1", "true", "yes", "on")


def numba_requested():
    return not _truthy(os.environ.get("JEWEL_DISABLE_NUMBA", ""))


def solver_tol():
    raw = os.environ.get("JEWEL_SOLVER_TOL")
    if not raw:
        return DEFAULT_SOLVER_TOL
    try:
        value = float(raw)
    except ValueError:
        raise ValueError(f"JEWEL_SOLVER_TOL must be a float, got {raw!r}") from None
    if not value > 0:
        raise ValueError(f"JEWEL_SOLVER_TOL must be positive, got {raw!r}")
    return value
