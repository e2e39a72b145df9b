"""Select the compiled auction kernel when available.

Set ``CARPOOL_PURE_PYTHON=1`` to force the fallback.  Inputs whose
magnitude could overflow 64-bit arithmetic always use the fallback.
"""
from __future__ import annotations

import os

from . import _kc_py

try:
    if os.environ.get("CARPOOL_PURE_PYTHON"):
        raise ImportError("pure-Python kernel requested")
    from . import _kc as _compiled
except ImportError:
    _compiled = None

HAVE_COMPILED = _compiled is not None
BACKEND = "cython" if HAVE_COMPILED else "python"

# values, utilities and prefix sums stay far below this
_SAFE_LIMIT = 1 << 56


def _fits_int64(eta, theta, eps, max_iter) -> bool:
    n = len(eta[0]) if eta else 0
    peak = max((abs(v) for row in eta for v in row), default=0)
    peak = max(peak, max((abs(v) for row in theta for v in row), default=0))
    # utilities never exceed eps * max_iter; prefix sums add at most n terms
    return (peak + eps * max_iter + eps) * (n + 2) < _SAFE_LIMIT


def run_auction(eta, theta, eps, max_iter, backend: str | None = None):
    """Dispatch to the compiled or pure kernel; see ``_kc_py.run_auction``."""
    choice = backend or BACKEND
    if choice == "cython":
        if _compiled is None:
            raise RuntimeError("compiled kernel is not available")
        if _fits_int64(eta, theta, eps, max_iter):
            return _compiled.run_auction(eta, theta, eps, max_iter)
    return _kc_py.run_auction(eta, theta, eps, max_iter)
