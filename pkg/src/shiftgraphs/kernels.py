"""Kernel selection.

The compiled extension is used when it imports; otherwise the numpy fallback.
Set ``SHIFTGRAPHS_PURE_PYTHON=1`` to force the fallback.
"""

import os

from . import _fallback

if os.environ.get("SHIFTGRAPHS_PURE_PYTHON", "") not in ("", "0"):
    _impl = _fallback
else:
    try:
        from . import _kernels as _impl
    except ImportError:  # extension not built
        _impl = _fallback

BACKEND = _impl.BACKEND
all_permutations = _impl.all_permutations
window_patterns = _impl.window_patterns
dag_heights = _impl.dag_heights
dicut_max = _impl.dicut_max

lehmer_index = _fallback.lehmer_index


def backends() -> dict:
    """Every importable backend, keyed by name (used by tests and the benchmark)."""
    out = {"python": _fallback}
    try:
        from . import _kernels
    except ImportError:
        pass
    else:
        out["cython"] = _kernels
    return out
