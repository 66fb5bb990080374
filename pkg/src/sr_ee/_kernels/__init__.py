"""Kernel backend selection: compiled Cython extension if available.

Set SR_EE_FORCE_FALLBACK=1 to pin the pure NumPy implementation (used by the
equivalence tests and the backend benchmark).
"""

import os

from . import _fallback

try:
    from . import _ext
except ImportError:
    _ext = None

if _ext is not None and os.environ.get("SR_EE_FORCE_FALLBACK") != "1":
    _impl = _ext
    BACKEND = "compiled"
else:
    _impl = _fallback
    BACKEND = "fallback"

rate_logsum = _impl.rate_logsum
barrier_fgh = _impl.barrier_fgh


def implementations():
    """Mapping of available backend name -> module (for tests/benchmarks)."""
    out = {"fallback": _fallback}
    if _ext is not None:
        out["compiled"] = _ext
    return out
