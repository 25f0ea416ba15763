"""Kernel selection: compiled extension when importable, numpy fallback otherwise.

Set ``MMKGQA_PURE_PYTHON=1`` to force the fallback.
"""
from __future__ import annotations

import os

from . import _fallback

if os.environ.get("MMKGQA_PURE_PYTHON") == "1":
    _impl = _fallback
    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]

        BACKEND = "cython"
    except ImportError:
        _impl = _fallback
        BACKEND = "python"

lcs_length = _impl.lcs_length
cluster_distance_sums = _impl.cluster_distance_sums
linkage_extremes = _impl.linkage_extremes
assign_labels = _impl.assign_labels
greedy_select = _impl.greedy_select


def available_backends() -> dict:
    """Map backend name to kernel module for every backend that imports."""
    out = {"python": _fallback}
    try:
        from . import _kernels  # type: ignore[attr-defined]
    except ImportError:
        pass
    else:
        out["cython"] = _kernels
    return out
