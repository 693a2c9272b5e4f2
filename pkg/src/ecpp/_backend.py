"""Kernel selection: compiled extension when importable, numpy fallback otherwise."""
import os

from . import _kernels_py

if os.environ.get("ECPP_PURE_PYTHON") == "1":
    _impl = _kernels_py
    NAME = "python"
else:
    try:
        from . import _kernels as _impl
        NAME = "cython"
    except ImportError:
        _impl = _kernels_py
        NAME = "python"

dilate_runs = _impl.dilate_runs
erode_runs = _impl.erode_runs
footprint_penetration = _impl.footprint_penetration
swept_refine = _impl.swept_refine

__all__ = ["NAME", "dilate_runs", "erode_runs", "footprint_penetration", "swept_refine"]
