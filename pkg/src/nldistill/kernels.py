"""Kernel backend selection.

The compiled extension is used when it imports; otherwise, or when
``NLDISTILL_PURE_PYTHON`` is set to a non-empty value other than ``0``,
the numpy fallback is used. ``BACKEND`` names the active choice.
"""

import os

from . import _fallback

_force_pure = os.environ.get("NLDISTILL_PURE_PYTHON", "") not in ("", "0")

if _force_pure:
    _impl = _fallback
    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl
    except ImportError:
        _impl = _fallback
        BACKEND = "python"
    else:
        BACKEND = "cython"

grid_scan = _impl.grid_scan
batch_chsh = _impl.batch_chsh

__all__ = ["BACKEND", "grid_scan", "batch_chsh"]
