"""Kernel backend selection.

The compiled extension ``starval._ckernels`` is used when it imports;
otherwise the numpy versions in ``starval._pykernels`` are used. Setting
``STARVAL_PURE_PYTHON=1`` forces the fallback.
"""

import os

from . import _pykernels

if os.environ.get("STARVAL_PURE_PYTHON", "") not in ("", "0"):
    _backend = _pykernels
    BACKEND = "python"
else:
    try:
        from . import _ckernels as _backend

        BACKEND = "cython"
    except ImportError:
        _backend = _pykernels
        BACKEND = "python"

ladder_argmax = _backend.ladder_argmax
running_max_pl = _backend.running_max_pl
min_chordal_distance = _backend.min_chordal_distance

__all__ = ["BACKEND", "ladder_argmax", "running_max_pl", "min_chordal_distance"]
