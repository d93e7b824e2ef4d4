"""Kernel backend selection.

The compiled extension is preferred; set ``NCGEOM_PURE_PYTHON=1`` to force
the numpy fallback.
"""

import os

from . import _kernels_py
from ._kernels_py import canonicalize, pair_exponents

BACKEND = "python"
twisted_mul = _kernels_py.twisted_mul

if os.environ.get("NCGEOM_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _compiled
    except ImportError:
        pass
    else:
        twisted_mul = _compiled.twisted_mul
        BACKEND = "cython"

__all__ = ["BACKEND", "canonicalize", "pair_exponents", "twisted_mul"]
