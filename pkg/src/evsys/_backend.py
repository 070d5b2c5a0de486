"""Kernel backend selection.

The compiled extension is used when it imports; otherwise the numpy
fallback.  Setting ``EVSYS_PURE_PYTHON=1`` forces the fallback.
"""
import os

from . import _kernels_py

python_kernels = _kernels_py

try:
    from . import _kernels as compiled_kernels
except ImportError:  # extension not built
    compiled_kernels = None

if compiled_kernels is not None and os.environ.get("EVSYS_PURE_PYTHON", "") in ("", "0"):
    kernels = compiled_kernels
else:
    kernels = python_kernels

BACKEND = kernels.NAME
