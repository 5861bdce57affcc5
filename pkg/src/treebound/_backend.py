"""Select the kernel backend at import time.

The compiled extension is used when it imports cleanly; setting
``TREEBOUND_PURE_PYTHON=1`` forces the pure-Python kernels.
"""
import os

from . import _pykernels

if os.environ.get("TREEBOUND_PURE_PYTHON") == "1":
    kernels = _pykernels
    BACKEND = "python"
else:
    try:
        from . import _ckernels as kernels
        BACKEND = "cython"
    except ImportError:
        kernels = _pykernels
        BACKEND = "python"

__all__ = ["kernels", "BACKEND"]
