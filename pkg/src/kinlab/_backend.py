"""Kernel backend selection.

The compiled ``_kernels`` extension is used when it imports; setting
``KINLAB_BACKEND=python`` forces the numpy fallback.
"""
import os

from . import _kernels_py as python_kernels

compiled_kernels = None
if os.environ.get("KINLAB_BACKEND", "").lower() != "python":
    try:
        from . import _kernels as compiled_kernels
    except ImportError:
        compiled_kernels = None

kernels = compiled_kernels if compiled_kernels is not None else python_kernels
BACKEND = "cython" if compiled_kernels is not None else "python"
