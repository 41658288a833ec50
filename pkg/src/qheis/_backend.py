"""Kernel backend selection.

The compiled extension is used when it imports; ``QHEIS_BACKEND=python``
forces the numpy fallback.  ``QHEIS_THREADS`` caps the OpenMP thread count
of the compiled loops (0 or unset: all cores).  Every output entry is
reduced by a single thread, so results do not depend on the count.
"""
from __future__ import annotations

import os

from . import _pykernels

python_kernels = _pykernels
compiled_kernels = None
if os.environ.get("QHEIS_BACKEND", "").lower() != "python":
    try:
        from . import _ckernels as compiled_kernels
    except ImportError:
        compiled_kernels = None

kernels = compiled_kernels if compiled_kernels is not None else python_kernels
BACKEND = "compiled" if compiled_kernels is not None else "python"


def threads() -> int:
    try:
        k = int(os.environ.get("QHEIS_THREADS", "0"))
    except ValueError:
        k = 0
    return k if k > 0 else (os.cpu_count() or 1)
