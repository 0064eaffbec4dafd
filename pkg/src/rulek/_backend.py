"""Kernel backend selection.

The compiled extension is used when it imports; setting RULEK_PURE=1 forces
the pure-Python kernels.
"""
import os

from rulek import _pykernels

if os.environ.get("RULEK_PURE", "") not in ("", "0"):
    kernels = _pykernels
else:
    try:
        from rulek import _ckernels as kernels
    except ImportError:  # extension not built
        kernels = _pykernels

name = "cython" if kernels is not _pykernels else "python"


def use(backend: str) -> None:
    """Switch backend at runtime ("cython" or "python")."""
    global kernels, name
    if backend == "python":
        kernels, name = _pykernels, "python"
    elif backend == "cython":
        from rulek import _ckernels

        kernels, name = _ckernels, "cython"
    else:
        raise ValueError(f"backend: unknown backend {backend!r}")
