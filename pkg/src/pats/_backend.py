"""Kernel backend selection.

The hot loops (watershed flooding, greedy region merging, tree passes) exist
twice: a compiled Cython extension and a pure-Python/numpy fallback with
identical semantics. The compiled one is picked when importable; set
PATS_PURE=1 to force the fallback (used by the backend-equivalence tests and
the benchmark).
"""

import os

if os.environ.get("PATS_PURE"):
    from . import _kernels_py as kernels

    BACKEND = "pure"
else:
    try:
        from . import _kernels as kernels  # type: ignore[attr-defined]

        BACKEND = "compiled"
    except ImportError:
        from . import _kernels_py as kernels

        BACKEND = "pure"


def get_kernels(backend: str | None = None):
    """Return the kernel module for an explicit backend name, or the default."""
    if backend is None:
        return kernels
    if backend == "pure":
        from . import _kernels_py

        return _kernels_py
    if backend == "compiled":
        from . import _kernels  # raises ImportError if not built

        return _kernels
    raise ValueError(f"unknown backend {backend!r}")
