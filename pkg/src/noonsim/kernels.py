"""Selects the compiled integrator when available.

Set ``NOONSIM_PURE_PYTHON=1`` to force the pure-Python fallback.
"""

from __future__ import annotations

import os

from . import _dopri_py

BACKEND = "python"
advance = _dopri_py.advance

if os.environ.get("NOONSIM_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _dopri_ext
    except ImportError:  # extension not built
        pass
    else:
        advance = _dopri_ext.advance
        BACKEND = "cython"


def get_advance(backend: str | None = None):
    """Return the ``advance`` kernel for ``backend`` ("cython", "python" or default)."""
    if backend is None:
        return advance
    if backend == "python":
        return _dopri_py.advance
    if backend == "cython":
        from . import _dopri_ext

        return _dopri_ext.advance
    raise ValueError(f"unknown backend {backend!r}")


def available_backends() -> list[str]:
    out = ["python"]
    try:
        from . import _dopri_ext  # noqa: F401
    except ImportError:
        return out
    return ["cython"] + out
