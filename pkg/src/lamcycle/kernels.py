"""Backend selection for the hot kernels.

The compiled extension is preferred when importable; the pure numpy/Python
module is the fallback. LAMCYCLE_BACKEND=python|cython forces a choice, which
the benchmark and the backend-equivalence tests rely on.
"""
from __future__ import annotations

import os
from types import ModuleType

from . import _pykernels

_selected: ModuleType | None = None


def _load(name: str) -> ModuleType:
    if name == "python":
        return _pykernels
    if name == "cython":
        from . import _cykernels

        return _cykernels
    raise ValueError(f"unknown kernel backend {name!r} (expected 'python' or 'cython')")


def get(name: str | None = None) -> ModuleType:
    """The active kernel module; pass a name to fetch a specific backend."""
    global _selected
    if name is not None:
        return _load(name)
    if _selected is None:
        forced = os.environ.get("LAMCYCLE_BACKEND")
        if forced:
            _selected = _load(forced)
        else:
            try:
                _selected = _load("cython")
            except ImportError:
                _selected = _pykernels
    return _selected


def backend_name() -> str:
    return get().BACKEND


def available_backends() -> list[str]:
    names = ["python"]
    try:
        _load("cython")
        names.append("cython")
    except ImportError:
        pass
    return names
