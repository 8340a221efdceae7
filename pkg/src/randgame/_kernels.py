"""Kernel backend selection.

The compiled ``_core`` extension is used when it imports; otherwise the
pure-Python ``_pycore`` module. Set ``RANDGAME_PURE_PYTHON=1`` to force the
fallback.
"""
from __future__ import annotations

import os
from types import ModuleType

from . import _pycore

_compiled: ModuleType | None
try:
    from . import _core as _compiled
except ImportError:
    _compiled = None

if _compiled is not None and not os.environ.get("RANDGAME_PURE_PYTHON"):
    impl: ModuleType = _compiled
    BACKEND = "cython"
else:
    impl = _pycore
    BACKEND = "python"


def available_backends() -> dict[str, ModuleType]:
    out = {"python": _pycore}
    if _compiled is not None:
        out["cython"] = _compiled
    return out
