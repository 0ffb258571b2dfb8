"""Kernel backend selection.

The compiled extension is preferred when importable; the numpy backend is
the fallback. ``PRAGCOMM_BACKEND=python`` or ``=compiled`` forces a choice
at import time, and :func:`use` swaps backends at runtime (used by the
benchmark to compare both in one process).
"""

import os

from . import ops_numpy

_COMPILED = None
try:
    from . import _fastops as _COMPILED  # type: ignore[no-redef]
except ImportError:
    _COMPILED = None

active = ops_numpy
active_name = "python"


def _choose(name):
    global active, active_name
    if name == "compiled":
        if _COMPILED is None:
            raise RuntimeError("compiled kernel backend is not built")
        active, active_name = _COMPILED, "compiled"
    elif name == "python":
        active, active_name = ops_numpy, "python"
    else:
        raise ValueError(f"unknown backend {name!r}")


def use(name):
    """Force a backend ('python' or 'compiled'). Returns the active name."""
    _choose(name)
    return active_name


def name():
    return active_name


def available():
    return ("python", "compiled") if _COMPILED is not None else ("python",)


_env = os.environ.get("PRAGCOMM_BACKEND", "").strip().lower()
if _env in ("python", "compiled"):
    _choose(_env)
elif _COMPILED is not None:
    _choose("compiled")
