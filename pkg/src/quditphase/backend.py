"""Kernel backend selection.

The compiled extension ``_ckernels`` is preferred when importable; the
numpy module ``_kernels_py`` is the fallback.  ``QUDITPHASE_KERNELS`` can
force a choice (``c`` or ``python``).  Call sites must go through
``backend.kernels`` attribute lookup so that :func:`use` can switch
backends at run time (used by the equivalence tests and the benchmark).
"""

import os

from . import _kernels_py

try:
    from . import _ckernels
except ImportError:
    _ckernels = None

_ALIASES = {
    "c": "c",
    "cython": "c",
    "compiled": "c",
    "py": "python",
    "python": "python",
    "numpy": "python",
}


def available_backends():
    """Mapping of backend name -> kernel module for this installation."""
    out = {"python": _kernels_py}
    if _ckernels is not None:
        out["c"] = _ckernels
    return out


def use(name):
    """Switch the active kernel backend; returns the previous name."""
    global kernels, BACKEND
    key = _ALIASES.get(name.strip().lower())
    if key is None:
        raise ValueError(f"unknown backend {name!r}")
    mods = available_backends()
    if key not in mods:
        raise ImportError(f"backend {key!r} is not available (extension not built)")
    previous = BACKEND
    kernels = mods[key]
    BACKEND = key
    return previous


_requested = os.environ.get("QUDITPHASE_KERNELS", "").strip().lower()
if _requested in ("", "auto"):
    kernels = _ckernels if _ckernels is not None else _kernels_py
elif _requested in _ALIASES:
    kernels = _kernels_py
    BACKEND = "python"
    use(_requested)
else:
    raise ValueError(f"unrecognized QUDITPHASE_KERNELS value {_requested!r}")

BACKEND = "c" if kernels is _ckernels else "python"
