"""Backend selection for the hot per-record kernels.

The compiled Cython module is used when it imports; otherwise the numpy
fallback. Set ``DYNRESERVE_BACKEND=pure`` to force the fallback.
"""
import os
from contextlib import contextmanager

from . import _fallback

try:
    from . import _kernels as _compiled
except ImportError:  # extension not built
    _compiled = None

_BACKENDS = {"pure": _fallback}
if _compiled is not None:
    _BACKENDS["compiled"] = _compiled


def available():
    """Names of the importable backends, compiled first when present."""
    return sorted(_BACKENDS, key=lambda name: name != "compiled")


def _initial():
    wanted = os.environ.get("DYNRESERVE_BACKEND", "").strip().lower()
    if wanted:
        if wanted not in _BACKENDS:
            raise ImportError(f"requested backend {wanted!r} is not available")
        return wanted
    return available()[0]


_active = _initial()


def active():
    return _active


def get(name=None):
    """Kernel module for ``name`` (default: the active backend)."""
    name = name or _active
    try:
        return _BACKENDS[name]
    except KeyError:
        raise ValueError(f"unknown backend {name!r}; have {available()}") from None


def set_backend(name):
    """Switch the process-wide backend; returns the previous name."""
    global _active
    get(name)
    prev, _active = _active, name
    return prev


@contextmanager
def using(name):
    prev = set_backend(name)
    try:
        yield get(name)
    finally:
        set_backend(prev)
