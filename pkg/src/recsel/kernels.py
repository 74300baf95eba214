"""Backend selection for the hot inner loops.

The compiled extension is used when it imported successfully; otherwise
the numpy fallback takes over.  ``RECSEL_BACKEND=python`` forces the
fallback (handy for debugging and for the kernel benchmark).
"""

from __future__ import annotations

import os

from . import _kernels_py

try:
    from . import _kernels  # type: ignore[attr-defined]
except ImportError:  # pragma: no cover - depends on the build
    _kernels = None

_BACKENDS = {"python": _kernels_py}
if _kernels is not None:
    _BACKENDS["compiled"] = _kernels

_default = "compiled" if _kernels is not None else "python"
if os.environ.get("RECSEL_BACKEND") in _BACKENDS:
    _default = os.environ["RECSEL_BACKEND"]
_active = _BACKENDS[_default]


def available_backends() -> tuple[str, ...]:
    return tuple(sorted(_BACKENDS))


def backend_name() -> str:
    return "compiled" if _active is _kernels else "python"


def use_backend(name: str) -> None:
    """Switch the active backend ("compiled", "python" or "auto")."""
    global _active
    if name == "auto":
        name = "compiled" if _kernels is not None else "python"
    if name not in _BACKENDS:
        raise ValueError(f"unknown backend {name!r}; available: {available_backends()}")
    _active = _BACKENDS[name]


def sgns_epoch(E, C, graphs, tokens, negatives, rates) -> float:
    return _active.sgns_epoch(E, C, graphs, tokens, negatives, rates)


def mf_epoch(user_bias, item_bias, P, Q, users, items, values, mu, lr, reg) -> float:
    return _active.mf_epoch(user_bias, item_bias, P, Q, users, items, values, mu, lr, reg)
