"""Kernel backend selection.

The compiled extension is preferred when importable; otherwise the numpy
fallback is used.  ``MONODEG_BACKEND=python`` or ``=compiled`` forces a
choice (forcing ``compiled`` raises if the extension is missing).
"""

from __future__ import annotations

import os

from . import _kernels_py

_forced = os.environ.get("MONODEG_BACKEND", "").strip().lower()

if _forced == "python":
    kernels = _kernels_py
elif _forced == "compiled":
    from . import _kernels as kernels  # type: ignore[no-redef]
else:
    try:
        from . import _kernels as kernels  # type: ignore[no-redef]
    except ImportError:
        kernels = _kernels_py


def backend_name() -> str:
    """Name of the active backend, ``"compiled"`` or ``"python"``."""
    return "compiled" if kernels.COMPILED else "python"


def available_backends() -> list[str]:
    names = ["python"]
    try:
        from . import _kernels  # noqa: F401
        names.insert(0, "compiled")
    except ImportError:
        pass
    return names


def get_kernels(name: str | None = None):
    """Return a kernel module by name (``None`` gives the active one)."""
    if name is None:
        return kernels
    if name == "python":
        return _kernels_py
    if name == "compiled":
        from . import _kernels
        return _kernels
    raise ValueError(f"unknown backend {name!r}")
