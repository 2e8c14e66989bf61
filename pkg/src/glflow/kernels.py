"""Hot-kernel backend selection.

The compiled extension (built from ``_kernels.pyx``) is preferred; when it is
absent the numpy implementation is used. Both expose the same functions with
identical semantics; ``glflow bench`` compares their throughput and the test
suite checks their agreement.
"""

from __future__ import annotations

from . import _kernels_np

try:
    from . import _kernels as _compiled
except ImportError:
    _compiled = None

_impl = _compiled if _compiled is not None else _kernels_np

BACKEND = "compiled" if _compiled is not None else "numpy"

POT_ARRAY = _kernels_np.POT_ARRAY
POT_POLY = _kernels_np.POT_POLY
POT_QWELL = _kernels_np.POT_QWELL

force = _impl.force
energy_parts = _impl.energy_parts
imex_apply = _impl.imex_apply
heun = _impl.heun


def available_backends() -> list[str]:
    return ["numpy"] + (["compiled"] if _compiled is not None else [])


def get_backend(name: str):
    """Return the kernel module for an explicit backend choice."""
    if name == "numpy":
        return _kernels_np
    if name == "compiled":
        if _compiled is None:
            raise RuntimeError("compiled kernel extension is not built")
        return _compiled
    raise ValueError(f"unknown backend {name!r}")
