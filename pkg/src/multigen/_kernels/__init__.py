"""Geometry kernel backends.

The compiled Cython kernels are used when the extension built; otherwise the
pure-Python fallback takes over. Set ``MULTIGEN_KERNELS=pure`` to force the
fallback (used by the benchmark and the cross-backend determinism tests).
Both backends are bit-identical, so the choice never affects replay hashes.
"""

import os

from . import _pure as pure

try:
    from . import _core as compiled
except ImportError:
    compiled = None

_forced = os.environ.get("MULTIGEN_KERNELS", "auto")
if _forced == "pure" or compiled is None:
    active = pure
elif _forced in ("auto", "compiled"):
    active = compiled
else:
    raise RuntimeError(f"MULTIGEN_KERNELS must be auto, pure or compiled, got {_forced!r}")


def backend_name() -> str:
    return active.BACKEND


def use(name: str) -> None:
    """Switch the active backend at runtime (tests and benchmarks only)."""
    global active
    if name == "pure":
        active = pure
    elif name == "compiled":
        if compiled is None:
            raise RuntimeError("compiled kernels are not available")
        active = compiled
    else:
        raise ValueError(f"unknown kernel backend {name!r}")
