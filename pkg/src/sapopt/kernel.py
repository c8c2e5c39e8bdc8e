"""Backend selection for the split-operator hot loop.

The compiled kernel is preferred when importable; ``SAPOPT_KERNEL`` forces
a choice (``cython`` | ``python``).  Both backends implement the identical
stepping contract and agree to ~1e-12 (they use different FFTs, so results
are not bit-identical across backends; runs record which one they used).
"""
import os

from . import _kernel_py
from .errors import ConfigError

try:
    from . import _kernel_cy
except ImportError:
    _kernel_cy = None

_BACKENDS = {"python": _kernel_py}
if _kernel_cy is not None:
    _BACKENDS["cython"] = _kernel_cy


def available_backends():
    return sorted(_BACKENDS)


def get_backend(name=None):
    """Resolve a stepping backend by name, env var, or best available."""
    if name in (None, "", "auto"):
        name = os.environ.get("SAPOPT_KERNEL", "").strip() or None
    if name in (None, "auto"):
        name = "cython" if "cython" in _BACKENDS else "python"
    try:
        return _BACKENDS[name]
    except KeyError:
        raise ConfigError(
            f"unknown kernel backend {name!r}; available: "
            f"{available_backends()}") from None
