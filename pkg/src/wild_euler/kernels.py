"""Backend selection for the hot kernels.

The compiled extension is used when it was built; setting the environment
variable ``WILD_EULER_PURE_PYTHON=1`` forces the numpy fallback.
"""
import os

from . import _pykernels

if os.environ.get("WILD_EULER_PURE_PYTHON", "") not in ("", "0"):
    _impl = _pykernels
    BACKEND = "python"
else:
    try:
        from . import _ckernels as _impl
        BACKEND = "cython"
    except ImportError:
        _impl = _pykernels
        BACKEND = "python"

contract3 = _impl.contract3
energy_field = _impl.energy_field

__all__ = ["BACKEND", "contract3", "energy_field"]
