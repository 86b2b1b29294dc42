"""Kernel backend selection.

The compiled extension is used when it imports; otherwise the numpy
implementation is used. Set ``AERODOCK_PURE_PYTHON=1`` to force the
fallback (the benchmark and the backend-parity tests do this).
"""
import os

from . import _kernels_py

if os.environ.get("AERODOCK_PURE_PYTHON") == "1":
    _impl = _kernels_py
else:
    try:
        from . import _kernels as _impl
    except ImportError:
        _impl = _kernels_py

BACKEND = _impl.BACKEND

so3_log = _impl.so3_log
so3_exp = _impl.so3_exp
relax_attitude = _impl.relax_attitude
vehicle_step = _impl.vehicle_step
thrust_attitude = _impl.thrust_attitude
downwash_mean = _impl.downwash_mean
pendulum_step = _impl.pendulum_step
mlp_forward = _impl.mlp_forward


def compiled_available():
    try:
        from . import _kernels  # noqa: F401
    except ImportError:
        return False
    return True
