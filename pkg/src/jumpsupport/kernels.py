"""Backend selection for the hot loops.

The compiled extension is used when it imports; setting
``JUMPSUPPORT_PURE_PYTHON=1`` forces the reference implementation.
"""
import os

import numpy as np

from . import _pykernels

BACKEND = "python"
_impl = _pykernels
if os.environ.get("JUMPSUPPORT_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernels as _impl  # noqa: F811
        BACKEND = "cython"
    except ImportError:
        _impl = _pykernels


def _f64(a):
    return np.ascontiguousarray(a, dtype=np.float64)


def euler_affine(times, x0, G, h, S0, S1, r0, r1, e, dZ, dR, jump_at, jump_u, jump_upow, cap, impl=None):
    impl = impl or _impl
    return impl.euler_affine(
        _f64(times), _f64(x0), _f64(G), _f64(h), _f64(S0), _f64(S1), float(r0), _f64(r1), _f64(e),
        _f64(dZ), _f64(dR), np.ascontiguousarray(jump_at, dtype=np.int_), _f64(jump_u), _f64(jump_upow),
        float(cap),
    )


def rk4_affine(x0, G, h, dt, n, impl=None):
    impl = impl or _impl
    return impl.rk4_affine(_f64(x0), _f64(G), _f64(h), float(dt), int(n))
