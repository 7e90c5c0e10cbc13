"""Backend selection for the rational kernels.

Prefers the compiled extension, falls back to the pure-Python twin. Set
``EXACTRNN_PURE=1`` to force the fallback (used by the benchmark and by
tests that assert backend parity).
"""

import os

if os.environ.get("EXACTRNN_PURE"):
    from . import _ratcore_py as _impl
else:
    try:
        from . import _ratcore_c as _impl  # type: ignore[attr-defined]
    except ImportError:
        from . import _ratcore_py as _impl

BACKEND = _impl.BACKEND
rnorm = _impl.rnorm
radd = _impl.radd
rmul = _impl.rmul
vdot = _impl.vdot
vec_mat = _impl.vec_mat
mat_vec = _impl.mat_vec
mat_mul = _impl.mat_mul
sparse_affine = _impl.sparse_affine
