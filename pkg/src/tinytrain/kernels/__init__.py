"""Hot numeric kernels with a numba fast path and a pure-numpy fallback.

Backend selection, checked once at import:

  TINYTRAIN_KERNELS=numba   use the @njit kernels (default when numba imports)
  TINYTRAIN_KERNELS=numpy   force the pure-numpy implementations

If numba is unavailable the numpy path is used silently. The two backends
agree to float64 rounding (see tests) but are not bit-identical to each
other; each backend on its own is bit-reproducible across runs.

``benchmarks/bench_kernels.py`` times one against the other.
"""

import os

from . import reference

BACKEND = os.environ.get("TINYTRAIN_KERNELS", "").strip().lower()
if BACKEND not in ("", "numba", "numpy"):
    raise ValueError(
        f"TINYTRAIN_KERNELS must be 'numba' or 'numpy', got {BACKEND!r}"
    )

if BACKEND != "numpy":
    try:
        from . import jit as _impl

        BACKEND = "numba"
    except ImportError:
        if BACKEND == "numba":
            raise
        _impl = reference
        BACKEND = "numpy"
else:
    _impl = reference

conv2d_forward = _impl.conv2d_forward
conv2d_backward_weights = _impl.conv2d_backward_weights
conv2d_backward_input = _impl.conv2d_backward_input
maxpool2_forward = _impl.maxpool2_forward
maxpool2_backward = _impl.maxpool2_backward
