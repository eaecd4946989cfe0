"""Dense-array operations every other module builds on.

Tensors are plain float64 numpy arrays; this module pins the dtype policy,
adds the shape checking the layers rely on, and routes the convolution and
pooling hot loops through the selected kernel backend (see
``tinytrain.kernels``). Everything here is deterministic: fixed accumulation
order for fixed inputs.

Spatial operations accept either a single sample (C, H, W) or a batch
(N, C, H, W) and return the matching rank.
"""

import numpy as np

from . import kernels
from .errors import ShapeError


def as_tensor(values):
    """Coerce to a float64 array (copying only if needed)."""
    return np.asarray(values, dtype=np.float64)


def matmul(a, b):
    """Matrix product of two rank-2 tensors."""
    a, b = as_tensor(a), as_tensor(b)
    if a.ndim != 2 or b.ndim != 2:
        raise ShapeError(f"matmul needs rank-2 operands, got {a.shape} and {b.shape}")
    if a.shape[1] != b.shape[0]:
        raise ShapeError(f"matmul inner dimensions disagree: {a.shape} x {b.shape}")
    return a @ b


def transpose(a):
    a = as_tensor(a)
    if a.ndim != 2:
        raise ShapeError(f"transpose needs a rank-2 tensor, got rank {a.ndim}")
    return a.T


def add(a, b):
    return as_tensor(a) + as_tensor(b)


def subtract(a, b):
    return as_tensor(a) - as_tensor(b)


def multiply(a, b):
    """Elementwise (Hadamard) product."""
    return as_tensor(a) * as_tensor(b)


def scale(a, s):
    return as_tensor(a) * float(s)


def reshape(a, shape):
    """Row-major reshape; total size must be preserved."""
    a = as_tensor(a)
    try:
        return a.reshape(shape)
    except ValueError:
        raise ShapeError(f"cannot reshape {a.shape} to {shape}") from None


def _batched(x, name):
    x = as_tensor(x)
    if x.ndim == 3:
        return x[None], True
    if x.ndim == 4:
        return x, False
    raise ShapeError(f"{name} needs a (C,H,W) or (N,C,H,W) tensor, got {x.shape}")


def conv2d_forward(x, w, b):
    """Valid-padding, stride-1 cross-correlation.

    x: (C,H,W) or (N,C,H,W); w: (F,C,kh,kw); b: (F,).
    Output spatial size is (H-kh+1, W-kw+1).
    """
    x, squeeze = _batched(x, "conv2d_forward")
    w, b = as_tensor(w), as_tensor(b)
    if w.ndim != 4:
        raise ShapeError(f"kernels must be (F,C,kh,kw), got {w.shape}")
    f, c, kh, kw = w.shape
    if b.shape != (f,):
        raise ShapeError(f"bias must be ({f},), got {b.shape}")
    if x.shape[1] != c:
        raise ShapeError(f"channel mismatch: input {x.shape} vs kernels {w.shape}")
    if kh > x.shape[2] or kw > x.shape[3]:
        raise ShapeError(f"kernel {w.shape} larger than input {x.shape}")
    out = kernels.conv2d_forward(
        np.ascontiguousarray(x), np.ascontiguousarray(w), np.ascontiguousarray(b)
    )
    return out[0] if squeeze else out


def conv2d_backward_weights(x, grad_out):
    """Kernel gradients: correlate each input channel with grad_out.

    grad_out is shaped like the forward output; result is (F, C, kh, kw),
    summed over the batch.
    """
    x, squeeze = _batched(x, "conv2d_backward_weights")
    g, gsq = _batched(grad_out, "conv2d_backward_weights")
    if squeeze != gsq or g.shape[0] != x.shape[0]:
        raise ShapeError(
            f"grad_out batch {grad_out.shape} does not match input {x.shape}"
        )
    return kernels.conv2d_backward_weights(
        np.ascontiguousarray(x), np.ascontiguousarray(g)
    )


def conv2d_backward_input(grad_out, w):
    """Input gradients: full correlation of grad_out with rotated kernels."""
    g, squeeze = _batched(grad_out, "conv2d_backward_input")
    w = as_tensor(w)
    if w.ndim != 4 or w.shape[0] != g.shape[1]:
        raise ShapeError(f"kernels {w.shape} do not match grad_out {grad_out.shape}")
    gx = kernels.conv2d_backward_input(
        np.ascontiguousarray(g), np.ascontiguousarray(w)
    )
    return gx[0] if squeeze else gx


def maxpool2d(x):
    """2x2 max pooling, stride 2.

    Returns (pooled, indices) where indices[..., i, j] in {0,1,2,3} is the
    row-major position of the winning element inside its 2x2 window (ties go
    to the first position scanned). H and W must be even.
    """
    x, squeeze = _batched(x, "maxpool2d")
    if x.shape[2] % 2 or x.shape[3] % 2:
        raise ShapeError(
            f"maxpool2d needs even spatial dims, got {x.shape[2]}x{x.shape[3]}"
        )
    out, idx = kernels.maxpool2_forward(np.ascontiguousarray(x))
    if squeeze:
        return out[0], idx[0]
    return out, idx


def maxpool2d_backward(grad_out, idx, height, width):
    """Route pooled-output gradients back to the argmax positions."""
    g, squeeze = _batched(grad_out, "maxpool2d_backward")
    idx = np.asarray(idx)
    if idx.ndim == 3:
        idx = idx[None]
    if idx.shape != g.shape:
        raise ShapeError(f"indices {idx.shape} do not match grad_out {g.shape}")
    gx = kernels.maxpool2_backward(
        np.ascontiguousarray(g), np.ascontiguousarray(idx), height, width
    )
    return gx[0] if squeeze else gx
