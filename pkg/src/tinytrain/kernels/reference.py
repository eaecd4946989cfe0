"""Pure-numpy kernel implementations.

Convolutions are lowered to matrix products over sliding windows (im2col) so
the heavy lifting lands in BLAS; pooling uses reshape tricks. All operations
are deterministic for fixed inputs: window extraction is a view, contraction
order is fixed by the reshaped matmul, and no threading decisions leak into
accumulation order.

Shapes follow the layer convention: x is (N, C, H, W), kernels are
(F, C, kh, kw), pool windows are 2x2 with stride 2.
"""

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view


def conv2d_forward(x, w, b):
    n, c, h, wd = x.shape
    f, _, kh, kw = w.shape
    oh, ow = h - kh + 1, wd - kw + 1
    # windows: (N, C, OH, OW, kh, kw) view, no copy
    win = sliding_window_view(x, (kh, kw), axis=(2, 3))
    cols = win.transpose(0, 2, 3, 1, 4, 5).reshape(n * oh * ow, c * kh * kw)
    out = cols @ w.reshape(f, c * kh * kw).T
    out = out.reshape(n, oh, ow, f).transpose(0, 3, 1, 2)
    return np.ascontiguousarray(out) + b.reshape(1, f, 1, 1)


def conv2d_backward_weights(x, grad_out):
    n, c, h, wd = x.shape
    _, f, oh, ow = grad_out.shape
    kh, kw = h - oh + 1, wd - ow + 1
    win = sliding_window_view(x, (kh, kw), axis=(2, 3))
    cols = win.transpose(0, 2, 3, 1, 4, 5).reshape(n * oh * ow, c * kh * kw)
    gflat = grad_out.transpose(0, 2, 3, 1).reshape(n * oh * ow, f)
    return np.ascontiguousarray((gflat.T @ cols).reshape(f, c, kh, kw))


def conv2d_backward_input(grad_out, w):
    n, f, oh, ow = grad_out.shape
    _, c, kh, kw = w.shape
    # full correlation of grad_out with the 180-degree-rotated kernels
    padded = np.zeros((n, f, oh + 2 * (kh - 1), ow + 2 * (kw - 1)))
    padded[:, :, kh - 1 : kh - 1 + oh, kw - 1 : kw - 1 + ow] = grad_out
    win = sliding_window_view(padded, (kh, kw), axis=(2, 3))
    h, wd = oh + kh - 1, ow + kw - 1
    cols = win.transpose(0, 2, 3, 1, 4, 5).reshape(n * h * wd, f * kh * kw)
    wrot = w[:, :, ::-1, ::-1].transpose(0, 2, 3, 1).reshape(f * kh * kw, c)
    out = cols @ wrot
    return np.ascontiguousarray(out.reshape(n, h, wd, c).transpose(0, 3, 1, 2))


def maxpool2_forward(x):
    n, c, h, w = x.shape
    oh, ow = h // 2, w // 2
    # windows in row-major order within each 2x2 block: (0,0),(0,1),(1,0),(1,1)
    win = (
        x.reshape(n, c, oh, 2, ow, 2)
        .transpose(0, 1, 2, 4, 3, 5)
        .reshape(n, c, oh, ow, 4)
    )
    idx = win.argmax(axis=-1)  # first max wins on ties
    out = np.take_along_axis(win, idx[..., None], axis=-1)[..., 0]
    return np.ascontiguousarray(out), np.ascontiguousarray(idx)


def maxpool2_backward(grad_out, idx, h, w):
    n, c, oh, ow = grad_out.shape
    win = np.zeros((n, c, oh, ow, 4))
    np.put_along_axis(win, idx[..., None], grad_out[..., None], axis=-1)
    return np.ascontiguousarray(
        win.reshape(n, c, oh, ow, 2, 2).transpose(0, 1, 2, 4, 3, 5).reshape(n, c, h, w)
    )
