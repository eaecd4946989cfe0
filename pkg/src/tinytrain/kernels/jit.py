"""Numba-compiled kernel implementations.

Explicit loops in a fixed order (no fastmath, no parallel reduction), so
results are bit-reproducible across runs. The innermost loop always runs
along the contiguous width axis: for the forward and input-gradient kernels
each inner iteration writes a distinct element, which LLVM vectorizes
without reassociating any sum. cache=True persists compiled machine code
next to the source, keeping repeat imports cheap.

Same shape conventions as kernels.reference.
"""

import numpy as np
from numba import njit


@njit(cache=True)
def conv2d_forward(x, w, b):
    n, c, h, wd = x.shape
    f, _, kh, kw = w.shape
    oh, ow = h - kh + 1, wd - kw + 1
    out = np.empty((n, f, oh, ow))
    for ni in range(n):
        for fi in range(f):
            for i in range(oh):
                for j in range(ow):
                    out[ni, fi, i, j] = b[fi]
            for ci in range(c):
                for u in range(kh):
                    for v in range(kw):
                        wv = w[fi, ci, u, v]
                        for i in range(oh):
                            for j in range(ow):
                                out[ni, fi, i, j] += wv * x[ni, ci, i + u, j + v]
    return out


@njit(cache=True)
def conv2d_backward_weights(x, grad_out):
    n, c, h, wd = x.shape
    _, f, oh, ow = grad_out.shape
    kh, kw = h - oh + 1, wd - ow + 1
    gw = np.empty((f, c, kh, kw))
    for fi in range(f):
        for ci in range(c):
            for u in range(kh):
                for v in range(kw):
                    acc = 0.0
                    for ni in range(n):
                        for i in range(oh):
                            for j in range(ow):
                                acc += grad_out[ni, fi, i, j] * x[ni, ci, i + u, j + v]
                    gw[fi, ci, u, v] = acc
    return gw


@njit(cache=True)
def conv2d_backward_input(grad_out, w):
    n, f, oh, ow = grad_out.shape
    _, c, kh, kw = w.shape
    h, wd = oh + kh - 1, ow + kw - 1
    gx = np.zeros((n, c, h, wd))
    for ni in range(n):
        for ci in range(c):
            for fi in range(f):
                for u in range(kh):
                    for v in range(kw):
                        wv = w[fi, ci, u, v]
                        for i in range(oh):
                            for j in range(ow):
                                gx[ni, ci, i + u, j + v] += grad_out[ni, fi, i, j] * wv
    return gx


@njit(cache=True)
def maxpool2_forward(x):
    n, c, h, w = x.shape
    oh, ow = h // 2, w // 2
    out = np.empty((n, c, oh, ow))
    idx = np.empty((n, c, oh, ow), dtype=np.int64)
    for ni in range(n):
        for ci in range(c):
            for i in range(oh):
                for j in range(ow):
                    best = x[ni, ci, 2 * i, 2 * j]
                    pos = 0
                    k = 0
                    for u in range(2):
                        for v in range(2):
                            val = x[ni, ci, 2 * i + u, 2 * j + v]
                            if val > best:  # strict: first max wins ties
                                best = val
                                pos = k
                            k += 1
                    out[ni, ci, i, j] = best
                    idx[ni, ci, i, j] = pos
    return out, idx


@njit(cache=True)
def maxpool2_backward(grad_out, idx, h, w):
    n, c, oh, ow = grad_out.shape
    gx = np.zeros((n, c, h, w))
    for ni in range(n):
        for ci in range(c):
            for i in range(oh):
                for j in range(ow):
                    pos = idx[ni, ci, i, j]
                    gx[ni, ci, 2 * i + pos // 2, 2 * j + pos % 2] += grad_out[
                        ni, ci, i, j
                    ]
    return gx
