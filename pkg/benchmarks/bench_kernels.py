#!/usr/bin/env python3
"""Time the numba kernels against the pure-numpy fallback.

Runs every hot kernel on the convolution/pooling shapes that the bundled
CNN actually hits for 28x28x1 and 32x32x3 inputs, prints min-of-N wall
times for both backends, and a speedup column (>1 means numba is faster).

    python3 benchmarks/bench_kernels.py --batch 8 --repeats 5

The numbers are also a sanity check on backend choice: on a single-core
host the numpy path (im2col plus one big BLAS matmul) can beat the scalar
njit loops on the larger shapes. Pick a backend for real runs with
TINYTRAIN_KERNELS=numpy|numba.
"""

import argparse
import time

import numpy as np

from tinytrain.kernels import reference

try:
    from tinytrain.kernels import jit
except ImportError:
    jit = None

# (name, input shape sans batch, weight shape) per dataset's conv stack.
CONV_CASES = {
    "mnist": [
        ("conv1 28x28x1 -> 32f", (1, 28, 28), (32, 1, 3, 3)),
        ("conv2 26x26x32 -> 64f", (32, 26, 26), (64, 32, 3, 3)),
    ],
    "cifar": [
        ("conv1 32x32x3 -> 32f", (3, 32, 32), (32, 3, 3, 3)),
        ("conv2 30x30x32 -> 64f", (32, 30, 30), (64, 32, 3, 3)),
    ],
}


def timed(fn, args, repeats, warmup):
    for _ in range(warmup):
        fn(*args)
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - start)
    return best


def bench_case(label, in_shape, w_shape, batch, repeats, warmup, rows):
    rng = np.random.default_rng(0)
    x = rng.normal(size=(batch,) + in_shape)
    w = rng.normal(size=w_shape)
    b = rng.normal(size=w_shape[0])
    out_h = in_shape[1] - w_shape[2] + 1
    out_w = in_shape[2] - w_shape[3] + 1
    gout = rng.normal(size=(batch, w_shape[0], out_h, out_w))

    kernel_args = {
        "conv2d_forward": (x, w, b),
        "conv2d_backward_weights": (x, gout),
        "conv2d_backward_input": (gout, w),
    }
    for kernel, args in kernel_args.items():
        rows.append((f"{label} {kernel}",
                     timed(getattr(reference, kernel), args, repeats, warmup),
                     timed(getattr(jit, kernel), args, repeats, warmup)
                     if jit else None))

    pool_in = rng.normal(size=(batch, w_shape[0], out_h, out_w))
    rows.append((f"{label} maxpool2_forward",
                 timed(reference.maxpool2_forward, (pool_in,), repeats, warmup),
                 timed(jit.maxpool2_forward, (pool_in,), repeats, warmup)
                 if jit else None))
    _, idx = reference.maxpool2_forward(pool_in)
    pool_g = rng.normal(size=idx.shape)
    pool_args = (pool_g, idx, out_h, out_w)
    rows.append((f"{label} maxpool2_backward",
                 timed(reference.maxpool2_backward, pool_args, repeats, warmup),
                 timed(jit.maxpool2_backward, pool_args, repeats, warmup)
                 if jit else None))


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    parser.add_argument("--batch", type=int, default=8)
    parser.add_argument("--repeats", type=int, default=5)
    parser.add_argument("--warmup", type=int, default=2,
                        help="untimed calls per kernel (first one compiles "
                             "the njit path)")
    parser.add_argument("--dataset", choices=("mnist", "cifar", "both"),
                        default="both")
    args = parser.parse_args(argv)

    if jit is None:
        print("numba not importable; timing the numpy fallback only\n")

    names = ("mnist", "cifar") if args.dataset == "both" else (args.dataset,)
    rows = []
    for name in names:
        for label, in_shape, w_shape in CONV_CASES[name]:
            bench_case(f"{name} {label}", in_shape, w_shape,
                       args.batch, args.repeats, args.warmup, rows)

    width = max(len(r[0]) for r in rows)
    print(f"batch={args.batch}, min of {args.repeats} runs after "
          f"{args.warmup} warm-up calls\n")
    header = f"{'kernel':<{width}}  {'numpy ms':>9}  {'numba ms':>9}  {'speedup':>7}"
    print(header)
    print("-" * len(header))
    totals = [0.0, 0.0]
    for label, t_np, t_nb in rows:
        totals[0] += t_np
        if t_nb is None:
            print(f"{label:<{width}}  {t_np * 1e3:>9.3f}  {'-':>9}  {'-':>7}")
        else:
            totals[1] += t_nb
            print(f"{label:<{width}}  {t_np * 1e3:>9.3f}  {t_nb * 1e3:>9.3f}  "
                  f"{t_np / t_nb:>7.2f}")
    if jit is not None:
        print("-" * len(header))
        print(f"{'total':<{width}}  {totals[0] * 1e3:>9.3f}  "
              f"{totals[1] * 1e3:>9.3f}  {totals[0] / totals[1]:>7.2f}")


if __name__ == "__main__":
    main()
