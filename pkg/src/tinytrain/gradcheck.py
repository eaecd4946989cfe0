"""Finite-difference gradient checking.

Central differences probe every parameter twice; any probe pair that flips a
relu support pattern or a pooling argmax crosses a kink, where the loss is
not differentiable and the quotient is meaningless, so those entries are
flagged for exclusion rather than silently compared.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import tensor
from .errors import ShapeError
from .nn import Network, forward_pass
from .trainers import Gradients, output_error


def _loss_and_pattern(net, x, target, loss):
    """One forward pass: loss value plus the active relu/pool pattern."""
    cache = forward_pass(net, x)
    top = net.layers[-1]
    value, _ = output_error(
        cache.h[-1], target, loss, activation=top.activation, z=cache.z[-1]
    )
    pieces = []
    for l, layer in enumerate(net.layers):
        if layer.activation == "relu":
            pieces.append((cache.z[l] > 0.0).tobytes())
        if layer.kind == "maxpool2":
            pieces.append(cache.pool_index[l].tobytes())
    return value, b"".join(pieces)


def finite_difference_grads(net: Network, x, target, loss="softmax_ce",
                            epsilon=1e-5):
    """Central-difference gradients of the batch loss for every parameter.

    Returns (grads, valid): dicts keyed like net.parameters(). valid entries
    are boolean arrays, False where the two probes straddled a kink and the
    difference quotient should not be trusted. Parameters are restored
    exactly after probing.
    """
    x = tensor.as_tensor(x)
    if x.shape == net.input_shape:
        x = x[None]
    target = tensor.as_tensor(target)
    if target.ndim == 1:
        target = target[None, :]
    params = net.parameters()
    grads = {k: np.zeros_like(p) for k, p in params.items()}
    valid = {k: np.ones(p.shape, dtype=bool) for k, p in params.items()}
    for key, p in params.items():
        flat = p.reshape(-1)
        g = grads[key].reshape(-1)
        ok = valid[key].reshape(-1)
        for i in range(flat.shape[0]):
            saved = flat[i]
            flat[i] = saved + epsilon
            up, pattern_up = _loss_and_pattern(net, x, target, loss)
            flat[i] = saved - epsilon
            down, pattern_down = _loss_and_pattern(net, x, target, loss)
            flat[i] = saved
            g[i] = (up - down) / (2.0 * epsilon)
            ok[i] = pattern_up == pattern_down
    return grads, valid


def grads_as_dict(grads: Gradients):
    """Flatten a Gradients record into {(layer, 'W'|'b'): array}."""
    out = {}
    for l, (w, b) in enumerate(zip(grads.weight, grads.bias)):
        if w is not None:
            out[(l, "W")] = w
            out[(l, "b")] = b
    return out


@dataclass
class GradCheckReport:
    """Outcome of an analytic-vs-numeric comparison."""

    passed: bool
    max_rel_error: float
    max_abs_error: float
    worst: tuple | None
    compared: int
    excluded: int
    rtol: float
    atol: float

    def summary(self):
        state = "PASS" if self.passed else "FAIL"
        where = ""
        if self.worst is not None:
            key, index = self.worst
            where = f" (worst at {key}[{index}])"
        return (
            f"{state}: max rel err {self.max_rel_error:.3e}, "
            f"max abs err {self.max_abs_error:.3e}, "
            f"{self.compared} compared, {self.excluded} excluded{where}"
        )


def compare_grads(analytic, numeric, valid=None, rtol=1e-4, atol=1e-7):
    """Elementwise comparison of two gradient dicts.

    An element passes when |a - n| <= atol or the relative error
    |a - n| / max(|a|, |n|) is <= rtol. Entries marked invalid (kink
    crossings) are skipped and counted as excluded.
    """
    if set(analytic) != set(numeric):
        raise ShapeError(
            f"gradient keys differ: {sorted(analytic)} vs {sorted(numeric)}"
        )
    max_rel = 0.0
    max_abs = 0.0
    worst = None
    compared = 0
    excluded = 0
    passed = True
    for key in sorted(analytic):
        a = np.asarray(analytic[key], dtype=np.float64).reshape(-1)
        n = np.asarray(numeric[key], dtype=np.float64).reshape(-1)
        if a.shape != n.shape:
            raise ShapeError(
                f"gradient {key} shapes differ: {analytic[key].shape} "
                f"vs {numeric[key].shape}"
            )
        mask = np.ones(a.shape, dtype=bool)
        if valid is not None and key in valid:
            mask = np.asarray(valid[key]).reshape(-1)
        excluded += int((~mask).sum())
        a, n = a[mask], n[mask]
        compared += int(a.shape[0])
        if a.shape[0] == 0:
            continue
        abs_err = np.abs(a - n)
        denom = np.maximum(np.abs(a), np.abs(n))
        rel = abs_err / np.maximum(denom, atol)
        ok = (abs_err <= atol) | (rel <= rtol)
        if not ok.all():
            passed = False
        i = int(rel.argmax())
        if rel[i] > max_rel:
            max_rel = float(rel[i])
            worst = (key, int(np.nonzero(mask)[0][i]))
        max_abs = max(max_abs, float(abs_err.max()))
    return GradCheckReport(
        passed=passed,
        max_rel_error=max_rel,
        max_abs_error=max_abs,
        worst=worst,
        compared=compared,
        excluded=excluded,
        rtol=rtol,
        atol=atol,
    )


def alignment_angle(a, b):
    """Angle in degrees between two gradient dicts, flattened and stacked.

    Angles below 90 mean the two directions agree on average. Returns nan
    when either collection has zero norm.
    """
    if set(a) != set(b):
        raise ShapeError(f"gradient keys differ: {sorted(a)} vs {sorted(b)}")
    keys = sorted(a)
    va = np.concatenate([np.asarray(a[k], dtype=np.float64).reshape(-1) for k in keys])
    vb = np.concatenate([np.asarray(b[k], dtype=np.float64).reshape(-1) for k in keys])
    if va.shape != vb.shape:
        raise ShapeError("flattened gradient lengths differ")
    na, nb = np.linalg.norm(va), np.linalg.norm(vb)
    if na == 0.0 or nb == 0.0:
        return float("nan")
    cos = float(np.dot(va, vb) / (na * nb))
    return float(np.degrees(np.arccos(np.clip(cos, -1.0, 1.0))))
