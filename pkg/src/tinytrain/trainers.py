"""Learning rules and the training loop.

Three rules share one top-down traversal: classic backpropagation, direct
feedback alignment (fixed random matrices carry the output error straight to
each hidden layer), and a layer-wise variant that applies each layer's update
the moment its error signal is available instead of waiting for the full
backward pass to finish.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import tensor
from .errors import ConfigError, ContractError, DivergenceError, ShapeError
from .nn import ForwardCache, Network, activation_derivative, forward_pass

RULES = ("backprop", "dfa", "layerwise")
OPTIMIZERS = ("sgd", "adam")
LOSSES = ("softmax_ce", "mse")
SNAPSHOT_MODES = ("post_update", "pre_update")

LOG_FLOOR = 1e-12


def output_error(output, target, loss="softmax_ce", activation=None, z=None):
    """Loss value and the error signal at the final layer's pre-activation.

    With softmax_ce the softmax Jacobian and the cross-entropy gradient
    collapse to output - target. With mse the signal is
    (output - target) * f'(z), so the final activation and its
    pre-activation must be supplied (identity is assumed when omitted).
    Returns (loss, delta) where loss is averaged over the batch.
    """
    h = tensor.as_tensor(output)
    t = tensor.as_tensor(target)
    if h.shape != t.shape:
        raise ShapeError(f"output shape {h.shape} does not match target {t.shape}")
    if loss not in LOSSES:
        raise ConfigError(f"unknown loss {loss!r}; expected one of {LOSSES}")
    n = h.shape[0] if h.ndim > 1 else 1
    if loss == "softmax_ce":
        if activation is not None and activation != "softmax":
            raise ConfigError(
                "softmax_ce expects a softmax output layer, "
                f"got activation {activation!r}"
            )
        value = float(-(t * np.log(np.maximum(h, LOG_FLOOR))).sum() / n)
        return value, h - t
    value = float(0.5 * ((h - t) ** 2).sum() / n)
    delta = h - t
    if activation is not None and activation != "identity":
        if z is None:
            raise ConfigError(f"mse with activation {activation!r} needs z")
        delta = delta * activation_derivative(activation, z, h)
    return value, delta


@dataclass
class Gradients:
    """Batch-averaged parameter gradients, aligned with the network layers.

    Entries are None at layers without parameters. deltas holds the error
    signal at each parameterised layer's pre-activation (diagnostic, not
    averaged over the batch); delta_norms are their Frobenius norms.
    """

    weight: list
    bias: list
    deltas: list
    delta_norms: list
    loss: float


@dataclass
class UpdateReport:
    """What a layer-wise sweep did: per-layer signals and step sizes."""

    loss: float
    deltas: list
    delta_norms: list
    update_magnitudes: list


def _prep_target(cache: ForwardCache, target):
    t = tensor.as_tensor(target)
    if cache.single and t.ndim == 1:
        t = t[None, :]
    return t


def _check_cache(net: Network, cache: ForwardCache):
    if cache.net_version != net.version:
        raise ContractError(
            "forward cache is stale: network parameters changed since the pass"
        )
    if len(cache.z) != len(net.layers):
        raise ContractError("forward cache does not match the network depth")


def _param_grads(layer, delta, below):
    """Batch-mean gradients for one parameterised layer."""
    n = delta.shape[0]
    if layer.kind == "dense":
        gw = tensor.matmul(tensor.transpose(delta), below) / n
        gb = delta.sum(axis=0) / n
    else:
        gw = tensor.conv2d_backward_weights(below, delta) / n
        gb = delta.sum(axis=(0, 2, 3)) / n
    return gw, gb


def _route_down(layer, delta, below, weights):
    """Error signal w.r.t. a layer's input, given the signal w.r.t. its z."""
    if layer.kind == "dense":
        return tensor.matmul(delta, weights)
    if layer.kind == "conv2d":
        return tensor.conv2d_backward_input(delta, weights)
    if layer.kind == "flatten":
        return delta.reshape(below.shape)
    raise ContractError(f"cannot route an error signal through {layer.kind!r}")


def _descend(net, cache, target, loss, weight_for, visit):
    """Walk the layers top-down, handing each parameterised layer its delta.

    weight_for(l) supplies the weights used to route *through* layer l,
    which is what separates plain backprop from the layer-wise variants.
    Returns the batch loss.
    """
    last = len(net.layers) - 1
    top = net.layers[last]
    value, delta = output_error(
        cache.h[last], target, loss, activation=top.activation, z=cache.z[last]
    )
    for l in range(last, -1, -1):
        layer = net.layers[l]
        if l < last:
            upper = net.layers[l + 1]
            below = cache.activation_in(l + 1)
            if upper.kind == "maxpool2":
                dh = tensor.maxpool2d_backward(
                    delta, cache.pool_index[l + 1], below.shape[2], below.shape[3]
                )
            else:
                dh = _route_down(upper, delta, below, weight_for(l + 1))
            if layer.activation == "identity":
                delta = dh
            else:
                delta = dh * activation_derivative(
                    layer.activation, cache.z[l], cache.h[l]
                )
        if layer.has_params:
            visit(l, delta)
    return value


def backprop_sweep(net: Network, cache: ForwardCache, target, loss="softmax_ce"):
    """Chain-rule gradients for every parameterised layer. Pure: no updates."""
    _check_cache(net, cache)
    t = _prep_target(cache, target)
    depth = len(net.layers)
    g = Gradients([None] * depth, [None] * depth, [None] * depth,
                  [None] * depth, 0.0)

    def visit(l, delta):
        gw, gb = _param_grads(net.layers[l], delta, cache.activation_in(l))
        g.weight[l], g.bias[l] = gw, gb
        g.deltas[l] = delta
        g.delta_norms[l] = float(np.linalg.norm(delta))

    g.loss = _descend(net, cache, t, loss, lambda l: net.layers[l].weights, visit)
    return g


def make_feedback_matrices(net: Network, seed):
    """Fixed random feedback for DFA, one matrix per hidden parameterised layer.

    Entries are drawn uniformly from [-1/sqrt(k), 1/sqrt(k)] where k is the
    network's output dimension; each matrix maps the output error back to
    the flattened shape of that layer's output. The same seed always yields
    the same matrices.
    """
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    out_dim = int(np.prod(net.layer_shapes[-1]))
    bound = 1.0 / math.sqrt(out_dim)
    last = len(net.layers) - 1
    feedback = {}
    for l in net.param_layers():
        if l == last:
            continue
        size = int(np.prod(net.layer_shapes[l]))
        feedback[l] = rng.uniform(-bound, bound, size=(size, out_dim))
    return feedback


def dfa_sweep(net: Network, cache: ForwardCache, target, feedback,
              loss="softmax_ce"):
    """Direct feedback alignment gradients.

    The output layer gets the true error signal; every hidden parameterised
    layer gets the output error projected through its fixed feedback matrix,
    gated by its own activation derivative. Deeper weights never touch a
    hidden layer's signal.
    """
    _check_cache(net, cache)
    if not net.layers[-1].has_params:
        raise ConfigError("dfa needs a parameterised output layer")
    t = _prep_target(cache, target)
    last = len(net.layers) - 1
    top = net.layers[last]
    value, delta_out = output_error(
        cache.h[last], t, loss, activation=top.activation, z=cache.z[last]
    )
    out_dim = delta_out.shape[1]

    depth = len(net.layers)
    g = Gradients([None] * depth, [None] * depth, [None] * depth,
                  [None] * depth, value)

    def put(l, delta):
        gw, gb = _param_grads(net.layers[l], delta, cache.activation_in(l))
        g.weight[l], g.bias[l] = gw, gb
        g.deltas[l] = delta
        g.delta_norms[l] = float(np.linalg.norm(delta))

    put(last, delta_out)
    for l in net.param_layers():
        if l == last:
            continue
        size = int(np.prod(net.layer_shapes[l]))
        b = feedback.get(l)
        if b is None or b.shape != (size, out_dim):
            want = (size, out_dim)
            got = None if b is None else b.shape
            raise ConfigError(
                f"feedback matrix for layer {l} must have shape {want}, got {got}"
            )
        proj = tensor.matmul(delta_out, tensor.transpose(b))
        proj = proj.reshape(cache.z[l].shape)
        layer = net.layers[l]
        if layer.activation == "identity":
            delta = proj
        else:
            delta = proj * activation_derivative(
                layer.activation, cache.z[l], cache.h[l]
            )
        put(l, delta)
    return g


def sgd_update(params, grads, lr):
    """In-place p <- p - lr * g for every key in params."""
    for key, p in params.items():
        p -= lr * grads[key]
    return params


@dataclass
class AdamState:
    """Per-tensor first and second moment estimates with step counts."""

    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    m: dict = field(default_factory=dict)
    v: dict = field(default_factory=dict)
    t: dict = field(default_factory=dict)


def adam_update(state: AdamState, params, grads, lr):
    """In-place Adam step with bias-corrected moments."""
    for key, p in params.items():
        g = grads[key]
        t = state.t.get(key, 0) + 1
        m = state.m.get(key)
        v = state.v.get(key)
        if m is None:
            m = np.zeros_like(p)
            v = np.zeros_like(p)
        m = state.beta1 * m + (1.0 - state.beta1) * g
        v = state.beta2 * v + (1.0 - state.beta2) * (g * g)
        state.m[key], state.v[key], state.t[key] = m, v, t
        m_hat = m / (1.0 - state.beta1**t)
        v_hat = v / (1.0 - state.beta2**t)
        p -= lr * m_hat / (np.sqrt(v_hat) + state.eps)
    return params


class Optimizer:
    """One update rule plus its state, applied to keyed parameter dicts.

    lr_scale optionally maps a layer index to a multiplier on the base
    learning rate; keys are expected to be (layer_index, name) tuples when
    scaling is used.
    """

    def __init__(self, kind, lr, lr_scale=None, beta1=0.9, beta2=0.999,
                 eps=1e-8):
        if kind not in OPTIMIZERS:
            raise ConfigError(f"unknown optimizer {kind!r}; expected one of {OPTIMIZERS}")
        if lr < 0:
            raise ConfigError(f"learning rate must be non-negative, got {lr}")
        self.kind = kind
        self.lr = lr
        self.lr_scale = dict(lr_scale) if lr_scale else None
        self.adam = AdamState(beta1, beta2, eps) if kind == "adam" else None

    def _apply(self, params, grads, lr):
        if self.kind == "sgd":
            sgd_update(params, grads, lr)
        else:
            adam_update(self.adam, params, grads, lr)

    def step(self, params, grads):
        """Update every tensor in params using the matching entry in grads."""
        if not self.lr_scale:
            self._apply(params, grads, self.lr)
            return params
        groups = {}
        for key in params:
            layer = key[0] if isinstance(key, tuple) else None
            groups.setdefault(self.lr_scale.get(layer, 1.0), []).append(key)
        for mult, keys in groups.items():
            self._apply({k: params[k] for k in keys},
                        {k: grads[k] for k in keys}, self.lr * mult)
        return params


def apply_gradients(net: Network, grads: Gradients, opt: Optimizer):
    """One optimizer step over all parameterised layers, then mark the net."""
    params, gs = {}, {}
    for l in net.param_layers():
        params[(l, "W")] = net.layers[l].weights
        params[(l, "b")] = net.layers[l].bias
        gs[(l, "W")] = grads.weight[l]
        gs[(l, "b")] = grads.bias[l]
    opt.step(params, gs)
    net.bump_version()


def layerwise_instant_sweep(net: Network, cache: ForwardCache, target,
                            opt: Optimizer, mode="post_update",
                            loss="softmax_ce"):
    """Top-down sweep that commits each layer's update immediately.

    In post_update mode (the default) the signal routed to layer l passes
    through weights the layers above have already updated this sweep. In
    pre_update mode routing reads a snapshot taken before the sweep, which
    makes one sweep equal to backprop followed by a full optimizer step.
    """
    _check_cache(net, cache)
    if mode not in SNAPSHOT_MODES:
        raise ConfigError(
            f"unknown snapshot mode {mode!r}; expected one of {SNAPSHOT_MODES}"
        )
    t = _prep_target(cache, target)
    frozen = None
    if mode == "pre_update":
        frozen = {l: net.layers[l].weights.copy() for l in net.param_layers()}

    def weight_for(l):
        if frozen is not None:
            return frozen[l]
        return net.layers[l].weights

    depth = len(net.layers)
    report = UpdateReport(0.0, [None] * depth, [None] * depth, [None] * depth)

    def visit(l, delta):
        layer = net.layers[l]
        gw, gb = _param_grads(layer, delta, cache.activation_in(l))
        before_w = layer.weights.copy()
        before_b = layer.bias.copy()
        opt.step({(l, "W"): layer.weights, (l, "b"): layer.bias},
                 {(l, "W"): gw, (l, "b"): gb})
        moved = math.hypot(
            float(np.linalg.norm(layer.weights - before_w)),
            float(np.linalg.norm(layer.bias - before_b)),
        )
        report.deltas[l] = delta
        report.delta_norms[l] = float(np.linalg.norm(delta))
        report.update_magnitudes[l] = moved
    report.loss = _descend(net, cache, t, loss, weight_for, visit)
    net.bump_version()
    return report


@dataclass
class TrainerConfig:
    """Everything a training run needs besides the network and the data."""

    rule: str = "backprop"
    optimizer: str = "adam"
    learning_rate: float = 0.001
    batch_size: int = 128
    epochs: int = 10
    seed: int = 0
    loss: str = "softmax_ce"
    snapshot_mode: str = "post_update"
    patience: int | None = 10
    shuffle: bool = True
    lr_scale: dict | None = None

    def __post_init__(self):
        if self.rule not in RULES:
            raise ConfigError(f"unknown rule {self.rule!r}; expected one of {RULES}")
        if self.optimizer not in OPTIMIZERS:
            raise ConfigError(
                f"unknown optimizer {self.optimizer!r}; expected one of {OPTIMIZERS}"
            )
        if self.loss not in LOSSES:
            raise ConfigError(f"unknown loss {self.loss!r}; expected one of {LOSSES}")
        if self.snapshot_mode not in SNAPSHOT_MODES:
            raise ConfigError(
                f"unknown snapshot mode {self.snapshot_mode!r}; "
                f"expected one of {SNAPSHOT_MODES}"
            )
        if not self.learning_rate > 0:
            raise ConfigError(
                f"learning rate must be positive, got {self.learning_rate}"
            )
        if self.batch_size < 1:
            raise ConfigError(f"batch size must be >= 1, got {self.batch_size}")
        if self.epochs < 0:
            raise ConfigError(f"epochs must be >= 0, got {self.epochs}")
        if self.patience is not None and self.patience < 1:
            raise ConfigError(f"patience must be >= 1 or None, got {self.patience}")


@dataclass
class EpochRecord:
    epoch: int
    train_loss: float
    val_loss: float
    val_accuracy: float
    delta_norms: list
    wall_time: float


@dataclass
class TrainingRun:
    """History plus the best validation checkpoint seen during training."""

    history: list
    best_epoch: int
    best_val_accuracy: float
    best_params: dict
    stopped_early: bool
    feedback_seed: int | None = None


def one_hot(labels, num_classes):
    labels = np.asarray(labels)
    if labels.ndim != 1:
        raise ShapeError(f"labels must be 1-D, got shape {labels.shape}")
    if labels.size and (labels.min() < 0 or labels.max() >= num_classes):
        raise ShapeError(
            f"labels must lie in [0, {num_classes}), got range "
            f"[{labels.min()}, {labels.max()}]"
        )
    out = np.zeros((labels.shape[0], num_classes), dtype=np.float64)
    out[np.arange(labels.shape[0]), labels] = 1.0
    return out


def shaped_inputs(images, net: Network):
    want = net.input_shape
    if images.shape[1:] == want:
        return images
    if int(np.prod(images.shape[1:])) == int(np.prod(want)):
        return images.reshape(images.shape[0], *want)
    raise ShapeError(
        f"data samples of shape {images.shape[1:]} cannot feed a network "
        f"expecting {want}"
    )


def evaluate_loss_accuracy(net: Network, images, labels, batch_size=256,
                           loss="softmax_ce"):
    """Mean loss and top-1 accuracy over a labelled set."""
    x = shaped_inputs(tensor.as_tensor(images), net)
    y = np.asarray(labels)
    k = int(np.prod(net.layer_shapes[-1]))
    total, correct = 0.0, 0
    for start in range(0, x.shape[0], batch_size):
        xb = x[start:start + batch_size]
        yb = y[start:start + batch_size]
        h = forward_pass(net, xb).output
        t = one_hot(yb, k)
        if loss == "softmax_ce":
            total += float(-(t * np.log(np.maximum(h, LOG_FLOOR))).sum())
        else:
            total += float(0.5 * ((h - t) ** 2).sum())
        correct += int((h.argmax(axis=1) == yb).sum())
    n = x.shape[0]
    return total / n, correct / n


def train(net: Network, train_data, val_data, config: TrainerConfig):
    """Mini-batch training with per-epoch validation and best checkpointing.

    train_data and val_data are (images, labels) pairs; images are reshaped
    to the network's input shape when the sizes agree. Training stops early
    once validation accuracy has not improved for config.patience epochs.
    A non-finite batch loss raises DivergenceError. Identical seeds and
    data give identical histories and parameters.
    """
    x, y = train_data
    x = shaped_inputs(tensor.as_tensor(x), net)
    y = np.asarray(y)
    if x.shape[0] != y.shape[0]:
        raise ShapeError(f"{x.shape[0]} samples but {y.shape[0]} labels")
    if x.shape[0] == 0:
        raise ConfigError("training set is empty")
    vx, vy = val_data
    vx = tensor.as_tensor(vx)
    if vx.shape[0] == 0:
        raise ConfigError("validation set is empty")

    k = int(np.prod(net.layer_shapes[-1]))
    targets = one_hot(y, k)

    seeds = np.random.SeedSequence(config.seed).spawn(2)
    shuffle_rng = np.random.default_rng(seeds[0])
    feedback = None
    if config.rule == "dfa":
        feedback = make_feedback_matrices(net, np.random.default_rng(seeds[1]))

    opt = Optimizer(config.optimizer, config.learning_rate,
                    lr_scale=config.lr_scale)

    history = []
    best_params = net.snapshot()
    best_acc = -1.0
    best_epoch = 0
    stopped_early = False
    n = x.shape[0]
    start_time = time.monotonic()

    for epoch in range(1, config.epochs + 1):
        order = shuffle_rng.permutation(n) if config.shuffle else np.arange(n)
        loss_sum = 0.0
        norm_sums = None
        batches = 0
        for lo in range(0, n, config.batch_size):
            idx = order[lo:lo + config.batch_size]
            cache = forward_pass(net, x[idx])
            tb = targets[idx]
            if config.rule == "layerwise":
                report = layerwise_instant_sweep(
                    net, cache, tb, opt, mode=config.snapshot_mode,
                    loss=config.loss,
                )
                loss_val, norms = report.loss, report.delta_norms
            else:
                if config.rule == "backprop":
                    grads = backprop_sweep(net, cache, tb, loss=config.loss)
                else:
                    grads = dfa_sweep(net, cache, tb, feedback, loss=config.loss)
                apply_gradients(net, grads, opt)
                loss_val, norms = grads.loss, grads.delta_norms
            if not math.isfinite(loss_val):
                raise DivergenceError(
                    f"non-finite loss {loss_val} at epoch {epoch}, "
                    f"batch {batches + 1}"
                )
            loss_sum += loss_val * idx.shape[0]
            picked = [v for v in norms if v is not None]
            if norm_sums is None:
                norm_sums = [0.0] * len(picked)
            norm_sums = [a + b for a, b in zip(norm_sums, picked)]
            batches += 1

        val_loss, val_acc = evaluate_loss_accuracy(net, vx, vy,
                                                   config.batch_size,
                                                   loss=config.loss)
        history.append(EpochRecord(
            epoch=epoch,
            train_loss=loss_sum / n,
            val_loss=val_loss,
            val_accuracy=val_acc,
            delta_norms=[s / batches for s in norm_sums],
            wall_time=time.monotonic() - start_time,
        ))
        if val_acc > best_acc:
            best_acc = val_acc
            best_epoch = epoch
            best_params = net.snapshot()
        elif config.patience is not None and epoch - best_epoch >= config.patience:
            stopped_early = True
            break

    return TrainingRun(
        history=history,
        best_epoch=best_epoch,
        best_val_accuracy=best_acc,
        best_params=best_params,
        stopped_early=stopped_early,
        feedback_seed=config.seed if config.rule == "dfa" else None,
    )
