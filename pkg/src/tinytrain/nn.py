"""Layers, networks, the cached forward pass, and checkpoint files.

A Network is an ordered list of Layer records whose shapes are validated
end-to-end at construction. forward_pass records every pre-activation and
activation so any of the update rules can consume the same cache. Layer
operations take a leading batch dimension; rule formulas stated per-sample
extend to batches by mean-reducing parameter gradients.
"""

import json
from dataclasses import dataclass, field

import numpy as np

from . import tensor
from .artifacts import atomic_write_bytes
from .errors import ConfigError, ContractError, FormatError, ShapeError

ACTIVATIONS = ("relu", "sigmoid", "tanh", "softmax", "identity")
CHECKPOINT_MAGIC = b"TTCK"
CHECKPOINT_VERSION = 1


def activation(kind, z):
    """Apply an activation elementwise (softmax: over the last axis)."""
    z = np.asarray(z, dtype=np.float64)
    if kind == "relu":
        return np.maximum(z, 0.0)
    if kind == "sigmoid":
        return 1.0 / (1.0 + np.exp(-z))
    if kind == "tanh":
        return np.tanh(z)
    if kind == "identity":
        return z.copy()
    if kind == "softmax":
        shifted = z - z.max(axis=-1, keepdims=True)
        e = np.exp(shifted)
        return e / e.sum(axis=-1, keepdims=True)
    raise ConfigError(f"unknown activation {kind!r}")


def activation_derivative(kind, z, h):
    """Elementwise derivative f'(z), given h = f(z).

    Softmax is refused: its derivative is a Jacobian and is only ever needed
    fused with cross-entropy, which the trainers handle as (h - target).
    """
    if kind == "softmax":
        raise ContractError("softmax derivative is fused into the output error")
    if kind == "relu":
        return (np.asarray(z) > 0.0).astype(np.float64)
    if kind == "sigmoid":
        return h * (1.0 - h)
    if kind == "tanh":
        return 1.0 - h * h
    if kind == "identity":
        return np.ones_like(np.asarray(h, dtype=np.float64))
    raise ConfigError(f"unknown activation {kind!r}")


@dataclass
class Layer:
    """One network layer: kind tag, activation tag, and parameters.

    kind is one of dense / conv2d / maxpool2 / flatten. maxpool2 and flatten
    carry no parameters and identity activation.
    """

    kind: str
    activation: str = "identity"
    weights: np.ndarray | None = None
    bias: np.ndarray | None = None

    @property
    def has_params(self):
        return self.weights is not None


def _init_scale(act, fan_in, fan_out):
    # uniform He-style for relu, Xavier-style otherwise; paper only says
    # "random values"
    if act == "relu":
        return np.sqrt(6.0 / fan_in)
    return np.sqrt(6.0 / (fan_in + fan_out))


def dense(n_in, n_out, act="identity", rng=None, weights=None, bias=None):
    """Fully connected layer: W is (n_out, n_in), b is (n_out,)."""
    if act not in ACTIVATIONS:
        raise ConfigError(f"unknown activation {act!r}")
    if weights is None:
        rng = rng or np.random.default_rng(0)
        bound = _init_scale(act, n_in, n_out)
        weights = rng.uniform(-bound, bound, size=(n_out, n_in))
        bias = np.zeros(n_out)
    weights = tensor.as_tensor(weights)
    bias = tensor.as_tensor(bias)
    if weights.shape != (n_out, n_in) or bias.shape != (n_out,):
        raise ConfigError(
            f"dense({n_in}->{n_out}) got W {weights.shape}, b {bias.shape}"
        )
    return Layer("dense", act, weights, bias)


def conv2d(in_ch, out_ch, kh, kw, act="identity", rng=None, weights=None, bias=None):
    """Convolution layer: W is (out_ch, in_ch, kh, kw), b is (out_ch,)."""
    if act not in ACTIVATIONS:
        raise ConfigError(f"unknown activation {act!r}")
    if weights is None:
        rng = rng or np.random.default_rng(0)
        fan_in = in_ch * kh * kw
        fan_out = out_ch * kh * kw
        bound = _init_scale(act, fan_in, fan_out)
        weights = rng.uniform(-bound, bound, size=(out_ch, in_ch, kh, kw))
        bias = np.zeros(out_ch)
    weights = tensor.as_tensor(weights)
    bias = tensor.as_tensor(bias)
    if weights.shape != (out_ch, in_ch, kh, kw) or bias.shape != (out_ch,):
        raise ConfigError(f"conv2d got W {weights.shape}, b {bias.shape}")
    return Layer("conv2d", act, weights, bias)


def maxpool2():
    return Layer("maxpool2")


def flatten():
    return Layer("flatten")


def _output_shape(layer, in_shape):
    """Shape a layer produces from in_shape (no batch dim); raises on mismatch."""
    if layer.kind == "dense":
        n_out, n_in = layer.weights.shape
        if in_shape != (n_in,):
            raise ConfigError(f"dense expects ({n_in},), got {in_shape}")
        return (n_out,)
    if layer.kind == "conv2d":
        f, c, kh, kw = layer.weights.shape
        if len(in_shape) != 3 or in_shape[0] != c:
            raise ConfigError(f"conv2d expects ({c},H,W), got {in_shape}")
        h, w = in_shape[1] - kh + 1, in_shape[2] - kw + 1
        if h < 1 or w < 1:
            raise ConfigError(f"kernel {kh}x{kw} too large for input {in_shape}")
        return (f, h, w)
    if layer.kind == "maxpool2":
        if len(in_shape) != 3 or in_shape[1] % 2 or in_shape[2] % 2:
            raise ConfigError(f"maxpool2 needs (C, even, even), got {in_shape}")
        return (in_shape[0], in_shape[1] // 2, in_shape[2] // 2)
    if layer.kind == "flatten":
        if len(in_shape) < 2:
            raise ConfigError(f"flatten expects a spatial input, got {in_shape}")
        return (int(np.prod(in_shape)),)
    raise ConfigError(f"unknown layer kind {layer.kind!r}")


class Network:
    """Ordered layer list with a fixed input shape.

    ``version`` counts parameter updates; forward caches record it so the
    sweeps can reject stale caches.
    """

    def __init__(self, layers, input_shape):
        if not layers:
            raise ConfigError("network needs at least one layer")
        self.layers = list(layers)
        self.input_shape = tuple(int(d) for d in input_shape)
        self.version = 0
        shape = self.input_shape
        self.layer_shapes = []
        for i, layer in enumerate(self.layers):
            if layer.activation == "softmax" and i != len(self.layers) - 1:
                raise ConfigError("softmax is only allowed on the final layer")
            shape = _output_shape(layer, shape)
            self.layer_shapes.append(shape)
        self.output_shape = shape

    def __len__(self):
        return len(self.layers)

    def param_layers(self):
        """Indices of layers that carry parameters."""
        return [i for i, l in enumerate(self.layers) if l.has_params]

    def parameters(self):
        """{(layer_index, 'W'|'b'): array} view of all parameters."""
        out = {}
        for i in self.param_layers():
            out[(i, "W")] = self.layers[i].weights
            out[(i, "b")] = self.layers[i].bias
        return out

    def num_parameters(self):
        return sum(int(p.size) for p in self.parameters().values())

    def snapshot(self):
        """Copies of all parameter arrays, keyed like parameters()."""
        return {k: v.copy() for k, v in self.parameters().items()}

    def restore(self, snap):
        for (i, name), value in snap.items():
            if name == "W":
                self.layers[i].weights = value.copy()
            else:
                self.layers[i].bias = value.copy()
        self.version += 1

    def bump_version(self):
        self.version += 1


@dataclass
class ForwardCache:
    """Per-layer pre-activations and activations from one forward pass.

    z[l] and h[l] are the batched pre-activation/activation of layer l;
    inputs holds h_0. pool_index[l] is the argmax map for maxpool layers
    (None elsewhere). single marks a pass run on an unbatched sample.
    """

    inputs: np.ndarray
    z: list = field(default_factory=list)
    h: list = field(default_factory=list)
    pool_index: list = field(default_factory=list)
    single: bool = False
    net_version: int = 0

    @property
    def output(self):
        out = self.h[-1]
        return out[0] if self.single else out

    def activation_in(self, layer_index):
        """Input activation h_{l-1} seen by the given layer."""
        return self.inputs if layer_index == 0 else self.h[layer_index - 1]


def forward_pass(net, x):
    """Run the network, recording z_l = W_l h_{l-1} + b_l and h_l = f(z_l).

    Accepts one sample shaped like net.input_shape or a batch with a leading
    N. The network is never mutated; concurrent passes over a frozen network
    are safe.
    """
    x = tensor.as_tensor(x)
    single = x.shape == net.input_shape
    if single:
        x = x[None]
    if x.shape[1:] != net.input_shape:
        raise ShapeError(
            f"input {x.shape} does not match network input {net.input_shape}"
        )
    cache = ForwardCache(inputs=x, single=single, net_version=net.version)
    h = x
    for layer in net.layers:
        if layer.kind == "dense":
            z = h @ layer.weights.T + layer.bias
            idx = None
        elif layer.kind == "conv2d":
            z = tensor.conv2d_forward(h, layer.weights, layer.bias)
            idx = None
        elif layer.kind == "maxpool2":
            z, idx = tensor.maxpool2d(h)
        else:  # flatten
            z = h.reshape(h.shape[0], -1)
            idx = None
        h = activation(layer.activation, z)
        cache.z.append(z)
        cache.h.append(h)
        cache.pool_index.append(idx)
    return cache


def build_mlp(dims, hidden_activation="relu", seed=0):
    """Dense chain with a softmax head: dims [in, h1, ..., out]."""
    if len(dims) < 2:
        raise ConfigError("build_mlp needs at least [input_dim, output_dim]")
    rng = np.random.default_rng(seed)
    layers = []
    for i in range(len(dims) - 1):
        act = "softmax" if i == len(dims) - 2 else hidden_activation
        layers.append(dense(dims[i], dims[i + 1], act, rng=rng))
    return Network(layers, (dims[0],))


def build_paper_cnn(input_shape, num_classes=10, seed=0):
    """The benchmark CNN: conv32-3x3 relu, conv64-3x3 relu, maxpool2,
    flatten, dense512 relu, dense softmax head.

    input_shape must be (1, 28, 28) or (3, 32, 32).
    """
    input_shape = tuple(int(d) for d in input_shape)
    if input_shape not in ((1, 28, 28), (3, 32, 32)):
        raise ConfigError(f"unsupported input shape {input_shape}")
    rng = np.random.default_rng(seed)
    c, h, w = input_shape
    flat = 64 * ((h - 4) // 2) * ((w - 4) // 2)
    layers = [
        conv2d(c, 32, 3, 3, "relu", rng=rng),
        conv2d(32, 64, 3, 3, "relu", rng=rng),
        maxpool2(),
        flatten(),
        dense(flat, 512, "relu", rng=rng),
        dense(512, num_classes, "softmax", rng=rng),
    ]
    return Network(layers, input_shape)


def _layer_header(layer):
    entry = {"kind": layer.kind, "activation": layer.activation}
    if layer.kind == "dense":
        entry["out"], entry["in"] = (int(d) for d in layer.weights.shape)
    elif layer.kind == "conv2d":
        f, c, kh, kw = (int(d) for d in layer.weights.shape)
        entry.update({"out_channels": f, "in_channels": c, "kh": kh, "kw": kw})
    return entry


def save_checkpoint(net, path):
    """Write a deterministic binary checkpoint.

    Layout: magic "TTCK", u32 LE format version, u64 LE header length, JSON
    header (input shape + layer descriptors), then the parameter arrays as
    raw little-endian float64 in layer order (weights then bias). Identical
    parameters always produce identical bytes.
    """
    header = {
        "format_version": CHECKPOINT_VERSION,
        "input_shape": list(net.input_shape),
        "layers": [_layer_header(l) for l in net.layers],
    }
    blob = json.dumps(header, sort_keys=True, separators=(",", ":")).encode("utf-8")
    parts = [
        CHECKPOINT_MAGIC,
        CHECKPOINT_VERSION.to_bytes(4, "little"),
        len(blob).to_bytes(8, "little"),
        blob,
    ]
    for i in net.param_layers():
        layer = net.layers[i]
        parts.append(np.ascontiguousarray(layer.weights, dtype="<f8").tobytes())
        parts.append(np.ascontiguousarray(layer.bias, dtype="<f8").tobytes())
    atomic_write_bytes(path, b"".join(parts))


def load_checkpoint(path):
    with open(path, "rb") as f:
        raw = f.read()
    if raw[:4] != CHECKPOINT_MAGIC:
        raise FormatError(f"bad checkpoint magic {raw[:4]!r}, expected TTCK")
    version = int.from_bytes(raw[4:8], "little")
    if version != CHECKPOINT_VERSION:
        raise FormatError(f"unsupported checkpoint version {version}")
    hlen = int.from_bytes(raw[8:16], "little")
    header = json.loads(raw[16 : 16 + hlen].decode("utf-8"))
    offset = 16 + hlen

    def take(shape):
        nonlocal offset
        count = int(np.prod(shape))
        end = offset + count * 8
        if end > len(raw):
            raise FormatError("checkpoint truncated")
        arr = np.frombuffer(raw[offset:end], dtype="<f8").reshape(shape).copy()
        offset = end
        return arr

    layers = []
    for entry in header["layers"]:
        kind, act = entry["kind"], entry["activation"]
        if kind == "dense":
            w = take((entry["out"], entry["in"]))
            b = take((entry["out"],))
            layers.append(Layer("dense", act, w, b))
        elif kind == "conv2d":
            w = take(
                (entry["out_channels"], entry["in_channels"], entry["kh"], entry["kw"])
            )
            b = take((entry["out_channels"],))
            layers.append(Layer("conv2d", act, w, b))
        elif kind == "maxpool2":
            layers.append(maxpool2())
        elif kind == "flatten":
            layers.append(flatten())
        else:
            raise FormatError(f"unknown layer kind {kind!r} in checkpoint")
    if offset != len(raw):
        raise FormatError("checkpoint has trailing bytes")
    return Network(layers, header["input_shape"])
