"""Network assembly: a U-shaped encoder-decoder built from dense blocks.

Topology: a stem convolution, then ``encoder_blocks`` dense blocks each
followed by 2x2 max pooling; the decoder mirrors this with nearest-neighbor
upsampling followed by a convolution (the "up conv"), concatenation of the
matching encoder skip, and another dense block; a final convolution to two
channels feeds a channel softmax. Each dense block stacks
``layers_per_block`` units of BN -> ReLU -> conv(growth filters) where every
unit sees the concatenation of the block input and all previous unit outputs.

Activation tap indices (for extraction and the layer-similarity analysis):
0 = stem output, 1..E = encoder block outputs (before pooling),
E+1..E+D = decoder block outputs, E+D+1 = softmax head output.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from ..errors import ConfigurationError, InvalidInputError, ShapeError
from ..nn.layers import (
    batchnorm_forward,
    batchnorm_backward,
    concat_channels_backward,
    concat_channels_forward,
    conv2d_backward,
    conv2d_forward,
    maxpool2x2_backward,
    maxpool2x2_forward,
    relu_backward,
    relu_forward,
    softmax_channels_backward,
    softmax_channels_forward,
    upsample2x_nearest_backward,
    upsample2x_nearest_forward,
)
from ..nn.optim import AdamState

BN_MOMENTUM = 0.1
BN_EPS = 1e-5

TASKS = ("binary", "grayscale")


@dataclass(frozen=True)
class ArchSpec:
    """Size-parametric description of the dense-block encoder-decoder."""

    input_size: int = 64
    encoder_blocks: int = 4
    decoder_blocks: int = 4
    layers_per_block: int = 3
    growth: int = 16
    stem_channels: int = 16
    skip_connections: bool = True

    def __post_init__(self) -> None:
        if self.encoder_blocks != self.decoder_blocks:
            raise ConfigurationError(
                f"encoder blocks ({self.encoder_blocks}) must equal decoder "
                f"blocks ({self.decoder_blocks})"
            )
        if self.encoder_blocks < 1 or self.layers_per_block < 1:
            raise ConfigurationError("need at least one block and one layer per block")
        if self.growth < 1 or self.stem_channels < 1:
            raise ConfigurationError("growth and stem_channels must be positive")
        if self.input_size % (2**self.encoder_blocks) != 0:
            raise ConfigurationError(
                f"input_size {self.input_size} not divisible by "
                f"2^{self.encoder_blocks}"
            )

    def as_dict(self) -> dict:
        return {f: getattr(self, f) for f in self.__dataclass_fields__}

    @classmethod
    def from_dict(cls, d: dict) -> "ArchSpec":
        return cls(**{k: d[k] for k in cls.__dataclass_fields__ if k in d})


def channel_plan(arch: ArchSpec) -> dict:
    """Walk the topology and record the channel count entering every conv."""
    e, l, g = arch.encoder_blocks, arch.layers_per_block, arch.growth
    block_gain = l * g
    plan: dict = {"enc_in": [], "skips": [], "dec_in": [], "up_in": []}
    c = arch.stem_channels
    for _ in range(e):
        plan["enc_in"].append(c)
        c += block_gain
        plan["skips"].append(c)
    plan["bottleneck"] = c
    for i in reversed(range(e)):
        plan["up_in"].append(c)
        c = block_gain + (plan["skips"][i] if arch.skip_connections else 0)
        plan["dec_in"].append(c)
        c += block_gain
    plan["head_in"] = c
    return plan


class NetworkState:
    """Parameters, batch-norm buffers, and optimizer moments of one network.

    ``params`` and ``buffers`` are flat name-keyed dicts; names follow the
    topology (``enc0.l1.conv.w``, ``dec2.up.conv.b``, ``head.conv.w``, ...),
    giving every tensor a stable key for checkpoints and Adam state.
    """

    def __init__(self, arch: ArchSpec, task: str, dtype=np.float32) -> None:
        if task not in TASKS:
            raise ConfigurationError(f"unknown task {task!r}; choose from {TASKS}")
        self.arch = arch
        self.task = task
        self.dtype = np.dtype(dtype)
        self.params: dict[str, np.ndarray] = {}
        self.buffers: dict[str, np.ndarray] = {}
        self.adam: dict[str, AdamState] = {}
        self.epoch = 0

    # -- construction -------------------------------------------------------
    def _add_conv(self, name: str, c_in: int, c_out: int, k: int, rng) -> None:
        std = np.sqrt(2.0 / (c_in * k * k))
        self.params[f"{name}.w"] = (rng.standard_normal((c_out, c_in, k, k)) * std).astype(
            self.dtype
        )
        self.params[f"{name}.b"] = np.zeros(c_out, dtype=self.dtype)

    def _add_bn(self, name: str, c: int) -> None:
        self.params[f"{name}.gamma"] = np.ones(c, dtype=self.dtype)
        self.params[f"{name}.beta"] = np.zeros(c, dtype=self.dtype)
        self.buffers[f"{name}.running_mean"] = np.zeros(c, dtype=self.dtype)
        self.buffers[f"{name}.running_var"] = np.ones(c, dtype=self.dtype)

    def init_adam(self) -> None:
        self.adam = {k: AdamState.for_param(v) for k, v in self.params.items()}

    def astype(self, dtype) -> "NetworkState":
        """Copy of this network with every tensor cast to ``dtype``."""
        out = NetworkState(self.arch, self.task, dtype)
        out.params = {k: v.astype(dtype) for k, v in self.params.items()}
        out.buffers = {k: v.astype(dtype) for k, v in self.buffers.items()}
        out.init_adam()
        out.epoch = self.epoch
        return out

    def parameter_count(self) -> int:
        return sum(int(v.size) for v in self.params.values())

    @property
    def num_activation_layers(self) -> int:
        return self.arch.encoder_blocks + self.arch.decoder_blocks + 2

    # -- dense block --------------------------------------------------------
    def _dense_block_forward(self, prefix: str, x, training: bool, tape):
        s = x
        for l in range(self.arch.layers_per_block):
            name = f"{prefix}.l{l}"
            y, bn_cache, new_mean, new_var = batchnorm_forward(
                s,
                self.params[f"{name}.bn.gamma"],
                self.params[f"{name}.bn.beta"],
                self.buffers[f"{name}.bn.running_mean"],
                self.buffers[f"{name}.bn.running_var"],
                training=training,
                momentum=BN_MOMENTUM,
                eps=BN_EPS,
                data_format="nhwc",
            )
            if training:
                self.buffers[f"{name}.bn.running_mean"] = new_mean.astype(self.dtype)
                self.buffers[f"{name}.bn.running_var"] = new_var.astype(self.dtype)
            y, relu_cache = relu_forward(y)
            y, conv_cache = conv2d_forward(
                y, self.params[f"{name}.conv.w"], self.params[f"{name}.conv.b"],
                data_format="nhwc",
            )
            s, cat_cache = concat_channels_forward([s, y], data_format="nhwc")
            if tape is not None:
                tape.append((name, bn_cache, relu_cache, conv_cache, cat_cache))
        return s

    def _dense_block_backward(self, ds, tape, grads):
        for name, bn_cache, relu_cache, conv_cache, cat_cache in reversed(tape):
            ds, dy = concat_channels_backward(ds, cat_cache)
            dy, dw, db = conv2d_backward(dy, conv_cache)
            grads[f"{name}.conv.w"] = grads.get(f"{name}.conv.w", 0) + dw
            grads[f"{name}.conv.b"] = grads.get(f"{name}.conv.b", 0) + db
            dy = relu_backward(dy, relu_cache)
            dy, dgamma, dbeta = batchnorm_backward(dy, bn_cache)
            grads[f"{name}.bn.gamma"] = grads.get(f"{name}.bn.gamma", 0) + dgamma
            grads[f"{name}.bn.beta"] = grads.get(f"{name}.bn.beta", 0) + dbeta
            ds = ds + dy
        return ds

    # -- full network ---------------------------------------------------------
    def forward(self, x: np.ndarray, training: bool = False, want_tape: bool = False,
                taps: list | None = None):
        """Softmax output (batch, 2, s, s) for input (batch, 1, s, s).

        With ``want_tape`` the caches needed by :meth:`backward` are returned;
        with ``taps`` a list collecting the activation-tap arrays (stored
        channels-last, the internal layout) is filled.
        """
        x = np.asarray(x, dtype=self.dtype)
        if x.ndim == 3:
            x = x[None]
        s = self.arch.input_size
        if x.ndim != 4 or x.shape[1] != 1 or x.shape[2] != s or x.shape[3] != s:
            raise ShapeError(
                f"expected input (batch, 1, {s}, {s}), got {x.shape}"
            )
        xn = np.ascontiguousarray(x.transpose(0, 2, 3, 1))
        e = self.arch.encoder_blocks
        tape: dict = {"blocks": [], "pools": [], "ups": []} if want_tape else None

        h, stem_cache = conv2d_forward(
            xn, self.params["stem.conv.w"], self.params["stem.conv.b"], data_format="nhwc"
        )
        if want_tape:
            tape["stem"] = stem_cache
        if taps is not None:
            taps.append(h)

        skips = []
        for i in range(e):
            block_tape = [] if want_tape else None
            h = self._dense_block_forward(f"enc{i}", h, training, block_tape)
            if taps is not None:
                taps.append(h)
            skips.append(h)
            h, pool_cache = maxpool2x2_forward(h, data_format="nhwc")
            if want_tape:
                tape["blocks"].append(block_tape)
                tape["pools"].append(pool_cache)

        for d, i in enumerate(reversed(range(e))):
            h, up_cache = upsample2x_nearest_forward(h, data_format="nhwc")
            h, upconv_cache = conv2d_forward(
                h, self.params[f"dec{i}.up.conv.w"], self.params[f"dec{i}.up.conv.b"],
                data_format="nhwc",
            )
            cat_cache = None
            if self.arch.skip_connections:
                h, cat_cache = concat_channels_forward([h, skips[i]], data_format="nhwc")
            block_tape = [] if want_tape else None
            h = self._dense_block_forward(f"dec{i}", h, training, block_tape)
            if taps is not None:
                taps.append(h)
            if want_tape:
                tape["ups"].append((up_cache, upconv_cache, cat_cache))
                tape["blocks"].append(block_tape)

        z, head_cache = conv2d_forward(
            h, self.params["head.conv.w"], self.params["head.conv.b"], data_format="nhwc"
        )
        p, softmax_cache = softmax_channels_forward(z, data_format="nhwc")
        if taps is not None:
            taps.append(p)
        p_out = np.ascontiguousarray(p.transpose(0, 3, 1, 2))
        if want_tape:
            tape["head"] = head_cache
            tape["softmax"] = softmax_cache
            return p_out, tape
        return p_out

    def backward(self, grad_out: np.ndarray, tape) -> dict[str, np.ndarray]:
        """Parameter gradients for the recorded forward pass.

        ``grad_out`` is dL/d(softmax output) in the public (batch, 2, s, s)
        layout.
        """
        e = self.arch.encoder_blocks
        grads: dict[str, np.ndarray] = {}
        g = np.ascontiguousarray(np.asarray(grad_out, dtype=self.dtype).transpose(0, 2, 3, 1))
        g = softmax_channels_backward(g, tape["softmax"])
        g, dw, db = conv2d_backward(g, tape["head"])
        grads["head.conv.w"] = dw
        grads["head.conv.b"] = db

        skip_grads: dict[int, np.ndarray] = {}
        # decoder stages were taped after the encoder blocks; unwind them in
        # reverse construction order (shallowest first)
        for d in reversed(range(e)):
            i = e - 1 - d  # encoder index this decoder stage consumed
            block_tape = tape["blocks"][e + d]
            up_cache, upconv_cache, cat_cache = tape["ups"][d]
            g = self._dense_block_backward(g, block_tape, grads)
            if cat_cache is not None:
                g, g_skip = concat_channels_backward(g, cat_cache)
                skip_grads[i] = skip_grads.get(i, 0) + g_skip
            g, dw, db = conv2d_backward(g, upconv_cache)
            grads[f"dec{i}.up.conv.w"] = dw
            grads[f"dec{i}.up.conv.b"] = db
            g = upsample2x_nearest_backward(g, up_cache)

        for i in reversed(range(e)):
            g = maxpool2x2_backward(g, tape["pools"][i])
            if i in skip_grads:
                g = g + skip_grads[i]
            g = self._dense_block_backward(g, tape["blocks"][i], grads)

        _, dw, db = conv2d_backward(g, tape["stem"])
        grads["stem.conv.w"] = dw
        grads["stem.conv.b"] = db
        return grads

    # -- inference helpers ----------------------------------------------------
    def predict(self, speckle_input: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Object and background maps for a preprocessed input.

        Binary task: argmax across the softmax channels with ties resolved to
        background, giving {0, 1} maps. Grayscale task: the object channel
        quantized to the 8-bit grid {0, 1/255, ..., 1}; background is its
        exact complement on the same grid.
        """
        p = self.forward(speckle_input, training=False)
        if self.task == "binary":
            obj = (p[:, 0] > p[:, 1]).astype(self.dtype)
        else:
            obj = (np.round(p[:, 0] * 255.0) / 255.0).astype(self.dtype)
        background = (1.0 - obj).astype(self.dtype)
        if np.asarray(speckle_input).ndim == 3:
            return obj[0], background[0]
        return obj, background

    def extract_activations(self, speckle_input: np.ndarray, layer_indices) -> list[np.ndarray]:
        """Post-activation maps at the requested tap indices.

        Maps come back channels-first, (channels, h, w) for a single input or
        (batch, channels, h, w) for a batch. The head tap (last index) is the
        softmax output before any argmax.
        """
        n_layers = self.num_activation_layers
        for idx in layer_indices:
            if not 0 <= idx < n_layers:
                raise IndexError(
                    f"layer index {idx} out of range [0, {n_layers})"
                )
        taps: list = []
        x = np.asarray(speckle_input)
        squeeze = x.ndim == 3
        self.forward(x, training=False, taps=taps)
        out = []
        for idx in layer_indices:
            t = taps[idx].transpose(0, 3, 1, 2)
            out.append(np.ascontiguousarray(t[0] if squeeze else t))
        return out


def build_network(arch: ArchSpec, task: str, seed: int = 0, dtype=np.float32) -> NetworkState:
    """Construct a freshly initialized network (He-normal convs, unit BN)."""
    net = NetworkState(arch, task, dtype)
    rng = np.random.default_rng(seed)
    plan = channel_plan(arch)
    l, g = arch.layers_per_block, arch.growth
    net._add_conv("stem.conv", 1, arch.stem_channels, 3, rng)
    for i in range(arch.encoder_blocks):
        c = plan["enc_in"][i]
        for li in range(l):
            net._add_bn(f"enc{i}.l{li}.bn", c)
            net._add_conv(f"enc{i}.l{li}.conv", c, g, 3, rng)
            c += g
    for d, i in enumerate(reversed(range(arch.encoder_blocks))):
        net._add_conv(f"dec{i}.up.conv", plan["up_in"][d], l * g, 3, rng)
        c = plan["dec_in"][d]
        for li in range(l):
            net._add_bn(f"dec{i}.l{li}.bn", c)
            net._add_conv(f"dec{i}.l{li}.conv", c, g, 3, rng)
            c += g
    net._add_conv("head.conv", plan["head_in"], 2, 3, rng)
    net.init_adam()
    return net


def parameter_count(arch: ArchSpec) -> int:
    """Closed-form parameter count for an architecture (conv + BN + biases)."""
    l, g = arch.layers_per_block, arch.growth
    plan = channel_plan(arch)
    total = (1 * arch.stem_channels * 9) + arch.stem_channels  # stem conv + bias
    for c0 in plan["enc_in"] + plan["dec_in"]:
        for li in range(l):
            c = c0 + li * g
            total += 2 * c  # bn gamma/beta
            total += c * g * 9 + g  # conv + bias
    for c in plan["up_in"]:
        total += c * (l * g) * 9 + l * g
    total += plan["head_in"] * 2 * 9 + 2
    return total
