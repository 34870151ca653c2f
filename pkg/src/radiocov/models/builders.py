"""Assembly of every supported architecture from graph primitives.

All builders emit a ``ModelSpec`` whose conv-layer counts are invariant
under ``width_scale``; widths are the only thing scaling touches. Families:

* baseline CNN: 24 same-padding convs plus a 1x1 output head.
* UNET: symmetric encoder/decoder, features doubling per level, skip
  concatenations, 1x1 single-channel head; 24 convs in its default depth-4
  configuration with max pooling. ``downsample="strided"`` swaps each pool
  for an extra stride-2 conv.
* UNET-SI family (37/65/73/91): strided downsampling fused into each
  encoder level's trailing conv(s) plus multi-kernel inception blocks on
  the skip paths. The per-variant plan table pins the layer counts
  exactly: totals 37/65/73/91 with 13/23/23/31 convs inside the inception
  structures, invariant under width scaling.
* RadioUNET: a two-stage cascade; stage 1 follows that architecture's
  known per-layer resolution/kernel schedule over 17 convs, stage 2
  refines [input, stage-1 output] with a lightweight 24-conv UNET,
  41 convs in total.
"""
from __future__ import annotations

from dataclasses import dataclass

from ..errors import ContractViolation
from .spec import InceptionBlockSpec, LayerSpec, ModelSpec, validate_spec

DEFAULT_UNET_BASE_WIDTH = 64
DEFAULT_SI_BASE_WIDTH = 104
UNET_SI_VARIANTS = (37, 65, 73, 91)


def _scaled(width: int, scale: float) -> int:
    return max(1, round(width * scale))


class _Graph:
    """Ordered layer list plus per-node channel bookkeeping."""

    def __init__(self, input_channels: int):
        self.layers: list[LayerSpec] = [
            LayerSpec(name="input", kind="input", out_channels=input_channels)
        ]
        self.channels: dict[str, int] = {"input": input_channels}
        self._n = 0

    def _name(self, prefix: str) -> str:
        self._n += 1
        return f"{prefix}{self._n}"

    def _add(self, layer: LayerSpec) -> str:
        self.layers.append(layer)
        self.channels[layer.name] = layer.out_channels
        return layer.name

    def conv(self, src, out_channels, kernel, stride=1, padding="same", tags=(), name=None):
        return self._add(
            LayerSpec(
                name=name or self._name("conv"),
                kind="conv",
                inputs=(src,),
                in_channels=self.channels[src],
                out_channels=out_channels,
                kernel=kernel,
                stride=stride,
                padding=padding,
                tags=tuple(tags),
            )
        )

    def tconv(self, src, out_channels, kernel=2, tags=(), name=None):
        return self._add(
            LayerSpec(
                name=name or self._name("tconv"),
                kind="transposed_conv",
                inputs=(src,),
                in_channels=self.channels[src],
                out_channels=out_channels,
                kernel=kernel,
                stride=2,
                tags=tuple(tags),
            )
        )

    def relu(self, src):
        return self._add(
            LayerSpec(
                name=self._name("relu"),
                kind="relu",
                inputs=(src,),
                in_channels=self.channels[src],
                out_channels=self.channels[src],
            )
        )

    def sigmoid(self, src):
        return self._add(
            LayerSpec(
                name=self._name("sigmoid"),
                kind="sigmoid",
                inputs=(src,),
                in_channels=self.channels[src],
                out_channels=self.channels[src],
            )
        )

    def maxpool(self, src):
        return self._add(
            LayerSpec(
                name=self._name("pool"),
                kind="maxpool",
                inputs=(src,),
                in_channels=self.channels[src],
                out_channels=self.channels[src],
                kernel=2,
                stride=2,
            )
        )

    def concat(self, srcs, tags=()):
        return self._add(
            LayerSpec(
                name=self._name("concat"),
                kind="concat",
                inputs=tuple(srcs),
                out_channels=sum(self.channels[s] for s in srcs),
                tags=tuple(tags),
            )
        )

    def conv_relu(self, src, out_channels, kernel, stride=1, tags=()):
        return self.relu(self.conv(src, out_channels, kernel, stride=stride, tags=tags))


def _head(g: _Graph, src: str, output_activation: str) -> None:
    out = g.conv(src, 1, 1, tags=("head",))
    if output_activation == "sigmoid":
        g.sigmoid(out)
    elif output_activation != "linear":
        raise ContractViolation(f"unknown output activation '{output_activation}'")


def build_baseline_cnn(
    kernel: int = 3,
    width: int = 32,
    *,
    input_channels: int = 2,
    width_scale: float = 1.0,
    output_activation: str = "linear",
) -> ModelSpec:
    """24 same-padding kxk convs with ReLU, then a 1x1 single-channel head."""
    if kernel % 2 == 0:
        raise ContractViolation(f"CNN kernel must be odd, got {kernel}")
    w = _scaled(width, width_scale)
    g = _Graph(input_channels)
    cur = "input"
    for _ in range(24):
        cur = g.conv_relu(cur, w, kernel)
    _head(g, cur, output_activation)
    spec = ModelSpec(
        name=f"cnn-k{kernel}",
        input_channels=input_channels,
        base_width=width,
        width_scale=width_scale,
        layers=tuple(g.layers),
        output_activation=output_activation,
    )
    validate_spec(spec)
    return spec


def _unet_backbone(
    g: _Graph,
    src: str,
    *,
    kernel: int,
    depth: int,
    base_width: int,
    downsample: str,
    width_scale: float,
    convs_per_level: int = 2,
    bottleneck_convs: int = 2,
) -> str:
    """Classic symmetric U: stem, encoder levels, bottleneck, decoder levels.

    Returns the last decoder node; the caller attaches the head.
    """
    widths = [_scaled(base_width * (1 << i), width_scale) for i in range(depth)]
    bottleneck_w = _scaled(base_width * (1 << depth), width_scale)

    cur = g.conv_relu(src, widths[0], kernel, tags=("stem",))
    skips: list[str] = []
    for i in range(depth):
        cur = g.conv_relu(cur, widths[i], kernel)
        for _ in range(convs_per_level - 1):
            cur = g.conv_relu(cur, widths[i], kernel)
        skips.append(cur)
        if downsample == "maxpool":
            cur = g.maxpool(cur)
        elif downsample == "strided":
            cur = g.conv_relu(cur, widths[i], kernel, stride=2, tags=("downsample",))
        else:
            raise ContractViolation(f"unknown downsample '{downsample}'")

    cur = g.conv_relu(cur, bottleneck_w, kernel)
    for _ in range(bottleneck_convs - 1):
        cur = g.conv_relu(cur, bottleneck_w, kernel)

    for i in reversed(range(depth)):
        up = g.tconv(cur, widths[i], kernel=2)
        cur = g.concat([up, skips[i]], tags=("skip",))
        cur = g.conv_relu(cur, widths[i], kernel)
        for _ in range(convs_per_level - 1):
            cur = g.conv_relu(cur, widths[i], kernel)
    return cur


def build_unet(
    kernel: int = 3,
    depth: int = 4,
    base_width: int = DEFAULT_UNET_BASE_WIDTH,
    downsample: str = "maxpool",
    *,
    input_channels: int = 2,
    width_scale: float = 1.0,
    output_activation: str = "linear",
) -> ModelSpec:
    """Symmetric UNET; the default depth-4 max-pooling layout has 24 convs."""
    if depth < 1:
        raise ContractViolation("depth must be >= 1")
    g = _Graph(input_channels)
    last = _unet_backbone(
        g,
        "input",
        kernel=kernel,
        depth=depth,
        base_width=base_width,
        downsample=downsample,
        width_scale=width_scale,
    )
    _head(g, last, output_activation)
    spec = ModelSpec(
        name=f"unet-k{kernel}" + ("-strided" if downsample == "strided" else ""),
        input_channels=input_channels,
        base_width=base_width,
        width_scale=width_scale,
        layers=tuple(g.layers),
        divisor=1 << depth,
        output_activation=output_activation,
    )
    validate_spec(spec)
    return spec


@dataclass(frozen=True)
class _SiPlan:
    enc_convs: int  # convs per encoder level; the trailing `enc_strided` are stride 2
    enc_strided: int
    bottleneck: int
    dec_tconvs: int
    dec_convs: int
    skip_stages: tuple[int, ...]  # inception stages per level, shallow to deep
    skip_merge: tuple[bool, ...]  # trailing 1x1 merge conv per level


# Canonical plans pinning the family's totals: (total, inception) =
# 37/13, 65/23, 73/23, 91/31. UNET-SI-73 is the 65 layout with a second
# strided conv per encoder level (and a second upsampling conv to match).
_SI_PLANS: dict[int, _SiPlan] = {
    37: _SiPlan(2, 1, 2, 1, 2, (1, 1, 1, 1), (False, False, False, True)),
    65: _SiPlan(4, 1, 4, 1, 4, (1, 2, 2, 2), (False, False, True, True)),
    73: _SiPlan(5, 2, 4, 2, 4, (1, 2, 2, 2), (False, False, True, True)),
    91: _SiPlan(6, 1, 6, 1, 6, (1, 3, 3, 3), (False, False, False, True)),
}
_SI_DEPTH = 4


def inception_branch_widths(width: int, kernel_set: tuple[int, ...]) -> list[int]:
    """Split a level width across branches; remainder goes to the smallest kernel."""
    base = width // len(kernel_set)
    remainder = width - base * len(kernel_set)
    smallest = kernel_set.index(min(kernel_set))
    return [base + (remainder if i == smallest else 0) for i in range(len(kernel_set))]


def _inception_block(g: _Graph, src: str, width: int, block: InceptionBlockSpec) -> str:
    cur = src
    for _ in range(block.depth):
        outs = []
        for k, branch_w in zip(block.kernel_set, inception_branch_widths(width, block.kernel_set)):
            outs.append(g.conv_relu(cur, branch_w, k, tags=("inception",)))
        cur = g.concat(outs, tags=("inception",))
    if block.merge:
        cur = g.conv_relu(cur, width, 1, tags=("inception", "inception-merge"))
    return cur


def build_unet_si(
    variant: int,
    kernel_set: tuple[int, ...] = (1, 3, 5),
    width_scale: float = 1.0,
    *,
    base_width: int = DEFAULT_SI_BASE_WIDTH,
    input_channels: int = 2,
    kernel: int = 3,
    output_activation: str = "linear",
) -> ModelSpec:
    """UNET with fused strided downsampling and inception blocks on the skips."""
    if variant not in _SI_PLANS:
        raise ContractViolation(
            f"unknown UNET-SI variant {variant}; supported: {sorted(_SI_PLANS)}"
        )
    plan = _SI_PLANS[variant]
    widths = [_scaled(base_width * (1 << i), width_scale) for i in range(_SI_DEPTH)]
    bottleneck_w = _scaled(base_width * (1 << _SI_DEPTH), width_scale)

    g = _Graph(input_channels)
    cur = g.conv_relu("input", widths[0], kernel, tags=("stem",))

    skips: list[str] = []
    for i in range(_SI_DEPTH):
        cur = g.conv_relu(cur, widths[i], kernel)
        for _ in range(plan.enc_convs - plan.enc_strided - 1):
            cur = g.conv_relu(cur, widths[i], kernel)
        block = InceptionBlockSpec(
            kernel_set=tuple(kernel_set), depth=plan.skip_stages[i], merge=plan.skip_merge[i]
        )
        skips.append(_inception_block(g, cur, widths[i], block))
        for _ in range(plan.enc_strided):
            cur = g.conv_relu(cur, widths[i], kernel, stride=2, tags=("downsample",))

    cur = g.conv_relu(cur, bottleneck_w, kernel)
    for _ in range(plan.bottleneck - 1):
        cur = g.conv_relu(cur, bottleneck_w, kernel)

    for i in reversed(range(_SI_DEPTH)):
        up = g.tconv(cur, widths[i], kernel=2)
        for _ in range(plan.dec_tconvs - 1):
            up = g.tconv(up, widths[i], kernel=2)
        cur = g.concat([up, skips[i]], tags=("skip",))
        cur = g.conv_relu(cur, widths[i], kernel)
        for _ in range(plan.dec_convs - 1):
            cur = g.conv_relu(cur, widths[i], kernel)

    _head(g, cur, output_activation)
    spec = ModelSpec(
        name=f"unet-si-{variant}",
        input_channels=input_channels,
        base_width=base_width,
        width_scale=width_scale,
        layers=tuple(g.layers),
        divisor=(1 << plan.enc_strided) ** _SI_DEPTH,
        output_activation=output_activation,
        meta=(("kernel_set", ",".join(str(k) for k in kernel_set)),),
    )
    validate_spec(spec)
    return spec


# Stage-1 schedule: the architecture's standard per-layer resolutions and
# kernel sizes; channel widths are scaled to land the full model at its
# ~4M parameter budget (the raw widths would come to ~9.7M).
_R1_RESOLUTIONS = (256, 256, 128, 64, 64, 32, 32, 16, 8, 16, 32, 32, 64, 64, 128, 256, 256, 256)
_R1_CHANNELS = (None, 4, 24, 36, 48, 60, 72, 120, 240, 240, 144, 120, 96, 72, 48, 17, 19, 1)
_R1_KERNELS = (3, 5, 5, 5, 5, 3, 5, 5, 4, 4, 3, 6, 5, 6, 6, 5, 2)
_R2_BASE_WIDTH = 8
RADIOUNET_FRAME_SIZE = 256


def build_radiounet(
    width_scale: float = 1.0,
    *,
    input_channels: int = 2,
    output_activation: str = "linear",
) -> ModelSpec:
    """Two-stage cascade fixed to 256x256 frames, 41 convs in total."""
    g = _Graph(input_channels)
    trace = ["input"]
    cur = "input"
    for i in range(17):
        res_in, res_out = _R1_RESOLUTIONS[i], _R1_RESOLUTIONS[i + 1]
        out_ch = _R1_CHANNELS[i + 1]
        if out_ch != 1:
            out_ch = _scaled(out_ch, width_scale)
        k = _R1_KERNELS[i]
        if res_out == res_in:
            node = g.conv(cur, out_ch, k, tags=("stage1",))
        elif res_out * 2 == res_in:
            node = g.conv(cur, out_ch, k, stride=2, tags=("stage1", "downsample"))
        elif res_out == res_in * 2:
            node = g.tconv(cur, out_ch, kernel=k, tags=("stage1",))
        else:  # pragma: no cover - schedule is static
            raise ContractViolation(f"bad resolution step {res_in}->{res_out}")
        trace.append(node)
        cur = node if out_ch == 1 else g.relu(node)

    stage2_in = g.concat(["input", cur], tags=("skip", "cascade"))
    last = _unet_backbone(
        g,
        stage2_in,
        kernel=3,
        depth=4,
        base_width=_R2_BASE_WIDTH,
        downsample="maxpool",
        width_scale=width_scale,
    )
    _head(g, last, output_activation)
    spec = ModelSpec(
        name="radiounet",
        input_channels=input_channels,
        base_width=_R2_BASE_WIDTH,
        width_scale=width_scale,
        layers=tuple(g.layers),
        frame_size=RADIOUNET_FRAME_SIZE,
        divisor=32,
        output_activation=output_activation,
        trace_nodes=tuple(trace),
        meta=(("upsampling", "transposed-conv"),),
    )
    validate_spec(spec)
    return spec
