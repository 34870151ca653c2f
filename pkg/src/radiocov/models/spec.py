"""Declarative model graphs.

A ``ModelSpec`` is an ordered DAG of ``LayerSpec`` nodes (inputs always
precede consumers), rich enough to audit layer counts, parameter counts and
per-layer resolutions without materializing any weights.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass

from ..errors import ContractViolation

CONV_KINDS = ("conv", "transposed_conv")


@dataclass(frozen=True)
class LayerSpec:
    name: str
    kind: str  # input | conv | transposed_conv | maxpool | relu | sigmoid | concat
    inputs: tuple[str, ...] = ()
    in_channels: int = 0
    out_channels: int = 0
    kernel: int = 0
    stride: int = 1
    padding: str = "same"
    tags: tuple[str, ...] = ()


@dataclass(frozen=True)
class InceptionBlockSpec:
    """Parallel multi-kernel block: ``depth`` chained stages of one conv per
    kernel, channel-concatenated, optionally closed by a 1x1 merge conv."""

    kernel_set: tuple[int, ...]
    depth: int = 1
    merge: bool = False

    def __post_init__(self):
        if self.depth < 1:
            raise ContractViolation("inception depth must be >= 1")
        if len(self.kernel_set) < 2:
            raise ContractViolation("inception needs at least two kernel sizes")


@dataclass(frozen=True)
class ModelSpec:
    name: str
    input_channels: int
    base_width: int
    width_scale: float
    layers: tuple[LayerSpec, ...]
    frame_size: int | None = None  # fixed input size; None = any divisible size
    divisor: int = 1  # required spatial divisibility
    output_activation: str = "linear"
    trace_nodes: tuple[str, ...] = ()  # ordered nodes for resolution audits
    meta: tuple[tuple[str, str], ...] = ()

    def layer(self, name: str) -> LayerSpec:
        for l in self.layers:
            if l.name == name:
                return l
        raise KeyError(name)


def validate_spec(spec: ModelSpec) -> None:
    seen: set[str] = set()
    for layer in spec.layers:
        for src in layer.inputs:
            if src not in seen:
                raise ContractViolation(
                    f"layer '{layer.name}' consumes '{src}' before it is defined"
                )
        if layer.name in seen:
            raise ContractViolation(f"duplicate layer name '{layer.name}'")
        seen.add(layer.name)


def count_conv_layers(spec: ModelSpec) -> tuple[int, int]:
    """(total convolution layers, those inside inception structures).

    Counts every conv, strided conv and transposed conv, including the
    output head and convs inside inception blocks.
    """
    total = sum(1 for l in spec.layers if l.kind in CONV_KINDS)
    inception = sum(1 for l in spec.layers if l.kind in CONV_KINDS and "inception" in l.tags)
    return total, inception


def count_params(spec: ModelSpec) -> int:
    """Static parameter count: weights plus biases of every conv-like layer."""
    n = 0
    for l in spec.layers:
        if l.kind in CONV_KINDS:
            n += l.in_channels * l.out_channels * l.kernel * l.kernel + l.out_channels
    return n


def spatial_plan(spec: ModelSpec, input_size: int) -> dict[str, int]:
    """Resolve each node's spatial size, enforcing divisibility contracts."""
    if spec.frame_size is not None and input_size != spec.frame_size:
        raise ContractViolation(
            f"model '{spec.name}' is fixed to {spec.frame_size}x{spec.frame_size} inputs, "
            f"got {input_size}"
        )
    if input_size % spec.divisor:
        raise ContractViolation(
            f"model '{spec.name}' requires input size divisible by {spec.divisor}, "
            f"got {input_size}"
        )
    sizes: dict[str, int] = {}
    for l in spec.layers:
        if l.kind == "input":
            sizes[l.name] = input_size
        elif l.kind == "conv":
            src = sizes[l.inputs[0]]
            if l.stride == 1:
                sizes[l.name] = src if l.padding == "same" else src - l.kernel + 1
            else:
                if src % l.stride:
                    raise ContractViolation(
                        f"strided layer '{l.name}' needs size divisible by {l.stride}, got {src}"
                    )
                sizes[l.name] = src // l.stride
        elif l.kind == "transposed_conv":
            sizes[l.name] = sizes[l.inputs[0]] * 2
        elif l.kind == "maxpool":
            src = sizes[l.inputs[0]]
            if src % 2:
                raise ContractViolation(f"maxpool '{l.name}' needs an even size, got {src}")
            sizes[l.name] = src // 2
        elif l.kind == "concat":
            parts = {sizes[s] for s in l.inputs}
            if len(parts) != 1:
                raise ContractViolation(f"concat '{l.name}' mixes sizes {sorted(parts)}")
            sizes[l.name] = parts.pop()
        else:  # relu / sigmoid
            sizes[l.name] = sizes[l.inputs[0]]
    return sizes


def resolution_trace(spec: ModelSpec, input_size: int | None = None) -> list[int]:
    """Spatial sizes of the spec's designated trace nodes, in order."""
    if not spec.trace_nodes:
        raise ContractViolation(f"model '{spec.name}' defines no trace nodes")
    size = input_size if input_size is not None else (spec.frame_size or 0)
    sizes = spatial_plan(spec, size)
    return [sizes[name] for name in spec.trace_nodes]


def spec_to_dict(spec: ModelSpec) -> dict:
    return asdict(spec)


def spec_from_dict(doc: dict) -> ModelSpec:
    layers = tuple(
        LayerSpec(
            name=l["name"],
            kind=l["kind"],
            inputs=tuple(l["inputs"]),
            in_channels=l["in_channels"],
            out_channels=l["out_channels"],
            kernel=l["kernel"],
            stride=l["stride"],
            padding=l["padding"],
            tags=tuple(l["tags"]),
        )
        for l in doc["layers"]
    )
    spec = ModelSpec(
        name=doc["name"],
        input_channels=doc["input_channels"],
        base_width=doc["base_width"],
        width_scale=doc["width_scale"],
        layers=layers,
        frame_size=doc.get("frame_size"),
        divisor=doc.get("divisor", 1),
        output_activation=doc.get("output_activation", "linear"),
        trace_nodes=tuple(doc.get("trace_nodes", ())),
        meta=tuple((k, v) for k, v in doc.get("meta", ())),
    )
    validate_spec(spec)
    return spec


def spec_to_json(spec: ModelSpec) -> str:
    return json.dumps(spec_to_dict(spec), sort_keys=True)


def spec_hash(spec: ModelSpec) -> str:
    return hashlib.sha256(spec_to_json(spec).encode()).hexdigest()
