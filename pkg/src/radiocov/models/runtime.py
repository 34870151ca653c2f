"""Materialize a ModelSpec into runnable layers and drive forward/backward.

Forward passes keep all activation state on a caller-owned tape, so a
frozen model can serve concurrent read-only predictions; a training step
owns its tape and parameter set exclusively.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import ContractViolation
from ..tensorcore.layers import Concat, Conv2D, MaxPool2D, ReLU, Sigmoid, TransposedConv2D
from ..tensorcore.params import Parameter
from .spec import ModelSpec, spatial_plan, validate_spec


@dataclass
class Tape:
    """Activations plus per-layer scratch buffers from one forward pass."""

    values: dict = field(default_factory=dict)
    aux: dict = field(default_factory=dict)


def _build_layer(node, rng: np.random.Generator):
    if node.kind == "conv":
        return Conv2D(
            node.in_channels,
            node.out_channels,
            node.kernel,
            stride=node.stride,
            padding=node.padding,
            rng=rng,
            name=node.name,
        )
    if node.kind == "transposed_conv":
        return TransposedConv2D(
            node.in_channels, node.out_channels, kernel=node.kernel, rng=rng, name=node.name
        )
    if node.kind == "maxpool":
        return MaxPool2D()
    if node.kind == "relu":
        return ReLU()
    if node.kind == "sigmoid":
        return Sigmoid()
    if node.kind == "concat":
        return Concat()
    raise ContractViolation(f"cannot materialize layer kind '{node.kind}'")


class Model:
    def __init__(self, spec: ModelSpec, seed: int = 0):
        validate_spec(spec)
        self.spec = spec
        rng = np.random.default_rng(seed)
        self.layers = {
            node.name: _build_layer(node, rng)
            for node in spec.layers
            if node.kind != "input"
        }

    def parameters(self) -> list[Parameter]:
        params: list[Parameter] = []
        for node in self.spec.layers:
            if node.kind != "input":
                params.extend(self.layers[node.name].parameters())
        return params

    def _check_input(self, x: np.ndarray) -> None:
        if x.ndim != 4:
            raise ContractViolation(f"expected NCHW input, got shape {x.shape}")
        want = self.spec.input_channels
        if x.shape[1] != want:
            raise ContractViolation(f"expected {want} input channels, got {x.shape[1]}")
        if x.shape[2] != x.shape[3]:
            raise ContractViolation(f"expected square input, got {x.shape[2]}x{x.shape[3]}")
        spatial_plan(self.spec, x.shape[2])  # raises on divisibility violations

    def forward(
        self,
        x: np.ndarray,
        tape: "Tape | None" = None,
        ablate_edges: frozenset | set = frozenset(),
    ) -> np.ndarray:
        """Run the graph; ``ablate_edges`` zeroes named (src, dst) inputs,
        used by tests to prove skip connections are live."""
        self._check_input(x)
        values: dict[str, np.ndarray] = {}
        for node in self.spec.layers:
            if node.kind == "input":
                values[node.name] = x
                continue
            ins = [
                np.zeros_like(values[s]) if (s, node.name) in ablate_edges else values[s]
                for s in node.inputs
            ]
            aux = None
            if tape is not None:
                aux = tape.aux.setdefault(node.name, {})
            values[node.name] = self.layers[node.name].forward(*ins, aux=aux)
        if tape is not None:
            tape.values.update(values)
        return values[self.spec.layers[-1].name]

    def backward(self, grad_out: np.ndarray, tape: "Tape") -> None:
        """Accumulate parameter gradients from a forward tape."""
        grads: dict[str, np.ndarray] = {self.spec.layers[-1].name: grad_out}
        for node in reversed(self.spec.layers):
            if node.kind == "input":
                continue
            g = grads.pop(node.name, None)
            if g is None:
                continue
            ins = [tape.values[s] for s in node.inputs]
            layer = self.layers[node.name]
            need_dx = node.inputs != ("input",)
            if node.kind == "concat":
                upstream = layer.backward(g, *ins)
            else:
                upstream = [
                    layer.backward(
                        g, ins[0], aux=tape.aux.get(node.name), need_input_grad=need_dx
                    )
                ]
            for src, gx in zip(node.inputs, upstream):
                if gx is None:
                    continue
                if src in grads:
                    grads[src] = grads[src] + gx
                else:
                    grads[src] = gx

    def predict(self, x: np.ndarray) -> np.ndarray:
        return self.forward(x)


def materialize(spec: ModelSpec, seed: int = 0) -> Model:
    return Model(spec, seed=seed)
