"""Trainable parameters and weight initialization."""
from __future__ import annotations

import numpy as np


class Parameter:
    """A value array plus an accumulated gradient of the same shape."""

    __slots__ = ("value", "grad", "name")

    def __init__(self, value: np.ndarray, name: str = ""):
        self.value = np.asarray(value)
        self.grad = np.zeros_like(self.value)
        self.name = name

    def zero_grad(self) -> None:
        self.grad[...] = 0

    def astype(self, dtype) -> "Parameter":
        p = Parameter(self.value.astype(dtype), self.name)
        p.grad = self.grad.astype(dtype)
        return p

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        return f"Parameter({self.name or 'unnamed'}, shape={self.value.shape})"


def kaiming_uniform(shape, fan_in: int, rng: np.random.Generator, dtype=np.float32) -> np.ndarray:
    """Uniform(-b, b) with b = sqrt(6/fan_in), the standard choice for ReLU nets."""
    bound = float(np.sqrt(6.0 / max(fan_in, 1)))
    return rng.uniform(-bound, bound, size=shape).astype(dtype)
