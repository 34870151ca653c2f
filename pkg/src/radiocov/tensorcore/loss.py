"""Losses and metrics. Reductions accumulate in float64 so sums over 65k
pixels stay stable in float32 pipelines."""
from __future__ import annotations

import numpy as np

from ..errors import ContractViolation


def mae_loss(pred: np.ndarray, target: np.ndarray) -> tuple[float, np.ndarray]:
    """Mean absolute error and its subgradient (sign(0) = 0)."""
    if pred.shape != target.shape:
        raise ContractViolation(f"shape mismatch: pred {pred.shape} vs target {target.shape}")
    diff = pred - target
    loss = float(np.mean(np.abs(diff), dtype=np.float64))
    grad = (np.sign(diff) / diff.size).astype(pred.dtype)
    return loss, grad


def rmse_metric(pred: np.ndarray, target: np.ndarray) -> float:
    if pred.shape != target.shape:
        raise ContractViolation(f"shape mismatch: pred {pred.shape} vs target {target.shape}")
    diff = np.asarray(pred, dtype=np.float64) - np.asarray(target, dtype=np.float64)
    return float(np.sqrt(np.mean(diff * diff)))
