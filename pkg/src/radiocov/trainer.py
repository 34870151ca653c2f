"""Mini-batch training with early stopping, metric tracking and repeats.

Training minimizes MAE on normalized targets; reported errors are
denormalized through the dataset's span so they read in dB. Everything is
seeded: weight init, shuffling and repeat derivation, so identical configs
reproduce identical loss traces.
"""
from __future__ import annotations

import json
import time
from dataclasses import dataclass, field

import numpy as np

from .datapipe import Dataset, Frame, NormalizationSpec
from .errors import ContractViolation, EmptySplitError, NumericError
from .models.runtime import Model, Tape
from .models.spec import ModelSpec, count_params
from .tensorcore.loss import mae_loss, rmse_metric
from .tensorcore.optim import Adam

DEFAULT_BATCH_BY_FRAME = {32: 128, 64: 64, 128: 16, 256: 8}
DEFAULT_PATIENCE = 3
MIN_DELTA = 1e-5  # an epoch must beat the best test MAE by this much to count


@dataclass
class TrainConfig:
    batch_size: int | None = None  # None: resolved from the frame size table
    max_epochs: int = 100
    patience: int = DEFAULT_PATIENCE
    lr: float = 0.001
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    shuffle_seed: int = 0
    min_delta: float = MIN_DELTA
    width_scale: float = 0.125  # carried for builders/CLI; not used by train()

    def __post_init__(self):
        if self.batch_size is not None and self.batch_size < 1:
            raise ContractViolation("batch_size must be >= 1")
        if self.patience < 1:
            raise ContractViolation("patience must be >= 1")

    def resolve_batch(self, frame_size: int) -> int:
        if self.batch_size is not None:
            return self.batch_size
        return DEFAULT_BATCH_BY_FRAME.get(frame_size, 32)


@dataclass
class TrainReport:
    epochs: list[dict] = field(default_factory=list)  # {epoch, train_mae, test_mae}
    best_epoch: int = 0
    stopped_epoch: int = 0
    best_test_mae_norm: float = float("inf")
    best_test_mae_dbm: float = float("inf")
    rmse_norm: float = float("inf")
    span_db: float = 0.0
    wall_seconds: float = 0.0
    checkpoint_path: str | None = None

    def to_dict(self) -> dict:
        return {
            "epochs": self.epochs,
            "best_epoch": self.best_epoch,
            "stopped_epoch": self.stopped_epoch,
            "best_test_mae_norm": self.best_test_mae_norm,
            "best_test_mae_dbm": self.best_test_mae_dbm,
            "rmse_norm": self.rmse_norm,
            "span_db": self.span_db,
            "wall_seconds": self.wall_seconds,
            "checkpoint_path": self.checkpoint_path,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def stop_after(history: list[float], patience: int, min_delta: float = MIN_DELTA) -> bool:
    """True once the last `patience` epochs all failed to improve the best."""
    if len(history) <= patience:
        return False
    best = min(history[:-patience])
    return all(v > best - min_delta for v in history[-patience:])


def _stack(frames: list[Frame]) -> tuple[np.ndarray, np.ndarray]:
    x = np.stack([f.input for f in frames]).astype(np.float32)
    y = np.stack([f.target for f in frames]).astype(np.float32)
    return x, y


def _batched_mae(model: Model, x: np.ndarray, y: np.ndarray, batch: int) -> float:
    total = 0.0
    for i in range(0, len(x), batch):
        pred = model.predict(x[i : i + batch])
        total += float(np.sum(np.abs(pred - y[i : i + batch]), dtype=np.float64))
    return total / y.size


def train(
    spec: ModelSpec,
    dataset: Dataset,
    config: TrainConfig = TrainConfig(),
    init_seed: int | None = None,
) -> tuple[Model, TrainReport]:
    train_frames = dataset.subset("train")
    test_frames = dataset.subset("test")
    if not train_frames:
        raise EmptySplitError("dataset has no train frames")
    if not test_frames:
        raise EmptySplitError("dataset has no test frames")

    seed = config.shuffle_seed if init_seed is None else init_seed
    model = Model(spec, seed=seed)
    optimizer = Adam(
        model.parameters(),
        lr=config.lr,
        beta1=config.beta1,
        beta2=config.beta2,
        epsilon=config.epsilon,
    )
    rng = np.random.default_rng(seed)
    batch = config.resolve_batch(dataset.frame_size)

    x_train, y_train = _stack(train_frames)
    x_test, y_test = _stack(test_frames)

    report = TrainReport(span_db=dataset.norm.span_db)
    best_state: list[np.ndarray] | None = None
    test_history: list[float] = []
    start = time.perf_counter()

    for epoch in range(1, config.max_epochs + 1):
        order = rng.permutation(len(x_train))
        epoch_abs = 0.0
        for bi, lo in enumerate(range(0, len(order), batch)):
            idx = order[lo : lo + batch]
            tape = Tape()
            pred = model.forward(x_train[idx], tape=tape)
            loss, grad = mae_loss(pred, y_train[idx])
            if not np.isfinite(loss):
                raise NumericError(f"non-finite loss at epoch {epoch}, batch {bi}")
            optimizer.zero_grad()
            model.backward(grad, tape)
            optimizer.step()
            epoch_abs += loss * pred.size
        train_mae = epoch_abs / y_train.size

        test_mae = _batched_mae(model, x_test, y_test, batch)
        report.epochs.append(
            {"epoch": epoch, "train_mae": train_mae, "test_mae": test_mae}
        )
        test_history.append(test_mae)

        if test_mae < report.best_test_mae_norm - config.min_delta:
            report.best_test_mae_norm = test_mae
            report.best_epoch = epoch
            best_state = [p.value.copy() for p in model.parameters()]
        report.stopped_epoch = epoch
        if stop_after(test_history, config.patience, config.min_delta):
            break

    if best_state is not None:
        for p, v in zip(model.parameters(), best_state):
            p.value[...] = v

    report.best_test_mae_dbm = report.best_test_mae_norm * dataset.norm.span_db
    rmse_total, count = 0.0, 0
    for i in range(0, len(x_test), batch):
        pred = model.predict(x_test[i : i + batch])
        rmse_total += rmse_metric(pred, y_test[i : i + batch]) ** 2 * pred.size
        count += pred.size
    report.rmse_norm = float(np.sqrt(rmse_total / count))
    report.wall_seconds = time.perf_counter() - start
    return model, report


def evaluate(model, frames: list[Frame], norm: NormalizationSpec, batch: int = 64) -> dict:
    """Frame-averaged metrics for anything with a ``predict`` method."""
    if not frames:
        raise EmptySplitError("nothing to evaluate")
    x, y = _stack(frames)
    maes, rmses = [], []
    for i in range(0, len(x), batch):
        pred = model.predict(x[i : i + batch])
        chunk = y[i : i + batch]
        maes.extend(np.mean(np.abs(pred - chunk), axis=(1, 2, 3), dtype=np.float64))
        rmses.extend(np.sqrt(np.mean((pred - chunk) ** 2, axis=(1, 2, 3), dtype=np.float64)))
    mae_norm = float(np.mean(maes))
    return {
        "mae_norm": mae_norm,
        "mae_dbm": mae_norm * norm.span_db,
        "rmse_norm": float(np.sqrt(np.mean(np.square(rmses)))),
    }


@dataclass(frozen=True)
class ExperimentRow:
    """One results-table row: min/max/average denormalized MAE over repeats."""

    model: str
    kernel_size: str
    mae_min_db: float
    mae_max_db: float
    mae_avg_db: float
    time_hr: float
    param_count: int

    def deterministic_fields(self) -> tuple:
        return (
            self.model,
            self.kernel_size,
            round(self.mae_min_db, 9),
            round(self.mae_max_db, 9),
            round(self.mae_avg_db, 9),
            self.param_count,
        )

    def to_dict(self) -> dict:
        return {
            "model": self.model,
            "kernel_size": self.kernel_size,
            "mae_min_db": self.mae_min_db,
            "mae_max_db": self.mae_max_db,
            "mae_avg_db": self.mae_avg_db,
            "time_hr": self.time_hr,
            "param_count": self.param_count,
        }


def repeat_experiment(
    spec: ModelSpec,
    dataset: Dataset,
    config: TrainConfig,
    repeats: int,
    master_seed: int = 0,
    kernel_label: str | None = None,
) -> ExperimentRow:
    """Train ``repeats`` times with seeds master_seed + i and summarize."""
    if repeats < 1:
        raise ContractViolation("repeats must be >= 1")
    maes = []
    start = time.perf_counter()
    for i in range(repeats):
        _, report = train(spec, dataset, config, init_seed=master_seed + i)
        maes.append(report.best_test_mae_dbm)
    elapsed_hr = (time.perf_counter() - start) / 3600.0
    kernel = kernel_label
    if kernel is None:
        meta = dict(spec.meta)
        kernel = f"({meta['kernel_set']})" if "kernel_set" in meta else "3"
    return ExperimentRow(
        model=spec.name,
        kernel_size=kernel,
        mae_min_db=min(maes),
        mae_max_db=max(maes),
        mae_avg_db=float(np.mean(maes)),
        time_hr=elapsed_hr,
        param_count=count_params(spec),
    )


def format_experiment_table(rows: list[ExperimentRow]) -> str:
    """Aligned plain-text table in the standard results layout."""
    header = ("Model", "Kernel size", "min", "max", "average", "Time (hr)", "# of parameters")
    cells = [header]
    for r in rows:
        cells.append(
            (
                r.model,
                r.kernel_size,
                f"{r.mae_min_db:.3f}",
                f"{r.mae_max_db:.3f}",
                f"{r.mae_avg_db:.3f}",
                f"{r.time_hr:.3f}",
                f"{r.param_count:,}",
            )
        )
    widths = [max(len(row[i]) for row in cells) for i in range(len(header))]
    lines = ["  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip() for row in cells]
    lines.insert(1, "-" * len(lines[0]))
    return "\n".join(lines)
