import numpy as np
import pytest

from radiocov.datapipe import Dataset, NormalizationSpec
from radiocov.errors import ContractViolation, EmptySplitError
from radiocov.models import build_unet, build_unet_si
from radiocov.trainer import (
    ExperimentRow,
    TrainConfig,
    evaluate,
    format_experiment_table,
    repeat_experiment,
    stop_after,
    train,
)


def _quick_config(**kw):
    base = dict(batch_size=16, max_epochs=2, patience=3, shuffle_seed=0)
    base.update(kw)
    return TrainConfig(**base)


SMALL_UNET = build_unet(3, base_width=16, width_scale=1.0)
TINY_SI37 = build_unet_si(37, width_scale=0.05)


class TestEarlyStopping:
    def test_stops_after_three_worsening_epochs(self):
        # best at epoch 2, worsening from epoch 3 on: stop exactly at epoch 5
        history = [0.50, 0.40, 0.45, 0.46, 0.47]
        assert not stop_after(history[:3], patience=3)
        assert not stop_after(history[:4], patience=3)
        assert stop_after(history[:5], patience=3)

    def test_no_stop_while_improving(self):
        assert not stop_after([0.5, 0.4, 0.3, 0.2, 0.1], patience=3)

    def test_tiny_improvement_does_not_reset(self):
        # improvements below min_delta do not count
        assert stop_after([0.4, 0.4 - 2e-6, 0.4 - 4e-6, 0.4 - 6e-6], patience=3)

    def test_patience_one(self):
        assert stop_after([0.3, 0.4], patience=1)
        assert not stop_after([0.3, 0.2], patience=1)


class TestTrain:
    def test_identical_seeds_identical_traces(self, tiny_dataset):
        cfg = _quick_config()
        _, r1 = train(TINY_SI37, tiny_dataset, cfg)
        _, r2 = train(TINY_SI37, tiny_dataset, cfg)
        assert r1.epochs == r2.epochs

    def test_different_seeds_differ(self, tiny_dataset):
        _, r1 = train(TINY_SI37, tiny_dataset, _quick_config(shuffle_seed=0))
        _, r2 = train(TINY_SI37, tiny_dataset, _quick_config(shuffle_seed=1))
        assert r1.epochs != r2.epochs

    def test_best_checkpoint_not_worse_than_any_epoch(self, tiny_dataset):
        _, report = train(TINY_SI37, tiny_dataset, _quick_config(max_epochs=4))
        observed = [e["test_mae"] for e in report.epochs]
        assert report.best_test_mae_norm <= min(observed) + 1e-12

    def test_denormalization_identity(self, tiny_dataset):
        _, report = train(TINY_SI37, tiny_dataset, _quick_config())
        assert report.best_test_mae_dbm == pytest.approx(
            report.best_test_mae_norm * tiny_dataset.norm.span_db
        )

    def test_learning_occurs(self, tiny_dataset):
        _, report = train(SMALL_UNET, tiny_dataset, _quick_config(max_epochs=6, batch_size=8))
        first = report.epochs[0]["train_mae"]
        later = min(e["train_mae"] for e in report.epochs[1:])
        assert later < first

    def test_empty_split_rejected(self, tiny_dataset):
        train_only = Dataset(
            frames=tiny_dataset.frames,
            frame_size=tiny_dataset.frame_size,
            encoding=tiny_dataset.encoding,
            norm=tiny_dataset.norm,
            split=["train"] * len(tiny_dataset.frames),
        )
        with pytest.raises(EmptySplitError):
            train(TINY_SI37, train_only, _quick_config())

    def test_overfit_eight_frames(self, tiny_dataset):
        frames = tiny_dataset.frames[:8]
        tiny = Dataset(
            frames=frames,
            frame_size=tiny_dataset.frame_size,
            encoding=tiny_dataset.encoding,
            norm=tiny_dataset.norm,
            split=["train"] * 8,
        )
        both = Dataset(
            frames=frames + frames,
            frame_size=tiny.frame_size,
            encoding=tiny.encoding,
            norm=tiny.norm,
            split=["train"] * 8 + ["test"] * 8,
        )
        cfg = TrainConfig(batch_size=2, max_epochs=60, patience=60, shuffle_seed=0)
        _, report = train(SMALL_UNET, both, cfg)
        assert report.best_test_mae_norm < 0.08  # full <0.01 target runs in acceptance


class TestEvaluate:
    def test_identity_predictor_scores_zero(self, tiny_dataset):
        frames = tiny_dataset.subset("test")
        offset = 0

        class Replay:
            def predict(self, x):
                nonlocal offset
                out = np.stack([f.target for f in frames[offset : offset + len(x)]])
                offset += len(x)
                return out

        metrics = evaluate(Replay(), frames, tiny_dataset.norm)
        assert metrics == {"mae_norm": 0.0, "mae_dbm": 0.0, "rmse_norm": 0.0}

    def test_constant_half_matches_hand_computation(self, tiny_dataset):
        frames = tiny_dataset.subset("test")[:5]

        class Half:
            def predict(self, x):
                return np.full((len(x), 1, 16, 16), 0.5, dtype=np.float32)

        metrics = evaluate(Half(), frames, tiny_dataset.norm)
        manual = float(np.mean([np.mean(np.abs(f.target - 0.5)) for f in frames]))
        assert metrics["mae_norm"] == pytest.approx(manual, abs=1e-7)

    def test_dbm_ratio_equals_span(self, tiny_dataset):
        frames = tiny_dataset.subset("test")[:4]

        class Half:
            def predict(self, x):
                return np.full((len(x), 1, 16, 16), 0.5, dtype=np.float32)

        metrics = evaluate(Half(), frames, tiny_dataset.norm)
        assert metrics["mae_dbm"] / metrics["mae_norm"] == pytest.approx(
            tiny_dataset.norm.span_db
        )

    def test_empty_frames_rejected(self, tiny_dataset):
        with pytest.raises(EmptySplitError):
            evaluate(None, [], tiny_dataset.norm)


class TestRepeatExperiment:
    def test_single_repeat_collapses(self, tiny_dataset):
        row = repeat_experiment(TINY_SI37, tiny_dataset, _quick_config(), repeats=1)
        assert row.mae_min_db == row.mae_max_db == row.mae_avg_db

    def test_deterministic_rows(self, tiny_dataset):
        cfg = _quick_config()
        r1 = repeat_experiment(TINY_SI37, tiny_dataset, cfg, repeats=2, master_seed=42)
        r2 = repeat_experiment(TINY_SI37, tiny_dataset, cfg, repeats=2, master_seed=42)
        assert r1.deterministic_fields() == r2.deterministic_fields()

    def test_row_has_results_table_columns(self, tiny_dataset):
        row = repeat_experiment(TINY_SI37, tiny_dataset, _quick_config(), repeats=1)
        assert set(row.to_dict()) == {
            "model", "kernel_size", "mae_min_db", "mae_max_db", "mae_avg_db",
            "time_hr", "param_count",
        }
        table = format_experiment_table([row])
        for column in ("Model", "Kernel size", "min", "max", "average",
                       "Time (hr)", "# of parameters"):
            assert column in table

    def test_zero_repeats_rejected(self, tiny_dataset):
        with pytest.raises(ContractViolation):
            repeat_experiment(TINY_SI37, tiny_dataset, _quick_config(), repeats=0)


class TestConfig:
    def test_batch_defaults_by_frame_size(self):
        cfg = TrainConfig()
        assert cfg.resolve_batch(32) == 128
        assert cfg.resolve_batch(64) == 64
        assert cfg.resolve_batch(128) == 16
        assert cfg.resolve_batch(256) == 8

    def test_invalid_values_rejected(self):
        with pytest.raises(ContractViolation):
            TrainConfig(batch_size=0)
        with pytest.raises(ContractViolation):
            TrainConfig(patience=0)
