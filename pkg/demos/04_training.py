"""Train a compact coverage predictor end to end on synthetic data and
report results in the min/max/average table layout.

Runs a deliberately small configuration (a few minutes on a laptop CPU).

Run:  python demos/04_training.py
"""
import time
from pathlib import Path

import numpy as np

from radiocov import datapipe, trainer
from radiocov.models import build_unet_si, count_params
from radiocov.models.checkpoint import save_checkpoint
from radiocov.raytrace import PropagationConfig, simulate
from radiocov.scene import random_scene

OUT = Path(__file__).parent / "out"
OUT.mkdir(exist_ok=True)

print("simulating 12 regions...")
config = PropagationConfig(ray_count=1024, max_reflections=4, max_path_length_m=300.0)
pairs = []
for seed in range(12):
    scene = random_scene(64, 64, building_count=12, rng_seed=100 + seed)
    pairs.append((scene, simulate(scene, config)))

dataset = datapipe.build_dataset(pairs, frame_size=32, stride=2, edge_padding=5)
print(f"dataset: {len(dataset.frames)} frames "
      f"({len(dataset.indices('train'))} train / {len(dataset.indices('test'))} test)")

spec = build_unet_si(37, width_scale=0.125)
print(f"model: {spec.name}, {count_params(spec):,} parameters at width scale 0.125")

train_config = trainer.TrainConfig(batch_size=32, max_epochs=6, patience=3, lr=3e-3)
start = time.perf_counter()
model, report = trainer.train(spec, dataset, train_config)
print(f"\ntrained for {report.stopped_epoch} epochs in {(time.perf_counter()-start)/60:.1f} min")
for epoch in report.epochs:
    print(f"  epoch {epoch['epoch']}: train MAE {epoch['train_mae']:.4f}  "
          f"test MAE {epoch['test_mae']:.4f}")
print(f"best test MAE: {report.best_test_mae_norm:.4f} normalized "
      f"= {report.best_test_mae_dbm:.2f} dB over a {report.span_db:.1f} dB span")

# Compare against the do-nothing baseline that predicts the mean everywhere.
mean_value = float(np.stack([f.target for f in dataset.subset('train')]).mean())


class ConstantMean:
    def predict(self, x):
        return np.full((len(x), 1, 32, 32), mean_value, dtype=np.float32)


baseline = trainer.evaluate(ConstantMean(), dataset.subset("test"), dataset.norm)
learned = trainer.evaluate(model, dataset.subset("test"), dataset.norm)
print(f"\nconstant-mean baseline: {baseline['mae_dbm']:.2f} dB")
print(f"trained model:          {learned['mae_dbm']:.2f} dB")

row = trainer.ExperimentRow(
    model=spec.name, kernel_size="(1,3,5)",
    mae_min_db=learned["mae_dbm"], mae_max_db=learned["mae_dbm"],
    mae_avg_db=learned["mae_dbm"], time_hr=report.wall_seconds / 3600.0,
    param_count=count_params(spec),
)
print("\n" + trainer.format_experiment_table([row]))

ckpt = OUT / "unet_si_37_demo.ckpt"
save_checkpoint(model, ckpt, norm=dataset.norm, frame_size=dataset.frame_size)
print(f"\ncheckpoint saved to {ckpt}")
print("serve it with:  radiocov serve --checkpoint demo=" + str(ckpt))
