"""From raw simulations to training frames: windowing, filtering, encoding,
normalization and the region-based train/test split.

Run:  python demos/02_dataset_pipeline.py
"""
from pathlib import Path

import numpy as np

from radiocov.datapipe import (
    EncodingScheme,
    build_dataset,
    encode_input,
    load_dataset,
    save_dataset,
    scaled_split_params,
)
from radiocov.raytrace import PropagationConfig, simulate
from radiocov.scene import random_scene

OUT = Path(__file__).parent / "out"
OUT.mkdir(exist_ok=True)

# Simulate a handful of 64x64 regions (1 m cells, 50 W transmitter).
config = PropagationConfig(ray_count=1024, max_reflections=4, max_path_length_m=300.0)
pairs = []
for seed in range(8):
    scene = random_scene(64, 64, building_count=12, rng_seed=seed)
    pairs.append((scene, simulate(scene, config)))
print(f"simulated {len(pairs)} regions")

# 32x32 frames; keep a window only if it holds the transmitter (>= 5 cells
# from every edge) and at least one building cell.
dataset = build_dataset(pairs, frame_size=32, stride=1, edge_padding=5)
n_train = len(dataset.indices("train"))
n_test = len(dataset.indices("test"))
boundary, gap = scaled_split_params(64)
print(f"frames kept: {len(dataset.frames)}  ({n_train} train / {n_test} test)")
print(f"split by window origin x: train < {boundary}, test > {boundary + gap}")
print(f"normalization: {dataset.norm.floor_dbm} dBm -> 0, "
      f"{dataset.norm.ceil_dbm:.2f} dBm -> 1")

targets = np.stack([f.target for f in dataset.frames])
print(f"target stats: min {targets.min():.3f} max {targets.max():.3f} "
      f"mean {targets.mean():.3f}")

# The four input encodings for the same window.
sample = dataset.frames[0]
occ = sample.input[0].astype(bool)
print("\nencoding variants for one window:")
for scheme in EncodingScheme:
    channels = encode_input(occ, (sample.tx_x, sample.tx_y), scheme)
    print(f"  {scheme.value:35s} -> {channels.shape[0]} channel(s), "
          f"tx-channel sum {channels[-1].sum():.3f}")

path = OUT / "demo.ds"
save_dataset(dataset, path)
reloaded = load_dataset(path)
assert len(reloaded.frames) == len(dataset.frames)
print(f"\ndataset file round-trips: {path} ({path.stat().st_size:,} bytes)")
