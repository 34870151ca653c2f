"""Walkthrough of the 2D ray launcher: build a scene, trace it, inspect the
physics, and export RCOV + PNG artifacts.

Run:  python demos/01_ray_launching.py
Outputs land in demos/out/.
"""
from pathlib import Path

import numpy as np

from radiocov.datapipe import NormalizationSpec
from radiocov.heatmap import coverage_to_rgb, write_png
from radiocov.raytrace import (
    PropagationConfig,
    free_space_path_loss_db,
    load_coverage,
    save_coverage,
    simulate,
)
from radiocov.scene import RegionMap, Scene, Transmitter, random_scene

OUT = Path(__file__).parent / "out"
OUT.mkdir(exist_ok=True)

# --- free space sanity: the trace reproduces the closed-form path loss ----
size = 64
empty = Scene(
    RegionMap(size, size, np.zeros((size, size), dtype=bool)),
    (Transmitter(size // 2, size // 2, power_dbm=46.99),),  # 50 W
    "free-space",
)
grid = simulate(empty, PropagationConfig(max_reflections=0))
print("free-space check (power along +x, 2.4 GHz):")
for d in (5, 10, 20, 30):
    measured = float(grid.power_dbm[size // 2, size // 2 + d])
    closed_form = 46.99 - float(free_space_path_loss_db(float(d), 2.4e9))
    print(f"  d={d:3d} m   traced {measured:8.3f} dBm   formula {closed_form:8.3f} dBm")

# --- an urban scene with reflections ---------------------------------------
scene = random_scene(128, 128, building_count=18, rng_seed=42)
config = PropagationConfig(max_reflections=6)
coverage = simulate(scene, config)
print(f"\nurban scene: {int(scene.region.occupancy.sum())} building cells, "
      f"{config.rays_for(128, 128)} rays, 6 reflections")
print(f"power range: {coverage.power_dbm.min():.1f} .. {coverage.power_dbm.max():.1f} dBm")

# reflections only ever add energy
no_refl = simulate(scene, PropagationConfig(max_reflections=0))
gained = int(np.sum(coverage.power_dbm > no_refl.power_dbm + 1e-6))
print(f"cells brightened by reflections: {gained}")

# --- persist and render -----------------------------------------------------
raster = OUT / "urban.rcov"
save_coverage(coverage, raster)
assert load_coverage(raster) == coverage
norm = NormalizationSpec(floor_dbm=-100.0, ceil_dbm=float(coverage.power_dbm.max()))
rgb = coverage_to_rgb(
    norm.normalize(coverage.power_dbm),
    scene.region.occupancy,
    [(t.x, t.y) for t in scene.transmitters],
)
write_png(OUT / "urban.png", rgb)
print(f"\nwrote {raster} and {OUT / 'urban.png'}")
