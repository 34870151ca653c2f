import numpy as np
import pytest

from radiocov.datapipe import build_dataset
from radiocov.raytrace import PropagationConfig, simulate
from radiocov.scene import RegionMap, Scene, Transmitter, random_scene

FAST_SIM = PropagationConfig(ray_count=512, max_reflections=2, max_path_length_m=200.0)


def scene_with_tx(size: int, buildings: int, seed: int, tx_x: int, tx_y: int) -> Scene:
    """Random buildings but a chosen transmitter cell (forced free)."""
    base = random_scene(size, size, buildings, rng_seed=seed)
    occ = base.region.occupancy.copy()
    occ[tx_y, tx_x] = False
    region = RegionMap(size, size, occ, cell_size_m=base.region.cell_size_m)
    return Scene(region, (Transmitter(tx_x, tx_y),), region_id=f"r{seed}")


def make_pairs(tx_positions, size=48, buildings=8, base_seed=100):
    pairs = []
    for i, (tx_x, tx_y) in enumerate(tx_positions):
        scene = scene_with_tx(size, buildings, base_seed + i, tx_x, tx_y)
        pairs.append((scene, simulate(scene, FAST_SIM)))
    return pairs


@pytest.fixture(scope="session")
def tiny_dataset():
    """A 16x16-frame dataset with non-empty train and test splits."""
    positions = [(10, 24), (12, 22), (38, 24), (40, 26), (11, 26), (39, 22)]
    pairs = make_pairs(positions)
    ds = build_dataset(pairs, frame_size=16, stride=1, edge_padding=5)
    assert ds.indices("train") and ds.indices("test")
    return ds


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(2024)
