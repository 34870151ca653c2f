import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from radiocov.datapipe import (
    Dataset,
    EncodingScheme,
    NormalizationSpec,
    WindowRef,
    build_dataset,
    encode_input,
    encode_input_multi,
    extract_frames,
    load_dataset,
    save_dataset,
    scaled_split_params,
    split_by_origin,
    split_by_region,
)
from radiocov.errors import ContractViolation, EmptyDatasetError, InvalidSceneError
from radiocov.raytrace import CoverageGrid, PropagationConfig, simulate
from radiocov.scene import RegionMap, Scene, Transmitter, random_scene

from conftest import FAST_SIM, make_pairs, scene_with_tx


def _flat_coverage(scene, value=-50.0):
    h, w = scene.region.height, scene.region.width
    return CoverageGrid(w, h, np.full((h, w), value, dtype=np.float32))


class TestExtractFrames:
    def test_offset_grid_count_by_enumeration(self):
        # 256-wide sample, S=32, stride 3: 75 offsets per axis before filtering.
        offsets = list(range(0, 256 - 32 + 1, 3))
        assert len(offsets) == (256 - 32) // 3 + 1 == 75

    def test_brute_force_filter_recheck(self):
        scene = scene_with_tx(64, 10, seed=5, tx_x=30, tx_y=29)
        grid = _flat_coverage(scene)
        refs = extract_frames(grid, scene, frame_size=16, stride=2, edge_padding=5)
        assert refs
        occ = scene.region.occupancy
        tx = scene.transmitters[0]
        kept = {(r.origin_x, r.origin_y) for r in refs}
        for oy in range(0, 64 - 16 + 1, 2):
            for ox in range(0, 64 - 16 + 1, 2):
                has_tx = ox <= tx.x < ox + 16 and oy <= tx.y < oy + 16
                padded = (
                    5 <= tx.x - ox <= 10 and 5 <= tx.y - oy <= 10
                )
                has_building = bool(occ[oy : oy + 16, ox : ox + 16].any())
                assert ((ox, oy) in kept) == (has_tx and padded and has_building)

    def test_transmitter_near_edge_excluded(self):
        occ = np.zeros((32, 32), dtype=bool)
        occ[10, 10] = True
        scene = Scene(RegionMap(32, 32, occ), (Transmitter(2, 16),), "edge")
        refs = extract_frames(_flat_coverage(scene), scene, 32, stride=1, edge_padding=5)
        assert refs == []  # tx sits 2 cells from the left edge of the only window

    def test_no_buildings_keeps_nothing(self):
        scene = random_scene(32, 32, 0, rng_seed=3)
        assert extract_frames(_flat_coverage(scene), scene, 16, 1, 5) == []

    def test_multi_transmitter_scene_rejected(self):
        region = RegionMap(16, 16, np.zeros((16, 16), dtype=bool))
        scene = Scene(region, (Transmitter(4, 4), Transmitter(8, 8)), "multi")
        with pytest.raises(InvalidSceneError):
            extract_frames(_flat_coverage(scene), scene, 8, 1, 0)

    def test_dim_mismatch_rejected(self):
        scene = random_scene(16, 16, 1, rng_seed=0)
        bad = CoverageGrid(8, 8, np.zeros((8, 8), dtype=np.float32))
        with pytest.raises(ContractViolation):
            extract_frames(bad, scene, 8, 1, 0)


class TestNormalization:
    def test_floor_maps_to_zero(self):
        norm = NormalizationSpec(-100.0, -20.0)
        assert norm.normalize(np.array([-100.0]))[0] == 0.0

    def test_midpoint(self):
        norm = NormalizationSpec(-100.0, -20.0)
        assert norm.normalize(np.array([-60.0]))[0] == pytest.approx(0.5)

    def test_below_floor_clamps(self):
        norm = NormalizationSpec(-100.0, -20.0)
        assert norm.normalize(np.array([-150.0]))[0] == 0.0

    def test_above_ceil_clamps_and_counts(self):
        norm = NormalizationSpec(-100.0, -20.0)
        window = np.array([-10.0, -30.0, 5.0])
        assert np.all(norm.normalize(window) <= 1.0)
        assert norm.saturation_count(window) == 2

    @given(st.lists(st.floats(-100.0, -20.0), min_size=1, max_size=32))
    @settings(max_examples=40, deadline=None)
    def test_denormalize_inverts(self, values):
        norm = NormalizationSpec(-100.0, -20.0)
        v = np.array(values, dtype=np.float64)
        back = norm.denormalize(norm.normalize(v))
        assert np.max(np.abs(back - v)) < 1e-6

    def test_invalid_span_rejected(self):
        with pytest.raises(ContractViolation):
            NormalizationSpec(-20.0, -20.0)


class TestEncoding:
    def test_channel_counts(self):
        occ = np.zeros((8, 8), dtype=bool)
        for scheme in EncodingScheme:
            out = encode_input(occ, (3, 4), scheme)
            assert out.shape == (scheme.channels, 8, 8)
            assert out.dtype == np.float32

    def test_two_binary_one_hot(self):
        occ = np.zeros((8, 8), dtype=bool)
        out = encode_input(occ, (3, 4), EncodingScheme.TWO_BINARY)
        assert out[1].sum() == 1.0
        assert out[1, 4, 3] == 1.0

    def test_combined_values(self):
        occ = np.zeros((8, 8), dtype=bool)
        occ[2, 2] = True
        out = encode_input(occ, (3, 4), EncodingScheme.COMBINED)
        assert out[0, 2, 2] == 1.0
        assert out[0, 4, 3] == 2.0
        assert out[0, 0, 0] == 0.0

    def test_euclidean_zero_at_tx(self):
        occ = np.zeros((8, 8), dtype=bool)
        out = encode_input(occ, (3, 4), EncodingScheme.EUCLIDEAN)
        assert out[1, 4, 3] == 0.0
        assert np.all(out[1] <= 1.0)

    def test_inverse_square_half_at_one_cell(self):
        occ = np.zeros((8, 8), dtype=bool)
        out = encode_input(occ, (3, 4), EncodingScheme.INVERSE_SQUARE)
        assert out[1, 4, 4] == pytest.approx(0.5)
        assert out[1, 4, 3] == pytest.approx(1.0)

    def test_tx_outside_window_rejected(self):
        with pytest.raises(ContractViolation):
            encode_input(np.zeros((8, 8), dtype=bool), (9, 0), EncodingScheme.TWO_BINARY)

    def test_superposition_sums_one_hots(self):
        occ = np.zeros((8, 8), dtype=bool)
        out = encode_input_multi(occ, [(1, 1), (5, 5)], EncodingScheme.TWO_BINARY)
        assert out[1].sum() == 2.0

    def test_parse_aliases(self):
        assert EncodingScheme.parse("two-binary") is EncodingScheme.TWO_BINARY
        assert EncodingScheme.parse("two-binary-channels") is EncodingScheme.TWO_BINARY
        with pytest.raises(ContractViolation):
            EncodingScheme.parse("nope")


class TestSplit:
    def test_boundary_rules(self):
        labels = split_by_origin([59, 81, 70], boundary=60, gap=20)
        assert labels == ["train", "test", None]

    def test_frame_objects_accepted(self):
        refs = [WindowRef(59, 0, 5, 5), WindowRef(81, 0, 5, 5), WindowRef(70, 0, 5, 5)]
        assert split_by_region(refs, boundary=60, gap=20) == ["train", "test", None]

    def test_scaling(self):
        assert scaled_split_params(256) == (60, 20)
        assert scaled_split_params(128) == (30, 10)
        assert scaled_split_params(64) == (15, 5)


class TestBuildDataset:
    def test_deterministic_files(self, tmp_path):
        pairs = make_pairs([(10, 24), (38, 24)])
        a, b = tmp_path / "a.ds", tmp_path / "b.ds"
        save_dataset(build_dataset(pairs, 16, stride=1), a)
        save_dataset(build_dataset(pairs, 16, stride=1), b)
        assert a.read_bytes() == b.read_bytes()

    def test_round_trip(self, tmp_path, tiny_dataset):
        path = tmp_path / "ds.bin"
        save_dataset(tiny_dataset, path)
        loaded = load_dataset(path)
        assert len(loaded.frames) == len(tiny_dataset.frames)
        assert loaded.encoding == tiny_dataset.encoding
        assert loaded.norm == tiny_dataset.norm
        assert loaded.split == tiny_dataset.split
        for fa, fb in zip(loaded.frames, tiny_dataset.frames):
            assert fa == fb

    def test_targets_in_unit_interval(self, tiny_dataset):
        for f in tiny_dataset.frames:
            assert f.target.min() >= 0.0 and f.target.max() <= 1.0
            assert f.input.shape[0] == tiny_dataset.encoding.channels

    def test_split_separation_exceeds_gap(self, tiny_dataset):
        b, g = scaled_split_params(48)
        train_x = [tiny_dataset.frames[i].origin_x for i in tiny_dataset.indices("train")]
        test_x = [tiny_dataset.frames[i].origin_x for i in tiny_dataset.indices("test")]
        assert min(test_x) - max(train_x) > g

    def test_empty_after_filtering_raises(self):
        scene = random_scene(32, 32, 0, rng_seed=1)  # no buildings -> no frames
        with pytest.raises(EmptyDatasetError):
            build_dataset([(scene, _flat_coverage(scene))], 16, stride=1)

    def test_all_below_floor_raises(self):
        scene = random_scene(32, 32, 3, rng_seed=1)
        with pytest.raises(EmptyDatasetError):
            build_dataset([(scene, _flat_coverage(scene, value=-150.0))], 16)

    def test_kept_frames_satisfy_filters_brute_force(self):
        scene = scene_with_tx(48, 8, seed=9, tx_x=24, tx_y=24)
        grid = simulate(scene, FAST_SIM)
        ds = build_dataset([(scene, grid)], 16, stride=1, boundary=60, gap=20)
        occ = scene.region.occupancy
        for f in ds.frames:
            window = occ[f.origin_y : f.origin_y + 16, f.origin_x : f.origin_x + 16]
            assert window.any()
            assert 5 <= f.tx_x <= 10 and 5 <= f.tx_y <= 10
            assert window[f.tx_y, f.tx_x] == False  # noqa: E712
