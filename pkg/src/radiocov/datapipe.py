"""Sliding-window frame extraction, input encoding, normalization and dataset files.

A dataset is built from (scene, coverage) pairs: enumerate SxS windows at a
stride, keep windows that contain the transmitter, at least one building
cell, and the transmitter no closer than ``edge_padding`` cells to any
window edge; threshold power at a floor, min-max normalize against a
dataset-global ceiling, encode the inputs, and split train/test by the
window origin's x coordinate with a dead gap in between.
"""
from __future__ import annotations

import enum
import json
from dataclasses import dataclass

import numpy as np

from .errors import (
    ContractViolation,
    EmptyDatasetError,
    FormatError,
    InvalidSceneError,
)
from .raytrace import CoverageGrid
from .scene import Scene

DEFAULT_FLOOR_DBM = -100.0
DEFAULT_STRIDE = 3
DEFAULT_EDGE_PADDING = 5
DEFAULT_BOUNDARY = 60
DEFAULT_GAP = 20
REFERENCE_REGION_WIDTH = 256


@dataclass(frozen=True)
class NormalizationSpec:
    """Affine map between dBm and [0, 1]: floor -> 0, ceil -> 1."""

    floor_dbm: float = DEFAULT_FLOOR_DBM
    ceil_dbm: float = 0.0

    def __post_init__(self):
        if not self.ceil_dbm > self.floor_dbm:
            raise ContractViolation(
                f"ceil_dbm ({self.ceil_dbm}) must exceed floor_dbm ({self.floor_dbm})"
            )

    @property
    def span_db(self) -> float:
        return self.ceil_dbm - self.floor_dbm

    def normalize(self, dbm) -> np.ndarray:
        """dBm -> [0,1] in float64; storage casts to float32 separately so the
        normalize/denormalize pair stays an exact inverse on [floor, ceil]."""
        x = np.asarray(dbm, dtype=np.float64)
        return (np.clip(x, self.floor_dbm, self.ceil_dbm) - self.floor_dbm) / self.span_db

    def denormalize(self, unit) -> np.ndarray:
        return np.asarray(unit, dtype=np.float64) * self.span_db + self.floor_dbm

    def saturation_count(self, dbm) -> int:
        """Cells above the ceiling, clamped to 1 by normalize (not an error)."""
        return int(np.count_nonzero(np.asarray(dbm) > self.ceil_dbm))


class EncodingScheme(enum.Enum):
    COMBINED = "combined-single-channel"
    TWO_BINARY = "two-binary-channels"
    EUCLIDEAN = "euclidean-distance-channel"
    INVERSE_SQUARE = "inverse-square-distance-channel"

    @property
    def channels(self) -> int:
        return 1 if self is EncodingScheme.COMBINED else 2

    @classmethod
    def parse(cls, name: str) -> "EncodingScheme":
        aliases = {
            "combined": cls.COMBINED,
            "two-binary": cls.TWO_BINARY,
            "euclidean": cls.EUCLIDEAN,
            "inverse-square": cls.INVERSE_SQUARE,
        }
        for member in cls:
            if name == member.value:
                return member
        if name in aliases:
            return aliases[name]
        raise ContractViolation(f"unknown encoding '{name}'")


DEFAULT_ENCODING = EncodingScheme.TWO_BINARY  # best MAE of the four variants


@dataclass(frozen=True)
class WindowRef:
    """An SxS window kept by the extraction filters; tx coords are window-local."""

    origin_x: int
    origin_y: int
    tx_x: int
    tx_y: int


@dataclass(frozen=True, eq=False)
class Frame:
    input: np.ndarray  # (C, S, S) float32
    target: np.ndarray  # (1, S, S) float32 in [0, 1]
    origin_x: int
    origin_y: int
    region_id: str
    tx_x: int
    tx_y: int

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Frame)
            and (self.origin_x, self.origin_y, self.region_id, self.tx_x, self.tx_y)
            == (other.origin_x, other.origin_y, other.region_id, other.tx_x, other.tx_y)
            and np.array_equal(self.input, other.input)
            and np.array_equal(self.target, other.target)
        )


@dataclass(eq=False)
class Dataset:
    frames: list[Frame]
    frame_size: int
    encoding: EncodingScheme
    norm: NormalizationSpec
    split: list[str]  # "train" | "test", aligned with frames

    def indices(self, label: str) -> list[int]:
        return [i for i, s in enumerate(self.split) if s == label]

    def subset(self, label: str) -> list[Frame]:
        return [self.frames[i] for i in self.indices(label)]


def extract_frames(
    region_coverage: CoverageGrid,
    scene: Scene,
    frame_size: int,
    stride: int = DEFAULT_STRIDE,
    edge_padding: int = DEFAULT_EDGE_PADDING,
) -> list[WindowRef]:
    """Enumerate stride-offset windows and keep those passing all three filters."""
    region = scene.region
    if (region_coverage.width, region_coverage.height) != (region.width, region.height):
        raise ContractViolation(
            f"coverage {region_coverage.width}x{region_coverage.height} does not match "
            f"region {region.width}x{region.height}"
        )
    if frame_size > region.width or frame_size > region.height:
        raise ContractViolation(
            f"frame size {frame_size} exceeds region {region.width}x{region.height}"
        )
    if stride < 1 or edge_padding < 0:
        raise ContractViolation(f"bad stride ({stride}) or edge_padding ({edge_padding})")
    if len(scene.transmitters) != 1:
        raise InvalidSceneError("frame extraction expects exactly one transmitter per scene")

    tx = scene.transmitters[0]
    s = frame_size
    # Prefix sums make the building-presence check O(1) per window.
    csum = np.zeros((region.height + 1, region.width + 1), dtype=np.int64)
    csum[1:, 1:] = np.cumsum(np.cumsum(region.occupancy, axis=0), axis=1)

    kept: list[WindowRef] = []
    for oy in range(0, region.height - s + 1, stride):
        in_y = edge_padding <= tx.y - oy <= s - 1 - edge_padding
        if not (oy <= tx.y < oy + s) or not in_y:
            continue
        for ox in range(0, region.width - s + 1, stride):
            if not (ox <= tx.x < ox + s):
                continue
            if not (edge_padding <= tx.x - ox <= s - 1 - edge_padding):
                continue
            buildings = csum[oy + s, ox + s] - csum[oy, ox + s] - csum[oy + s, ox] + csum[oy, ox]
            if buildings == 0:
                continue
            kept.append(WindowRef(origin_x=ox, origin_y=oy, tx_x=tx.x - ox, tx_y=tx.y - oy))
    return kept


def encode_input_multi(
    occupancy: np.ndarray, tx_list: list[tuple[int, int]], scheme: EncodingScheme
) -> np.ndarray:
    """Encode a window for any number of transmitters (one-hots superpose)."""
    occ = np.asarray(occupancy, dtype=bool)
    s_h, s_w = occ.shape
    if not tx_list:
        raise ContractViolation("at least one transmitter required to encode a window")
    for tx_x, tx_y in tx_list:
        if not (0 <= tx_x < s_w and 0 <= tx_y < s_h):
            raise ContractViolation(f"transmitter ({tx_x}, {tx_y}) outside {s_w}x{s_h} window")

    if scheme is EncodingScheme.COMBINED:
        ch = occ.astype(np.float32)
        for tx_x, tx_y in tx_list:
            ch[tx_y, tx_x] = 2.0
        return ch[None, :, :]

    buildings = occ.astype(np.float32)[None, :, :]
    if scheme is EncodingScheme.TWO_BINARY:
        tx_ch = np.zeros((s_h, s_w), dtype=np.float32)
        for tx_x, tx_y in tx_list:
            tx_ch[tx_y, tx_x] += 1.0
        return np.concatenate([buildings, tx_ch[None]], axis=0)

    ys, xs = np.mgrid[0:s_h, 0:s_w]
    d = np.full((s_h, s_w), np.inf)
    for tx_x, tx_y in tx_list:
        d = np.minimum(d, np.hypot(xs - tx_x, ys - tx_y))
    if scheme is EncodingScheme.EUCLIDEAN:
        diagonal = float(np.hypot(s_w - 1, s_h - 1))
        tx_ch = (d / diagonal).astype(np.float32)
    elif scheme is EncodingScheme.INVERSE_SQUARE:
        tx_ch = (1.0 / (1.0 + d * d)).astype(np.float32)
    else:  # pragma: no cover - enum is closed
        raise ContractViolation(f"unhandled scheme {scheme}")
    return np.concatenate([buildings, tx_ch[None]], axis=0)


def encode_input(
    occupancy: np.ndarray, transmitter_xy: tuple[int, int], scheme: EncodingScheme
) -> np.ndarray:
    return encode_input_multi(occupancy, [transmitter_xy], scheme)


def scaled_split_params(
    region_width: int, boundary: int = DEFAULT_BOUNDARY, gap: int = DEFAULT_GAP
) -> tuple[int, int]:
    """Boundary/gap assume a 256-wide region; scale proportionally otherwise."""
    if region_width == REFERENCE_REGION_WIDTH:
        return boundary, gap
    scale = region_width / REFERENCE_REGION_WIDTH
    return round(boundary * scale), round(gap * scale)


def split_by_origin(origins_x, boundary: int, gap: int) -> list[str | None]:
    """train below the boundary, test above boundary+gap, None inside the gap."""
    if boundary < 0 or gap < 0:
        raise ContractViolation(f"bad boundary ({boundary}) or gap ({gap})")
    labels: list[str | None] = []
    for ox in origins_x:
        if ox < boundary:
            labels.append("train")
        elif ox > boundary + gap:
            labels.append("test")
        else:
            labels.append(None)
    return labels


def split_by_region(frames, boundary: int = DEFAULT_BOUNDARY, gap: int = DEFAULT_GAP):
    """Label anything with an ``origin_x`` (frames, window refs) by region."""
    return split_by_origin([f.origin_x for f in frames], boundary, gap)


def build_dataset(
    pairs: list[tuple[Scene, CoverageGrid]],
    frame_size: int,
    encoding: EncodingScheme = DEFAULT_ENCODING,
    floor_dbm: float = DEFAULT_FLOOR_DBM,
    stride: int = DEFAULT_STRIDE,
    edge_padding: int = DEFAULT_EDGE_PADDING,
    boundary: int = DEFAULT_BOUNDARY,
    gap: int = DEFAULT_GAP,
) -> Dataset:
    """Compose extract -> normalize -> encode -> split over all pairs.

    The normalization ceiling is the global post-clamp maximum across all
    source grids and is stored with the dataset so denormalized errors are
    reproducible.
    """
    if not pairs:
        raise EmptyDatasetError("no scene/coverage pairs supplied")

    ceil = max(float(np.max(grid.power_dbm)) for _, grid in pairs)
    if ceil <= floor_dbm:
        raise EmptyDatasetError(
            f"all power below the {floor_dbm} dBm floor; nothing to normalize"
        )
    norm = NormalizationSpec(floor_dbm=floor_dbm, ceil_dbm=ceil)

    records: list[tuple[tuple, Frame, str]] = []
    for scene, grid in pairs:
        refs = extract_frames(grid, scene, frame_size, stride=stride, edge_padding=edge_padding)
        b, g = scaled_split_params(scene.region.width, boundary, gap)
        labels = split_by_origin([r.origin_x for r in refs], b, g)
        for ref, label in zip(refs, labels):
            if label is None:
                continue
            oy, ox = ref.origin_y, ref.origin_x
            occ = scene.region.occupancy[oy : oy + frame_size, ox : ox + frame_size]
            window = grid.power_dbm[oy : oy + frame_size, ox : ox + frame_size]
            frame = Frame(
                input=encode_input(occ, (ref.tx_x, ref.tx_y), encoding),
                target=norm.normalize(window).astype(np.float32)[None, :, :],
                origin_x=ox,
                origin_y=oy,
                region_id=scene.region_id,
                tx_x=ref.tx_x,
                tx_y=ref.tx_y,
            )
            records.append(((scene.region_id, oy, ox), frame, label))

    if not records:
        raise EmptyDatasetError(
            "no frames survived filtering; regions may lack buildings or the "
            "transmitters sit inside the split gap/edge padding"
        )
    records.sort(key=lambda r: r[0])
    frames = [r[1] for r in records]
    split = [r[2] for r in records]
    return Dataset(frames=frames, frame_size=frame_size, encoding=encoding, norm=norm, split=split)


def save_dataset(dataset: Dataset, path) -> None:
    """Header JSON line, then per frame: metadata line + raw float32 tensors."""
    header = {
        "frame_size": dataset.frame_size,
        "encoding": dataset.encoding.value,
        "floor_dbm": dataset.norm.floor_dbm,
        "ceil_dbm": dataset.norm.ceil_dbm,
        "frames": len(dataset.frames),
        "channels": dataset.encoding.channels,
    }
    with open(path, "wb") as fh:
        fh.write(json.dumps(header, sort_keys=True).encode() + b"\n")
        for frame, label in zip(dataset.frames, dataset.split):
            meta = {
                "origin_x": frame.origin_x,
                "origin_y": frame.origin_y,
                "region_id": frame.region_id,
                "split": label,
                "tx_x": frame.tx_x,
                "tx_y": frame.tx_y,
            }
            fh.write(json.dumps(meta, sort_keys=True).encode() + b"\n")
            fh.write(np.ascontiguousarray(frame.input, dtype="<f4").tobytes())
            fh.write(np.ascontiguousarray(frame.target, dtype="<f4").tobytes())


def _read_line(fh) -> bytes:
    line = fh.readline()
    if not line.endswith(b"\n"):
        raise FormatError("unexpected end of dataset file")
    return line


def _read_block(fh, count: int) -> bytes:
    blob = fh.read(count)
    if len(blob) != count:
        raise FormatError(f"truncated tensor payload: wanted {count} bytes, got {len(blob)}")
    return blob


def load_dataset(path) -> Dataset:
    with open(path, "rb") as fh:
        try:
            header = json.loads(_read_line(fh))
            frame_size = int(header["frame_size"])
            encoding = EncodingScheme(header["encoding"])
            norm = NormalizationSpec(float(header["floor_dbm"]), float(header["ceil_dbm"]))
            count = int(header["frames"])
            channels = int(header["channels"])
        except (KeyError, ValueError, json.JSONDecodeError) as exc:
            raise FormatError(f"bad dataset header: {exc}") from exc
        if channels != encoding.channels:
            raise FormatError(
                f"channel count {channels} inconsistent with encoding {encoding.value}"
            )
        in_bytes = 4 * channels * frame_size * frame_size
        tgt_bytes = 4 * frame_size * frame_size
        frames, split = [], []
        for _ in range(count):
            try:
                meta = json.loads(_read_line(fh))
            except json.JSONDecodeError as exc:
                raise FormatError(f"bad frame metadata: {exc}") from exc
            inp = np.frombuffer(_read_block(fh, in_bytes), dtype="<f4").reshape(
                channels, frame_size, frame_size
            )
            tgt = np.frombuffer(_read_block(fh, tgt_bytes), dtype="<f4").reshape(
                1, frame_size, frame_size
            )
            frames.append(
                Frame(
                    input=inp,
                    target=tgt,
                    origin_x=int(meta["origin_x"]),
                    origin_y=int(meta["origin_y"]),
                    region_id=str(meta["region_id"]),
                    tx_x=int(meta["tx_x"]),
                    tx_y=int(meta["tx_y"]),
                )
            )
            split.append(str(meta["split"]))
    return Dataset(frames=frames, frame_size=frame_size, encoding=encoding, norm=norm, split=split)
