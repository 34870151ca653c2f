"""Urban scenes: occupancy grids, transmitters, cropping and JSON round trips.

Grids are row-major with y increasing downward; ``occupancy[y, x]`` is True
on building cells. All values are immutable after construction and safe to
share across threads.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidRegionError, InvalidSceneError, PlacementError, SceneParseError

DEFAULT_TX_POWER_DBM = 46.99  # 50 W
DEFAULT_TX_HEIGHT_M = 6.0


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.ascontiguousarray(arr)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class RegionMap:
    """Binary building-occupancy grid over square cells of ``cell_size_m``."""

    width: int
    height: int
    occupancy: np.ndarray  # bool, shape (height, width)
    cell_size_m: float = 1.0

    def __post_init__(self):
        occ = np.asarray(self.occupancy, dtype=bool)
        if occ.shape != (self.height, self.width):
            raise InvalidRegionError(
                f"occupancy shape {occ.shape} does not match {self.height}x{self.width}"
            )
        if not self.cell_size_m > 0:
            raise InvalidRegionError(f"cell_size_m must be positive, got {self.cell_size_m}")
        object.__setattr__(self, "occupancy", _frozen(occ))

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, RegionMap)
            and self.width == other.width
            and self.height == other.height
            and self.cell_size_m == other.cell_size_m
            and np.array_equal(self.occupancy, other.occupancy)
        )


@dataclass(frozen=True)
class Transmitter:
    x: int
    y: int
    power_dbm: float = DEFAULT_TX_POWER_DBM
    height_m: float = DEFAULT_TX_HEIGHT_M  # metadata only in 2D tracing


@dataclass(frozen=True, eq=False)
class Scene:
    """A region plus at least one transmitter placed on a free cell."""

    region: RegionMap
    transmitters: tuple[Transmitter, ...]
    region_id: str = "region"

    def __post_init__(self):
        txs = tuple(self.transmitters)
        if not txs:
            raise InvalidSceneError("scene requires at least one transmitter")
        for t in txs:
            if not (0 <= t.x < self.region.width and 0 <= t.y < self.region.height):
                raise InvalidSceneError(f"transmitter out of bounds at ({t.x}, {t.y})")
            if self.region.occupancy[t.y, t.x]:
                raise InvalidSceneError(f"transmitter on building cell at ({t.x}, {t.y})")
            if not math.isfinite(t.power_dbm):
                raise InvalidSceneError(f"transmitter power must be finite, got {t.power_dbm}")
        object.__setattr__(self, "transmitters", txs)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Scene)
            and self.region_id == other.region_id
            and self.region == other.region
            and self.transmitters == other.transmitters
        )


def crop_to_even(region: RegionMap) -> RegionMap:
    """Drop the last row/column of each odd dimension so both divide by 2."""
    if region.width < 2 or region.height < 2:
        raise InvalidRegionError(
            f"region must be at least 2x2 to crop, got {region.width}x{region.height}"
        )
    new_w = region.width - region.width % 2
    new_h = region.height - region.height % 2
    if (new_w, new_h) == (region.width, region.height):
        return region
    return RegionMap(
        width=new_w,
        height=new_h,
        occupancy=region.occupancy[:new_h, :new_w],
        cell_size_m=region.cell_size_m,
    )


def random_scene(
    width: int,
    height: int,
    building_count: int,
    rng_seed: int,
    *,
    side_range: tuple[int, int] | None = None,
    cell_size_m: float = 1.0,
    power_dbm: float = DEFAULT_TX_POWER_DBM,
    tx_height_m: float = DEFAULT_TX_HEIGHT_M,
    region_id: str | None = None,
) -> Scene:
    """Generate a region with random axis-aligned rectangular buildings.

    Rectangle side lengths are drawn uniformly from ``side_range`` (defaults
    to 2..max(3, min(width, height)//4)); overlaps are allowed so unions form
    irregular shapes. One transmitter is placed uniformly at random on a free
    cell. Deterministic for a fixed seed.
    """
    if building_count < 0:
        raise PlacementError("building_count must be >= 0")
    if width < 1 or height < 1:
        raise InvalidRegionError(f"degenerate region {width}x{height}")
    if side_range is None:
        side_range = (2, max(3, min(width, height) // 4))
    lo, hi = side_range
    if not (1 <= lo <= hi):
        raise PlacementError(f"invalid building side range {side_range}")

    rng = np.random.default_rng(rng_seed)
    occ = np.zeros((height, width), dtype=bool)
    for _ in range(building_count):
        w = int(rng.integers(lo, hi + 1))
        h = int(rng.integers(lo, hi + 1))
        w = min(w, width)
        h = min(h, height)
        x0 = int(rng.integers(0, width - w + 1))
        y0 = int(rng.integers(0, height - h + 1))
        occ[y0 : y0 + h, x0 : x0 + w] = True

    free = np.flatnonzero(~occ.ravel())
    if free.size == 0:
        raise PlacementError("no free cell left for the transmitter")
    pick = int(free[int(rng.integers(0, free.size))])
    ty, tx = divmod(pick, width)

    region = RegionMap(width=width, height=height, occupancy=occ, cell_size_m=cell_size_m)
    return Scene(
        region=region,
        transmitters=(Transmitter(x=tx, y=ty, power_dbm=power_dbm, height_m=tx_height_m),),
        region_id=region_id if region_id is not None else f"synthetic-{rng_seed}",
    )


def scene_to_json(scene: Scene) -> str:
    doc = {
        "region_id": scene.region_id,
        "width": scene.region.width,
        "height": scene.region.height,
        "cell_size_m": scene.region.cell_size_m,
        "occupancy": scene.region.occupancy.astype(int).ravel().tolist(),
        "transmitters": [
            {"x": t.x, "y": t.y, "power_dbm": t.power_dbm, "height_m": t.height_m}
            for t in scene.transmitters
        ],
    }
    return json.dumps(doc)


def scene_from_dict(doc: dict) -> Scene:
    """Build a Scene from a parsed document, naming the offending field on error."""
    if not isinstance(doc, dict):
        raise SceneParseError("document must be a JSON object")
    for key in ("region_id", "width", "height", "cell_size_m", "occupancy", "transmitters"):
        if key not in doc:
            raise SceneParseError(f"missing field '{key}'")
    try:
        width = int(doc["width"])
        height = int(doc["height"])
        cell = float(doc["cell_size_m"])
    except (TypeError, ValueError) as exc:
        raise SceneParseError(f"bad numeric field: {exc}") from exc
    occupancy = doc["occupancy"]
    if not isinstance(occupancy, list) or len(occupancy) != width * height:
        raise SceneParseError(
            f"occupancy length mismatch: expected {width * height} entries, "
            f"got {len(occupancy) if isinstance(occupancy, list) else type(occupancy).__name__}"
        )
    if any(v not in (0, 1) for v in occupancy):
        raise SceneParseError("occupancy entries must be 0 or 1")
    txs = doc["transmitters"]
    if not isinstance(txs, list) or not txs:
        raise SceneParseError("transmitters must be a non-empty list")
    parsed = []
    for i, t in enumerate(txs):
        try:
            parsed.append(
                Transmitter(
                    x=int(t["x"]),
                    y=int(t["y"]),
                    power_dbm=float(t.get("power_dbm", DEFAULT_TX_POWER_DBM)),
                    height_m=float(t.get("height_m", DEFAULT_TX_HEIGHT_M)),
                )
            )
        except (TypeError, KeyError, ValueError) as exc:
            raise SceneParseError(f"bad transmitter #{i}: {exc}") from exc
    try:
        region = RegionMap(
            width=width,
            height=height,
            occupancy=np.asarray(occupancy, dtype=bool).reshape(height, width),
            cell_size_m=cell,
        )
        return Scene(region=region, transmitters=tuple(parsed), region_id=str(doc["region_id"]))
    except (InvalidRegionError, InvalidSceneError) as exc:
        raise SceneParseError(str(exc)) from exc


def json_to_scene(text: str) -> Scene:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SceneParseError(f"invalid json: {exc}") from exc
    return scene_from_dict(doc)
