"""Minimal PNG heatmap export (stdlib zlib only, no imaging dependency).

Coverage renders through a dark-to-hot color ramp; building cells paint
solid purple and transmitters a blue dot, so exports read like the
interactive designer overlay.
"""
from __future__ import annotations

import struct
import zlib

import numpy as np

# Anchors of the power ramp, low to high, as (r, g, b).
_RAMP = np.array(
    [
        (8, 8, 40),
        (46, 22, 110),
        (142, 32, 120),
        (222, 82, 60),
        (252, 176, 52),
        (252, 252, 180),
    ],
    dtype=np.float64,
)
BUILDING_RGB = (106, 13, 173)
TRANSMITTER_RGB = (40, 110, 255)


def ramp_colors(unit: np.ndarray) -> np.ndarray:
    """Map values in [0,1] to RGB uint8 through the ramp."""
    u = np.clip(np.asarray(unit, dtype=np.float64), 0.0, 1.0)
    pos = u * (len(_RAMP) - 1)
    lo = np.floor(pos).astype(int)
    hi = np.minimum(lo + 1, len(_RAMP) - 1)
    frac = (pos - lo)[..., None]
    rgb = _RAMP[lo] * (1.0 - frac) + _RAMP[hi] * frac
    return rgb.round().astype(np.uint8)


def coverage_to_rgb(
    unit_grid: np.ndarray,
    occupancy: np.ndarray | None = None,
    transmitters: list[tuple[int, int]] | None = None,
) -> np.ndarray:
    rgb = ramp_colors(unit_grid)
    if occupancy is not None:
        rgb[np.asarray(occupancy, dtype=bool)] = BUILDING_RGB
    for x, y in transmitters or []:
        rgb[y, x] = TRANSMITTER_RGB
    return rgb


def write_png(path, rgb: np.ndarray) -> None:
    arr = np.ascontiguousarray(rgb, dtype=np.uint8)
    if arr.ndim != 3 or arr.shape[2] != 3:
        raise ValueError(f"expected (H, W, 3) uint8 image, got {arr.shape}")
    h, w, _ = arr.shape

    def chunk(tag: bytes, payload: bytes) -> bytes:
        body = tag + payload
        return struct.pack(">I", len(payload)) + body + struct.pack(">I", zlib.crc32(body))

    raw = b"".join(b"\x00" + arr[row].tobytes() for row in range(h))
    header = struct.pack(">IIBBBBB", w, h, 8, 2, 0, 0, 0)  # 8-bit RGB
    with open(path, "wb") as fh:
        fh.write(b"\x89PNG\r\n\x1a\n")
        fh.write(chunk(b"IHDR", header))
        fh.write(chunk(b"IDAT", zlib.compress(raw, 6)))
        fh.write(chunk(b"IEND", b""))
