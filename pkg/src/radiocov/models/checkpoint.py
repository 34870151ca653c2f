"""Self-describing checkpoints: a JSON header line carrying the full model
spec, its hash and parameter shapes (plus the training normalization span),
followed by raw float32 little-endian parameter payloads in declaration
order."""
from __future__ import annotations

import json

import numpy as np

from ..datapipe import NormalizationSpec
from ..errors import FormatError
from .runtime import Model
from .spec import spec_from_dict, spec_hash, spec_to_dict

_FORMAT = "radiocov-checkpoint"
_VERSION = 1


def save_checkpoint(
    model: Model, path, norm: NormalizationSpec | None = None,
    frame_size: int | None = None,
) -> None:
    """``frame_size`` records the training window so serving can default to it
    even for size-agnostic architectures."""
    params = model.parameters()
    header = {
        "format": _FORMAT,
        "version": _VERSION,
        "spec": spec_to_dict(model.spec),
        "spec_hash": spec_hash(model.spec),
        "params": [{"name": p.name, "shape": list(p.value.shape)} for p in params],
        "frame_size": frame_size if frame_size is not None else model.spec.frame_size,
        "norm": None
        if norm is None
        else {"floor_dbm": norm.floor_dbm, "ceil_dbm": norm.ceil_dbm},
    }
    with open(path, "wb") as fh:
        fh.write(json.dumps(header, sort_keys=True).encode() + b"\n")
        for p in params:
            fh.write(np.ascontiguousarray(p.value, dtype="<f4").tobytes())


def load_checkpoint(path) -> tuple[Model, NormalizationSpec | None, int | None]:
    with open(path, "rb") as fh:
        line = fh.readline()
        if not line.endswith(b"\n"):
            raise FormatError("missing checkpoint header")
        try:
            header = json.loads(line)
        except json.JSONDecodeError as exc:
            raise FormatError(f"bad checkpoint header: {exc}") from exc
        if header.get("format") != _FORMAT:
            raise FormatError(f"not a checkpoint file: format={header.get('format')!r}")
        if header.get("version") != _VERSION:
            raise FormatError(f"unsupported checkpoint version {header.get('version')}")
        spec = spec_from_dict(header["spec"])
        if spec_hash(spec) != header.get("spec_hash"):
            raise FormatError("spec hash mismatch; checkpoint header corrupted")
        model = Model(spec, seed=0)
        params = model.parameters()
        declared = header.get("params", [])
        if len(declared) != len(params):
            raise FormatError(
                f"parameter count mismatch: header {len(declared)}, model {len(params)}"
            )
        for p, meta in zip(params, declared):
            shape = tuple(meta["shape"])
            if shape != p.value.shape:
                raise FormatError(
                    f"shape mismatch for '{p.name}': header {shape}, model {p.value.shape}"
                )
            want = 4 * int(np.prod(shape, dtype=np.int64))
            blob = fh.read(want)
            if len(blob) != want:
                raise FormatError(f"truncated payload for '{p.name}'")
            p.value[...] = np.frombuffer(blob, dtype="<f4").reshape(shape)
    norm_doc = header.get("norm")
    norm = (
        NormalizationSpec(floor_dbm=norm_doc["floor_dbm"], ceil_dbm=norm_doc["ceil_dbm"])
        if norm_doc
        else None
    )
    frame_size = header.get("frame_size")
    return model, norm, int(frame_size) if frame_size is not None else None
