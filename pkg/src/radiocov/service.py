"""HTTP service exposing coverage prediction and the ray-launching oracle.

Endpoints (JSON over POST unless noted):

* ``POST /api/predict``  {scene, model_id} -> normalized + dBm grids
* ``POST /api/simulate`` {scene, model_id?} -> ground-truth grids
* ``POST /api/animate``  {scenes: [...], model_id} -> per-scene predictions
* ``GET  /api/models``   -> loaded checkpoints with frame sizes and norms

Model weights are frozen after load, so responses are pure functions of the
request. Simulation requests share a small work-budget semaphore; when
saturated the service answers 503 with a retry hint instead of queueing
unboundedly. Anything outside ``/api`` serves static files when a directory
is configured (the browser designer).
"""
from __future__ import annotations

import json
import mimetypes
import threading
import time
from dataclasses import dataclass
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path

import numpy as np

from .datapipe import EncodingScheme, NormalizationSpec, encode_input_multi
from .errors import RadiocovError, SceneParseError
from .models.checkpoint import load_checkpoint
from .models.runtime import Model
from .models.spec import count_params
from .raytrace import PropagationConfig, simulate
from .scene import Scene, scene_from_dict

MAX_CONCURRENT_SIMULATIONS = 2


@dataclass
class ModelEntry:
    model_id: str
    model: Model
    norm: NormalizationSpec
    frame_size: int
    encoding: EncodingScheme


class ApiError(Exception):
    def __init__(self, status: int, message: str, **extra):
        super().__init__(message)
        self.status = status
        self.payload = {"error": message, **extra}


class CoverageService:
    """Request handling, independent of the HTTP plumbing (unit-testable)."""

    def __init__(self, sim_config: PropagationConfig = PropagationConfig()):
        self.entries: dict[str, ModelEntry] = {}
        self.sim_config = sim_config
        self._sim_slots = threading.BoundedSemaphore(MAX_CONCURRENT_SIMULATIONS)

    def add_checkpoint(self, model_id: str, path, frame_size: int | None = None) -> ModelEntry:
        model, norm, trained_size = load_checkpoint(path)
        if norm is None:
            raise SceneParseError(
                f"checkpoint '{path}' carries no normalization sidecar; cannot serve dBm"
            )
        size = frame_size if frame_size is not None else (trained_size or 32)
        entry = ModelEntry(
            model_id=model_id,
            model=model,
            norm=norm,
            frame_size=size,
            encoding=EncodingScheme.TWO_BINARY,
        )
        self.entries[model_id] = entry
        return entry

    def add_model(self, model_id: str, model: Model, norm: NormalizationSpec, frame_size: int):
        self.entries[model_id] = ModelEntry(
            model_id=model_id,
            model=model,
            norm=norm,
            frame_size=frame_size,
            encoding=EncodingScheme.TWO_BINARY,
        )

    def models_info(self) -> dict:
        return {
            "models": [
                {
                    "model_id": e.model_id,
                    "frame_size": e.frame_size,
                    "input_channels": e.model.spec.input_channels,
                    "encoding": e.encoding.value,
                    "norm": {"floor_dbm": e.norm.floor_dbm, "ceil_dbm": e.norm.ceil_dbm},
                    "params": count_params(e.model.spec),
                }
                for e in self.entries.values()
            ]
        }

    def _entry(self, model_id) -> ModelEntry:
        if not isinstance(model_id, str) or model_id not in self.entries:
            raise ApiError(404, f"unknown model_id '{model_id}'")
        return self.entries[model_id]

    def _parse_scene(self, doc, frame_size: int) -> Scene:
        if not isinstance(doc, dict):
            raise ApiError(400, "scene must be a JSON object")
        try:
            scene = scene_from_dict(doc)
        except SceneParseError as exc:
            raise ApiError(400, f"bad scene: {exc}") from exc
        if (scene.region.width, scene.region.height) != (frame_size, frame_size):
            raise ApiError(
                400,
                f"scene is {scene.region.width}x{scene.region.height} but the model "
                f"expects {frame_size}x{frame_size}",
                expected_size=frame_size,
            )
        return scene

    def _predict_grid(self, entry: ModelEntry, scene: Scene) -> np.ndarray:
        txs = [(t.x, t.y) for t in scene.transmitters]
        encoded = encode_input_multi(scene.region.occupancy, txs, entry.encoding)
        pred = entry.model.predict(encoded[None].astype(np.float32))[0, 0]
        return np.clip(pred, 0.0, 1.0)

    def predict(self, request: dict) -> dict:
        entry = self._entry(request.get("model_id"))
        scene = self._parse_scene(request.get("scene"), entry.frame_size)
        start = time.perf_counter()
        unit = self._predict_grid(entry, scene)
        latency_ms = (time.perf_counter() - start) * 1000.0
        return {
            "model_id": entry.model_id,
            "latency_ms": latency_ms,
            "coverage_norm": unit.astype(float).tolist(),
            "coverage_dbm": entry.norm.denormalize(unit).astype(float).tolist(),
        }

    def simulate(self, request: dict) -> dict:
        model_id = request.get("model_id")
        if model_id is not None:
            norm = self._entry(model_id).norm
            frame_size = self._entry(model_id).frame_size
            scene = self._parse_scene(request.get("scene"), frame_size)
        else:
            doc = request.get("scene")
            if not isinstance(doc, dict):
                raise ApiError(400, "scene must be a JSON object")
            try:
                scene = scene_from_dict(doc)
            except SceneParseError as exc:
                raise ApiError(400, f"bad scene: {exc}") from exc
            norm = None
        if not self._sim_slots.acquire(blocking=False):
            raise ApiError(503, "simulation queue saturated", retry=True)
        try:
            start = time.perf_counter()
            grid = simulate(scene, self.sim_config)
            latency_ms = (time.perf_counter() - start) * 1000.0
        finally:
            self._sim_slots.release()
        dbm = grid.power_dbm.astype(np.float64)
        if norm is None:
            ceil = float(dbm.max())
            floor = self.sim_config.receiver_floor_dbm
            norm = NormalizationSpec(floor_dbm=floor, ceil_dbm=max(ceil, floor + 1.0))
        return {
            "latency_ms": latency_ms,
            "coverage_norm": norm.normalize(dbm).astype(float).tolist(),
            "coverage_dbm": dbm.tolist(),
        }

    def animate(self, request: dict) -> dict:
        entry = self._entry(request.get("model_id"))
        docs = request.get("scenes")
        if not isinstance(docs, list) or not docs:
            raise ApiError(400, "scenes must be a non-empty list")
        scenes = [self._parse_scene(d, entry.frame_size) for d in docs]
        frames = []
        start = time.perf_counter()
        for scene in scenes:
            unit = self._predict_grid(entry, scene)
            frames.append(
                {
                    "coverage_norm": unit.astype(float).tolist(),
                    "coverage_dbm": entry.norm.denormalize(unit).astype(float).tolist(),
                }
            )
        return {
            "model_id": entry.model_id,
            "latency_ms": (time.perf_counter() - start) * 1000.0,
            "frames": frames,
        }


def make_handler(service: CoverageService, static_dir: Path | None = None):
    routes = {
        "/api/predict": service.predict,
        "/api/simulate": service.simulate,
        "/api/animate": service.animate,
    }

    class Handler(BaseHTTPRequestHandler):
        protocol_version = "HTTP/1.1"

        def log_message(self, fmt, *args):  # keep test output quiet
            pass

        def _send_json(self, status: int, payload: dict) -> None:
            blob = json.dumps(payload).encode()
            self.send_response(status)
            self.send_header("Content-Type", "application/json")
            self.send_header("Content-Length", str(len(blob)))
            self.send_header("Access-Control-Allow-Origin", "*")
            self.end_headers()
            self.wfile.write(blob)

        def do_OPTIONS(self):
            self.send_response(204)
            self.send_header("Access-Control-Allow-Origin", "*")
            self.send_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS")
            self.send_header("Access-Control-Allow-Headers", "Content-Type")
            self.send_header("Content-Length", "0")
            self.end_headers()

        def do_GET(self):
            if self.path.split("?")[0] == "/api/models":
                self._send_json(200, service.models_info())
                return
            if static_dir is None:
                self._send_json(404, {"error": f"no route {self.path}"})
                return
            rel = self.path.split("?")[0].lstrip("/") or "index.html"
            target = (static_dir / rel).resolve()
            if not str(target).startswith(str(static_dir.resolve())) or not target.is_file():
                self._send_json(404, {"error": f"no route {self.path}"})
                return
            blob = target.read_bytes()
            ctype = mimetypes.guess_type(str(target))[0] or "application/octet-stream"
            self.send_response(200)
            self.send_header("Content-Type", ctype)
            self.send_header("Content-Length", str(len(blob)))
            self.end_headers()
            self.wfile.write(blob)

        def do_POST(self):
            handler = routes.get(self.path.split("?")[0])
            if handler is None:
                self._send_json(404, {"error": f"no route {self.path}"})
                return
            try:
                length = int(self.headers.get("Content-Length", "0"))
                request = json.loads(self.rfile.read(length) or b"{}")
            except (ValueError, json.JSONDecodeError) as exc:
                self._send_json(400, {"error": f"bad request body: {exc}"})
                return
            try:
                self._send_json(200, handler(request))
            except ApiError as exc:
                self._send_json(exc.status, exc.payload)
            except RadiocovError as exc:
                self._send_json(400, {"error": str(exc), "code": exc.code})

    return Handler


def make_server(
    service: CoverageService, port: int = 8787, host: str = "127.0.0.1",
    static_dir: Path | None = None,
) -> ThreadingHTTPServer:
    return ThreadingHTTPServer((host, port), make_handler(service, static_dir))
