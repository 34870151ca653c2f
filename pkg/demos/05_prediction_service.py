"""Boot the prediction service in-process and exercise every endpoint the
interactive designer uses: model listing, prediction (one and two
transmitters), the ray-launching oracle, and a moving-object animation.

Run:  python demos/05_prediction_service.py
"""
import json
import threading
import urllib.request

import numpy as np

from radiocov.datapipe import NormalizationSpec
from radiocov.models import Model, build_unet_si
from radiocov.raytrace import PropagationConfig
from radiocov.scene import RegionMap, Scene, Transmitter, scene_to_json
from radiocov.service import CoverageService, make_server

FRAME = 32

service = CoverageService(
    sim_config=PropagationConfig(ray_count=512, max_reflections=3, max_path_length_m=200.0)
)
# A randomly initialized model keeps the demo self-contained; swap in a
# trained checkpoint via service.add_checkpoint for real predictions.
service.add_model(
    "demo-32",
    Model(build_unet_si(37, width_scale=0.125), seed=0),
    NormalizationSpec(-100.0, -10.0),
    FRAME,
)
server = make_server(service, port=0)
threading.Thread(target=server.serve_forever, daemon=True).start()
base = f"http://127.0.0.1:{server.server_address[1]}"
print(f"service listening at {base}")


def post(path, payload):
    req = urllib.request.Request(
        base + path, data=json.dumps(payload).encode(),
        headers={"Content-Type": "application/json"}, method="POST",
    )
    with urllib.request.urlopen(req, timeout=30) as resp:
        return json.loads(resp.read())


def scene_doc(txs):
    occ = np.zeros((FRAME, FRAME), dtype=bool)
    occ[12:20, 14:18] = True
    scene = Scene(RegionMap(FRAME, FRAME, occ),
                  tuple(Transmitter(x, y) for x, y in txs), "designer")
    return json.loads(scene_to_json(scene))


with urllib.request.urlopen(base + "/api/models", timeout=10) as resp:
    print("GET /api/models ->", json.dumps(json.loads(resp.read()), indent=2))

one = post("/api/predict", {"scene": scene_doc([(6, 16)]), "model_id": "demo-32"})
print(f"\npredict, 1 transmitter: {one['latency_ms']:.1f} ms, "
      f"grid {len(one['coverage_dbm'])}x{len(one['coverage_dbm'][0])}")

two = post("/api/predict", {"scene": scene_doc([(6, 16), (26, 16)]), "model_id": "demo-32"})
print(f"predict, 2 transmitters: {two['latency_ms']:.1f} ms "
      "(one-hot channels superpose; no retraining)")

oracle = post("/api/simulate", {"scene": scene_doc([(6, 16)]), "model_id": "demo-32"})
print(f"simulate (ground truth oracle): {oracle['latency_ms']:.1f} ms")

# Moving object: slide a block right to left across four frames.
scenes = []
for x0 in (24, 20, 16, 12):
    occ = np.zeros((FRAME, FRAME), dtype=bool)
    occ[14:18, x0:x0 + 3] = True
    scenes.append(json.loads(scene_to_json(
        Scene(RegionMap(FRAME, FRAME, occ), (Transmitter(4, 16),), "move"))))
anim = post("/api/animate", {"scenes": scenes, "model_id": "demo-32"})
print(f"animate: {len(anim['frames'])} frames in {anim['latency_ms']:.1f} ms total")

server.shutdown()
server.server_close()
print("\ndone; for the browser designer run:")
print("  radiocov serve --checkpoint demo=<ckpt> --static frontend --port 8787")
