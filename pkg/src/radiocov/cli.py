"""Command-line pipeline: simulate | build-dataset | train | eval | predict | serve.

Every failure exits nonzero printing a single machine-parseable line to
stderr: ``error=<code> <human message>``.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import datapipe, raytrace, trainer
from .errors import FormatError, RadiocovError, SceneParseError
from .heatmap import coverage_to_rgb, write_png
from .models import builders
from .models.checkpoint import load_checkpoint, save_checkpoint
from .scene import json_to_scene
from .service import CoverageService, make_server

MODEL_CHOICES = (
    "cnn",
    "unet",
    "unet-strided",
    "unet-si-37",
    "unet-si-65",
    "unet-si-73",
    "unet-si-91",
    "radiounet",
)


def _load_scene(path: str):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise SceneParseError(f"cannot read scene '{path}': {exc}") from exc
    return json_to_scene(text)


def _parse_kernel_set(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(tok) for tok in text.split(","))
    except ValueError as exc:
        raise SceneParseError(f"bad kernel set '{text}'; expected e.g. 1,3,5") from exc


def _build_spec(args) -> "builders.ModelSpec":
    name = args.model
    if name == "cnn":
        return builders.build_baseline_cnn(args.kernel, width_scale=args.width_scale)
    if name == "unet":
        return builders.build_unet(args.kernel, width_scale=args.width_scale)
    if name == "unet-strided":
        return builders.build_unet(
            args.kernel, downsample="strided", width_scale=args.width_scale
        )
    if name.startswith("unet-si-"):
        return builders.build_unet_si(
            int(name.rsplit("-", 1)[1]),
            kernel_set=_parse_kernel_set(args.kernel_set),
            width_scale=args.width_scale,
        )
    if name == "radiounet":
        return builders.build_radiounet(width_scale=args.width_scale)
    raise SceneParseError(f"unknown model '{name}'")


def _cmd_simulate(args) -> int:
    scene = _load_scene(args.scene)
    config = raytrace.PropagationConfig(
        ray_count=args.rays,
        max_reflections=args.reflections,
        frequency_hz=args.frequency,
        receiver_floor_dbm=args.floor_dbm,
        max_path_length_m=args.max_path,
    )
    grid = raytrace.simulate(scene, config)
    raytrace.save_coverage(grid, args.out)
    if args.png:
        norm = datapipe.NormalizationSpec(
            floor_dbm=args.floor_dbm,
            ceil_dbm=max(float(grid.power_dbm.max()), args.floor_dbm + 1.0),
        )
        rgb = coverage_to_rgb(
            norm.normalize(grid.power_dbm),
            scene.region.occupancy,
            [(t.x, t.y) for t in scene.transmitters],
        )
        write_png(args.png, rgb)
    print(f"wrote {args.out} ({grid.width}x{grid.height})")
    return 0


def _cmd_build_dataset(args) -> int:
    indir = Path(args.in_dir)
    pairs = []
    for scene_path in sorted(indir.glob("*.json")):
        raster = scene_path.with_suffix(".rcov")
        if not raster.exists():
            raise FormatError(f"no coverage raster next to '{scene_path.name}'")
        pairs.append((json_to_scene(scene_path.read_text()), raytrace.load_coverage(raster)))
    if not pairs:
        raise FormatError(f"no scene/raster pairs found in '{indir}'")
    dataset = datapipe.build_dataset(
        pairs,
        frame_size=args.frames,
        encoding=datapipe.EncodingScheme.parse(args.encoding),
        floor_dbm=args.floor_dbm,
        stride=args.stride,
        edge_padding=args.padding,
        boundary=args.boundary,
        gap=args.gap,
    )
    datapipe.save_dataset(dataset, args.out)
    n_train = len(dataset.indices("train"))
    n_test = len(dataset.indices("test"))
    print(f"wrote {args.out}: {len(dataset.frames)} frames ({n_train} train / {n_test} test)")
    return 0


def _cmd_train(args) -> int:
    dataset = datapipe.load_dataset(args.dataset)
    spec = _build_spec(args)
    config = trainer.TrainConfig(
        batch_size=args.batch,
        max_epochs=args.epochs,
        patience=args.patience,
        shuffle_seed=args.seed,
        width_scale=args.width_scale,
    )
    model, report = train_and_save(spec, dataset, config, args.out)
    report.checkpoint_path = str(args.out)
    print(report.to_json())
    row = trainer.ExperimentRow(
        model=spec.name,
        kernel_size=dict(spec.meta).get("kernel_set", str(getattr(args, "kernel", 3))),
        mae_min_db=report.best_test_mae_dbm,
        mae_max_db=report.best_test_mae_dbm,
        mae_avg_db=report.best_test_mae_dbm,
        time_hr=report.wall_seconds / 3600.0,
        param_count=trainer.count_params(spec),
    )
    print(trainer.format_experiment_table([row]))
    return 0


def train_and_save(spec, dataset, config, out_path):
    model, report = trainer.train(spec, dataset, config)
    save_checkpoint(model, out_path, norm=dataset.norm, frame_size=dataset.frame_size)
    return model, report


def _cmd_eval(args) -> int:
    dataset = datapipe.load_dataset(args.dataset)
    frames = dataset.subset(args.split)
    if args.identity:
        # Debug path: replay the targets as predictions; all metrics must be 0.
        offset = 0

        class _Replay:
            def predict(self, x):
                nonlocal offset
                out = np.stack([f.target for f in frames[offset : offset + len(x)]])
                offset += len(x)
                return out

        metrics = trainer.evaluate(_Replay(), frames, dataset.norm)
        print(json.dumps(metrics, sort_keys=True))
        return 0
    if not args.checkpoint:
        raise FormatError("--checkpoint is required unless --identity is given")
    model, norm, _ = load_checkpoint(args.checkpoint)
    metrics = trainer.evaluate(model, frames, norm or dataset.norm)
    print(json.dumps(metrics, sort_keys=True))
    return 0


def _cmd_predict(args) -> int:
    scene = _load_scene(args.scene)
    model, norm, _ = load_checkpoint(args.checkpoint)
    if norm is None:
        raise FormatError(f"checkpoint '{args.checkpoint}' lacks a normalization sidecar")
    encoded = datapipe.encode_input_multi(
        scene.region.occupancy,
        [(t.x, t.y) for t in scene.transmitters],
        datapipe.EncodingScheme.TWO_BINARY,
    )
    unit = np.clip(model.predict(encoded[None].astype(np.float32))[0, 0], 0.0, 1.0)
    dbm = norm.denormalize(unit)
    grid = raytrace.CoverageGrid(
        width=scene.region.width, height=scene.region.height, power_dbm=dbm
    )
    raytrace.save_coverage(grid, args.out)
    if args.png:
        rgb = coverage_to_rgb(
            unit, scene.region.occupancy, [(t.x, t.y) for t in scene.transmitters]
        )
        write_png(args.png, rgb)
    print(f"wrote {args.out} ({grid.width}x{grid.height})")
    return 0


def _cmd_serve(args) -> int:
    service = CoverageService(
        sim_config=raytrace.PropagationConfig(
            ray_count=args.rays,
            max_reflections=args.reflections,
            receiver_floor_dbm=args.floor_dbm,
        )
    )
    for item in args.checkpoint or []:
        if "=" in item:
            model_id, path = item.split("=", 1)
        else:
            model_id, path = Path(item).stem, item
        entry = service.add_checkpoint(model_id, path)
        print(f"loaded '{model_id}' ({entry.frame_size}x{entry.frame_size}) from {path}",
              flush=True)
    static = Path(args.static).resolve() if args.static else None
    server = make_server(service, port=args.port, static_dir=static)
    print(f"serving on http://127.0.0.1:{server.server_address[1]}", flush=True)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="radiocov")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="trace a scene into a coverage raster")
    p.add_argument("--scene", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--png")
    p.add_argument("--reflections", type=int, default=6)
    p.add_argument("--rays", type=int, default=None)
    p.add_argument("--frequency", type=float, default=2.4e9)
    p.add_argument("--floor-dbm", type=float, default=-100.0)
    p.add_argument("--max-path", type=float, default=1000.0)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("build-dataset", help="turn scene/raster pairs into training frames")
    p.add_argument("--in", dest="in_dir", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--frames", type=int, default=32)
    p.add_argument("--stride", type=int, default=3)
    p.add_argument("--padding", type=int, default=5)
    p.add_argument("--boundary", type=int, default=60)
    p.add_argument("--gap", type=int, default=20)
    p.add_argument("--floor-dbm", type=float, default=-100.0)
    p.add_argument("--encoding", default="two-binary")
    p.set_defaults(func=_cmd_build_dataset)

    p = sub.add_parser("train", help="train a model on a dataset file")
    p.add_argument("--dataset", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--model", choices=MODEL_CHOICES, default="unet-si-37")
    p.add_argument("--kernel", type=int, default=3)
    p.add_argument("--kernel-set", default="1,3,5")
    p.add_argument("--batch", type=int, default=None)
    p.add_argument("--epochs", type=int, default=100)
    p.add_argument("--patience", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--width-scale", type=float, default=0.125)
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("eval", help="evaluate a checkpoint on a dataset split")
    p.add_argument("--dataset", required=True)
    p.add_argument("--checkpoint")
    p.add_argument("--split", choices=("train", "test"), default="test")
    p.add_argument("--identity", action="store_true",
                   help="debug: score targets against themselves (expect zeros)")
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("predict", help="predict coverage for a scene with a checkpoint")
    p.add_argument("--scene", required=True)
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--png")
    p.set_defaults(func=_cmd_predict)

    p = sub.add_parser("serve", help="start the HTTP prediction service")
    p.add_argument("--port", type=int, default=8787)
    p.add_argument("--checkpoint", action="append",
                   help="model_id=path (repeatable); bare path uses the file stem")
    p.add_argument("--static", help="directory of UI files to serve at /")
    p.add_argument("--rays", type=int, default=None)
    p.add_argument("--reflections", type=int, default=6)
    p.add_argument("--floor-dbm", type=float, default=-100.0)
    p.set_defaults(func=_cmd_serve)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except RadiocovError as exc:
        print(f"error={exc.code} {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error=io {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
