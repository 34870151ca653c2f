"""Audit every supported architecture: convolution-layer counts (total and
inside inception blocks), parameter counts, and the RadioUNET per-layer
resolution schedule.

Run:  python demos/03_architectures.py
"""
from radiocov.models import (
    build_baseline_cnn,
    build_radiounet,
    build_unet,
    build_unet_si,
    count_conv_layers,
    count_params,
    resolution_trace,
)

rows = []
for name, spec in [
    ("CNN k3", build_baseline_cnn(3)),
    ("CNN k5", build_baseline_cnn(5)),
    ("UNET k3 (maxpool)", build_unet(3)),
    ("UNET k5 (maxpool)", build_unet(5)),
    ("UNET k3 (strided)", build_unet(3, downsample="strided")),
    ("UNET-SI-37", build_unet_si(37)),
    ("UNET-SI-65", build_unet_si(65)),
    ("UNET-SI-73", build_unet_si(73)),
    ("UNET-SI-91", build_unet_si(91)),
    ("RadioUNET", build_radiounet()),
]:
    total, inception = count_conv_layers(spec)
    rows.append((name, total, inception, count_params(spec)))

print(f"{'model':22s} {'convs':>5s} {'inception':>9s} {'parameters':>14s}")
print("-" * 56)
for name, total, inception, params in rows:
    print(f"{name:22s} {total:5d} {inception:9d} {params:14,d}")

print("\nwidth scaling changes parameters, never layer counts:")
for scale in (1.0, 0.25, 0.125):
    spec = build_unet_si(37, width_scale=scale)
    total, inception = count_conv_layers(spec)
    print(f"  scale {scale:5.3f}: ({total}, {inception}) convs, "
          f"{count_params(spec):12,d} params")

print("\nRadioUNET stage-1 resolution schedule (256x256 input):")
print(" ", resolution_trace(build_radiounet()))
