"""Architecture specs, builders, runtime and checkpoints."""
from .builders import (
    DEFAULT_SI_BASE_WIDTH,
    DEFAULT_UNET_BASE_WIDTH,
    RADIOUNET_FRAME_SIZE,
    UNET_SI_VARIANTS,
    build_baseline_cnn,
    build_radiounet,
    build_unet,
    build_unet_si,
    inception_branch_widths,
)
from .checkpoint import load_checkpoint, save_checkpoint
from .runtime import Model, materialize
from .spec import (
    InceptionBlockSpec,
    LayerSpec,
    ModelSpec,
    count_conv_layers,
    count_params,
    resolution_trace,
    spatial_plan,
    spec_from_dict,
    spec_hash,
    spec_to_dict,
    spec_to_json,
    validate_spec,
)

__all__ = [
    "DEFAULT_SI_BASE_WIDTH",
    "DEFAULT_UNET_BASE_WIDTH",
    "InceptionBlockSpec",
    "LayerSpec",
    "Model",
    "ModelSpec",
    "RADIOUNET_FRAME_SIZE",
    "UNET_SI_VARIANTS",
    "build_baseline_cnn",
    "build_radiounet",
    "build_unet",
    "build_unet_si",
    "count_conv_layers",
    "count_params",
    "inception_branch_widths",
    "load_checkpoint",
    "materialize",
    "resolution_trace",
    "save_checkpoint",
    "spatial_plan",
    "spec_from_dict",
    "spec_hash",
    "spec_to_dict",
    "spec_to_json",
    "validate_spec",
]
