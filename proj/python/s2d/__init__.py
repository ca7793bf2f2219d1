"""Sparse-to-dense depth completion with normal-guided filtering.

Images are numpy arrays: float64 (H, W) depth in metres, float64 (H, W, 3) unit normals,
uint8 (H, W, 3) color and int32 (H, W) superpixel labels. A depth of 0 or an all-zero normal
marks a pixel without a value.
"""

from ._core import (
    CameraIntrinsics,
    Error,
    InvalidInput,
    NoCorrectionEvidence,
    NoSeeds,
    NumericalFailure,
    ParseError,
    ate_rmse,
    config_keys,
    corrupt,
    default_camera,
    depth_to_normal,
    fixture_names,
    format_config,
    fuse_observation,
    normal_guided_filter,
    pcd,
    project,
    render_fixture,
    run_pipeline,
    scale_correct,
    sparse_to_dense,
    superpixel_segment,
    unproject,
)

__all__ = [
    "CameraIntrinsics",
    "Error",
    "InvalidInput",
    "NoCorrectionEvidence",
    "NoSeeds",
    "NumericalFailure",
    "ParseError",
    "ate_rmse",
    "config_keys",
    "corrupt",
    "default_camera",
    "depth_to_normal",
    "fixture_names",
    "format_config",
    "fuse_observation",
    "normal_guided_filter",
    "pcd",
    "project",
    "render_fixture",
    "run_pipeline",
    "scale_correct",
    "sparse_to_dense",
    "superpixel_segment",
    "unproject",
]
