"""Thin-lens radiance field: Python surface over the C++ core."""

from ._nerfocus import (  # noqa: F401
    LensConfig,
    SuiteResult,
    axis_cone_diameter,
    bicone_diameter,
    coc_diameter_scene_point,
    composite_diameter,
    expected_component,
    gaussian_blur,
    gaussian_kernel,
    generate_dataset,
    image_distance,
    integrated_positional_encode,
    psnr,
    read_png,
    render,
    run_verify,
    train,
    write_png,
)

__all__ = [
    "LensConfig",
    "SuiteResult",
    "axis_cone_diameter",
    "bicone_diameter",
    "coc_diameter_scene_point",
    "composite_diameter",
    "expected_component",
    "gaussian_blur",
    "gaussian_kernel",
    "generate_dataset",
    "image_distance",
    "integrated_positional_encode",
    "psnr",
    "read_png",
    "render",
    "run_verify",
    "train",
    "write_png",
]
