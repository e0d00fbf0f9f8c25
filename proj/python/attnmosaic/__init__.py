"""Saliency-driven Voronoi mosaics contrasting machine and human attention.

Images are (height, width, 3) uint8 arrays, saliency maps are (height, width)
float64 arrays, sites are (n, 2) arrays of x, y in pixel units.
"""

from ._attnmosaic import (
    Error,
    IoError,
    StageError,
    ValidationError,
    compose_panels,
    default_config,
    default_sigma,
    fixations_to_map,
    input_gradient_saliency,
    load_image,
    logits,
    normalize_density,
    parse_fixation_csv,
    render_tiles,
    run_pipeline,
    sample_sites,
    save_image,
    sobel_saliency,
    tessellate,
    tile_colors,
    voronoi_assign,
    voronoi_assign_bruteforce,
)

__all__ = [
    "Error",
    "IoError",
    "StageError",
    "ValidationError",
    "compose_panels",
    "default_config",
    "default_sigma",
    "fixations_to_map",
    "input_gradient_saliency",
    "load_image",
    "logits",
    "normalize_density",
    "parse_fixation_csv",
    "render_tiles",
    "run_pipeline",
    "sample_sites",
    "save_image",
    "sobel_saliency",
    "tessellate",
    "tile_colors",
    "voronoi_assign",
    "voronoi_assign_bruteforce",
]
