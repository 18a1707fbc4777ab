"""Per-shell parameterization and distortion measurement."""

from .distortion import (
    avg_distortion,
    distortion_colors,
    distortion_json,
    face_distortion,
    write_distortion_ply,
)
from .parameterize import (
    UvAtlas,
    UvChart,
    boundary_loops,
    fallback_cut,
    tutte_embed,
    unwrap,
)

__all__ = [
    "UvAtlas",
    "UvChart",
    "avg_distortion",
    "boundary_loops",
    "distortion_colors",
    "distortion_json",
    "face_distortion",
    "fallback_cut",
    "tutte_embed",
    "unwrap",
    "write_distortion_ply",
]
