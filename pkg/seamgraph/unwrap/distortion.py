"""Area distortion of a UV layout relative to the 3D surface."""

from __future__ import annotations

import json
from typing import TYPE_CHECKING

import numpy as np

from ..errors import NumericalError
from ..mesh.core import Mesh
from ..mesh.io import write_ply

if TYPE_CHECKING:
    from .parameterize import UvAtlas


def uv_areas(corner_uvs: np.ndarray) -> np.ndarray:
    """Unsigned UV area of every face from (F, 3, 2) corner coordinates."""
    a = corner_uvs[:, 1] - corner_uvs[:, 0]
    b = corner_uvs[:, 2] - corner_uvs[:, 0]
    return 0.5 * np.abs(a[:, 0] * b[:, 1] - a[:, 1] * b[:, 0])


def signed_uv_areas(corner_uvs: np.ndarray) -> np.ndarray:
    a = corner_uvs[:, 1] - corner_uvs[:, 0]
    b = corner_uvs[:, 2] - corner_uvs[:, 0]
    return 0.5 * (a[:, 0] * b[:, 1] - a[:, 1] * b[:, 0])


def _surface_areas(mesh: Mesh) -> np.ndarray:
    areas = mesh.face_areas()
    degenerate = np.flatnonzero(~(areas > 0))
    if len(degenerate):
        face = int(degenerate[0])
        raise NumericalError(f"face {face} of {mesh.name!r} has zero area", face=face)
    return areas


def area_scale(mesh: Mesh, corner_uvs: np.ndarray) -> float:
    """Scale s with s² · Σ uv area = Σ 3D area."""
    uv_total = float(uv_areas(corner_uvs).sum())
    if uv_total <= 0:
        raise NumericalError(f"UV layout of {mesh.name!r} has zero area")
    return float(np.sqrt(_surface_areas(mesh).sum() / uv_total))


def face_distortion_from_uvs(mesh: Mesh, corner_uvs: np.ndarray) -> np.ndarray:
    """D_f = s² · uv_area(f) / area3d(f) for every face."""
    corner_uvs = np.asarray(corner_uvs, dtype=np.float64)
    if corner_uvs.shape != (mesh.n_faces, 3, 2):
        raise ValueError(f"expected corner UVs of shape ({mesh.n_faces}, 3, 2)")
    s = area_scale(mesh, corner_uvs)
    return s * s * uv_areas(corner_uvs) / _surface_areas(mesh)


def face_distortion(mesh: Mesh, atlas: UvAtlas) -> np.ndarray:
    """Distortion of every face under ``atlas``; invariant to global UV scale."""
    return face_distortion_from_uvs(mesh, atlas.corner_uvs)


def avg_distortion(distortion: np.ndarray) -> float:
    """Mean of |D_f − 1|; zero for an isometric layout."""
    distortion = np.asarray(distortion, dtype=np.float64)
    if distortion.size == 0:
        return 0.0
    return float(np.mean(np.abs(distortion - 1.0)))


def distortion_colors(distortion: np.ndarray) -> np.ndarray:
    """RGB per face: blue for compression, white for none, red for stretch.

    Saturates at a factor of two either way.
    """
    t = np.clip(np.log2(np.maximum(np.asarray(distortion, float), 1e-12)), -1.0, 1.0)
    fade = 1.0 - np.abs(t)
    red = np.where(t >= 0, 1.0, fade)
    blue = np.where(t <= 0, 1.0, fade)
    rgb = np.column_stack([red, fade, blue])
    return np.round(255 * rgb).astype(np.uint8)


def write_distortion_ply(mesh: Mesh, distortion: np.ndarray, binary: bool = False) -> bytes:
    """PLY with unshared vertices colored by their face's distortion."""
    distortion = np.asarray(distortion, dtype=np.float64)
    if distortion.shape != (mesh.n_faces,):
        raise ValueError(f"expected {mesh.n_faces} distortion values")
    exploded = Mesh(
        vertices=mesh.vertices[mesh.faces.reshape(-1)],
        faces=np.arange(3 * mesh.n_faces).reshape(-1, 3),
        name=f"{mesh.name}-distortion",
    )
    colors = np.repeat(distortion_colors(distortion), 3, axis=0)
    return write_ply(exploded, vertex_colors=colors, binary=binary)


def distortion_json(distortion: np.ndarray) -> str:
    """Distortion values as a JSON array in face order."""
    return json.dumps(np.asarray(distortion, dtype=np.float64).tolist())
