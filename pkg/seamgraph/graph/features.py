"""Per-vertex features: normalized position, normal, angle-deficit curvature."""

from __future__ import annotations

import numpy as np

from ..errors import MeshError, NumericalError
from ..mesh.core import Mesh

FEATURE_WIDTH = 7


def vertex_normals(mesh: Mesh) -> np.ndarray:
    """Area-weighted average of incident face normals, renormalized.

    Normals stored in the source file are never used.
    """
    if not mesh.referenced_vertex_mask.all():
        isolated = int(np.argmin(mesh.referenced_vertex_mask))
        raise MeshError(f"vertex {isolated} has no incident faces")
    face_n = mesh.face_normals()
    acc = np.zeros_like(mesh.vertices)
    for k in range(3):
        np.add.at(acc, mesh.faces[:, k], face_n)
    norms = np.linalg.norm(acc, axis=1)
    if (norms == 0).any():
        raise NumericalError(f"normal of vertex {int(np.argmin(norms))} is undefined")
    return acc / norms[:, None]


def corner_angles(mesh: Mesh) -> np.ndarray:
    """Interior angle at every face corner, shape (F, 3)."""
    v = mesh.vertices
    f = mesh.faces
    angles = np.empty(f.shape, dtype=np.float64)
    for k in range(3):
        a = v[f[:, k]]
        b = v[f[:, (k + 1) % 3]] - a
        c = v[f[:, (k + 2) % 3]] - a
        cross = np.linalg.norm(np.cross(b, c), axis=1)
        angles[:, k] = np.arctan2(cross, np.einsum("ij,ij->i", b, c))
    return angles


def gaussian_curvature(mesh: Mesh) -> np.ndarray:
    """Angle deficit per vertex: 2π − Σθ inside, π − Σθ on the boundary."""
    areas = mesh.face_areas()
    degenerate = np.flatnonzero(~(areas > 0))
    if len(degenerate):
        face = int(degenerate[0])
        raise NumericalError(f"face {face} has zero area", face=face)
    angle_sum = np.zeros(mesh.n_vertices)
    np.add.at(angle_sum, mesh.faces.reshape(-1), corner_angles(mesh).reshape(-1))
    full = np.where(mesh.boundary_vertex_mask, np.pi, 2.0 * np.pi)
    return full - angle_sum


def curvature_feature(mesh: Mesh) -> np.ndarray:
    """Angle deficits divided by their root mean square over the mesh.

    A mesh whose deficits are all (numerically) zero keeps them unscaled.
    """
    k = gaussian_curvature(mesh)
    rms = float(np.sqrt(np.mean(k**2)))
    if rms <= 1e-12:
        return k
    return k / rms


def normalized_coordinates(mesh: Mesh) -> np.ndarray:
    """Center on the bounding box and divide by half its diagonal."""
    lo, hi = mesh.bounding_box()
    half_diag = 0.5 * float(np.linalg.norm(hi - lo))
    if half_diag == 0:
        raise MeshError(f"mesh {mesh.name!r} has zero extent")
    return (mesh.vertices - 0.5 * (lo + hi)) / half_diag


def node_features(mesh: Mesh) -> np.ndarray:
    """Rows [x, y, z, nx, ny, nz, K] for every vertex, K scaled to unit RMS."""
    return np.column_stack(
        [normalized_coordinates(mesh), vertex_normals(mesh), curvature_feature(mesh)]
    )
