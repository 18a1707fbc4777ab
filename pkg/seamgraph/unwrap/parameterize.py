"""Per-shell Tutte parameterization and atlas assembly."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Literal

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import shortest_path
from scipy.sparse.linalg import spsolve

from ..errors import MeshError, NumericalError
from ..mesh.core import Mesh, SeamLabels
from ..mesh.topology import cut_mesh_with_map, shells_from_labels
from .distortion import area_scale, face_distortion_from_uvs

logger = logging.getLogger(__name__)

TutteWeights = Literal["uniform", "mean_value"]

RESIDUAL_TOLERANCE = 1e-10


def boundary_loops(mesh: Mesh) -> list[np.ndarray]:
    """Ordered boundary vertex loops, following the face orientation.

    Each loop starts at its smallest vertex. Closed meshes yield an empty list.
    """
    successor: dict[int, int] = {}
    for face in mesh.faces.tolist():
        for k in range(3):
            a, b = face[k], face[(k + 1) % 3]
            if mesh.edge_faces[mesh.edge_id(a, b), 1] >= 0:
                continue
            if a in successor:
                raise MeshError(f"non-manifold boundary at vertex {a} of {mesh.name!r}")
            successor[a] = b

    loops: list[np.ndarray] = []
    visited: set[int] = set()
    for start in sorted(successor):
        if start in visited:
            continue
        loop = [start]
        visited.add(start)
        v = successor[start]
        while v != start:
            if v in visited or v not in successor:
                raise MeshError(f"non-manifold boundary at vertex {v} of {mesh.name!r}")
            loop.append(v)
            visited.add(v)
            v = successor[v]
        loops.append(np.asarray(loop, dtype=np.int64))
    return loops


def _loop_edge_lengths(mesh: Mesh, loop: np.ndarray) -> np.ndarray:
    """3D length of every loop edge, loop[k] → loop[k + 1]."""
    pts = mesh.vertices[loop]
    return np.linalg.norm(np.roll(pts, -1, axis=0) - pts, axis=1)


def _weight_matrix(mesh: Mesh, weights: TutteWeights) -> sp.csr_matrix:
    n = mesh.n_vertices
    if weights == "uniform":
        return sp.csr_matrix(mesh.adjacency, dtype=np.float64)
    if weights != "mean_value":
        raise ValueError(f"unknown Tutte weights {weights!r}")
    rows, cols, vals = [], [], []
    v = mesh.vertices
    f = mesh.faces
    for k in range(3):
        i, j, m = f[:, k], f[:, (k + 1) % 3], f[:, (k + 2) % 3]
        to_j = v[j] - v[i]
        to_m = v[m] - v[i]
        len_j = np.linalg.norm(to_j, axis=1)
        len_m = np.linalg.norm(to_m, axis=1)
        angle = np.arctan2(
            np.linalg.norm(np.cross(to_j, to_m), axis=1), np.einsum("ij,ij->i", to_j, to_m)
        )
        half = np.tan(0.5 * angle)
        rows += [i, i]
        cols += [j, m]
        vals += [half / len_j, half / len_m]
    return sp.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(n, n)
    )


def tutte_embed(mesh: Mesh, weights: TutteWeights = "uniform") -> np.ndarray:
    """Map the longest boundary loop to the unit circle and solve for the rest.

    Loop vertices sit at angles proportional to cumulative 3D boundary length.
    Every other vertex is the weighted average of its neighbours.
    """
    loops = boundary_loops(mesh)
    if not loops:
        raise MeshError(f"shell {mesh.name!r} is closed; cut it before embedding")
    lengths = [float(_loop_edge_lengths(mesh, loop).sum()) for loop in loops]
    pinned = loops[int(np.argmax(lengths))]

    edge_len = _loop_edge_lengths(mesh, pinned)
    total = float(edge_len.sum())
    if total <= 0:
        raise NumericalError(f"boundary of {mesh.name!r} has zero length")
    theta = 2.0 * np.pi * np.concatenate([[0.0], np.cumsum(edge_len)[:-1]]) / total

    uv = np.zeros((mesh.n_vertices, 2))
    uv[pinned] = np.column_stack([np.cos(theta), np.sin(theta)])
    free = np.ones(mesh.n_vertices, dtype=bool)
    free[pinned] = False
    if not free.any():
        return uv

    w = _weight_matrix(mesh, weights)
    laplacian = sp.diags(np.asarray(w.sum(axis=1)).reshape(-1)) - w
    laplacian = sp.csr_matrix(laplacian)
    inner = np.flatnonzero(free)
    a = laplacian[inner][:, inner].tocsc()
    rhs = -(laplacian[inner][:, pinned] @ uv[pinned])
    solution = np.asarray(spsolve(a, rhs)).reshape(len(inner), 2)
    if not np.isfinite(solution).all():
        raise NumericalError(f"Tutte system of {mesh.name!r} is singular")
    residual = float(np.abs(a @ solution - rhs).max())
    if residual > RESIDUAL_TOLERANCE * max(1.0, float(np.abs(rhs).max())):
        raise NumericalError(f"Tutte solve of {mesh.name!r} left residual {residual:.3e}")
    uv[inner] = solution
    return uv


def fallback_cut(mesh: Mesh) -> np.ndarray:
    """Edge ids of a path between two roughly farthest vertices of a closed shell.

    Open shells need no cut and get an empty array. The path has at least two
    edges so that cutting along it opens a slit.
    """
    if mesh.boundary_edge_mask.any():
        return np.zeros(0, dtype=np.int64)
    if mesh.n_faces < 2:
        raise MeshError(f"shell {mesh.name!r} cannot be closed with {mesh.n_faces} face")

    start = int(np.flatnonzero(mesh.referenced_vertex_mask)[0])
    hops = shortest_path(mesh.adjacency, unweighted=True, indices=start)
    a = int(np.argmax(np.where(np.isfinite(hops), hops, -1)))
    hops, pred = shortest_path(
        mesh.adjacency, unweighted=True, indices=a, return_predecessors=True
    )
    b = int(np.argmax(np.where(np.isfinite(hops), hops, -1)))

    path = [b]
    while path[-1] != a:
        path.append(int(pred[path[-1]]))
    path.reverse()
    while len(path) < 3:
        nbrs = mesh.adjacency[path[-1]].indices
        extra = [int(u) for u in np.sort(nbrs) if int(u) not in path]
        path.append(extra[0])
    return np.asarray(
        [mesh.edge_id(u, v) for u, v in zip(path[:-1], path[1:], strict=True)], dtype=np.int64
    )


@dataclass(frozen=True, eq=False)
class UvChart:
    """Planar layout of one shell: its faces and their corner UVs."""

    faces: np.ndarray
    corner_uvs: np.ndarray
    approximate: bool = False
    fallback_edges: int = 0


@dataclass(frozen=True, eq=False)
class UvAtlas:
    """All charts of a mesh, scaled so UV area equals 3D area."""

    shells: list[UvChart]
    face_to_shell: np.ndarray
    area_scale: float
    face_distortion: np.ndarray
    warnings: list[str] = field(default_factory=list)

    @property
    def corner_uvs(self) -> np.ndarray:
        """(F, 3, 2) UVs in mesh face order."""
        out = np.zeros((len(self.face_to_shell), 3, 2))
        for chart in self.shells:
            out[chart.faces] = chart.corner_uvs
        return out

    @property
    def approximate_count(self) -> int:
        return sum(chart.approximate for chart in self.shells)


def embed_shell(
    shell: Mesh, weights: TutteWeights = "uniform"
) -> tuple[np.ndarray, bool, int]:
    """Corner UVs for one shell; closed shells are opened first.

    Returns (corner UVs, approximate flag, number of fallback seam edges).
    """
    extra = fallback_cut(shell)
    if len(extra):
        labels = np.zeros(shell.n_edges, dtype=np.int8)
        labels[extra] = 1
        shell, _ = cut_mesh_with_map(shell, labels)
    loops = boundary_loops(shell)
    approximate = len(loops) != 1 or shell.euler_characteristic != 1
    uv = tutte_embed(shell, weights)
    return uv[shell.faces], approximate, len(extra)


def unwrap(mesh: Mesh, labels: SeamLabels, weights: TutteWeights = "uniform") -> UvAtlas:
    """Cut along seams, embed every shell, normalize area and measure distortion."""
    shells = shells_from_labels(mesh, labels)
    cut, _ = cut_mesh_with_map(mesh, labels)
    charts: list[UvChart] = []
    warnings: list[str] = []
    raw = np.zeros((mesh.n_faces, 3, 2))
    for s in range(shells.shell_count):
        faces = shells.faces_of(s)
        shell, _ = cut.submesh(faces)
        corner_uvs, approximate, fallback = embed_shell(shell, weights)
        if fallback:
            warnings.append(f"shell {s}: closed, opened with {fallback} fallback seam edges")
        if approximate:
            warnings.append(f"shell {s}: not a disk, chart is approximate")
        raw[faces] = corner_uvs
        charts.append(UvChart(faces, corner_uvs, approximate, fallback))

    scale = area_scale(mesh, raw)
    charts = [
        UvChart(c.faces, c.corner_uvs * scale, c.approximate, c.fallback_edges) for c in charts
    ]
    distortion = face_distortion_from_uvs(mesh, raw)
    logger.debug(
        "Unwrapped %r into %d shells (%d approximate)",
        mesh.name,
        shells.shell_count,
        sum(c.approximate for c in charts),
    )
    return UvAtlas(
        shells=charts,
        face_to_shell=shells.face_to_shell,
        area_scale=scale,
        face_distortion=distortion,
        warnings=warnings,
    )
