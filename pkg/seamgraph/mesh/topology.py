"""Seam extraction from UVs, shell partitioning and cutting along seams."""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

from ..errors import MeshError
from .core import Mesh, SeamLabels, ShellPartition, validate_labels

UV_TOLERANCE = 1e-7


def _corner_slot(mesh: Mesh, faces: np.ndarray, verts: np.ndarray) -> np.ndarray:
    """Position (0..2) of each vertex inside the matching face."""
    return np.argmax(mesh.faces[faces] == verts[:, None], axis=1)


def seams_from_uvs(mesh: Mesh, tolerance: float = UV_TOLERANCE) -> SeamLabels:
    """Label an interior edge 1 when its two faces disagree on either endpoint's UV.

    Boundary edges are labeled 0. Vertex-uniform UVs (from PLY) carry no seams.
    """
    if mesh.corner_uvs is None:
        raise MeshError(f"mesh {mesh.name!r} has no UV coordinates")
    labels = np.zeros(mesh.n_edges, dtype=np.int8)
    if mesh.uvs_vertex_uniform:
        return labels

    interior = np.flatnonzero(mesh.edge_faces[:, 1] >= 0)
    if len(interior) == 0:
        return labels
    f1 = mesh.edge_faces[interior, 0]
    f2 = mesh.edge_faces[interior, 1]
    gap = np.zeros(len(interior))
    for end in (0, 1):
        v = mesh.edges[interior, end]
        uv1 = mesh.corner_uvs[f1, _corner_slot(mesh, f1, v)]
        uv2 = mesh.corner_uvs[f2, _corner_slot(mesh, f2, v)]
        gap = np.maximum(gap, np.linalg.norm(uv1 - uv2, axis=1))
    labels[interior[gap > tolerance]] = 1
    return labels


def _renumber_by_first_face(components: np.ndarray) -> tuple[np.ndarray, int]:
    _, first, inverse = np.unique(components, return_index=True, return_inverse=True)
    rank = np.empty(len(first), dtype=np.int64)
    rank[np.argsort(first, kind="stable")] = np.arange(len(first))
    return rank[inverse.reshape(-1)], len(first)


def shells_from_labels(mesh: Mesh, labels: SeamLabels) -> ShellPartition:
    """Group faces by transitive adjacency across non-seam edges.

    Shell indices follow the order of each shell's first face.
    """
    labels = validate_labels(mesh, labels)
    keep = (mesh.edge_faces[:, 1] >= 0) & (labels == 0)
    f1 = mesh.edge_faces[keep, 0]
    f2 = mesh.edge_faces[keep, 1]
    n = mesh.n_faces
    graph = sp.csr_matrix((np.ones(len(f1)), (f1, f2)), shape=(n, n))
    _, components = connected_components(graph, directed=False)
    face_to_shell, count = _renumber_by_first_face(components)
    return ShellPartition(face_to_shell=face_to_shell, shell_count=count)


def cut_mesh_with_map(mesh: Mesh, labels: SeamLabels) -> tuple[Mesh, np.ndarray]:
    """Cut along seams; also return the map from new vertex ids to old ones.

    Corners around a vertex stay glued when their faces share a non-seam edge
    through that vertex; every resulting corner group becomes its own vertex.
    Vertices referenced by no face are kept. New vertices are ordered by
    (original vertex, first corner), so a cut without seams is the identity.
    """
    labels = validate_labels(mesh, labels)
    n_corners = 3 * mesh.n_faces
    glue = np.flatnonzero((mesh.edge_faces[:, 1] >= 0) & (labels == 0))

    rows: list[np.ndarray] = []
    cols: list[np.ndarray] = []
    f1 = mesh.edge_faces[glue, 0]
    f2 = mesh.edge_faces[glue, 1]
    for end in (0, 1):
        v = mesh.edges[glue, end]
        rows.append(3 * f1 + _corner_slot(mesh, f1, v))
        cols.append(3 * f2 + _corner_slot(mesh, f2, v))
    r = np.concatenate(rows) if rows else np.zeros(0, dtype=np.int64)
    c = np.concatenate(cols) if cols else np.zeros(0, dtype=np.int64)
    graph = sp.csr_matrix((np.ones(len(r)), (r, c)), shape=(n_corners, n_corners))
    _, group = connected_components(graph, directed=False)

    corner_vertex = mesh.faces.reshape(-1)
    n_groups = int(group.max()) + 1
    group_vertex = np.zeros(n_groups, dtype=np.int64)
    group_vertex[group] = corner_vertex
    group_first = np.full(n_groups, n_corners, dtype=np.int64)
    np.minimum.at(group_first, group, np.arange(n_corners))

    isolated = np.flatnonzero(~mesh.referenced_vertex_mask)
    owner = np.concatenate([group_vertex, isolated])
    first = np.concatenate([group_first, np.full(len(isolated), -1, dtype=np.int64)])
    order = np.lexsort((first, owner))
    new_id = np.empty(len(order), dtype=np.int64)
    new_id[order] = np.arange(len(order))

    new_faces = new_id[group].reshape(-1, 3)
    new_to_old = owner[order]
    cut = Mesh(
        vertices=mesh.vertices[new_to_old],
        faces=new_faces,
        name=mesh.name,
        corner_uvs=mesh.corner_uvs,
        uvs_vertex_uniform=mesh.uvs_vertex_uniform,
    )
    return cut, new_to_old


def cut_mesh(mesh: Mesh, labels: SeamLabels) -> Mesh:
    """Duplicate seam vertices per side so that shells share no edges."""
    cut, _ = cut_mesh_with_map(mesh, labels)
    return cut


def shell_boundary_edges(mesh: Mesh, labels: SeamLabels, shells: ShellPartition) -> np.ndarray:
    """Mask of seam edges separating two shells or lying on the mesh boundary."""
    labels = validate_labels(mesh, labels)
    f1 = mesh.edge_faces[:, 0]
    f2 = mesh.edge_faces[:, 1]
    s1 = shells.face_to_shell[f1]
    s2 = np.where(f2 >= 0, shells.face_to_shell[np.maximum(f2, 0)], -1)
    return (labels == 1) & (s1 != s2)
