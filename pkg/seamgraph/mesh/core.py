"""Indexed triangle mesh with a canonical edge list."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import numpy.typing as npt
import scipy.sparse as sp

from ..errors import MeshError

SeamLabels = npt.NDArray[np.int8]


@dataclass(frozen=True, eq=False)
class Mesh:
    """Triangle mesh M = (V, E, F).

    Edges are derived from faces: each edge is stored once as (min, max) and the
    list is sorted lexicographically, so every per-edge vector in the package aligns
    with ``edges`` by construction. Construction rejects out-of-range indices,
    repeated vertices within a face and edges shared by three or more faces.
    """

    vertices: np.ndarray
    faces: np.ndarray
    name: str = "mesh"
    corner_uvs: np.ndarray | None = None
    uvs_vertex_uniform: bool = False
    edges: np.ndarray = field(init=False, repr=False)
    face_edges: np.ndarray = field(init=False, repr=False)
    edge_faces: np.ndarray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        vertices = np.ascontiguousarray(self.vertices, dtype=np.float64)
        faces = np.ascontiguousarray(self.faces, dtype=np.int64)
        if vertices.ndim != 2 or vertices.shape[1] != 3:
            raise MeshError(f"vertices must have shape (n, 3), got {vertices.shape}")
        if faces.ndim != 2 or faces.shape[1] != 3:
            raise MeshError(f"faces must have shape (m, 3), got {faces.shape}")
        if len(faces) == 0:
            raise MeshError("mesh has zero faces")
        if faces.min() < 0 or faces.max() >= len(vertices):
            raise MeshError("face index out of range")
        repeated = (
            (faces[:, 0] == faces[:, 1])
            | (faces[:, 1] == faces[:, 2])
            | (faces[:, 0] == faces[:, 2])
        )
        if repeated.any():
            raise MeshError(f"face {int(np.argmax(repeated))} repeats a vertex")

        corner_uvs = self.corner_uvs
        if corner_uvs is not None:
            corner_uvs = np.ascontiguousarray(corner_uvs, dtype=np.float64)
            if corner_uvs.shape != (len(faces), 3, 2):
                raise MeshError(
                    f"corner_uvs must have shape ({len(faces)}, 3, 2), got {corner_uvs.shape}"
                )

        # half-edge k of face f runs faces[f, k] -> faces[f, (k + 1) % 3]
        half = np.stack([faces, np.roll(faces, -1, axis=1)], axis=2).reshape(-1, 2)
        edges, inverse, counts = np.unique(
            np.sort(half, axis=1), axis=0, return_inverse=True, return_counts=True
        )
        inverse = inverse.reshape(-1)
        if (counts > 2).any():
            bad = edges[int(np.argmax(counts > 2))]
            raise MeshError(f"non-manifold edge ({bad[0]}, {bad[1]}) has {counts.max()} faces")

        order = np.argsort(inverse, kind="stable")
        sorted_edges = inverse[order]
        first = np.ones(len(order), dtype=bool)
        first[1:] = sorted_edges[1:] != sorted_edges[:-1]
        edge_faces = np.full((len(edges), 2), -1, dtype=np.int64)
        edge_faces[sorted_edges[first], 0] = order[first] // 3
        edge_faces[sorted_edges[~first], 1] = order[~first] // 3

        object.__setattr__(self, "vertices", vertices)
        object.__setattr__(self, "faces", faces)
        object.__setattr__(self, "corner_uvs", corner_uvs)
        object.__setattr__(self, "edges", edges.astype(np.int64))
        object.__setattr__(self, "face_edges", inverse.reshape(-1, 3).astype(np.int64))
        object.__setattr__(self, "edge_faces", edge_faces)

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_faces(self) -> int:
        return len(self.faces)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @property
    def euler_characteristic(self) -> int:
        return self.n_vertices - self.n_edges + self.n_faces

    @cached_property
    def boundary_edge_mask(self) -> np.ndarray:
        return self.edge_faces[:, 1] < 0

    @cached_property
    def boundary_vertex_mask(self) -> np.ndarray:
        mask = np.zeros(self.n_vertices, dtype=bool)
        mask[self.edges[self.boundary_edge_mask].reshape(-1)] = True
        return mask

    @cached_property
    def vertex_degrees(self) -> np.ndarray:
        return np.bincount(self.edges.reshape(-1), minlength=self.n_vertices)

    @cached_property
    def referenced_vertex_mask(self) -> np.ndarray:
        mask = np.zeros(self.n_vertices, dtype=bool)
        mask[self.faces.reshape(-1)] = True
        return mask

    @cached_property
    def adjacency(self) -> sp.csr_matrix:
        """Symmetric 0/1 vertex adjacency of the edge graph."""
        n = self.n_vertices
        rows = np.concatenate([self.edges[:, 0], self.edges[:, 1]])
        cols = np.concatenate([self.edges[:, 1], self.edges[:, 0]])
        data = np.ones(len(rows), dtype=np.float64)
        return sp.csr_matrix((data, (rows, cols)), shape=(n, n))

    @cached_property
    def edge_index(self) -> dict[tuple[int, int], int]:
        return {(int(a), int(b)): i for i, (a, b) in enumerate(self.edges)}

    def face_normals(self, unit: bool = False) -> np.ndarray:
        """Per-face normals; unnormalized vectors have length twice the face area."""
        v = self.vertices
        f = self.faces
        n = np.cross(v[f[:, 1]] - v[f[:, 0]], v[f[:, 2]] - v[f[:, 0]])
        if unit:
            norms = np.linalg.norm(n, axis=1, keepdims=True)
            n = np.divide(n, norms, out=np.zeros_like(n), where=norms > 0)
        return n

    def face_areas(self) -> np.ndarray:
        return 0.5 * np.linalg.norm(self.face_normals(), axis=1)

    def edge_lengths(self) -> np.ndarray:
        return np.linalg.norm(
            self.vertices[self.edges[:, 1]] - self.vertices[self.edges[:, 0]], axis=1
        )

    def bounding_box(self) -> tuple[np.ndarray, np.ndarray]:
        used = self.vertices[self.referenced_vertex_mask]
        return used.min(axis=0), used.max(axis=0)

    def bbox_diagonal(self) -> float:
        lo, hi = self.bounding_box()
        return float(np.linalg.norm(hi - lo))

    def edge_id(self, a: int, b: int) -> int:
        """Index of the edge joining vertices a and b."""
        key = (a, b) if a < b else (b, a)
        try:
            return self.edge_index[key]
        except KeyError:
            raise KeyError(f"no edge between vertices {a} and {b}") from None

    def with_vertices(self, vertices: np.ndarray, name: str | None = None) -> Mesh:
        """Same connectivity and UVs, new positions."""
        return Mesh(
            vertices=vertices,
            faces=self.faces,
            name=self.name if name is None else name,
            corner_uvs=self.corner_uvs,
            uvs_vertex_uniform=self.uvs_vertex_uniform,
        )

    def submesh(self, face_ids: np.ndarray) -> tuple[Mesh, np.ndarray]:
        """Mesh made of the given faces, with unreferenced vertices dropped.

        Returns the submesh and the map from its vertex indices to this mesh's.
        Face order follows ``face_ids``.
        """
        face_ids = np.asarray(face_ids, dtype=np.int64)
        faces = self.faces[face_ids]
        used, local = np.unique(faces.reshape(-1), return_inverse=True)
        uvs = self.corner_uvs[face_ids] if self.corner_uvs is not None else None
        sub = Mesh(
            vertices=self.vertices[used],
            faces=local.reshape(-1, 3),
            name=self.name,
            corner_uvs=uvs,
            uvs_vertex_uniform=self.uvs_vertex_uniform,
        )
        return sub, used


@dataclass(frozen=True)
class ShellPartition:
    """Faces grouped into UV shells; indices are contiguous in [0, shell_count)."""

    face_to_shell: np.ndarray
    shell_count: int

    def faces_of(self, shell: int) -> np.ndarray:
        return np.flatnonzero(self.face_to_shell == shell)

    def sizes(self) -> np.ndarray:
        return np.bincount(self.face_to_shell, minlength=self.shell_count)


def validate_labels(mesh: Mesh, labels: npt.ArrayLike) -> SeamLabels:
    """Return labels as an int8 vector aligned to ``mesh.edges``."""
    arr = np.asarray(labels)
    if arr.shape != (mesh.n_edges,):
        raise ValueError(f"expected {mesh.n_edges} edge labels, got shape {arr.shape}")
    if not np.isin(arr, (0, 1)).all():
        raise ValueError("edge labels must be 0 or 1")
    return arr.astype(np.int8)
