"""Quadric error metric decimation that keeps seams and mesh boundaries intact."""

from __future__ import annotations

import heapq
import logging

import numpy as np

from ..errors import DecimationError
from ..mesh.core import Mesh, SeamLabels, validate_labels

logger = logging.getLogger(__name__)

MIN_FACES = 4


class _Collapser:
    """Mutable connectivity for a sequence of edge collapses.

    Seam and boundary vertices are locked: they never move and never disappear.
    """

    def __init__(self, mesh: Mesh, locked: np.ndarray):
        self.vertices = mesh.vertices.astype(np.float64).copy()
        self.faces = mesh.faces.copy()
        self.face_alive = np.ones(mesh.n_faces, dtype=bool)
        self.face_count = mesh.n_faces
        self.locked = locked.copy()
        self.vertex_alive = np.ones(mesh.n_vertices, dtype=bool)
        self.version = np.zeros(mesh.n_vertices, dtype=np.int64)
        self.vertex_faces: list[set[int]] = [set() for _ in range(mesh.n_vertices)]
        for f, tri in enumerate(mesh.faces.tolist()):
            for v in tri:
                self.vertex_faces[v].add(f)
        self.neighbors: list[set[int]] = [set() for _ in range(mesh.n_vertices)]
        for a, b in mesh.edges.tolist():
            self.neighbors[a].add(b)
            self.neighbors[b].add(a)
        self.quadrics = self._initial_quadrics(mesh)
        self.heap: list[tuple[float, int, int, int, int]] = []
        for a, b in mesh.edges.tolist():
            self._push(a, b)

    @staticmethod
    def _initial_quadrics(mesh: Mesh) -> np.ndarray:
        normals = mesh.face_normals(unit=True)
        valid = np.isfinite(normals).all(axis=1) & (np.linalg.norm(normals, axis=1) > 0)
        d = -np.einsum("ij,ij->i", normals, mesh.vertices[mesh.faces[:, 0]])
        planes = np.column_stack([normals, d])
        planes[~valid] = 0.0
        fundamental = np.einsum("fi,fj->fij", planes, planes)
        quadrics = np.zeros((mesh.n_vertices, 4, 4))
        for k in range(3):
            np.add.at(quadrics, mesh.faces[:, k], fundamental)
        return quadrics

    def _error(self, q: np.ndarray, pos: np.ndarray) -> float:
        h = np.append(pos, 1.0)
        return float(h @ q @ h)

    def _placement(self, a: int, b: int) -> tuple[float, np.ndarray] | None:
        if self.locked[a] and self.locked[b]:
            return None
        q = self.quadrics[a] + self.quadrics[b]
        if self.locked[a]:
            pos = self.vertices[a]
        elif self.locked[b]:
            pos = self.vertices[b]
        else:
            system = q[:3, :3]
            if np.linalg.cond(system) < 1e10:
                pos = np.linalg.solve(system, -q[:3, 3])
            else:
                options = [
                    self.vertices[a],
                    self.vertices[b],
                    0.5 * (self.vertices[a] + self.vertices[b]),
                ]
                pos = min(options, key=lambda p: self._error(q, p))
        return max(self._error(q, pos), 0.0), np.array(pos, dtype=np.float64)

    def _push(self, a: int, b: int) -> None:
        a, b = min(a, b), max(a, b)
        placed = self._placement(a, b)
        if placed is not None:
            cost, _ = placed
            heapq.heappush(self.heap, (cost, a, b, int(self.version[a]), int(self.version[b])))

    def _face_normal(self, tri: list[int], override: dict[int, np.ndarray]) -> np.ndarray:
        p = [override.get(v, self.vertices[v]) for v in tri]
        return np.cross(p[1] - p[0], p[2] - p[0])

    def can_collapse(self, keep: int, drop: int, pos: np.ndarray) -> bool:
        shared = self.vertex_faces[keep] & self.vertex_faces[drop]
        common = self.neighbors[keep] & self.neighbors[drop]
        if len(shared) != 2 or len(common) != 2:
            return False
        opposite = {v for f in shared for v in self.faces[f].tolist()} - {keep, drop}
        if opposite != common:
            return False
        c, d = sorted(common)
        if len(self.neighbors[c]) <= 3 or len(self.neighbors[d]) <= 3:
            return False
        if len(self.neighbors[keep]) + len(self.neighbors[drop]) - 4 < 3:
            return False
        for f in (self.vertex_faces[keep] | self.vertex_faces[drop]) - shared:
            tri = self.faces[f].tolist()
            before = self._face_normal(tri, {})
            after = self._face_normal(tri, {keep: pos, drop: pos})
            if np.linalg.norm(after) <= 1e-12 * max(np.linalg.norm(before), 1e-300):
                return False
            if float(before @ after) <= 0.0:
                return False
        return True

    def collapse(self, keep: int, drop: int, pos: np.ndarray) -> None:
        shared = self.vertex_faces[keep] & self.vertex_faces[drop]
        for f in shared:
            self.face_alive[f] = False
            self.face_count -= 1
            for v in self.faces[f].tolist():
                self.vertex_faces[v].discard(f)
        for f in self.vertex_faces[drop]:
            self.faces[f][self.faces[f] == drop] = keep
            self.vertex_faces[keep].add(f)
        self.vertex_faces[drop] = set()
        for x in self.neighbors[drop]:
            self.neighbors[x].discard(drop)
            if x != keep:
                self.neighbors[x].add(keep)
                self.neighbors[keep].add(x)
        self.neighbors[keep].discard(drop)
        self.neighbors[drop] = set()

        self.vertices[keep] = pos
        self.quadrics[keep] += self.quadrics[drop]
        self.vertex_alive[drop] = False
        self.version[keep] += 1
        self.version[drop] += 1
        for x in sorted(self.neighbors[keep]):
            self._push(keep, x)

    def run(self, target_faces: int) -> None:
        while self.face_count > target_faces and self.heap:
            _, a, b, va, vb = heapq.heappop(self.heap)
            if va != self.version[a] or vb != self.version[b]:
                continue
            if not (self.vertex_alive[a] and self.vertex_alive[b]) or b not in self.neighbors[a]:
                continue
            placed = self._placement(a, b)
            if placed is None:
                continue
            _, pos = placed
            keep, drop = (b, a) if self.locked[b] else (a, b)
            if self.can_collapse(keep, drop, pos):
                self.collapse(keep, drop, pos)

    def compact(self, name: str) -> tuple[Mesh, np.ndarray]:
        faces = self.faces[self.face_alive]
        used = np.flatnonzero(self.vertex_alive)
        remap = np.full(len(self.vertices), -1, dtype=np.int64)
        remap[used] = np.arange(len(used))
        mesh = Mesh(vertices=self.vertices[used], faces=remap[faces], name=name)
        return mesh, used


def decimate(mesh: Mesh, labels: SeamLabels, target_faces: int) -> tuple[Mesh, SeamLabels]:
    """Collapse edges by increasing quadric error until at most ``target_faces`` remain.

    Seam and boundary vertices are locked, so seam edges are never collapsed and
    the seam subgraph survives unchanged. Authored UVs are dropped.
    """
    labels = validate_labels(mesh, labels)
    if target_faces < MIN_FACES:
        raise ValueError(f"target_faces must be at least {MIN_FACES}")
    if target_faces > mesh.n_faces:
        raise ValueError(f"target_faces {target_faces} exceeds the face count {mesh.n_faces}")
    if target_faces == mesh.n_faces:
        return mesh, labels

    seam_edges = mesh.edges[labels == 1]
    locked = mesh.boundary_vertex_mask.copy()
    locked[seam_edges.reshape(-1)] = True

    collapser = _Collapser(mesh, locked)
    collapser.run(target_faces)
    if collapser.face_count > target_faces:
        raise DecimationError(
            f"could not reach {target_faces} faces on {mesh.name!r}",
            achieved_faces=collapser.face_count,
        )

    out, used = collapser.compact(mesh.name)
    remap = np.full(mesh.n_vertices, -1, dtype=np.int64)
    remap[used] = np.arange(len(used))
    out_labels = np.zeros(out.n_edges, dtype=np.int8)
    for a, b in remap[seam_edges].tolist():
        out_labels[out.edge_id(a, b)] = 1
    logger.info("Decimated %r from %d to %d faces", mesh.name, mesh.n_faces, out.n_faces)
    return out, out_labels
