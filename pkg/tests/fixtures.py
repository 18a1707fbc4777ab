"""Small meshes shared across the test modules."""

import numpy as np

from seamgraph.mesh.core import Mesh, SeamLabels
from seamgraph.mesh.topology import shells_from_labels
from seamgraph.models import SyntheticParams
from seamgraph.toolkit.synthetic import gen_synthetic


def triangle() -> Mesh:
    return Mesh(
        vertices=np.array([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]]),
        faces=np.array([[0, 1, 2]]),
        name="triangle",
    )


def tetrahedron() -> Mesh:
    vertices = np.array([[1.0, 1.0, 1.0], [1.0, -1.0, -1.0], [-1.0, 1.0, -1.0], [-1.0, -1.0, 1.0]])
    faces = np.array([[0, 1, 2], [0, 3, 1], [0, 2, 3], [1, 3, 2]])
    return Mesh(vertices=vertices, faces=faces, name="tetrahedron")


def icosphere(level: int = 1) -> Mesh:
    """Unit icosphere with 20·4^level faces."""
    t = (1.0 + 5.0**0.5) / 2.0
    vertices = [
        [-1, t, 0], [1, t, 0], [-1, -t, 0], [1, -t, 0],
        [0, -1, t], [0, 1, t], [0, -1, -t], [0, 1, -t],
        [t, 0, -1], [t, 0, 1], [-t, 0, -1], [-t, 0, 1],
    ]  # fmt: skip
    faces = [
        [0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11],
        [1, 5, 9], [5, 11, 4], [11, 10, 2], [10, 7, 6], [7, 1, 8],
        [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8], [3, 8, 9],
        [4, 9, 5], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1],
    ]  # fmt: skip
    verts = [np.array(v, dtype=np.float64) / np.linalg.norm(v) for v in vertices]
    for _ in range(level):
        cache: dict[tuple[int, int], int] = {}

        def midpoint(a: int, b: int) -> int:
            key = (min(a, b), max(a, b))
            if key not in cache:
                m = verts[a] + verts[b]
                verts.append(m / np.linalg.norm(m))
                cache[key] = len(verts) - 1
            return cache[key]

        refined = []
        for a, b, c in faces:
            ab, bc, ca = midpoint(a, b), midpoint(b, c), midpoint(c, a)
            refined.extend([[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]])
        faces = refined
    return Mesh(vertices=np.array(verts), faces=np.array(faces), name=f"icosphere-{level}")


def grid(n: int = 4, size: float = 1.0) -> Mesh:
    """Flat n×n-quad grid in the z = 0 plane, two triangles per quad."""
    xs = np.linspace(0.0, size, n + 1)
    xx, yy = np.meshgrid(xs, xs, indexing="xy")
    vertices = np.column_stack([xx.ravel(), yy.ravel(), np.zeros(xx.size)])
    faces = []
    for r in range(n):
        for c in range(n):
            a = r * (n + 1) + c
            b, d = a + 1, a + n + 1
            faces.append([a, b, d + 1])
            faces.append([a, d + 1, d])
    return Mesh(vertices=vertices, faces=np.array(faces), name=f"grid-{n}")


def strip(length: int = 6) -> Mesh:
    """Two rows of vertices joined by a band of triangles: bottom row 0..L, top row L+1..2L+1."""
    bottom = [[float(i), 0.0, 0.0] for i in range(length + 1)]
    top = [[float(i), 1.0, 0.0] for i in range(length + 1)]
    faces = []
    for i in range(length):
        a, b = i, i + 1
        c, d = length + 1 + i + 1, length + 1 + i
        faces.append([a, b, c])
        faces.append([a, c, d])
    return Mesh(vertices=np.array(bottom + top), faces=np.array(faces), name="strip")


def fan(n: int = 6) -> Mesh:
    """Closed disk: centre vertex 0 surrounded by an n-gon."""
    angle = 2.0 * np.pi * np.arange(n) / n
    ring = np.column_stack([np.cos(angle), np.sin(angle), np.zeros(n)])
    vertices = np.vstack([[0.0, 0.0, 0.0], ring])
    faces = [[0, 1 + i, 1 + (i + 1) % n] for i in range(n)]
    return Mesh(vertices=vertices, faces=np.array(faces), name="fan")


def latlong_sphere(segments: int = 16, bands: int = 8) -> tuple[Mesh, SeamLabels]:
    """Latitude–longitude sphere and its equator seam."""
    return gen_synthetic("sphere_band", SyntheticParams(segments=segments, rings=bands))


def hemisphere(segments: int = 16, bands: int = 8) -> Mesh:
    """Upper half of the latitude–longitude sphere; a disk with one boundary loop."""
    mesh, labels = latlong_sphere(segments, bands)
    shells = shells_from_labels(mesh, labels)
    top = mesh.faces[:, 0] == mesh.n_vertices - 1
    shell = int(shells.face_to_shell[np.flatnonzero(top)[0]])
    sub, _ = mesh.submesh(shells.faces_of(shell))
    return Mesh(vertices=sub.vertices, faces=sub.faces, name="hemisphere")


def equator_edges(mesh: Mesh, labels: SeamLabels) -> np.ndarray:
    """Seam edge ids sorted by the angle of their midpoint around z."""
    ids = np.flatnonzero(labels == 1)
    mid = mesh.vertices[mesh.edges[ids]].mean(axis=1)
    return ids[np.argsort(np.arctan2(mid[:, 1], mid[:, 0]))]


def cylinder(segments: int = 16, rings: int = 4) -> tuple[Mesh, SeamLabels]:
    return gen_synthetic("cylinder", SyntheticParams(segments=segments, rings=rings))
