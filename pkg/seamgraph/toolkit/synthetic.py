"""Parametric shapes with constructed ground-truth seams.

Every shape is a surface of revolution around the z axis: rings of ``segments``
vertices, closed by a pole vertex (or a flat cap fan) at each end.
"""

from __future__ import annotations

import numpy as np

from ..mesh.core import Mesh, SeamLabels
from ..models import SyntheticKind, SyntheticParams

LUMPY_NOISE = 0.1

SHELL_COUNTS: dict[str, int] = {
    "cylinder": 3,
    "capsule": 3,
    "sphere_band": 2,
    "lumpy_sphere": 2,
}


def _revolve(profile: np.ndarray, segments: int) -> tuple[np.ndarray, np.ndarray]:
    """Revolve (radius, z) rings, bottom to top, and close both ends with poles.

    Ring i vertex j has index i·segments + j; the bottom pole follows the last
    ring and the top pole comes after it. Faces are oriented outward.
    """
    rings = len(profile)
    angle = 2.0 * np.pi * np.arange(segments) / segments
    ring_pts = [
        np.column_stack([r * np.cos(angle), r * np.sin(angle), np.full(segments, z)])
        for r, z in profile
    ]
    bottom = rings * segments
    top = bottom + 1
    vertices = np.vstack(
        ring_pts + [[[0.0, 0.0, profile[0][1]]], [[0.0, 0.0, profile[-1][1]]]]
    )

    j = np.arange(segments)
    nxt = (j + 1) % segments
    faces = []
    for i in range(rings - 1):
        a, b = i * segments + j, i * segments + nxt
        c, d = (i + 1) * segments + nxt, (i + 1) * segments + j
        faces.append(np.column_stack([a, b, c]))
        faces.append(np.column_stack([a, c, d]))
    faces.append(np.column_stack([np.full(segments, bottom), nxt, j]))
    last = (rings - 1) * segments
    faces.append(np.column_stack([np.full(segments, top), last + j, last + nxt]))
    return vertices, np.vstack(faces)


def _ring_edges(ring: int, segments: int) -> list[tuple[int, int]]:
    base = ring * segments
    return [(base + j, base + (j + 1) % segments) for j in range(segments)]


def _vertical_edges(first: int, last: int, segments: int) -> list[tuple[int, int]]:
    """Edges of column 0 from ring ``first`` up to ring ``last``."""
    return [(i * segments, (i + 1) * segments) for i in range(first, last)]


def _labels(mesh: Mesh, pairs: list[tuple[int, int]]) -> SeamLabels:
    labels = np.zeros(mesh.n_edges, dtype=np.int8)
    for a, b in pairs:
        labels[mesh.edge_id(a, b)] = 1
    return labels


def _sphere_profile(radius: float, bands: int) -> np.ndarray:
    """Latitude rings of a sphere, excluding the poles; ``bands`` is even."""
    lat = -0.5 * np.pi + np.pi * np.arange(1, bands) / bands
    return np.column_stack([radius * np.cos(lat), radius * np.sin(lat)])


def _cylinder(params: SyntheticParams) -> tuple[np.ndarray, np.ndarray, list[tuple[int, int]]]:
    z = np.linspace(-0.5 * params.height, 0.5 * params.height, params.rings + 1)
    profile = np.column_stack([np.full(len(z), params.radius), z])
    vertices, faces = _revolve(profile, params.segments)
    n = params.segments
    seams = (
        _ring_edges(0, n) + _ring_edges(params.rings, n) + _vertical_edges(0, params.rings, n)
    )
    return vertices, faces, seams


def _capsule(params: SyntheticParams) -> tuple[np.ndarray, np.ndarray, list[tuple[int, int]]]:
    cap_rings = max(1, params.rings // 2)
    half = 0.5 * params.height
    phi = 0.5 * np.pi * np.arange(1, cap_rings + 1) / (cap_rings + 1)
    cap = np.column_stack([params.radius * np.cos(phi), params.radius * np.sin(phi)])
    body_z = np.linspace(-half, half, params.rings + 1)
    profile = np.vstack(
        [
            np.column_stack([cap[::-1, 0], -half - cap[::-1, 1]]),
            np.column_stack([np.full(len(body_z), params.radius), body_z]),
            np.column_stack([cap[:, 0], half + cap[:, 1]]),
        ]
    )
    vertices, faces = _revolve(profile, params.segments)
    # Poles sit one radius beyond the body.
    vertices[-2, 2] = -half - params.radius
    vertices[-1, 2] = half + params.radius
    n = params.segments
    low, high = cap_rings, cap_rings + params.rings
    seams = _ring_edges(low, n) + _ring_edges(high, n) + _vertical_edges(low, high, n)
    return vertices, faces, seams


def _sphere_band(params: SyntheticParams) -> tuple[np.ndarray, np.ndarray, list[tuple[int, int]]]:
    bands = 2 * max(1, params.rings // 2)
    bands = max(bands, 4)
    profile = _sphere_profile(params.radius, bands)
    vertices, faces = _revolve(profile, params.segments)
    vertices[-2, 2] = -params.radius
    vertices[-1, 2] = params.radius
    equator = bands // 2 - 1
    return vertices, faces, _ring_edges(equator, params.segments)


def _jitter(vertices: np.ndarray, noise: float, seed: int) -> np.ndarray:
    """Scale every vertex radially by a seeded factor in [1 − noise, 1 + noise]."""
    rng = np.random.default_rng(seed)
    factor = 1.0 + noise * rng.uniform(-1.0, 1.0, size=len(vertices))
    center = vertices.mean(axis=0)
    return center + (vertices - center) * factor[:, None]


def gen_synthetic(
    kind: SyntheticKind, params: SyntheticParams | None = None, seed: int = 0
) -> tuple[Mesh, SeamLabels]:
    """Build a shape and its seams.

    cylinder: two cap rings and one vertical line (3 shells). capsule: rings where
    the hemispheres meet the body plus a vertical line (3 shells). sphere_band: the
    equator (2 shells). lumpy_sphere: sphere_band with radial noise.
    """
    params = params or SyntheticParams()
    builders = {
        "cylinder": _cylinder,
        "capsule": _capsule,
        "sphere_band": _sphere_band,
        "lumpy_sphere": _sphere_band,
    }
    if kind not in builders:
        raise ValueError(f"unknown synthetic kind {kind!r}")
    vertices, faces, seams = builders[kind](params)
    noise = params.noise
    if kind == "lumpy_sphere" and noise == 0:
        noise = LUMPY_NOISE
    if noise > 0:
        vertices = _jitter(vertices, noise, seed)
    mesh = Mesh(vertices=vertices, faces=faces, name=f"{kind}-{seed}")
    return mesh, _labels(mesh, seams)


def synthetic_set(
    count: int,
    seed: int = 0,
    kinds: tuple[SyntheticKind, ...] = ("cylinder", "capsule"),
    base: SyntheticParams | None = None,
) -> list[tuple[Mesh, SeamLabels]]:
    """``count`` shapes cycling through ``kinds`` with seeded proportions."""
    base = base or SyntheticParams()
    rng = np.random.default_rng(seed)
    out = []
    for i in range(count):
        params = base.model_copy(
            update={
                "radius": base.radius * float(rng.uniform(0.6, 1.4)),
                "height": base.height * float(rng.uniform(0.6, 1.6)),
            }
        )
        mesh, labels = gen_synthetic(kinds[i % len(kinds)], params, seed=seed * 1000 + i)
        out.append((mesh.with_vertices(mesh.vertices, name=f"{mesh.name}-{i}"), labels))
    return out
