"""Training-set augmentation by jittering random vertices."""

from __future__ import annotations

import numpy as np

from ..mesh.core import Mesh, SeamLabels, validate_labels

MAX_DISPLACEMENT = 0.2


def augment(
    mesh: Mesh,
    labels: SeamLabels,
    count: int,
    noise_std: float = 0.01,
    vertex_fraction: float = 0.5,
    seed: int = 0,
) -> list[tuple[Mesh, SeamLabels]]:
    """Copies of ``mesh`` with Gaussian noise on a random subset of vertices.

    The noise std and the per-vertex displacement cap (20%) are relative to the
    bounding-box diagonal. Copy i depends only on (seed, i). Labels are shared
    unchanged since connectivity does not move.
    """
    if noise_std < 0:
        raise ValueError("noise_std must be non-negative")
    if not 0.0 < vertex_fraction <= 1.0:
        raise ValueError("vertex_fraction must lie in (0, 1]")
    if count < 0:
        raise ValueError("count must be non-negative")
    labels = validate_labels(mesh, labels)
    diag = mesh.bbox_diagonal()
    limit = MAX_DISPLACEMENT * diag
    n = max(1, int(round(vertex_fraction * mesh.n_vertices)))

    out: list[tuple[Mesh, SeamLabels]] = []
    for i in range(count):
        rng = np.random.default_rng([seed, i])
        chosen = np.sort(rng.choice(mesh.n_vertices, size=n, replace=False))
        delta = rng.normal(0.0, noise_std * diag, size=(n, 3))
        norms = np.linalg.norm(delta, axis=1)
        scale = np.minimum(1.0, np.divide(limit, norms, out=np.ones(n), where=norms > limit))
        vertices = mesh.vertices.copy()
        vertices[chosen] += delta * scale[:, None]
        out.append((mesh.with_vertices(vertices, name=f"{mesh.name}-aug{i}"), labels.copy()))
    return out
