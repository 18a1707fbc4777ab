"""Labeled mesh collections: loading, split tags and random re-splitting."""

from __future__ import annotations

import logging
from collections.abc import Iterator, Sequence
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Literal

import numpy as np

from ..errors import MeshError
from ..mesh.core import Mesh, SeamLabels, validate_labels
from ..mesh.io import parse_obj, parse_ply, read_label_sidecar, write_label_sidecar, write_obj
from ..mesh.topology import seams_from_uvs

logger = logging.getLogger(__name__)

Split = Literal["train", "val", "test"]

MESH_SUFFIXES = (".obj", ".ply")
SIDECAR_SUFFIX = ".labels.json"


@dataclass(frozen=True, eq=False)
class LabeledMesh:
    mesh: Mesh
    labels: SeamLabels
    split: Split = "train"

    @property
    def name(self) -> str:
        return self.mesh.name


@dataclass
class Dataset:
    """Meshes with aligned seam labels; names are unique and each item has one split."""

    items: list[LabeledMesh] = field(default_factory=list)

    def __post_init__(self) -> None:
        seen: set[str] = set()
        checked = []
        for item in self.items:
            if item.name in seen:
                raise ValueError(f"duplicate mesh name {item.name!r}")
            seen.add(item.name)
            checked.append(replace(item, labels=validate_labels(item.mesh, item.labels)))
        self.items = checked

    def __len__(self) -> int:
        return len(self.items)

    def __iter__(self) -> Iterator[LabeledMesh]:
        return iter(self.items)

    @property
    def names(self) -> list[str]:
        return [item.name for item in self.items]

    def split(self, tag: Split) -> list[LabeledMesh]:
        return [item for item in self.items if item.split == tag]

    def merged(self, other: Dataset) -> Dataset:
        return Dataset(self.items + other.items)

    def random_split(
        self, seed: int, val_fraction: float = 0.15, test_fraction: float = 0.15
    ) -> Dataset:
        """Re-tag every item with a seeded permutation.

        Each non-zero fraction gets at least one mesh when the pool is big enough to
        keep one for training.
        """
        if not 0.0 <= val_fraction < 1.0 or not 0.0 <= test_fraction < 1.0:
            raise ValueError("split fractions must lie in [0, 1)")
        if val_fraction + test_fraction >= 1.0:
            raise ValueError("val_fraction + test_fraction must be below 1")
        n = len(self.items)
        order = np.random.default_rng(seed).permutation(n)

        def _count(fraction: float) -> int:
            if fraction == 0.0:
                return 0
            return max(1, int(round(fraction * n)))

        n_val = _count(val_fraction)
        n_test = _count(test_fraction)
        if n_val + n_test >= n:
            raise ValueError(f"cannot split {n} meshes into train, val and test")
        tags: list[Split] = ["train"] * n
        for rank, idx in enumerate(order.tolist()):
            if rank < n_val:
                tags[idx] = "val"
            elif rank < n_val + n_test:
                tags[idx] = "test"
        return Dataset(
            [replace(item, split=tag) for item, tag in zip(self.items, tags, strict=True)]
        )

    def write_dir(self, path: str | Path) -> Path:
        """Write each mesh as OBJ with a label sidecar, one subdirectory per split."""
        root = Path(path)
        for item in self.items:
            folder = root / item.split
            folder.mkdir(parents=True, exist_ok=True)
            (folder / f"{item.name}.obj").write_bytes(write_obj(item.mesh))
            (folder / f"{item.name}{SIDECAR_SUFFIX}").write_bytes(
                write_label_sidecar(item.mesh, item.labels)
            )
        return root


def from_pairs(pairs: Sequence[tuple[Mesh, SeamLabels]], split: Split = "train") -> Dataset:
    return Dataset([LabeledMesh(mesh, labels, split) for mesh, labels in pairs])


def read_mesh(path: str | Path) -> Mesh:
    path = Path(path)
    data = path.read_bytes()
    if path.suffix.lower() == ".obj":
        return parse_obj(data, name=path.stem)
    if path.suffix.lower() == ".ply":
        return parse_ply(data, name=path.stem)
    raise MeshError(f"unsupported mesh format {path.suffix!r}")


def load_labeled(path: str | Path) -> tuple[Mesh, SeamLabels]:
    """Read a mesh and its labels: the sidecar wins, authored UVs are the fallback."""
    path = Path(path)
    mesh = read_mesh(path)
    sidecar = path.with_name(f"{path.stem}{SIDECAR_SUFFIX}")
    if sidecar.exists():
        return mesh, read_label_sidecar(mesh, sidecar.read_bytes())
    if mesh.corner_uvs is not None:
        return mesh, seams_from_uvs(mesh)
    raise MeshError(f"{path.name}: no label sidecar and no UVs to derive seams from")


def load_dir(path: str | Path, split: Split = "train") -> Dataset:
    """Every OBJ/PLY file under ``path`` in sorted order."""
    root = Path(path)
    if not root.is_dir():
        raise FileNotFoundError(f"dataset directory not found: {root}")
    files = sorted(p for p in root.rglob("*") if p.suffix.lower() in MESH_SUFFIXES)
    items = []
    for file in files:
        mesh, labels = load_labeled(file)
        items.append(LabeledMesh(mesh, labels, split))
    logger.info("Loaded %d meshes from %s", len(items), root)
    return Dataset(items)
