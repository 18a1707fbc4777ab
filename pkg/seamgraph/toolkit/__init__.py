"""Dataset tooling and evaluation metrics."""

from .augment import augment
from .dataset import Dataset, LabeledMesh, from_pairs, load_dir, load_labeled, read_mesh
from .decimate import decimate
from .metrics import metrics, pooled_metrics, seam_length
from .synthetic import SHELL_COUNTS, gen_synthetic, synthetic_set

__all__ = [
    "SHELL_COUNTS",
    "Dataset",
    "LabeledMesh",
    "augment",
    "decimate",
    "from_pairs",
    "gen_synthetic",
    "load_dir",
    "load_labeled",
    "metrics",
    "pooled_metrics",
    "read_mesh",
    "seam_length",
    "synthetic_set",
]
