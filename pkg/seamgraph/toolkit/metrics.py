"""Edge classification metrics and seam statistics."""

from __future__ import annotations

import numpy as np

from ..mesh.core import Mesh, SeamLabels
from ..models import EdgeMetrics


def _percent(num: int, den: int) -> float | None:
    return None if den == 0 else 100.0 * num / den


def metrics(pred: SeamLabels, truth: SeamLabels) -> EdgeMetrics:
    """Confusion counts with FPR, TPR and accuracy in percent.

    TPR is None when the truth has no seams; FPR is None when it has only seams.
    """
    pred = np.asarray(pred)
    truth = np.asarray(truth)
    if pred.shape != truth.shape:
        raise ValueError(f"prediction has shape {pred.shape}, truth has {truth.shape}")
    p = pred == 1
    t = truth == 1
    tp = int(np.sum(p & t))
    fp = int(np.sum(p & ~t))
    tn = int(np.sum(~p & ~t))
    fn = int(np.sum(~p & t))
    total = tp + fp + tn + fn
    return EdgeMetrics(
        tp=tp,
        fp=fp,
        tn=tn,
        fn=fn,
        fpr=_percent(fp, fp + tn),
        tpr=_percent(tp, tp + fn),
        accuracy=_percent(tp + tn, total) or 0.0,
    )


def seam_length(mesh: Mesh, labels: SeamLabels) -> float:
    """Total 3D length of the seam edges."""
    labels = np.asarray(labels)
    return float(mesh.edge_lengths()[labels == 1].sum())


def pooled_metrics(parts: list[EdgeMetrics]) -> EdgeMetrics:
    """Metrics of the summed confusion counts."""
    tp = sum(m.tp for m in parts)
    fp = sum(m.fp for m in parts)
    tn = sum(m.tn for m in parts)
    fn = sum(m.fn for m in parts)
    return EdgeMetrics(
        tp=tp,
        fp=fp,
        tn=tn,
        fn=fn,
        fpr=_percent(fp, fp + tn),
        tpr=_percent(tp, tp + fn),
        accuracy=_percent(tp + tn, tp + fp + tn + fn) or 0.0,
    )
