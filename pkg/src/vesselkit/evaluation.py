"""Segmentation metrics, ROC/AUC and the adaptive local thresholder.

Undefined ratios (zero denominators, single-class ground truth) are
reported as ``None`` rather than silently coerced to zero.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Callable, NamedTuple, Optional, Sequence

import numpy as np
from scipy.ndimage import uniform_filter

from .imgcore import as_mask, as_raster


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int
    fp: int
    tn: int
    fn: int

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn

    def __add__(self, other: "ConfusionCounts") -> "ConfusionCounts":
        return ConfusionCounts(self.tp + other.tp, self.fp + other.fp, self.tn + other.tn, self.fn + other.fn)


class Metrics(NamedTuple):
    se: Optional[float]
    sp: Optional[float]
    acc: Optional[float]


def confusion(pred, truth, fov=None) -> ConfusionCounts:
    """Pixel confusion counts, restricted to ``fov`` when given."""
    pred = as_mask(pred)
    truth = as_mask(truth, pred.shape)
    valid = np.ones(pred.shape, dtype=bool) if fov is None else as_mask(fov, pred.shape)
    p, t = pred[valid], truth[valid]
    return ConfusionCounts(
        tp=int(np.count_nonzero(p & t)),
        fp=int(np.count_nonzero(p & ~t)),
        tn=int(np.count_nonzero(~p & ~t)),
        fn=int(np.count_nonzero(~p & t)),
    )


def _ratio(num, den):
    return None if den == 0 else num / den


def se_sp_acc(c: ConfusionCounts) -> Metrics:
    return Metrics(
        se=_ratio(c.tp, c.tp + c.fn),
        sp=_ratio(c.tn, c.tn + c.fp),
        acc=_ratio(c.tp + c.tn, c.total),
    )


@dataclass
class RocCurve:
    thresholds: np.ndarray
    fpr: np.ndarray
    tpr: np.ndarray
    auc: Optional[float]

    def points(self):
        return list(zip(self.thresholds.tolist(), self.fpr.tolist(), self.tpr.tolist()))

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["threshold", "fpr", "tpr"])
        for t, f, p in self.points():
            writer.writerow([repr(t), repr(f), repr(p)])
        return buf.getvalue()


def roc_auc(score, truth, fov=None, n_thresholds: Optional[int] = 256) -> RocCurve:
    """ROC curve from a threshold sweep (high to low) and its trapezoidal AUC.

    A pixel is called positive when ``score >= threshold``.  With an integer
    ``n_thresholds`` the thresholds are ``k / (n - 1)``; with ``None`` every
    distinct score value is used, giving the exact empirical ROC.  The curve
    is anchored at (0, 0) and (1, 1).  AUC is ``None`` when the ground truth
    has only one class inside the evaluated region.
    """
    score = as_raster(score)
    truth = as_mask(truth, score.shape)
    valid = np.ones(score.shape, dtype=bool) if fov is None else as_mask(fov, score.shape)
    s = score[valid]
    t = truth[valid]
    if n_thresholds is None:
        thr = np.unique(s)[::-1]
    else:
        if n_thresholds < 2:
            raise ValueError("n_thresholds must be >= 2")
        thr = np.arange(n_thresholds - 1, -1, -1, dtype=np.float64) / (n_thresholds - 1)
    n_pos = int(t.sum())
    n_neg = int(t.size - n_pos)

    # count positives/negatives with score >= each threshold via sorted search
    pos_sorted = np.sort(s[t])
    neg_sorted = np.sort(s[~t])
    tp = n_pos - np.searchsorted(pos_sorted, thr, side="left")
    fp = n_neg - np.searchsorted(neg_sorted, thr, side="left")
    tpr = tp / n_pos if n_pos else np.zeros(len(thr))
    fpr = fp / n_neg if n_neg else np.zeros(len(thr))
    thresholds = np.concatenate(([np.inf], thr, [-np.inf]))
    fpr = np.concatenate(([0.0], fpr, [1.0]))
    tpr = np.concatenate(([0.0], tpr, [1.0]))
    auc = None
    if n_pos and n_neg:
        auc = float(np.sum((fpr[1:] - fpr[:-1]) * (tpr[1:] + tpr[:-1]) / 2.0))
    return RocCurve(thresholds, fpr, tpr, auc)


def local_threshold(img, window: int = 25, offset: float = 0.03) -> np.ndarray:
    """Adaptive threshold: foreground where ``img > local_mean - offset``.

    The local mean is a ``window x window`` box average with replicate
    borders.  A negative ``offset`` demands that a pixel exceed its
    neighbourhood mean by ``|offset|``.
    """
    if window < 3 or window % 2 == 0:
        raise ValueError("window must be odd and >= 3")
    img = as_raster(img)
    return img > uniform_filter(img, size=window, mode="nearest") - offset


def auc_vs_noise_curve(
    scene,
    method: Callable[[np.ndarray], np.ndarray],
    kind: str,
    targets: Sequence[float],
    seed: int = 0,
    n_thresholds: int = 256,
) -> list[tuple[float, Optional[float]]]:
    """AUC of ``method`` on ``scene`` degraded to each target PSNR.

    The first row is the clean image (PSNR ``inf``); later rows follow
    ``targets`` in order.
    """
    from .synthgen import noise_for_target_psnr, render

    img, mask = render(scene)
    rows = [(float("inf"), roc_auc(method(img), mask, n_thresholds=n_thresholds).auc)]
    for target in targets:
        noisy, achieved, _ = noise_for_target_psnr(img, kind, target, seed=seed)
        rows.append((float(target), roc_auc(method(noisy), mask, n_thresholds=n_thresholds).auc))
    return rows
