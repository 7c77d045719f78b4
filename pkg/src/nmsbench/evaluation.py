"""Mask agreement, COCO-style AP and per-image latency measurement."""

from __future__ import annotations

import statistics
import time
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from nmsbench.detections import DetectionSet, GroundTruthBox, KeepMask
from nmsbench.geometry import iou_pairs
from nmsbench.nms import NmsConfig, get_method, run_method, warm_up

COCO_IOU_THRESHOLDS = tuple(round(0.5 + 0.05 * i, 2) for i in range(10))
RECALL_POINTS = np.linspace(0.0, 1.0, 101)


@dataclass(frozen=True)
class AgreementReport:
    jaccard: float
    extra_kept: int
    missing_kept: int

    @property
    def identical(self) -> bool:
        return self.extra_kept == 0 and self.missing_kept == 0


def agreement(a: KeepMask, b: KeepMask) -> AgreementReport:
    """How far keep mask ``a`` is from reference ``b``."""
    a = np.asarray(a, dtype=bool)
    b = np.asarray(b, dtype=bool)
    if a.shape != b.shape:
        raise ValueError(f"mask length mismatch: {a.shape} vs {b.shape}")
    inter = int(np.count_nonzero(a & b))
    union = int(np.count_nonzero(a | b))
    return AgreementReport(
        1.0 if union == 0 else inter / union,
        int(np.count_nonzero(a & ~b)),
        int(np.count_nonzero(b & ~a)),
    )


def aggregate_agreement(masks_a: Sequence[KeepMask], masks_b: Sequence[KeepMask]) -> AgreementReport:
    """Agreement over all images, treating them as one concatenated mask."""
    if len(masks_a) != len(masks_b):
        raise ValueError("need one mask per image on both sides")
    if not masks_a:
        return AgreementReport(1.0, 0, 0)
    return agreement(np.concatenate(masks_a), np.concatenate(masks_b))


@dataclass(frozen=True)
class ApResult:
    ap_per_threshold: dict[float, float]
    map_50_95: float
    categories: int = 0


def _category_ap(preds, gts, thr: float) -> float:
    """101-point AP for one category: ``preds``/``gts`` are per-image lists."""
    n_gt = sum(len(g) for g in gts)
    records = []  # (score, image, det position)
    for img, (boxes, scores) in enumerate(preds):
        for k in range(len(scores)):
            records.append((-scores[k], img, k))
    if not records:
        return 0.0
    matched_tp = {}
    for img, (boxes, scores) in enumerate(preds):
        g = gts[img]
        if len(scores) == 0:
            continue
        order = np.argsort(-scores, kind="mergesort")
        taken = np.zeros(len(g), dtype=bool)
        for k in order:
            best, best_iou = -1, min(thr, 1 - 1e-10)
            if len(g):
                ious = iou_pairs(np.broadcast_to(boxes[k], g.shape), g)
                for j in range(len(g)):
                    if taken[j] or ious[j] < best_iou:
                        continue
                    best, best_iou = j, ious[j]
            if best >= 0:
                taken[best] = True
            matched_tp[(img, k)] = best >= 0
    scores_all = np.array([-r[0] for r in records])
    tp_all = np.array([matched_tp[(r[1], r[2])] for r in records])
    order = np.argsort(-scores_all, kind="mergesort")
    tp = np.cumsum(tp_all[order])
    fp = np.cumsum(~tp_all[order])
    recall = tp / n_gt
    precision = tp / np.maximum(tp + fp, np.finfo(np.float64).eps)
    # precision envelope, non-increasing in recall
    precision = np.maximum.accumulate(precision[::-1])[::-1]
    idx = np.searchsorted(recall, RECALL_POINTS, side="left")
    q = np.where(idx < len(precision), precision[np.minimum(idx, len(precision) - 1)], 0.0)
    return float(q.mean())


def evaluate_ap(
    predictions: Sequence[DetectionSet],
    ground_truth: Sequence[Sequence[GroundTruthBox]],
    iou_thresholds: Sequence[float] = COCO_IOU_THRESHOLDS,
) -> ApResult:
    """COCO-style AP: greedy per-image matching by score, 101-point interpolation.

    ``predictions[i]`` holds the retained detections of image i. Categories
    without ground truth are skipped; AP is averaged over categories, then
    over thresholds.
    """
    if len(predictions) != len(ground_truth):
        raise ValueError("need one prediction set per ground-truth image")
    cats = sorted({g.category for gt in ground_truth for g in gt})
    if not cats:
        nan = float("nan")
        return ApResult({t: nan for t in iou_thresholds}, nan, 0)
    per_thr = {}
    for t in iou_thresholds:
        aps = []
        for c in cats:
            preds = []
            gts = []
            for dets, gt in zip(predictions, ground_truth):
                sel = dets.categories == c
                preds.append((dets.boxes[sel], dets.scores[sel]))
                gts.append(np.array([g.box for g in gt if g.category == c], dtype=np.float64).reshape(-1, 4))
            aps.append(_category_ap(preds, gts, t))
        per_thr[t] = float(np.mean(aps))
    return ApResult(per_thr, float(np.mean(list(per_thr.values()))), len(cats))


@dataclass
class LatencyResult:
    method: str
    mean_us: float
    min_us: float
    std_us: float
    median_us: float
    per_repeat_us: list[float] = field(default_factory=list)


def latency_benchmark(
    method: str, sets: Sequence[DetectionSet], cfg: NmsConfig, repeats: int = 5
) -> LatencyResult:
    """Average per-image latency of ``method``, repeated ``repeats`` times.

    The timed window is exactly the call that turns an in-memory detection
    set into a keep mask (including per-class partitioning when enabled).
    """
    if repeats < 1:
        raise ValueError("repeats must be >= 1")
    get_method(method)
    warm_up()
    per_repeat = []
    clock = time.perf_counter_ns
    for _ in range(repeats):
        total = 0
        for dets in sets:
            t0 = clock()
            run_method(method, dets, cfg)
            total += clock() - t0
        per_repeat.append(total / max(len(sets), 1) / 1e3)
    return LatencyResult(
        method,
        statistics.fmean(per_repeat),
        min(per_repeat),
        statistics.stdev(per_repeat) if repeats > 1 else 0.0,
        statistics.median(per_repeat),
        per_repeat,
    )
