"""NMS methods behind one interface.

Each method takes a :class:`~nmsbench.detections.DetectionSet` and an
:class:`NmsConfig` and returns an :class:`InstrumentedMask`: the keep mask in
input order plus the number of IOU evaluations it performed.

Ties are broken the same way everywhere: priority is score descending then
index ascending, and centroid sorting is key ascending then index ascending.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from nmsbench import _kernels
from nmsbench.detections import DetectionSet, KeepMask, priority_order, priority_rank
from nmsbench.geometry import Preorder, centroid_key_rank, centroid_sort, suppression_window_scale

METHODS = ("original", "fast", "cluster", "boe", "qsi", "eqsi")


@dataclass(frozen=True)
class NmsConfig:
    iou_threshold: float = 0.7
    order: Preorder = Preorder.MANHATTAN
    per_class: bool = False
    # eQSI: only let a retained box suppress (off = as published)
    gated_eqsi: bool = False
    # BOE: reject window candidates on centroid y as well as x
    boe_y_filter: bool = True

    def __post_init__(self):
        if not 0.0 < self.iou_threshold < 1.0:
            raise ValueError(f"iou_threshold must be in (0, 1), got {self.iou_threshold}")
        object.__setattr__(self, "order", Preorder.parse(self.order))


@dataclass
class InstrumentedMask:
    mask: KeepMask
    iou_calls: int = 0
    comparisons: int = 0
    iterations: int | None = None
    tree: "QsiTree | None" = None

    @property
    def kept(self) -> int:
        return int(np.count_nonzero(self.mask))


@dataclass
class QsiTree:
    """Binary tree over detection labels; ``left``/``right`` map label -> child label."""

    root: int | None
    left: dict[int, int] = field(default_factory=dict)
    right: dict[int, int] = field(default_factory=dict)

    @classmethod
    def from_arrays(cls, root, left, right, labels=None) -> "QsiTree":
        lab = (lambda i: int(i)) if labels is None else (lambda i: int(labels[i]))
        if root < 0:
            return cls(None)
        return cls(
            lab(root),
            {lab(i): lab(c) for i, c in enumerate(left) if c >= 0},
            {lab(i): lab(c) for i, c in enumerate(right) if c >= 0},
        )

    def inorder(self) -> list[int]:
        out, stack, v = [], [], self.root
        while stack or v is not None:
            while v is not None:
                stack.append(v)
                v = self.left.get(v)
            v = stack.pop()
            out.append(v)
            v = self.right.get(v)
        return out

    def __len__(self) -> int:
        return 0 if self.root is None else len(self.inorder())


def cartesian_tree(keys: Sequence, labels: Sequence[int] | None = None) -> QsiTree:
    """Max Cartesian tree of ``keys`` in O(n); equal keys: the earlier one is greater.

    Node labels are positions unless ``labels`` is given.
    """
    keys = list(keys)
    if not keys:
        return QsiTree(None)
    # reverse sort stays stable: the earlier of two equal keys ranks higher
    order = sorted(range(len(keys)), key=lambda i: keys[i], reverse=True)
    prank = np.empty(len(keys), dtype=np.int64)
    prank[order] = np.arange(len(keys))
    root, left, right = _kernels.cartesian_kernel(prank)
    return QsiTree.from_arrays(root, left, right, labels)


def centroid_sequence(dets: DetectionSet, order: Preorder) -> np.ndarray:
    """Indices sorted ascending by centroid key, ties by index."""
    return centroid_sort(dets.boxes, order)


def qsi_inorder_sequence(dets: DetectionSet, order: Preorder) -> np.ndarray:
    """Centroid-sorted indices with key ties resolved as the QSI partition resolves them.

    Boxes whose key equals the pivot's go left, so within a tie the
    lower-priority box comes first.
    """
    krank = centroid_key_rank(dets.boxes, order)
    prank = priority_rank(dets.scores)
    return np.lexsort((-prank, krank))


def original_nms(dets: DetectionSet, cfg: NmsConfig) -> InstrumentedMask:
    keep, calls = _kernels.original_kernel(dets.boxes, priority_order(dets.scores), cfg.iou_threshold)
    return InstrumentedMask(keep, int(calls))


def fast_nms(dets: DetectionSet, cfg: NmsConfig) -> InstrumentedMask:
    keep, calls = _kernels.fast_kernel(dets.boxes, priority_order(dets.scores), cfg.iou_threshold)
    return InstrumentedMask(keep, int(calls))


def cluster_nms(dets: DetectionSet, cfg: NmsConfig) -> InstrumentedMask:
    src, dst, calls = _kernels.arcs_kernel(
        dets.boxes, priority_order(dets.scores), cfg.iou_threshold
    )
    keep, iterations = _kernels.cluster_iterate(len(dets), src, dst)
    return InstrumentedMask(keep, int(calls), iterations=int(iterations))


def boe_nms(dets: DetectionSet, cfg: NmsConfig) -> InstrumentedMask:
    keep, calls, cmps = _kernels.boe_kernel(
        dets.boxes,
        priority_order(dets.scores),
        priority_rank(dets.scores),
        cfg.iou_threshold,
        suppression_window_scale(cfg.iou_threshold),
        cfg.boe_y_filter,
    )
    return InstrumentedMask(keep, int(calls), int(cmps))


def qsi_nms(dets: DetectionSet, cfg: NmsConfig, trace: bool = False) -> InstrumentedMask:
    keep, calls, cmps, root, left, right = _kernels.qsi_kernel(
        dets.boxes,
        priority_rank(dets.scores),
        centroid_key_rank(dets.boxes, cfg.order),
        cfg.iou_threshold,
    )
    tree = QsiTree.from_arrays(root, left, right) if trace else None
    return InstrumentedMask(keep, int(calls), int(cmps), tree=tree)


def eqsi_nms(dets: DetectionSet, cfg: NmsConfig) -> InstrumentedMask:
    seq = centroid_sequence(dets, cfg.order)
    # work in sequence order so both stack passes stream through memory
    alive, calls, cmps = _kernels.eqsi_kernel(
        dets.boxes[seq], dets.scores[seq], seq, cfg.iou_threshold, cfg.gated_eqsi
    )
    keep = np.empty(len(dets), dtype=bool)
    keep[seq] = alive
    return InstrumentedMask(keep, int(calls), int(cmps))


_DISPATCH: dict[str, Callable[[DetectionSet, NmsConfig], InstrumentedMask]] = {
    "original": original_nms,
    "fast": fast_nms,
    "cluster": cluster_nms,
    "boe": boe_nms,
    "qsi": qsi_nms,
    "eqsi": eqsi_nms,
}


def get_method(name: str) -> Callable[[DetectionSet, NmsConfig], InstrumentedMask]:
    try:
        return _DISPATCH[name]
    except KeyError:
        raise ValueError(f"unknown NMS method {name!r}; choose from {', '.join(METHODS)}") from None


def run_method(name: str, dets: DetectionSet, cfg: NmsConfig) -> InstrumentedMask:
    """Run one method, optionally class by class, with the mask in input order."""
    fn = get_method(name)
    n = len(dets)
    if n == 0:
        return InstrumentedMask(np.zeros(0, dtype=bool), 0)
    if not cfg.per_class:
        return fn(dets, cfg)
    mask = np.zeros(n, dtype=bool)
    calls = cmps = 0
    iterations = None
    for c in np.unique(dets.categories):
        idx = np.flatnonzero(dets.categories == c)
        res = fn(dets.subset(idx), cfg)
        mask[idx] = res.mask
        calls += res.iou_calls
        cmps += res.comparisons
        if res.iterations is not None:
            iterations = max(iterations or 0, res.iterations)
    return InstrumentedMask(mask, calls, cmps, iterations=iterations)


def warm_up() -> None:
    """Compile every kernel once so timed runs never include JIT time."""
    dets = DetectionSet("warmup", np.array([[0, 0, 2, 2], [0, 0, 2, 2.5], [5, 5, 6, 6]]), [0.9, 0.8, 0.7])
    cfg = NmsConfig()
    for name in METHODS:
        run_method(name, dets, cfg)
    _kernels.cartesian_kernel(np.arange(3, dtype=np.int64))
