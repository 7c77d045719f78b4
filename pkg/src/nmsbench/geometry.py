"""Axis-aligned box arithmetic used by every NMS method.

Boxes are corner-form ``(x_lt, y_lt, x_rb, y_rb)`` on continuous coordinates,
so there is no ``+1`` pixel correction anywhere.
"""

from __future__ import annotations

import enum
import math
from typing import NamedTuple

import numpy as np


class Point(NamedTuple):
    x: float
    y: float


class BoundingBox(NamedTuple):
    x_lt: float
    y_lt: float
    x_rb: float
    y_rb: float

    def validate(self) -> "BoundingBox":
        if not all(math.isfinite(v) for v in self):
            raise ValueError(f"non-finite box coordinates: {tuple(self)}")
        if self.x_lt > self.x_rb or self.y_lt > self.y_rb:
            raise ValueError(f"box corners out of order: {tuple(self)}")
        return self

    @property
    def area(self) -> float:
        return (self.x_rb - self.x_lt) * (self.y_rb - self.y_lt)


class Preorder(enum.Enum):
    """Total preorders on centroids used to partition / sort boxes."""

    LEXICOGRAPHIC = "lex"
    MANHATTAN = "manhattan"
    EUCLIDEAN = "euclid"

    @classmethod
    def parse(cls, name: "str | Preorder") -> "Preorder":
        if isinstance(name, Preorder):
            return name
        aliases = {
            "lex": cls.LEXICOGRAPHIC,
            "lexicographic": cls.LEXICOGRAPHIC,
            "manhattan": cls.MANHATTAN,
            "l1": cls.MANHATTAN,
            "euclid": cls.EUCLIDEAN,
            "euclidean": cls.EUCLIDEAN,
            "l2": cls.EUCLIDEAN,
        }
        try:
            return aliases[name.lower()]
        except KeyError:
            raise ValueError(f"unknown preorder {name!r}") from None


class Comparison(enum.Enum):
    LESS_OR_EQUAL = "<="
    GREATER = ">"


def iou(a: BoundingBox, b: BoundingBox) -> float:
    """Intersection over union of two boxes; 0 when both are degenerate."""
    iw = min(a[2], b[2]) - max(a[0], b[0])
    ih = min(a[3], b[3]) - max(a[1], b[1])
    if iw <= 0.0 or ih <= 0.0:
        return 0.0
    inter = iw * ih
    union = (a[2] - a[0]) * (a[3] - a[1]) + (b[2] - b[0]) * (b[3] - b[1]) - inter
    if union <= 0.0:
        return 0.0
    return min(1.0, max(0.0, inter / union))


def iou_pairs(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Row-wise IOU of two ``(n, 4)`` arrays; same arithmetic as :func:`iou`."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    iw = np.minimum(a[:, 2], b[:, 2]) - np.maximum(a[:, 0], b[:, 0])
    ih = np.minimum(a[:, 3], b[:, 3]) - np.maximum(a[:, 1], b[:, 1])
    overlap = (iw > 0.0) & (ih > 0.0)
    inter = np.where(overlap, iw * ih, 0.0)
    union = (
        (a[:, 2] - a[:, 0]) * (a[:, 3] - a[:, 1])
        + (b[:, 2] - b[:, 0]) * (b[:, 3] - b[:, 1])
        - inter
    )
    ok = overlap & (union > 0.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(ok, inter / np.where(ok, union, 1.0), 0.0)
    return np.clip(out, 0.0, 1.0)


def centroid(b: BoundingBox) -> Point:
    return Point((b[0] + b[2]) / 2, (b[1] + b[3]) / 2)


def scale_box(b: BoundingBox, s: float) -> BoundingBox:
    """Scale ``b`` about its centroid by ``s`` (each half-extent times ``s``)."""
    if s < 0:
        raise ValueError("scale factor must be non-negative")
    if s == 1.0:
        return BoundingBox(*b)
    cx, cy = centroid(b)
    return BoundingBox(
        cx - s * abs(b[0] - cx),
        cy - s * abs(b[1] - cy),
        cx + s * abs(b[2] - cx),
        cy + s * abs(b[3] - cy),
    )


def scale_boxes(boxes: np.ndarray, s: float) -> np.ndarray:
    """Vectorised :func:`scale_box` over an ``(n, 4)`` array."""
    boxes = np.asarray(boxes, dtype=np.float64)
    if s == 1.0:
        return boxes.copy()
    cx = (boxes[:, 0] + boxes[:, 2]) / 2
    cy = (boxes[:, 1] + boxes[:, 3]) / 2
    return np.stack(
        [
            cx - s * np.abs(boxes[:, 0] - cx),
            cy - s * np.abs(boxes[:, 1] - cy),
            cx + s * np.abs(boxes[:, 2] - cx),
            cy + s * np.abs(boxes[:, 3] - cy),
        ],
        axis=1,
    )


def centroid_within(p: Point, b: BoundingBox) -> bool:
    # closed box: a boundary centroid counts as inside
    return b[0] <= p[0] <= b[2] and b[1] <= p[1] <= b[3]


def suppression_window_scale(iou_threshold: float) -> float:
    """Scale factor whose window contains every centroid with IOU above threshold."""
    return 1.0 / iou_threshold - 1.0


def compare(order: Preorder, p: Point, q: Point) -> Comparison:
    order = Preorder.parse(order)
    if order is Preorder.LEXICOGRAPHIC:
        le = p[0] < q[0] or (p[0] == q[0] and p[1] <= q[1])
    elif order is Preorder.MANHATTAN:
        le = abs(p[0]) + abs(p[1]) <= abs(q[0]) + abs(q[1])
    else:
        # squared norms: same ordering, no sqrt
        le = p[0] * p[0] + p[1] * p[1] <= q[0] * q[0] + q[1] * q[1]
    return Comparison.LESS_OR_EQUAL if le else Comparison.GREATER


def centroids(boxes: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    boxes = np.asarray(boxes, dtype=np.float64)
    return (boxes[:, 0] + boxes[:, 2]) / 2, (boxes[:, 1] + boxes[:, 3]) / 2


def stable_argsort(key: np.ndarray) -> np.ndarray:
    """Same result as ``argsort(kind="stable")``, via the faster default sort when keys are distinct."""
    perm = np.argsort(key)
    sk = key[perm]
    if len(sk) > 1 and np.any(sk[1:] == sk[:-1]):
        return np.argsort(key, kind="stable")
    return perm


def _centroid_perm(boxes: np.ndarray, order: Preorder) -> tuple[np.ndarray, np.ndarray]:
    """Stable sort of centroids under ``order`` plus a "new key" flag per sorted slot."""
    cx, cy = centroids(boxes)
    n = len(cx)
    new_key = np.ones(n, dtype=bool)
    if order is Preorder.LEXICOGRAPHIC:
        perm = np.lexsort((cy, cx))
        if n:
            new_key[1:] = (cx[perm][1:] != cx[perm][:-1]) | (cy[perm][1:] != cy[perm][:-1])
    else:
        key = np.abs(cx) + np.abs(cy) if order is Preorder.MANHATTAN else cx * cx + cy * cy
        perm = stable_argsort(key)
        if n:
            new_key[1:] = key[perm][1:] != key[perm][:-1]
    return perm, new_key


def centroid_sort(boxes: np.ndarray, order: Preorder) -> np.ndarray:
    """Indices ascending by centroid under ``order``; equal keys keep index order."""
    return _centroid_perm(boxes, Preorder.parse(order))[0]


def centroid_key_rank(boxes: np.ndarray, order: Preorder) -> np.ndarray:
    """Dense rank of each box's centroid under ``order``.

    ``rank[i] <= rank[j]`` exactly when centroid i precedes-or-equals centroid j,
    which lets compiled kernels compare integers instead of re-deriving keys.
    """
    perm, new_key = _centroid_perm(boxes, Preorder.parse(order))
    rank = np.empty(len(perm), dtype=np.int64)
    rank[perm] = np.cumsum(new_key) - 1
    return rank
