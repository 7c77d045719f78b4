"""Detections, per-image detection sets and the priority order over them."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

from nmsbench.geometry import BoundingBox, stable_argsort

KeepMask = np.ndarray  # bool array, one entry per detection in input order


@dataclass(frozen=True)
class Detection:
    box: BoundingBox
    score: float
    category: int = 0
    index: int = 0

    def __post_init__(self):
        BoundingBox(*self.box).validate()
        if not (math.isfinite(self.score) and 0.0 <= self.score <= 1.0):
            raise ValueError(f"score must be finite and in [0, 1], got {self.score}")
        if self.category < 0 or self.index < 0:
            raise ValueError("category and index must be non-negative")


@dataclass(frozen=True)
class GroundTruthBox:
    box: BoundingBox
    category: int = 0


@dataclass(eq=False)
class DetectionSet:
    """All detections of one image, stored column-wise.

    The position of a detection in the arrays is its index; that index is the
    tie-breaker of the priority order, so input order is part of the data.
    """

    image_id: str
    boxes: np.ndarray
    scores: np.ndarray
    categories: np.ndarray = None
    ground_truth: list[GroundTruthBox] = field(default_factory=list)

    def __post_init__(self):
        self.boxes = np.ascontiguousarray(self.boxes, dtype=np.float64).reshape(-1, 4)
        self.scores = np.ascontiguousarray(self.scores, dtype=np.float64).reshape(-1)
        n = len(self.boxes)
        if self.categories is None:
            self.categories = np.zeros(n, dtype=np.int64)
        self.categories = np.ascontiguousarray(self.categories, dtype=np.int64).reshape(-1)
        if len(self.scores) != n or len(self.categories) != n:
            raise ValueError("boxes, scores and categories must have equal length")
        if not np.all(np.isfinite(self.boxes)):
            raise ValueError(f"{self.image_id}: non-finite box coordinates")
        if np.any(self.boxes[:, 0] > self.boxes[:, 2]) or np.any(self.boxes[:, 1] > self.boxes[:, 3]):
            raise ValueError(f"{self.image_id}: box corners out of order")
        if not np.all(np.isfinite(self.scores)) or np.any((self.scores < 0) | (self.scores > 1)):
            raise ValueError(f"{self.image_id}: scores must be finite and in [0, 1]")
        if np.any(self.categories < 0):
            raise ValueError(f"{self.image_id}: negative category")

    @classmethod
    def from_detections(
        cls, image_id: str, detections: Sequence[Detection], ground_truth=()
    ) -> "DetectionSet":
        for i, d in enumerate(detections):
            if d.index != i:
                raise ValueError("detection indices must be 0..n-1 in list order")
        return cls(
            image_id,
            np.array([d.box for d in detections], dtype=np.float64).reshape(-1, 4),
            np.array([d.score for d in detections], dtype=np.float64),
            np.array([d.category for d in detections], dtype=np.int64),
            list(ground_truth),
        )

    @classmethod
    def from_lists(cls, image_id: str, boxes, scores, categories=None) -> "DetectionSet":
        return cls(image_id, np.asarray(boxes, dtype=np.float64), np.asarray(scores), categories)

    def __len__(self) -> int:
        return len(self.scores)

    def __getitem__(self, i: int) -> Detection:
        return Detection(
            BoundingBox(*map(float, self.boxes[i])),
            float(self.scores[i]),
            int(self.categories[i]),
            i,
        )

    def __iter__(self) -> Iterator[Detection]:
        return (self[i] for i in range(len(self)))

    @property
    def detections(self) -> list[Detection]:
        return list(self)

    def subset(self, indices: np.ndarray) -> "DetectionSet":
        """Detections at ``indices`` (relative order kept), re-indexed from 0."""
        indices = np.asarray(indices, dtype=np.int64)
        return DetectionSet(
            self.image_id, self.boxes[indices], self.scores[indices], self.categories[indices]
        )

    def same_content(self, other: "DetectionSet") -> bool:
        return (
            self.image_id == other.image_id
            and np.array_equal(self.boxes, other.boxes)
            and np.array_equal(self.scores, other.scores)
            and np.array_equal(self.categories, other.categories)
            and self.ground_truth == other.ground_truth
        )


def priority_order(scores: np.ndarray) -> np.ndarray:
    """Indices from highest to lowest priority: score descending, index ascending."""
    return stable_argsort(-np.asarray(scores, dtype=np.float64))


def priority_rank(scores: np.ndarray) -> np.ndarray:
    """``rank[i]`` is i's position in :func:`priority_order` (0 = highest)."""
    order = priority_order(scores)
    rank = np.empty(len(order), dtype=np.int64)
    rank[order] = np.arange(len(order), dtype=np.int64)
    return rank
