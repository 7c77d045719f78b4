"""Seeded random detection sets shared by the test modules."""

import numpy as np

from nmsbench.detections import DetectionSet

THRESHOLDS = (0.3, 0.5, 0.7, 0.9)


def random_detection_set(rng: np.random.Generator, max_n: int = 500, name: str = "rand") -> DetectionSet:
    """Mixture of uniform clutter and tight clusters, with deliberate score ties,
    duplicated boxes and the occasional degenerate box."""
    n = int(rng.integers(1, max_n + 1))
    mode = rng.integers(3)
    if mode == 0:
        w = np.exp(rng.uniform(np.log(5), np.log(300), n))
        h = w * np.exp(rng.uniform(-0.7, 0.7, n))
        cx = rng.uniform(0, 1000, n)
        cy = rng.uniform(0, 1000, n)
    else:
        k = max(1, n // int(rng.integers(3, 40)))
        centers = rng.uniform(0, 1000, size=(k, 2))
        sizes = np.exp(rng.uniform(np.log(8), np.log(250), size=(k, 2)))
        jitter = rng.uniform(0.02, 0.35 if mode == 1 else 0.1)
        which = rng.integers(k, size=n)
        cx = centers[which, 0] + rng.normal(0, jitter, n) * sizes[which, 0]
        cy = centers[which, 1] + rng.normal(0, jitter, n) * sizes[which, 1]
        w = sizes[which, 0] * np.exp(rng.normal(0, jitter, n))
        h = sizes[which, 1] * np.exp(rng.normal(0, jitter, n))
    boxes = np.stack([cx - w / 2, cy - h / 2, cx + w / 2, cy + h / 2], axis=1)
    if rng.random() < 0.3:
        boxes = np.round(boxes)  # integer pixels: equal centroids / keys happen
    degenerate = rng.random(n) < 0.03
    boxes[degenerate, 2] = boxes[degenerate, 0]
    dup = rng.random(n) < 0.05
    if dup.any() and n > 1:
        boxes[dup] = boxes[rng.integers(n, size=int(dup.sum()))]
    scores = rng.random(n)
    if rng.random() < 0.4:
        scores = np.round(scores, 1)  # many exact ties
    cats = rng.integers(4, size=n)
    return DetectionSet(name, boxes, scores, cats)


def random_corpus(count: int = 1000, seed: int = 0, max_n: int = 500) -> list[DetectionSet]:
    rng = np.random.default_rng(seed)
    return [random_detection_set(rng, max_n, f"rand_{i}") for i in range(count)]


def chain_set() -> DetectionSet:
    """A(.9) - B(.8) - C(.7) sliding right: IOU(A,B) = IOU(B,C) = 3/5, IOU(A,C) = 1/3.

    Centroids ascend in x (and so under every preorder)."""
    return DetectionSet(
        "chain",
        np.array([[0, 0, 2, 2], [0.5, 0, 2.5, 2], [1, 0, 3, 2]], dtype=float),
        np.array([0.9, 0.8, 0.7]),
    )


def three_box_set() -> DetectionSet:
    """Two identical boxes plus a far-away one."""
    return DetectionSet(
        "three",
        np.array([[0, 0, 2, 2], [0, 0, 2, 2], [10, 10, 12, 12]], dtype=float),
        np.array([0.9, 0.8, 0.7]),
    )


ACCEPTANCE_LINES: list[str] = []


def verdict(number: int, title: str, ok: bool, detail: str) -> None:
    """Record and print one PASS/FAIL line, then fail the test if needed."""
    line = f"{'PASS' if ok else 'FAIL'} criterion {number:>2} {title}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line
