"""Seeded synthetic detector output.

Each image holds a handful of objects; every object gets one ground-truth box
and a cluster of jittered candidate boxes whose score falls off with the size
of the jitter. That reproduces the structure NMS sees from a trained
detector: many small, mutually independent clusters.

Randomness comes from NumPy's PCG64 bit generator (``numpy.random.PCG64``),
one stream per image seeded with ``seed ^ image_index``, so images can be
generated in any order or in parallel with the same result.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from nmsbench.detections import DetectionSet, GroundTruthBox
from nmsbench.geometry import BoundingBox, iou_pairs


@dataclass(frozen=True)
class SynthParams:
    num_images: int = 100
    objects_per_image: float = 10.0
    boxes_per_object: float = 30.0
    image_size: tuple[int, int] = (640, 640)
    jitter_scale: float = 0.1
    score_decay: float = 3.0
    num_categories: int = 8
    seed: int = 42
    min_object_size: float = 16.0
    max_object_size: float = 256.0
    # placement is resampled while the new object overlaps an existing one above this
    max_object_iou: float = 0.3
    placement_attempts: int = 50
    score_noise: float = 0.02
    # low-score boxes scattered uniformly over the image (mean count)
    background_boxes: float = 50.0
    background_max_score: float = 0.3

    def __post_init__(self):
        if min(self.num_images, self.objects_per_image, self.boxes_per_object, self.background_boxes) < 0:
            raise ValueError("counts must be non-negative")
        if self.jitter_scale < 0:
            raise ValueError("jitter_scale must be non-negative")
        if self.image_size[0] <= 0 or self.image_size[1] <= 0:
            raise ValueError("image_size must be positive")
        if self.num_categories < 1:
            raise ValueError("num_categories must be at least 1")
        if not 0 < self.min_object_size <= self.max_object_size:
            raise ValueError("need 0 < min_object_size <= max_object_size")


def image_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64((seed ^ index) & 0xFFFFFFFFFFFFFFFF))


def _place_objects(rng, p: SynthParams, count: int) -> np.ndarray:
    width, height = p.image_size
    lo, hi = math.log(p.min_object_size), math.log(p.max_object_size)
    placed: list[np.ndarray] = []
    for _ in range(count):
        for _ in range(p.placement_attempts):
            w = min(math.exp(rng.uniform(lo, hi)), width)
            h = min(w * math.exp(rng.uniform(-0.5, 0.5)), height)
            x = rng.uniform(0, width - w)
            y = rng.uniform(0, height - h)
            cand = np.array([x, y, x + w, y + h])
            if not placed:
                break
            others = np.array(placed)
            ious = iou_pairs(np.broadcast_to(cand, others.shape), others)
            if ious.max() <= p.max_object_iou:
                break
        else:
            continue  # crowded image: drop the object rather than break the overlap cap
        placed.append(cand)
    return np.array(placed).reshape(-1, 4)


def generate_image(p: SynthParams, index: int) -> DetectionSet:
    rng = image_rng(p.seed, index)
    width, height = p.image_size
    objects = _place_objects(rng, p, int(rng.poisson(p.objects_per_image)))
    boxes, scores, cats, gts = [], [], [], []
    for obj in objects:
        cat = int(rng.integers(p.num_categories))
        gts.append(GroundTruthBox(BoundingBox(*map(float, obj)), cat))
        k = 1 + int(rng.poisson(max(p.boxes_per_object - 1, 0.0)))
        base = rng.uniform(0.6, 0.95)
        w, h = obj[2] - obj[0], obj[3] - obj[1]
        cx, cy = obj[0] + w / 2, obj[1] + h / 2
        # relative centre shift and log-extent change, per candidate
        noise = rng.normal(0.0, 1.0, size=(k, 4)) * p.jitter_scale
        bw = w * np.exp(noise[:, 2])
        bh = h * np.exp(noise[:, 3])
        bcx = cx + noise[:, 0] * w
        bcy = cy + noise[:, 1] * h
        cand = np.stack([bcx - bw / 2, bcy - bh / 2, bcx + bw / 2, bcy + bh / 2], axis=1)
        cand[:, [0, 2]] = np.clip(cand[:, [0, 2]], 0, width)
        cand[:, [1, 3]] = np.clip(cand[:, [1, 3]], 0, height)
        dist = np.sqrt((noise ** 2).sum(axis=1))
        s = base * np.exp(-p.score_decay * dist) + rng.normal(0.0, p.score_noise, size=k)
        boxes.append(cand)
        scores.append(np.clip(s, 1e-6, 1.0))
        cats.append(np.full(k, cat))
    m = int(rng.poisson(p.background_boxes))
    if m:
        lo, hi = math.log(p.min_object_size), math.log(p.max_object_size)
        w = np.minimum(np.exp(rng.uniform(lo, hi, size=m)), width)
        h = np.minimum(w * np.exp(rng.uniform(-0.5, 0.5, size=m)), height)
        x = rng.uniform(0, 1, size=m) * (width - w)
        y = rng.uniform(0, 1, size=m) * (height - h)
        boxes.append(np.stack([x, y, x + w, y + h], axis=1))
        scores.append(rng.uniform(1e-3, p.background_max_score, size=m))
        cats.append(rng.integers(p.num_categories, size=m))
    if boxes:
        b, s, c = np.concatenate(boxes), np.concatenate(scores), np.concatenate(cats)
        # detector output arrives unordered
        perm = rng.permutation(len(s))
        b, s, c = b[perm], s[perm], c[perm]
    else:
        b, s, c = np.zeros((0, 4)), np.zeros(0), np.zeros(0, dtype=np.int64)
    return DetectionSet(f"synth_{p.seed}_{index:06d}", b, s, c, gts)


def generate(p: SynthParams) -> list[DetectionSet]:
    """``num_images`` detection sets, each carrying its ground truth."""
    return [generate_image(p, i) for i in range(p.num_images)]


def single_image_params(n_boxes: int, boxes_per_object: float = 30.0, seed: int = 0) -> SynthParams:
    """Params for one image of roughly ``n_boxes`` boxes at default object density."""
    d = SynthParams()
    clutter_per_object = d.background_boxes / d.objects_per_image
    objects = n_boxes / (boxes_per_object + clutter_per_object)
    scale = math.sqrt(objects / d.objects_per_image)
    side = int(math.ceil(d.image_size[0] * scale))
    return replace(
        d,
        num_images=1,
        objects_per_image=objects,
        background_boxes=d.background_boxes * scale * scale,
        boxes_per_object=boxes_per_object,
        image_size=(side, side),
        seed=seed,
    )
