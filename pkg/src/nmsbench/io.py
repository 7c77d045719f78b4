"""JSON Lines detection files: one image per line.

    {"image_id": "...", "detections": [{"bbox": [x1, y1, x2, y2], "score": s, "category": c}, ...],
     "ground_truth": [{"bbox": [...], "category": c}, ...]}

``ground_truth`` is optional. Detection order on the line is the detection index.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import IO, Iterable, Iterator

import numpy as np

from nmsbench.detections import DetectionSet, GroundTruthBox
from nmsbench.geometry import BoundingBox


class InputError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


def _parse_line(obj, lineno: int) -> DetectionSet:
    if not isinstance(obj, dict):
        raise InputError("expected a JSON object", lineno)
    try:
        image_id = str(obj["image_id"])
        raw = obj.get("detections", [])
        boxes = np.array([d["bbox"] for d in raw], dtype=np.float64).reshape(-1, 4)
        scores = np.array([d["score"] for d in raw], dtype=np.float64)
        cats = np.array([int(d.get("category", 0)) for d in raw], dtype=np.int64)
        gts = [
            GroundTruthBox(BoundingBox(*map(float, g["bbox"])).validate(), int(g.get("category", 0)))
            for g in obj.get("ground_truth", [])
        ]
        return DetectionSet(image_id, boxes, scores, cats, gts)
    except InputError:
        raise
    except (KeyError, TypeError, ValueError) as e:
        raise InputError(f"malformed record: {e}", lineno) from e


def iter_jsonl(path: str | Path) -> Iterator[DetectionSet]:
    """Stream detection sets; errors carry the 1-based line number."""
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as e:
                raise InputError(f"invalid JSON: {e.msg}", lineno) from e
            yield _parse_line(obj, lineno)


def read_jsonl(path: str | Path) -> list[DetectionSet]:
    return list(iter_jsonl(path))


def to_record(dets: DetectionSet) -> dict:
    rec = {
        "image_id": dets.image_id,
        "detections": [
            {"bbox": [float(v) for v in b], "score": float(s), "category": int(c)}
            for b, s, c in zip(dets.boxes, dets.scores, dets.categories)
        ],
    }
    if dets.ground_truth:
        rec["ground_truth"] = [
            {"bbox": [float(v) for v in g.box], "category": int(g.category)} for g in dets.ground_truth
        ]
    return rec


def write_jsonl(sets: Iterable[DetectionSet], out: str | Path | IO[str]) -> int:
    """Write one line per image; returns the number of images written."""
    if isinstance(out, (str, Path)):
        with open(out, "w", encoding="utf-8", newline="\n") as f:
            return write_jsonl(sets, f)
    count = 0
    for dets in sets:
        out.write(json.dumps(to_record(dets), separators=(",", ":")))
        out.write("\n")
        count += 1
    return count
