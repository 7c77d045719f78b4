"""End-to-end benchmark runs: masks, counters, agreement, AP and latency per method."""

from __future__ import annotations

import csv
import datetime as _dt
import json
import platform
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from nmsbench.detections import DetectionSet
from nmsbench.evaluation import (
    AgreementReport,
    aggregate_agreement,
    evaluate_ap,
    latency_benchmark,
)
from nmsbench.geometry import Preorder
from nmsbench.nms import METHODS, NmsConfig, get_method, run_method

SCHEMA_VERSION = 1
# fields that legitimately differ between otherwise identical runs
VOLATILE_KEYS = ("generated_at", "environment", "latency_us")
EXACT_METHODS = ("original", "cluster", "boe")


class InvariantViolation(RuntimeError):
    pass


@dataclass
class BenchConfig:
    input: str | None = None
    methods: list[str] = field(default_factory=lambda: ["original", "boe", "qsi", "eqsi"])
    iou_threshold: float = 0.7
    per_class: bool = False
    order: str = "manhattan"
    repeats: int = 5
    output: str | None = None
    baseline: str = "original"

    def validate(self) -> None:
        if not self.methods:
            raise ValueError("at least one method is required")
        for m in [*self.methods, self.baseline]:
            get_method(m)
        if self.repeats < 1:
            raise ValueError("repeats must be >= 1")
        Preorder.parse(self.order)
        NmsConfig(self.iou_threshold)

    def nms_config(self) -> NmsConfig:
        return NmsConfig(self.iou_threshold, Preorder.parse(self.order), self.per_class)


def _masks(method: str, sets: Sequence[DetectionSet], cfg: NmsConfig):
    masks, calls, cmps, iters = [], 0, 0, 0
    for dets in sets:
        r = run_method(method, dets, cfg)
        masks.append(r.mask)
        calls += r.iou_calls
        cmps += r.comparisons
        if r.iterations is not None:
            iters = max(iters, r.iterations)
    return masks, calls, cmps, iters


def _agreement_dict(a: AgreementReport) -> dict:
    return {"jaccard": a.jaccard, "extra_kept": a.extra_kept, "missing_kept": a.missing_kept}


def run_benchmark(cfg: BenchConfig, sets: Sequence[DetectionSet], time_it: bool = True) -> dict:
    """Build the report dict. Raises :class:`InvariantViolation` after building it
    if an exact method disagrees with original NMS (report attached to the error)."""
    cfg.validate()
    nms_cfg = cfg.nms_config()
    has_gt = any(d.ground_truth for d in sets)
    base_masks = _masks(cfg.baseline, sets, nms_cfg)[0]
    oracle_masks = base_masks if cfg.baseline == "original" else _masks("original", sets, nms_cfg)[0]
    methods = {}
    violations = []
    for name in cfg.methods:
        masks, calls, cmps, iters = _masks(name, sets, nms_cfg)
        entry = {
            "iou_calls": calls,
            "comparisons": cmps,
            "kept": int(sum(int(np.count_nonzero(m)) for m in masks)),
            "agreement": _agreement_dict(aggregate_agreement(masks, base_masks)),
        }
        if name == "cluster":
            entry["max_iterations"] = iters
        if has_gt:
            kept_sets = [d.subset(np.flatnonzero(m)) for d, m in zip(sets, masks)]
            ap = evaluate_ap(kept_sets, [d.ground_truth for d in sets])
            entry["ap"] = {
                "map_50_95": ap.map_50_95,
                "per_threshold": {f"{t:.2f}": v for t, v in ap.ap_per_threshold.items()},
            }
        else:
            entry["ap"] = None
        if time_it:
            lat = latency_benchmark(name, sets, nms_cfg, cfg.repeats)
            entry["latency_us"] = {
                "mean": lat.mean_us,
                "std": lat.std_us,
                "min": lat.min_us,
                "median": lat.median_us,
                "per_repeat": lat.per_repeat_us,
            }
        else:
            entry["latency_us"] = None
        if name in EXACT_METHODS and not aggregate_agreement(masks, oracle_masks).identical:
            violations.append(name)
        methods[name] = entry
    report = {
        "schema_version": SCHEMA_VERSION,
        "generated_at": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
        "environment": {
            "python": platform.python_version(),
            "numpy": np.__version__,
            "platform": platform.platform(),
        },
        "config": asdict(cfg),
        "images": len(sets),
        "boxes": int(sum(len(d) for d in sets)),
        "methods": methods,
    }
    if violations:
        err = InvariantViolation(f"exact methods disagree with original NMS: {', '.join(violations)}")
        err.report = report
        raise err
    return report


def strip_volatile(report: dict) -> dict:
    """Copy of ``report`` without timing/environment fields, for golden comparisons."""
    out = {k: v for k, v in report.items() if k not in VOLATILE_KEYS}
    out["methods"] = {
        name: {k: v for k, v in entry.items() if k not in VOLATILE_KEYS}
        for name, entry in report["methods"].items()
    }
    return out


def write_report(report: dict, path: str | Path) -> tuple[Path, Path]:
    """Write ``<path>`` (full JSON) and a flat CSV next to it."""
    path = Path(path)
    path.write_text(json.dumps(report, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    csv_path = path.with_suffix(".csv")
    with open(csv_path, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow([
            "method", "avg_latency_us", "latency_std_us", "iou_calls", "kept",
            "jaccard", "extra_kept", "missing_kept", "ap_50_95",
        ])
        for name, e in report["methods"].items():
            lat = e.get("latency_us") or {}
            ap = e.get("ap") or {}
            a = e["agreement"]
            w.writerow([
                name, lat.get("mean", ""), lat.get("std", ""), e["iou_calls"], e["kept"],
                a["jaccard"], a["extra_kept"], a["missing_kept"], ap.get("map_50_95", ""),
            ])
    return path, csv_path


def compare_methods(
    sets: Sequence[DetectionSet],
    methods: Sequence[str],
    thresholds: Sequence[float],
    order: str = "manhattan",
    per_class: bool = False,
) -> list[dict]:
    """Agreement of every ordered method pair at every threshold."""
    if len(methods) < 2:
        raise ValueError("compare needs at least two methods")
    for m in methods:
        get_method(m)
    rows = []
    for t in thresholds:
        cfg = NmsConfig(t, Preorder.parse(order), per_class)
        masks = {m: _masks(m, sets, cfg)[0] for m in dict.fromkeys([*methods, "original"])}
        for i, a in enumerate(methods):
            for b in methods[i + 1:]:
                rep = aggregate_agreement(masks[a], masks[b])
                rows.append({"iou_threshold": t, "method_a": a, "method_b": b, **_agreement_dict(rep)})
        bad = [m for m in methods if m in EXACT_METHODS
               and not aggregate_agreement(masks[m], masks["original"]).identical]
        if bad:
            raise InvariantViolation(f"N_t={t}: exact methods disagree with original NMS: {', '.join(bad)}")
    return rows


def write_compare_csv(rows: Sequence[dict], path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as f:
        w = csv.DictWriter(
            f,
            ["iou_threshold", "method_a", "method_b", "jaccard", "extra_kept", "missing_kept"],
            lineterminator="\n",
        )
        w.writeheader()
        w.writerows(rows)


__all__ = [
    "BenchConfig",
    "InvariantViolation",
    "METHODS",
    "compare_methods",
    "run_benchmark",
    "strip_volatile",
    "write_compare_csv",
    "write_report",
]
