"""Command line entry point: ``nmsbench {synth,run,stats,compare}``.

Exit codes: 0 success, 2 input error, 3 an exact method disagreed with
original NMS (an implementation bug, not a data problem).
"""

from __future__ import annotations

import argparse
import logging
import sys
from collections import Counter
from pathlib import Path

from nmsbench import bench, datagen, graph, io
from nmsbench.nms import METHODS

log = logging.getLogger("nmsbench")

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_INVARIANT = 3


def _methods(text: str) -> list[str]:
    names = [m.strip() for m in text.split(",") if m.strip()]
    unknown = [m for m in names if m not in METHODS]
    if unknown:
        raise argparse.ArgumentTypeError(
            f"unknown method(s) {', '.join(unknown)}; choose from {', '.join(METHODS)}"
        )
    return names


def _thresholds(text: str) -> list[float]:
    try:
        vals = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad threshold list {text!r}") from None
    if not vals or any(not 0 < v < 1 for v in vals):
        raise argparse.ArgumentTypeError("thresholds must lie in (0, 1)")
    return vals


def _add_nms_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--iou-threshold", type=float, default=0.7)
    p.add_argument("--per-class", action="store_true")
    p.add_argument("--order", choices=["lex", "manhattan", "euclid"], default="manhattan")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nmsbench", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    d = datagen.SynthParams()
    p = sub.add_parser("synth", help="write a synthetic detection corpus (JSONL)")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--images", type=int, default=d.num_images)
    p.add_argument("--seed", type=int, default=d.seed)
    p.add_argument("--objects", type=float, default=d.objects_per_image)
    p.add_argument("--boxes-per-object", type=float, default=d.boxes_per_object)
    p.add_argument("--background", type=float, default=d.background_boxes)
    p.add_argument("--jitter", type=float, default=d.jitter_scale)
    p.add_argument("--score-decay", type=float, default=d.score_decay)
    p.add_argument("--categories", type=int, default=d.num_categories)
    p.add_argument("--width", type=int, default=d.image_size[0])
    p.add_argument("--height", type=int, default=d.image_size[1])

    p = sub.add_parser("run", help="time and compare NMS methods on a corpus")
    p.add_argument("-i", "--input", required=True)
    p.add_argument("-o", "--output", required=True, help="report JSON path; a CSV is written beside it")
    p.add_argument("--methods", type=_methods, default=["original", "boe", "qsi", "eqsi"])
    p.add_argument("--baseline", type=_methods, default=["original"])
    p.add_argument("--repeats", type=int, default=5)
    _add_nms_flags(p)

    p = sub.add_parser("stats", help="suppression-graph statistics per image")
    p.add_argument("-i", "--input", required=True)
    p.add_argument("-o", "--output", required=True, help="per-image CSV (image_id,nodes,arcs,wccs)")
    p.add_argument("--histogram", help="WCC size histogram CSV (default: <output>_wcc_sizes.csv)")
    p.add_argument("--iou-threshold", type=float, default=0.7)

    p = sub.add_parser("compare", help="pairwise agreement matrix over a threshold sweep")
    p.add_argument("-i", "--input", required=True)
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--methods", type=_methods, default=["original", "cluster", "boe", "qsi", "eqsi"])
    p.add_argument("--sweep", type=_thresholds, help="comma-separated N_t values (default: --iou-threshold)")
    _add_nms_flags(p)
    return parser


def cmd_synth(args) -> int:
    params = datagen.SynthParams(
        num_images=args.images,
        objects_per_image=args.objects,
        boxes_per_object=args.boxes_per_object,
        background_boxes=args.background,
        image_size=(args.width, args.height),
        jitter_scale=args.jitter,
        score_decay=args.score_decay,
        num_categories=args.categories,
        seed=args.seed,
    )
    if params.num_images == 0:
        log.warning("--images 0: writing an empty corpus")
    sets = datagen.generate(params)
    io.write_jsonl(sets, args.output)
    print(f"wrote {len(sets)} images, {sum(len(s) for s in sets)} boxes to {args.output}")
    return EXIT_OK


def cmd_run(args) -> int:
    cfg = bench.BenchConfig(
        input=args.input,
        methods=args.methods,
        iou_threshold=args.iou_threshold,
        per_class=args.per_class,
        order=args.order,
        repeats=args.repeats,
        output=args.output,
        baseline=args.baseline[0],
    )
    cfg.validate()
    sets = io.read_jsonl(args.input)
    status = EXIT_OK
    try:
        report = bench.run_benchmark(cfg, sets)
    except bench.InvariantViolation as e:
        log.error("%s", e)
        report, status = e.report, EXIT_INVARIANT
    json_path, csv_path = bench.write_report(report, args.output)
    for name, e in report["methods"].items():
        lat = e["latency_us"]
        print(
            f"{name:>9}: {lat['mean']:10.1f} us/img (sd {lat['std']:.1f})  "
            f"iou_calls={e['iou_calls']}  kept={e['kept']}  jaccard={e['agreement']['jaccard']:.4f}"
        )
    print(f"report: {json_path} {csv_path}")
    return status


def cmd_stats(args) -> int:
    out = Path(args.output)
    hist_path = Path(args.histogram) if args.histogram else out.with_name(out.stem + "_wcc_sizes.csv")
    hist: Counter = Counter()

    def rows():
        for dets in io.iter_jsonl(args.input):
            row = graph.image_graph_stats(dets, args.iou_threshold)
            hist.update(row.sizes)
            yield row

    graph.write_stats_csv(rows(), out)
    graph.write_histogram_csv(hist, hist_path)
    if hist:
        print(
            f"WCCs={sum(hist.values())} median size={graph.histogram_quantile(hist, 0.5):g} "
            f"<5: {graph.fraction_below(hist, 5):.1%} <10: {graph.fraction_below(hist, 10):.1%}"
        )
    print(f"wrote {out} {hist_path}")
    return EXIT_OK


def cmd_compare(args) -> int:
    if len(args.methods) < 2:
        raise ValueError("compare needs at least two methods")
    sets = io.read_jsonl(args.input)
    sweep = args.sweep or [args.iou_threshold]
    try:
        rows = bench.compare_methods(sets, args.methods, sweep, args.order, args.per_class)
    except bench.InvariantViolation as e:
        log.error("%s", e)
        return EXIT_INVARIANT
    bench.write_compare_csv(rows, args.output)
    for r in rows:
        print(f"N_t={r['iou_threshold']:.2f} {r['method_a']:>8} vs {r['method_b']:<8} jaccard={r['jaccard']:.4f}")
    return EXIT_OK


COMMANDS = {"synth": cmd_synth, "run": cmd_run, "stats": cmd_stats, "compare": cmd_compare}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_INPUT if e.code else EXIT_OK
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO, format="%(levelname)s: %(message)s"
    )
    try:
        return COMMANDS[args.command](args)
    except (io.InputError, ValueError, OSError) as e:
        log.error("%s", e)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
