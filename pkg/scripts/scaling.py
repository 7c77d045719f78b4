"""Per-image latency against box count on single synthetic images."""

import argparse
import csv
from pathlib import Path

from nmsbench.datagen import generate, single_image_params
from nmsbench.evaluation import latency_benchmark
from nmsbench.nms import NmsConfig, warm_up

# original and fast are quadratic; cap them so the sweep finishes
QUADRATIC = {"original": 160_000, "fast": 40_000, "cluster": 40_000}


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--sizes", default="1000,4000,10000,40000,160000")
    ap.add_argument("--methods", default="original,fast,cluster,boe,qsi,eqsi")
    ap.add_argument("--repeats", type=int, default=5)
    ap.add_argument("--iou-threshold", type=float, default=0.7)
    ap.add_argument("--out", default="results")
    args = ap.parse_args()

    warm_up()
    cfg = NmsConfig(args.iou_threshold)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "scaling.csv", "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["target_n", "n", "method", "median_us", "mean_us", "std_us"])
        for target in (int(s) for s in args.sizes.split(",")):
            img = generate(single_image_params(target))
            for m in args.methods.split(","):
                if target > QUADRATIC.get(m, float("inf")):
                    continue
                r = latency_benchmark(m, img, cfg, repeats=args.repeats)
                w.writerow([target, len(img[0]), m, f"{r.median_us:.1f}", f"{r.mean_us:.1f}", f"{r.std_us:.1f}"])
                f.flush()
                print(f"n={len(img[0]):>7} {m:>8}: {r.median_us / 1e3:10.2f} ms")
    print(f"wrote {out / 'scaling.csv'}")


if __name__ == "__main__":
    main()
