#!/usr/bin/env python3
"""Write a synthetic tab-separated recording in the visual-scanning layout.

Gaze hops between random targets with short linear saccades; the pupil
wanders slowly and gets noisier in the second half so the RIPA stream has
something to show.
"""

import argparse
import math
import random


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", required=True)
    ap.add_argument("--seconds", type=float, default=60.0)
    ap.add_argument("--rate", type=float, default=60.0)
    ap.add_argument("--seed", type=int, default=7)
    ap.add_argument("--width", type=int, default=1920)
    ap.add_argument("--height", type=int, default=1080)
    args = ap.parse_args()

    rng = random.Random(args.seed)
    period = 1000.0 / args.rate
    n = int(args.seconds * args.rate)

    def target():
        return rng.uniform(100, args.width - 100), rng.uniform(100, args.height - 100)

    x, y = target()
    dwell_left = rng.uniform(150, 600)
    sacc = None  # (x0, y0, x1, y1, elapsed, total)
    pupil = 4.0
    with open(args.out, "w") as f:
        f.write("time\tx\ty\tpupil\tvalid\n")
        for i in range(n):
            t = i * period
            if sacc is None:
                dwell_left -= period
                if dwell_left <= 0:
                    tx, ty = target()
                    sacc = (x, y, tx, ty, 0.0, rng.uniform(30, 60))
            if sacc is not None:
                x0, y0, x1, y1, el, tot = sacc
                el += period
                a = min(el / tot, 1.0)
                x, y = x0 + (x1 - x0) * a, y0 + (y1 - y0) * a
                sacc = None if a >= 1.0 else (x0, y0, x1, y1, el, tot)
                if sacc is None:
                    dwell_left = rng.uniform(150, 600)
            jitter = 0.6
            gx, gy = x + rng.gauss(0, jitter), y + rng.gauss(0, jitter)
            load = 1.0 if t < args.seconds * 500 else 5.0
            pupil += rng.gauss(0, 0.004 * load) - 0.01 * (pupil - 4.0)
            valid = 0 if rng.random() < 0.005 else 1
            if valid:
                f.write(f"{t:.3f}\t{gx:.2f}\t{gy:.2f}\t{pupil:.4f}\t1\n")
            else:
                f.write(f"{t:.3f}\t\t\t\t0\n")


if __name__ == "__main__":
    main()
