#!/usr/bin/env python3
"""Measure how adaptation wall time scales with target sample count.

Fits one source model per stream size, then times adapt_target alone
(re-loading the pretrained model before every run so each measurement
starts from identical state).

    python3 scripts/scaling_benchmark.py --sizes 500 1000 2000 4000 --reps 3
"""

import argparse
import os
import tempfile
import time

import numpy as np

from kladapt.config import RunConfig
from kladapt.klda import KldaModel
from kladapt.pipeline import adapt_target, gen_synthetic_sfcdcl, pretrain_source


def time_adaptation(per_class, config, reps, workdir):
    stream = gen_synthetic_sfcdcl(
        class_count=4, task_count=1, dim=8, samples_per_class=per_class,
        eval_per_class=20, separation=3.0, noise=0.5, angle_deg=30.0,
        translation=1.0, zero_shot_acc=0.85, seed=9,
    )
    model, rff_map = pretrain_source(stream.source_train, config)
    path = os.path.join(workdir, f"base{per_class}.klda")
    model.save(path)
    times = []
    for _ in range(reps):
        fresh = KldaModel.load(path)
        t0 = time.perf_counter()
        adapt_target(fresh, rff_map, stream.target_train, stream.vlm_train, config)
        times.append(time.perf_counter() - t0)
    return 4 * per_class, min(times), float(np.mean(times))


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", type=int, nargs="+", default=[500, 1000, 2000],
                        help="samples per class (4 classes, 1 task)")
    parser.add_argument("--reps", type=int, default=3)
    parser.add_argument("--d-rff", type=int, default=2000)
    args = parser.parse_args()

    config = RunConfig(d_rff=args.d_rff, sigma=2.0, temperature=3.0, ridge=0.01)
    print(f"D = {args.d_rff}, {args.reps} reps per size\n")
    print(f"{'samples':>8} {'min (s)':>9} {'mean (s)':>9} {'x vs prev':>10}")
    prev = None
    for per_class in args.sizes:
        n, best, mean = time_adaptation(per_class, config, args.reps, tempfile.gettempdir())
        ratio = "" if prev is None else f"{best / prev:10.2f}"
        print(f"{n:>8} {best:>9.3f} {mean:>9.3f} {ratio}")
        prev = best


if __name__ == "__main__":
    main()
