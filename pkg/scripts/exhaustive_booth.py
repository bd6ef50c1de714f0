"""Exhaustive signed n x n Booth multiplication on the simulator.

    python scripts/exhaustive_booth.py --n 8
"""

import argparse
import time

import numpy as np

from picaso.machine import OperandLayout, PimArray
from picaso.microprogram import PipelineConfig, prog_mult_booth, schedule_for


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, default=8)
    ap.add_argument("--pipe", default="full-pipe")
    args = ap.parse_args()
    n = args.n
    if not 2 <= n <= 10:
        ap.error("n must be in 2..10 for an exhaustive sweep")
    pipe = PipelineConfig.parse(args.pipe)

    vals = np.arange(-(1 << (n - 1)), 1 << (n - 1), dtype=np.int64)
    a, b = (x.ravel() for x in np.meshgrid(vals, vals, indexing="ij"))
    pad = -a.size % 16
    a, b = np.pad(a, (0, pad)), np.pad(b, (0, pad))
    a, b = a.reshape(-1, 1, 16), b.reshape(-1, 1, 16)

    t0 = time.perf_counter()
    arr = PimArray(a.shape[0], 1, pipe)
    arr.load_all(a, OperandLayout(0, n)).load_all(b, OperandLayout(n, n))
    prog = schedule_for(pipe, prog_mult_booth(2 * n, 0, n, n))
    cycles = arr.run(prog)
    got = arr.read_all(OperandLayout(2 * n, 2 * n))
    dt = time.perf_counter() - t0

    wrong = int((got != a * b).sum())
    print(f"n={n} pipe={pipe.value} pairs={vals.size ** 2} cycles={cycles} "
          f"wrong={wrong} time={dt:.3f}s")
    raise SystemExit(1 if wrong else 0)


if __name__ == "__main__":
    main()
