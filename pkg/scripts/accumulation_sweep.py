"""Simulated vs closed-form accumulation cycles over a grid of widths and q,
with random data checked against the host sum.

    python scripts/accumulation_sweep.py
"""

import numpy as np

from picaso.machine import OperandLayout, PimArray
from picaso.microprogram import accumulate_cycles, prog_accumulate_row


def main():
    rng = np.random.default_rng(0)
    print(f"{'n':>3} {'q':>5} {'sim':>6} {'formula':>8} {'exact':>6}")
    for n in (4, 8, 16, 32):
        for q in (16, 32, 64, 128, 256):
            cols = q // 16
            vals = rng.integers(-(1 << (n - 1)), 1 << (n - 1), size=(32, cols, 16))
            arr = PimArray(32, cols)
            arr.load_all(vals, OperandLayout(0, n))
            prog = prog_accumulate_row(0, n, q)
            cycles = arr.run(prog)
            sums = arr.read_all(OperandLayout(0, prog.meta["width"]))[:, 0, 0]
            exact = np.array_equal(sums, vals.reshape(32, -1).sum(axis=1))
            print(f"{n:3d} {q:5d} {cycles:6d} {accumulate_cycles(n, q):8d} {str(exact):>6}")


if __name__ == "__main__":
    main()
