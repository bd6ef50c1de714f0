"""MAC and GEMV workloads driven through the simulator, with host oracles."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .datapath import BLOCK_WIDTH, AluOp
from .machine import OperandLayout, PimArray
from .microprogram import (
    PipelineConfig, network_jumps, accumulate_cycles, mult_cycles, prog_accumulate_row,
    prog_addsub, prog_mult_booth,
)


@dataclass
class MacResult:
    a: np.ndarray               # (vectors, q)
    b: np.ndarray
    products: np.ndarray        # simulated per-lane products
    sums: np.ndarray            # simulated block 0 / PE 0 result per vector
    expected: np.ndarray        # host sum(a * b)
    mult_cycles: int
    accum_cycles: int
    accum_width: int
    array: PimArray

    @property
    def match(self) -> bool:
        return (np.array_equal(self.sums, self.expected)
                and np.array_equal(self.products, self.a * self.b))


def random_operands(rng: np.random.Generator, n: int, shape) -> np.ndarray:
    return rng.integers(-(1 << (n - 1)), 1 << (n - 1), size=shape, dtype=np.int64)


def mac_rows(a, b, n: int, pipe: PipelineConfig = PipelineConfig.FULL_PIPE) -> MacResult:
    """Dot products of the rows of ``a`` and ``b`` (shape ``(vectors, q)``).

    Each vector occupies one block row of q/16 blocks; every lane multiplies
    its (a, b) pair, then the row is accumulated into block 0, PE 0.  The
    accumulation runs at the full 2n-bit product width.

    Layout: a at rows [0, n), b at [n, 2n), products and the widened sum
    from row 2n.
    """
    a = np.asarray(a, dtype=np.int64)
    b = np.asarray(b, dtype=np.int64)
    if a.shape != b.shape or a.ndim != 2:
        raise ValueError("a and b must be equal-shape 2-D arrays")
    vectors, q = a.shape
    jumps = network_jumps(q)
    cols = q // BLOCK_WIDTH
    pw = 2 * n

    arr = PimArray(vectors, cols, pipe)
    arr.load_all(a.reshape(vectors, cols, BLOCK_WIDTH), OperandLayout(0, n))
    arr.load_all(b.reshape(vectors, cols, BLOCK_WIDTH), OperandLayout(n, n))

    mult = prog_mult_booth(pw, 0, n, n)
    acc = prog_accumulate_row(pw, pw, q)
    mc = arr.run(mult)
    products = arr.read_all(OperandLayout(pw, pw)).reshape(vectors, q)
    ac = arr.run(acc)
    width = pw + 4 + jumps
    sums = arr.read_all(OperandLayout(pw, width))[:, 0, 0]
    return MacResult(a, b, products, sums, (a * b).sum(axis=1), mc, ac, width, arr)


def run_mac(n: int, q: int, seed: int, vectors: int = 1) -> MacResult:
    rng = np.random.default_rng(seed)
    a = random_operands(rng, n, (vectors, q))
    b = random_operands(rng, n, (vectors, q))
    return mac_rows(a, b, n)


@dataclass
class GemvResult:
    matrix: np.ndarray
    vector: np.ndarray
    result: np.ndarray
    expected: np.ndarray
    cycles: int
    acc_width: int
    array: PimArray

    @property
    def match(self) -> bool:
        return np.array_equal(self.result, self.expected)


def run_gemv(matrix, vector, n: int) -> GemvResult:
    """``matrix @ vector`` with one matrix row per PE lane.

    Column k of the matrix sits at rows [k n, (k+1) n) of every lane, the
    vector element x_k is replicated to all lanes next to it; each step
    multiplies into a 2n-bit product and adds it into a running accumulator
    of 2n + ceil(log2 K) bits.
    """
    w = np.asarray(matrix, dtype=np.int64)
    x = np.asarray(vector, dtype=np.int64)
    m, k = w.shape
    if x.shape != (k,):
        raise ValueError("vector length must match the matrix column count")
    blocks = math.ceil(m / BLOCK_WIDTH)
    lanes = blocks * BLOCK_WIDTH
    pw = 2 * n
    aw = pw + max(1, math.ceil(math.log2(k))) if k > 1 else pw
    x_base = k * n
    prod = x_base + k * n
    acc = prod + pw
    arr = PimArray(1, blocks)
    OperandLayout(acc, aw)  # range check

    padded = np.zeros((lanes, k), dtype=np.int64)
    padded[:m] = w
    for j in range(k):
        arr.load_all(padded[:, j].reshape(1, blocks, BLOCK_WIDTH), OperandLayout(j * n, n))
        arr.load_all(np.full((1, blocks, BLOCK_WIDTH), x[j]), OperandLayout(x_base + j * n, n))

    cycles = 0
    for j in range(k):
        cycles += arr.run(prog_mult_booth(prod, j * n, x_base + j * n, n))
        cycles += arr.run(prog_addsub(acc, acc, prod, aw, AluOp.ADD, b_width=pw))
    out = arr.read_all(OperandLayout(acc, aw)).reshape(-1)[:m]
    return GemvResult(w, x, out, w @ x, cycles, aw, arr)


def formula_mac_cycles(n: int, q: int) -> tuple[int, int]:
    """Closed-form (mult, accum) cycles for a MAC at the simulated widths."""
    return mult_cycles(n), accumulate_cycles(2 * n, q)
