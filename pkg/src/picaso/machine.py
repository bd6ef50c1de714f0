"""Cycle-level execution of microprograms on a grid of PE-blocks.

All blocks receive the same control word every cycle.  The only
cross-block path is the per-row binary-hopping network, driven by lane 0 of
each block's A read register.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .datapath import (
    BLOCK_WIDTH, RF_DEPTH, AddressOverflow, PairFold, PeBlockState, execute_stage, read_stage,
)
from .microprogram import HazardViolation, Microprogram, PipelineConfig
from .network import net_cycle

__all__ = [
    "OperandLayout", "PimArray", "ValueOverflow",
    "load_corner_turned", "read_value", "run",
]

_NEVER = -(1 << 40)


class ValueOverflow(ValueError):
    pass


@dataclass(frozen=True)
class OperandLayout:
    base: int
    width: int
    signed: bool = True

    def __post_init__(self):
        if self.width < 1:
            raise ValueError("operand width must be positive")
        if self.base < 0 or self.base + self.width > RF_DEPTH:
            raise AddressOverflow(
                f"rows [{self.base}, {self.base + self.width}) outside [0, {RF_DEPTH})")

    @property
    def min_value(self) -> int:
        return -(1 << (self.width - 1)) if self.signed else 0

    @property
    def max_value(self) -> int:
        return (1 << (self.width - 1)) - 1 if self.signed else (1 << self.width) - 1

    def check(self, values) -> None:
        v = np.asarray(values, dtype=object)
        if v.size and (v.min() < self.min_value or v.max() > self.max_value):
            kind = "signed" if self.signed else "unsigned"
            raise ValueOverflow(f"value outside {kind} {self.width}-bit range")


class PimArray:
    """``rows x cols`` PE-blocks, each 16 PEs wide."""

    def __init__(self, rows: int = 1, cols: int = 1,
                 pipe: PipelineConfig = PipelineConfig.FULL_PIPE, *,
                 allow_pair_fold: bool = False):
        if rows < 1 or cols < 1:
            raise ValueError("array needs at least one block")
        self.rows = rows
        self.cols = cols
        self.pipe = pipe
        self.allow_pair_fold = allow_pair_fold
        self.state = PeBlockState.empty((rows, cols))
        self.cycle_counter = 0
        self._last_write = np.full(RF_DEPTH, _NEVER, dtype=np.int64)

    @property
    def pes(self) -> int:
        return self.rows * self.cols * BLOCK_WIDTH

    def _block(self, block) -> tuple[int, int]:
        r, c = block
        if not (0 <= r < self.rows and 0 <= c < self.cols):
            raise IndexError(f"block {block} outside a {self.rows}x{self.cols} array")
        return r, c

    # -- data movement ----------------------------------------------------

    def load(self, block, values, layout: OperandLayout) -> PimArray:
        """Corner-turn 16 integers into one block: bit i of value j goes to
        row ``base + i`` of PE column j (LSB at ``base``)."""
        values = [int(v) for v in values]
        if len(values) != BLOCK_WIDTH:
            raise ValueError(f"a block takes {BLOCK_WIDTH} values, got {len(values)}")
        layout.check(values)
        r, c = self._block(block)
        mask = (1 << layout.width) - 1
        for i in range(layout.width):
            word = 0
            for lane, v in enumerate(values):
                word |= (((v & mask) >> i) & 1) << lane
            self.state.rf[r, c, layout.base + i] = word
        return self

    def read(self, block, pe: int, layout: OperandLayout) -> int:
        r, c = self._block(block)
        if not 0 <= pe < BLOCK_WIDTH:
            raise IndexError(f"lane {pe} outside block")
        v = 0
        for i in range(layout.width):
            v |= ((int(self.state.rf[r, c, layout.base + i]) >> pe) & 1) << i
        if layout.signed and v >> (layout.width - 1):
            v -= 1 << layout.width
        return v

    def load_all(self, values, layout: OperandLayout) -> PimArray:
        """Vectorised load of a ``(rows, cols, 16)`` integer array."""
        vals = np.asarray(values, dtype=np.int64)
        if vals.shape != (self.rows, self.cols, BLOCK_WIDTH):
            raise ValueError(f"expected shape {(self.rows, self.cols, BLOCK_WIDTH)}, got {vals.shape}")
        if layout.width > 62:
            raise ValueError("bulk load supports widths up to 62 bits")
        layout.check([vals.min(), vals.max()] if vals.size else [])
        lanes = np.arange(BLOCK_WIDTH, dtype=np.int64)
        for i in range(layout.width):
            bits = (vals >> i) & 1
            self.state.rf[..., layout.base + i] = (bits << lanes).sum(axis=-1).astype(np.uint16)
        return self

    def read_all(self, layout: OperandLayout) -> np.ndarray:
        """Decode every lane of every block: ``(rows, cols, 16)`` int64."""
        if layout.width > 62:
            raise ValueError("bulk read supports widths up to 62 bits")
        rows = self.state.rf[..., layout.base:layout.base + layout.width].astype(np.int64)
        lanes = np.arange(BLOCK_WIDTH, dtype=np.int64)
        bits = (rows[..., :, None] >> lanes) & 1            # (R, C, width, 16)
        weights = np.int64(1) << np.arange(layout.width, dtype=np.int64)
        v = (bits * weights[:, None]).sum(axis=-2)
        if layout.signed:
            top = np.int64(1) << (layout.width - 1)
            v = np.where(v & top, v - (top << 1), v)
        return v

    # -- execution --------------------------------------------------------

    def run(self, prog: Microprogram) -> int:
        """Execute ``prog``; returns the number of cycles executed."""
        hd = self.pipe.hazard_distance
        state = self.state
        lw = self._last_write
        t0 = self.cycle_counter
        for i, cw in enumerate(prog.words):
            t = t0 + i
            for r in cw.reads:
                if 1 <= t - lw[r] <= hd:
                    raise HazardViolation(i, r, int(lw[r]) - t0, hd)
            if isinstance(cw.opmux, PairFold) and not self.allow_pair_fold:
                raise ValueError(f"cycle {i}: pair-fold OpMux patterns are disabled")
            read_stage(state, cw)
            if cw.net_level is not None:
                if self.cols & (self.cols - 1):
                    raise ValueError("network accumulation needs a power-of-two column count")
                state.net_in = net_cycle(state.net_out, cw.net_level)
            else:
                state.net_in = np.zeros_like(state.net_out)
            execute_stage(state, cw)
            if cw.wr_en:
                lw[cw.wr_addr] = t
            # keep the counter exact even if a later word raises
            self.cycle_counter = t + 1
        return len(prog.words)

    # -- snapshots --------------------------------------------------------

    def snapshot(self, rf_rows: tuple[int, int] | None = None) -> dict:
        """JSON-ready state: per-block register-file rows as 4-digit hex."""
        lo, hi = rf_rows or (0, RF_DEPTH)
        s = self.state
        blocks = []
        for r in range(self.rows):
            for c in range(self.cols):
                blocks.append({
                    "row": r,
                    "col": c,
                    "rf": [f"{int(w):04x}" for w in s.rf[r, c, lo:hi]],
                    "carry": f"{int(s.carry[r, c]):04x}",
                    "op": "".join(op.name[0] if op.name != "CPY" else "Y"
                                  for op in s.latched_ops((r, c))),
                    "reg_a": f"{int(s.reg_a[r, c]):04x}",
                    "reg_b": f"{int(s.reg_b[r, c]):04x}",
                    "reg_s": f"{int(s.reg_s[r, c]):04x}",
                })
        return {
            "rows": self.rows,
            "cols": self.cols,
            "pipe": self.pipe.value,
            "cycle": self.cycle_counter,
            "rf_rows": [lo, hi],
            "blocks": blocks,
        }

    def dump_state(self, rf_rows: tuple[int, int] | None = None) -> str:
        return json.dumps(self.snapshot(rf_rows), indent=1, sort_keys=True) + "\n"


# functional spellings of the methods

def load_corner_turned(array: PimArray, block, values, layout: OperandLayout) -> PimArray:
    return array.load(block, values, layout)


def read_value(array: PimArray, block, pe: int, layout: OperandLayout) -> int:
    return array.read(block, pe, layout)


def run(array: PimArray, prog: Microprogram) -> tuple[PimArray, int]:
    return array, array.run(prog)
