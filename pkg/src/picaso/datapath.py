"""Bit-level semantics of one PE-block.

A PE-block is 16 bit-serial PEs sharing one 1024x16 BRAM register file.
Row ``r`` of the register file is stored as a ``uint16`` word whose bit ``i``
belongs to PE lane ``i``, so a whole block row is processed with a handful of
bitwise operations.  Every array in :class:`PeBlockState` may carry leading
batch dimensions (one entry per block); the machine steps its whole grid with
a single call per cycle.

The scalar helpers (:func:`alu_step`, :func:`encode_op`, :func:`opmux_select`)
spell out the truth tables one bit/word at a time.  The ``*_words`` variants
are the lane-parallel versions the simulator actually executes; the test
suite checks the two against each other exhaustively.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, fields, replace
from typing import TYPE_CHECKING

import numpy as np

if TYPE_CHECKING:
    from .microprogram import ControlWord

BLOCK_WIDTH = 16
RF_DEPTH = 1024
LANE_MASK = (1 << BLOCK_WIDTH) - 1

__all__ = [
    "BLOCK_WIDTH", "RF_DEPTH", "LANE_MASK",
    "AluOp", "EncoderConf", "OpMuxConf", "PairFold",
    "PeBlockState", "PortConflict", "AddressOverflow",
    "alu_step", "encode_op", "opmux_select",
    "alu_words", "encode_planes", "opmux_words",
    "read_stage", "execute_stage", "block_cycle",
]


class PortConflict(ValueError):
    """A control word needs more than the two register-file ports."""


class AddressOverflow(ValueError):
    """A register-file address or range falls outside ``[0, RF_DEPTH)``."""


class AluOp(enum.IntEnum):
    """Full adder/subtractor op-codes.

    The integer values coincide with the direct-mode op-encoder configs
    (000 ADD, 001 CPX, 010 CPY, 011 SUB), which lets a per-lane op be
    stored as two bit-planes.
    """

    ADD = 0
    CPX = 1
    CPY = 2
    SUB = 3

    @classmethod
    def parse(cls, text: str) -> AluOp:
        return cls[text.strip().upper()]


@dataclass(frozen=True)
class EncoderConf:
    """3-bit op-encoder configuration.

    ``0xx`` selects a fixed op for every lane; ``1xx`` is Booth radix-2 mode,
    where each lane picks its op from the (Y, X) operand bits.  The low two
    bits are ignored in Booth mode.
    """

    code: int

    def __post_init__(self):
        if not 0 <= self.code <= 0b111:
            raise ValueError(f"encoder conf must be a 3-bit value, got {self.code}")

    @property
    def booth(self) -> bool:
        return bool(self.code & 0b100)

    @property
    def canonical(self) -> int:
        return 0b100 if self.booth else self.code

    @property
    def mnemonic(self) -> str:
        return "BOOTH" if self.booth else AluOp(self.code).name

    def __str__(self):
        return self.mnemonic


EncoderConf.ADD = EncoderConf(0b000)
EncoderConf.CPX = EncoderConf(0b001)
EncoderConf.CPY = EncoderConf(0b010)
EncoderConf.SUB = EncoderConf(0b011)
EncoderConf.BOOTH = EncoderConf(0b100)


class OpMuxConf(enum.IntEnum):
    A_OP_B = 0
    A_FOLD_1 = 1
    A_FOLD_2 = 2
    A_FOLD_3 = 3
    A_FOLD_4 = 4
    A_OP_NET = 5
    ZERO_OP_B = 6


class PairFold(enum.IntEnum):
    """Neighbour-pairing fold patterns (lane ``i`` meets lane ``i + stride``).

    Not part of the standard OpMux table; the machine rejects these unless
    it is built with ``allow_pair_fold=True``.
    """

    PAIR_1 = 1
    PAIR_2 = 2
    PAIR_3 = 3
    PAIR_4 = 4

    @property
    def stride(self) -> int:
        return 1 << (self.value - 1)

    @property
    def mask(self) -> int:
        # receiving lanes: i % (2 * stride) == 0
        return sum(1 << i for i in range(0, BLOCK_WIDTH, 2 * self.stride))


# OpMux fold: (shift, mask of receiving lanes)
_FOLDS = {
    OpMuxConf.A_FOLD_1: (8, 0x00FF),
    OpMuxConf.A_FOLD_2: (4, 0x000F),
    OpMuxConf.A_FOLD_3: (2, 0x0003),
    OpMuxConf.A_FOLD_4: (1, 0x0001),
}


# ---------------------------------------------------------------------------
# scalar reference semantics

def alu_step(x: int, y: int, carry_in: int, op: AluOp) -> tuple[int, int]:
    """One bit of the FA/S unit; returns ``(sum, carry_out)``.

    SUB is a full adder on the inverted Y operand; the caller seeds the
    carry with 1 at the start of a word.  CPX/CPY pass the carry through.
    """
    op = AluOp(op)
    if op is AluOp.CPX:
        return x, carry_in
    if op is AluOp.CPY:
        return y, carry_in
    if op is AluOp.SUB:
        y ^= 1
    s = x ^ y ^ carry_in
    c = (x & y) | (carry_in & (x ^ y))
    return s, c


def encode_op(conf: EncoderConf, y_bit: int, x_bit: int) -> AluOp:
    if not conf.booth:
        return AluOp(conf.code)
    return {
        (0, 0): AluOp.CPX,
        (0, 1): AluOp.ADD,
        (1, 0): AluOp.SUB,
        (1, 1): AluOp.CPX,
    }[(y_bit, x_bit)]


def opmux_select(conf, a: int, b: int, net: int = 0) -> tuple[int, int]:
    """Route register-file words ``a``/``b`` (and the network bit) to X/Y."""
    a &= LANE_MASK
    b &= LANE_MASK
    if isinstance(conf, PairFold):
        return a, (a >> conf.stride) & conf.mask
    conf = OpMuxConf(conf)
    if conf is OpMuxConf.A_OP_B:
        return a, b
    if conf is OpMuxConf.ZERO_OP_B:
        return 0, b
    if conf is OpMuxConf.A_OP_NET:
        return a, net & 1
    shift, mask = _FOLDS[conf]
    return a, (a >> shift) & mask


# ---------------------------------------------------------------------------
# lane-parallel semantics on uint16 words

def opmux_words(conf, a, b, net):
    a = np.asarray(a, dtype=np.uint16)
    if isinstance(conf, PairFold):
        return a, (a >> conf.stride) & np.uint16(conf.mask)
    if conf == OpMuxConf.A_OP_B:
        return a, np.asarray(b, dtype=np.uint16)
    if conf == OpMuxConf.ZERO_OP_B:
        return np.zeros_like(a), np.asarray(b, dtype=np.uint16)
    if conf == OpMuxConf.A_OP_NET:
        return a, np.asarray(net, dtype=np.uint16) & np.uint16(1)
    shift, mask = _FOLDS[OpMuxConf(conf)]
    return a, (a >> shift) & np.uint16(mask)


def encode_planes(conf: EncoderConf, x, y):
    """Per-lane op-codes as two bit-planes ``(bit0, bit1)``."""
    x = np.asarray(x, dtype=np.uint16)
    if not conf.booth:
        ones = np.full_like(x, LANE_MASK)
        zeros = np.zeros_like(x)
        return (ones if conf.code & 1 else zeros), (ones if conf.code & 2 else zeros)
    y = np.asarray(y, dtype=np.uint16)
    # YX=01 -> ADD(00), YX=10 -> SUB(11), YX in {00,11} -> CPX(01)
    b1 = y & ~x
    b0 = y | ~x
    return b0, b1


def alu_words(x, y, carry, b0, b1):
    is_cpx = b0 & ~b1
    is_cpy = b1 & ~b0
    is_arith = ~(is_cpx | is_cpy)
    y_eff = y ^ (b0 & b1)
    t = x ^ y_eff
    fa_sum = t ^ carry
    fa_carry = (x & y_eff) | (carry & t)
    s = (fa_sum & is_arith) | (x & is_cpx) | (y & is_cpy)
    c = (fa_carry & is_arith) | (carry & ~is_arith)
    return s, c


# ---------------------------------------------------------------------------
# block state

@dataclass
class PeBlockState:
    """Architectural state of one PE-block (or a grid of them).

    ``op_b0``/``op_b1`` hold the latched per-lane :class:`AluOp` as bit-planes.
    ``reg_a``/``reg_b`` are the register-file read latches, ``reg_s`` the ALU
    output register written back on ``wr_en``.
    """

    rf: np.ndarray
    carry: np.ndarray
    op_b0: np.ndarray
    op_b1: np.ndarray
    reg_a: np.ndarray
    reg_b: np.ndarray
    reg_s: np.ndarray
    net_in: np.ndarray
    net_out: np.ndarray

    @classmethod
    def empty(cls, shape: tuple[int, ...] = ()) -> PeBlockState:
        z = lambda: np.zeros(shape, dtype=np.uint16)  # noqa: E731
        return cls(
            rf=np.zeros(shape + (RF_DEPTH,), dtype=np.uint16),
            carry=z(), op_b0=z(), op_b1=z(),
            reg_a=z(), reg_b=z(), reg_s=z(),
            net_in=z(), net_out=z(),
        )

    @property
    def shape(self) -> tuple[int, ...]:
        return self.carry.shape

    def copy(self) -> PeBlockState:
        return replace(self, **{f.name: getattr(self, f.name).copy() for f in fields(self)})

    def latched_ops(self, index: tuple[int, ...] = ()) -> list[AluOp]:
        b0 = int(self.op_b0[index])
        b1 = int(self.op_b1[index])
        return [AluOp(((b1 >> i) & 1) << 1 | ((b0 >> i) & 1)) for i in range(BLOCK_WIDTH)]

    def set_row(self, row: int, word: int):
        _check_addr(row)
        self.rf[..., row] = word

    def equals(self, other: PeBlockState) -> bool:
        return all(np.array_equal(getattr(self, f.name), getattr(other, f.name)) for f in fields(self))


def _check_addr(addr: int):
    if not 0 <= addr < RF_DEPTH:
        raise AddressOverflow(f"register-file address {addr} outside [0, {RF_DEPTH})")


def read_stage(state: PeBlockState, cw: ControlWord):
    """Latch the addressed register-file rows into the read registers (in place)."""
    if cw.rd_addr_a is not None:
        _check_addr(cw.rd_addr_a)
        state.reg_a = state.rf[..., cw.rd_addr_a].copy()
    if cw.rd_addr_b is not None:
        _check_addr(cw.rd_addr_b)
        state.reg_b = state.rf[..., cw.rd_addr_b].copy()
    state.net_out = state.reg_a & np.uint16(1)


def execute_stage(state: PeBlockState, cw: ControlWord):
    """Write-back, op selection and ALU evaluation (in place).

    The write port stores the ALU output register *before* this cycle's ALU
    result replaces it, so one word can retire bit ``k`` while computing bit
    ``k + 1``.
    """
    if cw.wr_en:
        _check_addr(cw.wr_addr)
        state.rf[..., cw.wr_addr] = state.reg_s

    x, y = opmux_words(cw.opmux, state.reg_a, state.reg_b, state.net_in)

    if cw.encoder is None:
        b0, b1 = state.op_b0, state.op_b1
    else:
        b0, b1 = encode_planes(cw.encoder, x, y)
    if cw.op_latch_en:
        state.op_b0, state.op_b1 = b0.copy(), b1.copy()

    if cw.carry_seed_en:
        state.carry = b0 & b1  # 1 on SUB lanes
    if cw.alu_en:
        state.reg_s, state.carry = alu_words(x, y, state.carry, b0, b1)


def block_cycle(state: PeBlockState, cw: ControlWord) -> PeBlockState:
    """Advance a block by one clock and return the new state.

    ``state.net_in`` is taken as the bit delivered by the network this cycle.
    The input state is left untouched.
    """
    nxt = state.copy()
    read_stage(nxt, cw)
    execute_stage(nxt, cw)
    return nxt
