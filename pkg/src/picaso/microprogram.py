"""Control-word programs for the PiCaSO PE-block.

Every builder returns an immutable :class:`Microprogram` whose length is its
cycle count.  The emitted schedules are legal under the Full-Pipe hazard
distance, so they run unchanged on any pipeline configuration.

Cycle semantics of one control word (see :mod:`picaso.datapath`):

1. ``rd_addr_a``/``rd_addr_b`` latch register-file rows into the A/B read
   registers, which hold their value until the next read on that port;
2. ``wr_en`` writes the ALU output register (the previous result) to
   ``wr_addr``;
3. the OpMux routes A/B/network to X/Y, the op-encoder (or the per-lane
   latched op when ``encoder is None``) picks an op, and with ``alu_en`` the
   FA/S result and carry are registered.

The register file is dual-ported: two reads, or one read and one write.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

from .datapath import (
    RF_DEPTH, AddressOverflow, AluOp, EncoderConf, OpMuxConf, PairFold, PortConflict,
)

__all__ = [
    "ControlWord", "NOP", "Microprogram", "PipelineConfig",
    "HazardViolation", "UnschedulableHazard", "OverlapError", "InvalidQ",
    "prog_addsub", "prog_mult_booth", "prog_accumulate_row", "schedule_for",
    "find_hazard", "concat", "network_jumps",
    "addsub_cycles", "mult_cycles", "accumulate_cycles", "benchmark_accumulate_cycles",
]


class HazardViolation(RuntimeError):
    def __init__(self, cycle: int, row: int, written: int, distance: int):
        self.cycle = cycle
        self.row = row
        self.written = written
        super().__init__(
            f"cycle {cycle}: read of row {row} written at cycle {written} "
            f"(needs more than {distance} cycles in between)"
        )


class UnschedulableHazard(RuntimeError):
    pass


class OverlapError(ValueError):
    pass


class InvalidQ(ValueError):
    pass


class PipelineConfig(enum.Enum):
    SINGLE_CYCLE = "single-cycle"
    RF_PIPE = "rf-pipe"
    OP_PIPE = "op-pipe"
    FULL_PIPE = "full-pipe"

    @property
    def hazard_distance(self) -> int:
        """A row written at cycle ``t`` may be read again from ``t + d + 1`` on."""
        return {"single-cycle": 0, "rf-pipe": 1, "op-pipe": 1, "full-pipe": 3}[self.value]

    @classmethod
    def parse(cls, text: str) -> PipelineConfig:
        text = text.strip().lower().replace("_", "-")
        for p in cls:
            if p.value == text:
                return p
        raise ValueError(f"unknown pipeline config {text!r}")


@dataclass(frozen=True, slots=True)
class ControlWord:
    rd_addr_a: int | None = None
    rd_addr_b: int | None = None
    wr_addr: int | None = None
    wr_en: bool = False
    opmux: OpMuxConf | PairFold = OpMuxConf.A_OP_B
    encoder: EncoderConf | None = EncoderConf.ADD
    alu_en: bool = False
    op_latch_en: bool = False
    carry_seed_en: bool = False
    net_level: int | None = None
    comment: str = ""

    def __post_init__(self):
        if self.wr_en and self.wr_addr is None:
            raise ValueError("wr_en set without wr_addr")
        for addr in (self.rd_addr_a, self.rd_addr_b, self.wr_addr):
            if addr is not None and not 0 <= addr < RF_DEPTH:
                raise AddressOverflow(f"address {addr} outside [0, {RF_DEPTH})")
        if self.ports_used > 2:
            raise PortConflict(f"{self.ports_used} register-file accesses in one cycle")
        if self.op_latch_en and self.encoder is None:
            raise ValueError("op latch needs an encoder configuration")
        if self.net_level is not None and self.net_level < 0:
            raise ValueError("net_level must be non-negative")

    @property
    def reads(self) -> tuple[int, ...]:
        return tuple(a for a in (self.rd_addr_a, self.rd_addr_b) if a is not None)

    @property
    def ports_used(self) -> int:
        return len(self.reads) + int(self.wr_en)

    @property
    def is_nop(self) -> bool:
        return not (self.reads or self.wr_en or self.alu_en or self.op_latch_en or self.carry_seed_en)

    def asm(self) -> str:
        def addr(a):
            return "---" if a is None else f"{a:03x}"

        flags = "".join([
            "W" if self.wr_en else ".",
            "A" if self.alu_en else ".",
            "L" if self.op_latch_en else ".",
            "S" if self.carry_seed_en else ".",
        ])
        net = "--" if self.net_level is None else f"N{self.net_level}"
        enc = "LATCH" if self.encoder is None else self.encoder.mnemonic
        mux = self.opmux.name
        wr = addr(self.wr_addr) if self.wr_en else "---"
        return (f"{addr(self.rd_addr_a)} {addr(self.rd_addr_b)} {wr} | "
                f"{mux:<9} {enc:<5} | {flags} {net} | {self.comment}")


NOP = ControlWord(comment="nop")


@dataclass(frozen=True)
class Microprogram:
    words: tuple[ControlWord, ...]
    declared_cycles: int
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "words", tuple(self.words))
        if len(self.words) != self.declared_cycles:
            raise ValueError(
                f"program has {len(self.words)} words but declares {self.declared_cycles} cycles")

    def __len__(self):
        return len(self.words)

    def __iter__(self):
        return iter(self.words)

    @property
    def kind(self) -> str:
        return self.meta.get("kind", "program")

    def dump(self) -> str:
        """Text listing, one control word per line."""
        head = " ".join(f"{k}={v}" for k, v in self.meta.items())
        lines = [f"; {head}", f"; cycles={self.declared_cycles}",
                 ";  cycle | rdA rdB wr  | opmux     enc   | flags    | comment"]
        lines += [f"{i:7d} | {w.asm()}" for i, w in enumerate(self.words)]
        return "\n".join(lines) + "\n"


def _program(words: list[ControlWord], **meta) -> Microprogram:
    return Microprogram(tuple(words), len(words), meta)


def concat(*progs: Microprogram) -> Microprogram:
    words = [w for p in progs for w in p.words]
    return _program(words, kind="+".join(p.kind for p in progs))


# ---------------------------------------------------------------------------
# cycle formulas

def addsub_cycles(n: int) -> int:
    return 2 * n


def mult_cycles(n: int) -> int:
    return 2 * n * n + 2 * n


def network_jumps(q: int) -> int:
    """Return J = log2(q / 16) or raise InvalidQ."""
    if q < 16 or q % 16 or (q // 16) & (q // 16 - 1):
        raise InvalidQ(f"q must be 16*2^k, got {q}")
    return (q // 16).bit_length() - 1


def accumulate_cycles(n: int, q: int) -> int:
    """15 + q/16 + 4N + (N+4)J with J = log2(q/16)."""
    jumps = network_jumps(q)
    return 15 + q // 16 + 4 * n + (n + 4) * jumps


def benchmark_accumulate_cycles(n: int, q: int) -> int:
    """NEWS-network accumulation of the benchmark overlay: (q - 1 + 2 log2 q) N."""
    if q < 2 or q & (q - 1):
        raise InvalidQ(f"q must be a power of two, got {q}")
    return (q - 1 + 2 * int(math.log2(q))) * n


# ---------------------------------------------------------------------------
# builders

def _check_range(name: str, base: int, width: int):
    if width < 1:
        raise ValueError(f"{name}: width must be positive")
    if base < 0 or base + width > RF_DEPTH:
        raise AddressOverflow(f"{name}: rows [{base}, {base + width}) outside [0, {RF_DEPTH})")


def _overlaps(a: int, wa: int, b: int, wb: int) -> bool:
    return a < b + wb and b < a + wa


def prog_addsub(dst: int, src_a: int, src_b: int, n: int, op: AluOp = AluOp.ADD,
                *, a_width: int | None = None, b_width: int | None = None) -> Microprogram:
    """n-bit two's complement ``dst = src_a (+|-) src_b`` in 2n cycles.

    Each bit takes a read cycle (both operands) and a write cycle.  Operands
    narrower than ``n`` (``a_width``/``b_width``) are sign-extended by
    re-reading their top row.
    """
    op = AluOp(op)
    if op not in (AluOp.ADD, AluOp.SUB):
        raise ValueError("prog_addsub supports ADD and SUB only")
    a_width = a_width or n
    b_width = b_width or n
    _check_range("dst", dst, n)
    _check_range("src_a", src_a, a_width)
    _check_range("src_b", src_b, b_width)
    for name, base, w in (("src_a", src_a, a_width), ("src_b", src_b, b_width)):
        if base != dst and _overlaps(dst, n, base, w):
            raise OverlapError(f"dst overlaps {name} with a different alignment")
    enc = EncoderConf.SUB if op is AluOp.SUB else EncoderConf.ADD
    words = []
    for k in range(n):
        words.append(ControlWord(
            rd_addr_a=src_a + min(k, a_width - 1), rd_addr_b=src_b + min(k, b_width - 1),
            opmux=OpMuxConf.A_OP_B, encoder=enc, alu_en=True, carry_seed_en=(k == 0),
            comment=f"{op.name.lower()} bit {k}"))
        words.append(ControlWord(wr_addr=dst + k, wr_en=True, encoder=enc,
                                 comment=f"write bit {k}"))
    prog = _program(words, kind=op.name.lower(), n=n, dst=dst, src_a=src_a, src_b=src_b)
    return _full_pipe(prog)


def prog_mult_booth(dst: int, multiplicand: int, multiplier: int, n: int) -> Microprogram:
    """Signed n x n -> 2n-bit Booth radix-2 multiply in 2N^2 + 2N cycles.

    Iteration ``i`` recodes multiplier bits (y_i, y_{i-1}) into a per-lane
    op (+M, -M or NOP), then adds into the (n+1)-bit window ``dst[i : i+n+1]``
    of the running product.  Bits below ``i`` are final by then, so the
    product never has to be shifted.  Iteration 0 uses ``ZERO_OP_B`` both
    for the implicit y_{-1} = 0 and for the initially empty product.

    Per iteration: 1 recode cycle, n (read, write) pairs for window bits
    0..n-1, one cycle that writes bit n-1 while computing the sign bit n from
    the still-latched operands, and the write of bit n: 2n + 2 cycles.
    """
    if n < 2:
        raise ValueError("multiplication needs n >= 2")
    _check_range("dst", dst, 2 * n)
    _check_range("multiplicand", multiplicand, n)
    _check_range("multiplier", multiplier, n)
    for name, base in (("multiplicand", multiplicand), ("multiplier", multiplier)):
        if _overlaps(dst, 2 * n, base, n):
            raise OverlapError(f"dst overlaps {name}")

    words = []
    for i in range(n):
        first = i == 0
        mux = OpMuxConf.ZERO_OP_B if first else OpMuxConf.A_OP_B
        words.append(ControlWord(
            rd_addr_a=None if first else multiplier + i - 1, rd_addr_b=multiplier + i,
            opmux=mux, encoder=EncoderConf.BOOTH, op_latch_en=True,
            comment=f"iter {i}: booth recode y{i},y{i - 1}"))
        for k in range(n):
            words.append(ControlWord(
                rd_addr_a=None if first else dst + i + k, rd_addr_b=multiplicand + k,
                opmux=mux, encoder=None, alu_en=True, carry_seed_en=(k == 0),
                comment=f"iter {i}: bit {i + k}"))
            if k < n - 1:
                words.append(ControlWord(wr_addr=dst + i + k, wr_en=True, encoder=None,
                                         comment=f"iter {i}: write {i + k}"))
        words.append(ControlWord(
            wr_addr=dst + i + n - 1, wr_en=True, opmux=mux, encoder=None, alu_en=True,
            comment=f"iter {i}: write {i + n - 1}, sign bit {i + n}"))
        words.append(ControlWord(wr_addr=dst + i + n, wr_en=True, encoder=None,
                                 comment=f"iter {i}: write {i + n}"))
    prog = _program(words, kind="mult", n=n, dst=dst, multiplicand=multiplicand,
                    multiplier=multiplier)
    return _full_pipe(prog)


_FOLD_SEQ = (OpMuxConf.A_FOLD_1, OpMuxConf.A_FOLD_2, OpMuxConf.A_FOLD_3, OpMuxConf.A_FOLD_4)


def prog_accumulate_row(base: int, n: int, q: int) -> Microprogram:
    """Sum ``q`` per-PE n-bit operands of a block row into block 0, PE 0.

    Four in-place fold adds reduce each block into its PE 0, then
    ``J = log2(q/16)`` network jumps add block results pairwise.  Every
    stage widens the result by one bit, ending at ``n + log2(q)`` bits in
    rows ``[base, base + n + log2 q)``.

    Stages stream at one cycle per bit: a fold reads one row (both ALU
    operands come from it via the OpMux), and the write port retires the
    previous bit in the same cycle.  The top bit of each stage is computed
    from the still-latched sign row without a read.

    Cycle budget ``15 + q/16 + 4N + (N+4)J``: the folds take 4N + 10
    cycles, the jumps (N+4)J plus J(J+1)/2 for their widening bits, one
    cycle drains the last write, and the rest of the budget is spent as
    pipeline-fill / block-dispatch bubbles at the start of the program.
    """
    jumps = network_jumps(q)
    width_out = n + 4 + jumps
    _check_range("accumulator", base, width_out)

    stages = [(mux, None) for mux in _FOLD_SEQ]
    stages += [(OpMuxConf.A_OP_NET, level) for level in range(jumps)]

    body = []
    pending = None  # row whose result is still in the ALU output register
    width = n
    for s, (mux, level) in enumerate(stages):
        tag = f"fold {s + 1}" if level is None else f"jump L{level}"
        for k in range(width + 1):
            wr = pending
            body.append(ControlWord(
                rd_addr_a=base + k if k < width else None,
                wr_addr=wr, wr_en=wr is not None,
                opmux=mux, encoder=EncoderConf.ADD, alu_en=True, carry_seed_en=(k == 0),
                net_level=level,
                comment=f"{tag}: bit {k}" + (" (sign)" if k == width else "")))
            pending = base + k
        width += 1
    body.append(ControlWord(wr_addr=pending, wr_en=True, comment="drain"))
    # narrow operands stall between stages; stalls come out of the bubble budget
    body = list(schedule_for(PipelineConfig.FULL_PIPE, words_from(body)).words)

    bubbles = max(0, accumulate_cycles(n, q) - len(body))
    words = [replace(NOP, comment="fill") for _ in range(bubbles)] + body
    prog = _program(words, kind="accumulate", n=n, q=q, base=base, width=width_out,
                    jumps=jumps, stream_excess=jumps * (jumps + 1) // 2)
    return _full_pipe(prog)


# ---------------------------------------------------------------------------
# hazards and scheduling

def find_hazard(words: Iterable[ControlWord], hazard_distance: int,
                last_write: dict[int, int] | None = None, start: int = 0):
    """Return the first :class:`HazardViolation` in ``words`` or ``None``.

    ``last_write`` maps row -> absolute cycle of its latest write before
    ``start`` and is updated in place.
    """
    last_write = {} if last_write is None else last_write
    for t, w in enumerate(words, start):
        for r in w.reads:
            tw = last_write.get(r)
            if tw is not None and 1 <= t - tw <= hazard_distance:
                return HazardViolation(t, r, tw, hazard_distance)
        if w.wr_en:
            last_write[w.wr_addr] = t
    return None


def schedule_for(pipe: PipelineConfig, prog: Microprogram, *,
                 max_stalls: int | None = None) -> Microprogram:
    """Make ``prog`` hazard-free for ``pipe`` by inserting stall words.

    Stalls change no state, so results are unaffected.  For Single-Cycle,
    pure bubble words are dropped as well (they only model pipeline fill).
    """
    hd = pipe.hazard_distance
    src = prog.words
    if hd == 0:
        src = tuple(w for w in src if not w.is_nop)
    out: list[ControlWord] = []
    last_write: dict[int, int] = {}
    stalls = 0
    for w in src:
        t = len(out)
        need = 0
        for r in w.reads:
            tw = last_write.get(r)
            if tw is not None and t - tw <= hd:
                need = max(need, hd + 1 - (t - tw))
        if need:
            stalls += need
            if max_stalls is not None and stalls > max_stalls:
                raise UnschedulableHazard(
                    f"{prog.kind}: more than {max_stalls} stall cycles needed for {pipe.value}")
            out.extend(replace(NOP, comment="stall") for _ in range(need))
        if w.wr_en:
            last_write[w.wr_addr] = len(out)
        out.append(w)
    if len(out) == len(prog.words) and all(a is b for a, b in zip(out, prog.words)):
        return prog
    return Microprogram(tuple(out), len(out), dict(prog.meta, pipe=pipe.value, stalls=stalls))


def _full_pipe(prog: Microprogram) -> Microprogram:
    """Builders emit Full-Pipe schedules; very narrow operands may need stalls."""
    return schedule_for(PipelineConfig.FULL_PIPE, prog)


def formula_cycles(prog: Microprogram) -> int | None:
    """Cycle count the closed-form model predicts for a builder program."""
    kind, m = prog.kind, prog.meta
    if kind in ("add", "sub"):
        return addsub_cycles(m["n"])
    if kind == "mult":
        return mult_cycles(m["n"])
    if kind == "accumulate":
        return accumulate_cycles(m["n"], m["q"])
    return None


def build(op: str, n: int, q: int = 16, base: int = 0) -> Microprogram:
    """Convenience front end used by the CLI ``assemble`` command.

    Operands are laid out back to back from ``base``.
    """
    op = op.lower()
    if op in ("add", "sub"):
        return prog_addsub(base + 2 * n, base, base + n, n, AluOp.parse(op))
    if op == "mult":
        return prog_mult_booth(base + 2 * n, base, base + n, n)
    if op in ("accum", "accumulate"):
        return prog_accumulate_row(base, n, q)
    raise ValueError(f"unknown operation {op!r}")


def words_from(seq: Sequence[ControlWord], **meta) -> Microprogram:
    return _program(list(seq), **meta)
