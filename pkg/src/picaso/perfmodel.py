"""Analytical latency, throughput, memory-efficiency and scalability models.

Architectures are described by :class:`ArchProfile`; devices by
:class:`DeviceProfile`.  Both catalogs are plain immutable data and can be
overridden from a JSON file with :func:`load_catalog`.

Clock model: every design is referenced to the BRAM maximum frequency of the
device and slowed by its clock overhead, ``f = f_bram / (1 + overhead)``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, fields, replace
from pathlib import Path

from .microprogram import InvalidQ, accumulate_cycles, benchmark_accumulate_cycles

__all__ = [
    "ArchProfile", "DeviceProfile", "ReservationExceedsDepth",
    "ARCHS", "DEVICES", "CUSTOM_ARCHS", "PES_PER_BRAM36",
    "mult_latency", "accum_latency", "accum_step_latency", "elementwise_add_latency",
    "effective_freq", "mac_cycles", "mac_latency_time", "peak_throughput",
    "mem_efficiency", "max_pes", "load_catalog",
]

# two 18Kb halves per 36Kb BRAM, each configured 1024 x 16
PES_PER_BRAM36 = 32


class ReservationExceedsDepth(ValueError):
    pass


@dataclass(frozen=True)
class ArchProfile:
    name: str
    clock_overhead: float
    macs_per_bram: int
    bitline_depth: int
    reserved_wordlines_per_bit: int | None
    mult_formula: str           # "a": N^2+3N-2, "b": 2N^2+2N
    accum_formula: str          # "c", "d", "e" or "benchmark"
    booth_support: str          # "No" | "Partial" | "Yes"
    add_cycles_per_bit: int = 1
    add_cycles_extra: int = 1
    label: str = ""

    def __post_init__(self):
        if self.mult_formula not in ("a", "b"):
            raise ValueError(f"{self.name}: unknown mult formula {self.mult_formula!r}")
        if self.accum_formula not in ("c", "d", "e", "benchmark"):
            raise ValueError(f"{self.name}: unknown accumulation formula {self.accum_formula!r}")
        if self.clock_overhead < 0:
            raise ValueError(f"{self.name}: negative clock overhead")

    @property
    def display(self) -> str:
        return self.label or self.name

    @property
    def booth_halving(self) -> bool:
        """Whether a Booth NOP-skipping estimate applies to the mult term."""
        return self.booth_support == "Yes" and self.mult_formula == "b"


@dataclass(frozen=True)
class DeviceProfile:
    id: str
    part: str
    family: str
    bram_count: int
    lut_bram_ratio: int | None
    base_bram_freq: float       # MHz

    def __post_init__(self):
        if self.bram_count < 0:
            raise ValueError(f"{self.id}: negative BRAM count")
        if self.base_bram_freq <= 0:
            raise ValueError(f"{self.id}: BRAM frequency must be positive")


_custom = dict(bitline_depth=256, macs_per_bram=144)

ARCHS: dict[str, ArchProfile] = {
    p.name: p for p in (
        ArchProfile("CCB", 0.60, reserved_wordlines_per_bit=8, mult_formula="a",
                    accum_formula="c", booth_support="No", **_custom),
        ArchProfile("COMEFA_D", 0.25, reserved_wordlines_per_bit=5, mult_formula="a",
                    accum_formula="c", booth_support="Partial", label="CoMeFa-D", **_custom),
        ArchProfile("COMEFA_A", 1.50, reserved_wordlines_per_bit=5, mult_formula="a",
                    accum_formula="c", booth_support="Partial", label="CoMeFa-A", **_custom),
        ArchProfile("A_MOD", 1.50, reserved_wordlines_per_bit=4, mult_formula="a",
                    accum_formula="e", booth_support="Yes", label="A-Mod", **_custom),
        ArchProfile("D_MOD", 0.25, reserved_wordlines_per_bit=4, mult_formula="a",
                    accum_formula="e", booth_support="Yes", label="D-Mod", **_custom),
        ArchProfile("PICASO_F", 0.0, macs_per_bram=36, bitline_depth=1024,
                    reserved_wordlines_per_bit=4, mult_formula="b", accum_formula="d",
                    booth_support="Yes", add_cycles_per_bit=2, add_cycles_extra=0,
                    label="PiCaSO-F"),
        # measured 445 MHz vs 737 MHz BRAM fmax on the U55; reserved rows unknown
        ArchProfile("SPAR2", 737 / 445 - 1, macs_per_bram=36, bitline_depth=1024,
                    reserved_wordlines_per_bit=None, mult_formula="b",
                    accum_formula="benchmark", booth_support="Yes", add_cycles_per_bit=2,
                    add_cycles_extra=0, label="SPAR-2"),
    )
}

CUSTOM_ARCHS = ("CCB", "COMEFA_D", "COMEFA_A", "A_MOD", "D_MOD")

_V7_FMAX = 543.77
_USP_FMAX = 737.0

DEVICES: dict[str, DeviceProfile] = {
    d.id: d for d in (
        DeviceProfile("V7-a", "xc7vx330tffg-2", "V7", 750, 272, _V7_FMAX),
        DeviceProfile("V7-b", "xc7vx485tffg-2", "V7", 1030, 295, _V7_FMAX),
        DeviceProfile("V7-c", "xc7v2000tfhg-2", "V7", 1292, 946, _V7_FMAX),
        DeviceProfile("V7-d", "xc7vx1140tflg-2", "V7", 1880, 379, _V7_FMAX),
        DeviceProfile("US-a", "xcvu3p-ffvc-3", "US+", 720, 547, _USP_FMAX),
        DeviceProfile("US-b", "xcvu23p-vsva-3", "US+", 2112, 488, _USP_FMAX),
        DeviceProfile("US-c", "xcvu19p-fsvb-2", "US+", 2160, 1892, _USP_FMAX),
        DeviceProfile("US-d", "xcvu29p-figd-3", "US+", 2688, 643, _USP_FMAX),
        DeviceProfile("U55", "xcu55c", "US+", 2016, None, _USP_FMAX),
    )
}

SCALABILITY_DEVICES = ("V7-a", "V7-b", "V7-c", "V7-d", "US-a", "US-b", "US-c", "US-d")


def _arch(arch) -> ArchProfile:
    return arch if isinstance(arch, ArchProfile) else ARCHS[str(arch).upper().replace("-", "_")]


def _device(device) -> DeviceProfile:
    return device if isinstance(device, DeviceProfile) else DEVICES[device]


# ---------------------------------------------------------------------------
# cycle models

def mult_latency(arch, n: int) -> int:
    arch = _arch(arch)
    if n < 2:
        raise ValueError("n must be >= 2")
    if arch.mult_formula == "a":
        return n * n + 3 * n - 2
    return 2 * n * n + 2 * n


def accum_latency(arch, q: int, n: int) -> int:
    """Cycles to reduce ``q`` columns of ``n``-bit operands."""
    arch = _arch(arch)
    if q < 2 or q & (q - 1):
        raise InvalidQ(f"q must be a power of two >= 2, got {q}")
    lg = q.bit_length() - 1
    f = arch.accum_formula
    if f == "c":
        return (2 * n + lg) * lg
    if f == "e":
        return (n + 2) * lg
    if f == "benchmark":
        return benchmark_accumulate_cycles(n, q)
    # PiCaSO: general form; equals (n + 4) log2 q at q = 16
    return accumulate_cycles(n, q)


def accum_step_latency(arch, n: int, q: int = 16) -> float:
    """Average cost of one reduction level: ``accum_latency / log2 q``."""
    return accum_latency(arch, q, n) / math.log2(q)


def elementwise_add_latency(arch, n: int) -> int:
    arch = _arch(arch)
    return arch.add_cycles_per_bit * n + arch.add_cycles_extra


def effective_freq(arch, device) -> float:
    """Clock of ``arch`` on ``device`` in Hz."""
    return _device(device).base_bram_freq * 1e6 / (1 + _arch(arch).clock_overhead)


def mac_latency_cycles(arch, n: int, q: int = 16) -> int:
    """16 parallel multiplies followed by accumulating their products."""
    return mult_latency(arch, n) + accum_latency(arch, q, n)


def mac_latency_time(arch, device, n: int, q: int = 16) -> float:
    """MAC latency in seconds."""
    return mac_latency_cycles(arch, n, q) / effective_freq(arch, device)


def mac_cycles(arch, n: int, *, booth_effective: bool = False, add_model: str = "reduction") -> float:
    """Cycles one PE spends per MAC in steady state.

    ``add_model="reduction"`` charges one reduction level of the
    architecture's accumulation scheme per product (q = 16);
    ``"elementwise"`` charges a plain n-bit add instead (2n on the overlay,
    n + 1 on custom BRAMs).  ``booth_effective`` halves the multiply term of
    Booth-capable 2-cycle/bit designs, the average when NOP steps are skipped.
    """
    arch = _arch(arch)
    mult = mult_latency(arch, n)
    if booth_effective and arch.booth_halving:
        mult = mult / 2
    if add_model == "reduction":
        add = accum_step_latency(arch, n)
    elif add_model == "elementwise":
        add = elementwise_add_latency(arch, n)
    else:
        raise ValueError(f"unknown add model {add_model!r}")
    return mult + add


def peak_throughput(arch, device, n: int, booth_effective: bool = False,
                    add_model: str = "reduction") -> float:
    """Peak MACs per second over every BRAM of ``device``."""
    arch = _arch(arch)
    device = _device(device)
    cyc = mac_cycles(arch, n, booth_effective=booth_effective, add_model=add_model)
    return arch.macs_per_bram * device.bram_count * effective_freq(arch, device) / cyc


def mem_efficiency(arch, n: int) -> float:
    """Fraction of a bitline left for weights after scratchpad reservation."""
    arch = _arch(arch)
    if arch.reserved_wordlines_per_bit is None:
        raise ValueError(f"{arch.name}: scratchpad reservation unknown")
    reserved = arch.reserved_wordlines_per_bit * n
    if reserved >= arch.bitline_depth:
        raise ReservationExceedsDepth(
            f"{arch.name}: {reserved} reserved wordlines >= depth {arch.bitline_depth}")
    return (arch.bitline_depth - reserved) / arch.bitline_depth


def max_pes(device) -> int:
    return PES_PER_BRAM36 * _device(device).bram_count


# ---------------------------------------------------------------------------
# catalog overrides

def load_catalog(path) -> tuple[dict[str, ArchProfile], dict[str, DeviceProfile]]:
    """Read device entries and profile overrides from a JSON file.

    Schema::

        {
          "devices": [{"id": "X", "part": "...", "family": "US+",
                       "bram_count": 1000, "lut_bram_ratio": 500,
                       "base_bram_freq": 737.0}],
          "profiles": {"COMEFA_A": {"clock_overhead": 1.0}}
        }

    Device entries replace or extend the built-in catalog; profile entries
    override fields of existing profiles (or define a new one in full).
    Returns ``(archs, devices)``; the module catalogs are not modified.
    """
    data = json.loads(Path(path).read_text())
    archs = dict(ARCHS)
    devices = dict(DEVICES)
    dev_fields = {f.name for f in fields(DeviceProfile)}
    arch_fields = {f.name for f in fields(ArchProfile)}
    for entry in data.get("devices", []):
        unknown = set(entry) - dev_fields
        if unknown:
            raise ValueError(f"unknown device fields: {sorted(unknown)}")
        base = devices.get(entry.get("id"))
        dev = replace(base, **entry) if base else DeviceProfile(**entry)
        devices[dev.id] = dev
    for name, over in data.get("profiles", {}).items():
        unknown = set(over) - arch_fields
        if unknown:
            raise ValueError(f"unknown profile fields: {sorted(unknown)}")
        key = name.upper().replace("-", "_")
        archs[key] = replace(archs[key], **over) if key in archs else ArchProfile(name=key, **over)
    return archs, devices
