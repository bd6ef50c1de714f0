"""Acceptance criteria 1-10.  Each test records a PASS/FAIL line that the
terminal summary prints at the end of the run."""

import time

import numpy as np

from conftest import ACCEPTANCE
from picaso import perfmodel as pm
from picaso.cli import main
from picaso.machine import OperandLayout, PimArray
from picaso.datapath import AluOp
from picaso.microprogram import (
    accumulate_cycles, addsub_cycles, benchmark_accumulate_cycles, mult_cycles,
    prog_accumulate_row, prog_addsub, prog_mult_booth,
)
from picaso.network import NetRow, pairing
from picaso.reports import ReportSpec, throughput_table
from picaso.workloads import mac_rows, random_operands


def record(key, ok, detail):
    ACCEPTANCE[key] = (bool(ok), detail)
    assert ok, detail


def test_c01_exhaustive_booth_8x8():
    t0 = time.perf_counter()
    vals = np.arange(-128, 128, dtype=np.int64)
    a, b = (x.ravel().reshape(-1, 1, 16) for x in np.meshgrid(vals, vals, indexing="ij"))
    arr = PimArray(a.shape[0], 1)
    arr.load_all(a, OperandLayout(0, 8)).load_all(b, OperandLayout(8, 8))
    arr.run(prog_mult_booth(16, 0, 8, 8))
    got = arr.read_all(OperandLayout(16, 16))
    wrong = int((got != a * b).sum())
    dt = time.perf_counter() - t0
    record(1, wrong == 0 and a.size == 65536 and dt < 120,
           f"{a.size} signed 8x8 products, {wrong} wrong, {dt:.2f} s")


def test_c02_cycle_formulas():
    bad = []
    for n in (4, 8, 16, 32):
        if len(prog_addsub(2 * n, 0, n, n)) != 2 * n:
            bad.append(f"addsub n={n}")
        if len(prog_mult_booth(2 * n, 0, n, n)) != 2 * n * n + 2 * n:
            bad.append(f"mult n={n}")
    acc, bench = accumulate_cycles(32, 128), benchmark_accumulate_cycles(32, 128)
    record(2, not bad and acc == 259 and bench == 4512,
           f"program lengths exact for N in 4,8,16,32{'' if not bad else ' except ' + ', '.join(bad)};"
           f" accum {acc}, benchmark {bench}")


def _executed(prog, cols=1, rows=1):
    arr = PimArray(rows, cols)
    before = arr.cycle_counter
    arr.run(prog)
    return arr.cycle_counter - before


def test_c03_simulator_vs_formula():
    exact = []
    for n in (4, 8, 16, 32):
        exact.append(_executed(prog_addsub(2 * n, 0, n, n, AluOp.ADD)) == addsub_cycles(n))
        exact.append(_executed(prog_addsub(2 * n, 0, n, n, AluOp.SUB)) == addsub_cycles(n))
        exact.append(_executed(prog_mult_booth(2 * n, 0, n, n)) == mult_cycles(n))
    worst = 0.0
    q16_exact = True
    for n in (8, 16, 32):
        for q in (16, 64, 128):
            got = _executed(prog_accumulate_row(0, n, q), cols=q // 16)
            ref = accumulate_cycles(n, q)
            worst = max(worst, abs(got - ref) / ref)
            if q == 16:
                q16_exact &= got == ref == (n + 4) * 4
    record(3, all(exact) and worst <= 0.10 and q16_exact,
           f"ADD/SUB/MULT exact: {all(exact)}; accumulation worst deviation "
           f"{100 * worst:.1f}% (limit 10%), exact at q=16: {q16_exact}")


def test_c04_comparison_cycles():
    got = (pm.mult_latency("CCB", 8), pm.mult_latency("PICASO_F", 8),
           pm.accum_latency("CCB", 16, 8), pm.accum_latency("PICASO_F", 16, 8),
           pm.accum_latency("A_MOD", 16, 8))
    record(4, got == (86, 144, 80, 48, 40),
           f"mult {got[0]}/{got[1]}, accum (c)/(d)/(e) {got[2]}/{got[3]}/{got[4]}")


def test_c05_memory_efficiency():
    ccb, com, pic, amod = (pm.mem_efficiency(a, 16) for a in ("CCB", "COMEFA_A", "PICASO_F", "A_MOD"))
    diff = amod - com
    ok = (f"{ccb:.3f}", f"{com:.3f}", f"{pic:.3f}") == ("0.500", "0.688", "0.938") \
        and abs(diff - 0.062) <= 0.0005 + 1e-12
    record(5, ok, f"CCB {ccb:.3f}, CoMeFa {com:.3f}, PiCaSO {pic:.3f}, A-Mod - CoMeFa {diff:+.4f}")


def test_c06_scalability():
    want = [24, 32, 41, 60, 23, 67, 69, 86]
    got = [pm.max_pes(d) // 1000 for d in pm.SCALABILITY_DEVICES]
    record(6, got == want, "max PEs (K): " + ", ".join(f"{k}K" for k in got))


def test_c07_latency_ratio():
    ratios = [pm.mac_latency_time("COMEFA_A", "U55", n) / pm.mac_latency_time("PICASO_F", "U55", n)
              for n in (4, 8, 16)]
    lo, hi = min(ratios), max(ratios)
    ok = abs(lo - 1.72) <= 0.15 * 1.72 and abs(hi - 2.56) <= 0.15 * 2.56
    record(7, ok, f"CoMeFa-A/PiCaSO latency ratio {lo:.3f}-{hi:.3f} "
                  f"(targets 1.72 and 2.56, +-15%)")


def test_c08_throughput_band():
    shares = [pm.peak_throughput("PICASO_F", "U55", n, booth_effective=True)
              / pm.peak_throughput("COMEFA_A", "U55", n, booth_effective=True) for n in (4, 8)]
    table = throughput_table(ReportSpec("throughput", [4, 8], booth_effective=True))
    annotated = any("model uncertainty" in note for note in table.notes)
    ok = all(0.70 <= s <= 0.85 for s in shares) and annotated
    record(8, ok, "PiCaSO/CoMeFa-A share " + ", ".join(f"{s:.3f}" for s in shares)
           + f" at N=4,8 (band 0.70-0.85); annotated: {annotated}")


def test_c09_reduction_correctness():
    rng = np.random.default_rng(2024)
    vectors = 1000
    mismatched = {}
    for q in (16, 32, 64, 128):
        a = random_operands(rng, 8, (vectors, q))
        b = random_operands(rng, 8, (vectors, q))
        res = mac_rows(a, b, 8)
        mismatched[q] = int((res.sums != res.expected).sum())
    matching = True
    for width in (2, 4, 8, 16):
        for level in range(NetRow(width).levels):
            p = pairing(level, width)
            nodes = list(p) + list(p.values())
            matching &= len(set(nodes)) == len(nodes) == width >> level
    ok = not any(mismatched.values()) and matching
    record(9, ok, f"{vectors} vectors per q, mismatches {mismatched}; perfect matchings: {matching}")


def test_c10_determinism(tmp_path):
    cmds = [
        ["report", "latency", "--format", "json"],
        ["report", "throughput", "--booth-effective"],
        ["report", "memeff"],
        ["report", "scalability"],
        ["report", "cycle-formulas", "--n", "8,32", "--q", "128"],
        ["dump-state", "--n", "8", "--q", "64", "--seed", "5", "--rows", "0:40"],
    ]
    diffs = []
    for i, cmd in enumerate(cmds):
        blobs = []
        for rep in range(2):
            path = tmp_path / f"{i}_{rep}"
            main(cmd + ["--out", str(path)])
            blobs.append(path.read_bytes())
        if blobs[0] != blobs[1] or not blobs[0]:
            diffs.append(" ".join(cmd[:2]))
    record(10, not diffs, f"{len(cmds)} outputs byte-identical across two runs"
           + (f"; differing: {diffs}" if diffs else ""))
