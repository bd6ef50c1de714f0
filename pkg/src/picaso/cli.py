"""Command-line front end.

    picaso simulate --workload mac --n 8 --q 16 --seed 1
    picaso report memeff --n 4,8,16 --format json
    picaso assemble --op mult --n 8
    picaso dump-state --workload mac --n 8 --q 16 --seed 1 --rows 0:40

Exit codes: 0 success, 1 verification failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import perfmodel as pm
from .machine import PimArray
from .microprogram import (
    InvalidQ, PipelineConfig, accumulate_cycles, addsub_cycles, build, mult_cycles, network_jumps,
    schedule_for,
)
from .reports import KINDS, ReportSpec, UnknownDevice, UnknownKind, make_report
from .workloads import formula_mac_cycles, random_operands, run_gemv, run_mac

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _int_list(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _emit(text: str, out: str | None):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _check_sim_params(args):
    if not 2 <= args.n <= 32:
        raise UsageError("n must be between 2 and 32")
    if args.workload == "gemv":
        if args.q < 1 or args.k < 1:
            raise UsageError("gemv needs at least one row and one column")
        return
    try:
        network_jumps(args.q)
    except InvalidQ as e:
        raise UsageError(str(e))


def _simulate(args) -> tuple[int, PimArray, str]:
    _check_sim_params(args)
    lines = []
    if args.workload == "mac":
        res = run_mac(args.n, args.q, args.seed)
        f_mult, f_acc = formula_mac_cycles(args.n, args.q)
        lines.append(f"workload: mac  n={args.n}  q={args.q}  seed={args.seed}")
        lines.append("lane        a        b  product")
        for i, (a, b, p) in enumerate(zip(res.a[0], res.b[0], res.products[0])):
            lines.append(f"{i:4d} {a:8d} {b:8d} {p:8d}")
        lines.append(f"array result : {int(res.sums[0])}")
        lines.append(f"host oracle  : {int(res.expected[0])}")
        lines.append(f"verdict      : {'MATCH' if res.match else 'MISMATCH'}")
        lines.append(f"cycles mult  : simulated {res.mult_cycles}  formula {f_mult}")
        lines.append(f"cycles accum : simulated {res.accum_cycles}  formula {f_acc}"
                     f"  (product width {2 * args.n})")
        lines.append(f"reference model at N={args.n}: accum {accumulate_cycles(args.n, args.q)}"
                     f"  mult {mult_cycles(args.n)}")
        ok, arr = res.match, res.array
    else:
        rng = np.random.default_rng(args.seed)
        k = args.k
        w = random_operands(rng, args.n, (args.q, k))
        x = random_operands(rng, args.n, (k,))
        res = run_gemv(w, x, args.n)
        lines.append(f"workload: gemv  rows={args.q}  cols={k}  n={args.n}  seed={args.seed}")
        lines.append("row   simulated     host")
        for i, (s, e) in enumerate(zip(res.result, res.expected)):
            lines.append(f"{i:4d} {s:10d} {e:10d}")
        lines.append(f"verdict      : {'MATCH' if res.match else 'MISMATCH'}")
        per_col = mult_cycles(args.n) + addsub_cycles(res.acc_width)
        lines.append(f"cycles       : simulated {res.cycles}  formula {k * per_col}"
                     f"  ({k} x (mult {mult_cycles(args.n)} + add {addsub_cycles(res.acc_width)}))")
        ok, arr = res.match, res.array
    return (EXIT_OK if ok else EXIT_FAIL), arr, "\n".join(lines) + "\n"


def cmd_simulate(args) -> int:
    code, _, text = _simulate(args)
    _emit(text, args.out)
    return code


def cmd_dump_state(args) -> int:
    code, arr, _ = _simulate(args)
    lo, hi = args.rows
    _emit(arr.dump_state((lo, hi)), args.out)
    return code


def cmd_report(args) -> int:
    archs, devices = pm.ARCHS, pm.DEVICES
    if args.catalog:
        archs, devices = pm.load_catalog(args.catalog)
    spec = ReportSpec(
        kind=args.kind,
        precisions=args.n or [4, 8, 16],
        q=args.q,
        device=args.device,
        format=args.format,
        booth_effective=args.booth_effective,
        archs=args.arch,
        percent=args.percent,
    )
    try:
        table = make_report(spec, archs, devices)
    except (UnknownKind, UnknownDevice, ValueError, KeyError) as e:
        raise UsageError(str(e))
    _emit(table.render(spec.format), args.out)
    return EXIT_OK


def cmd_assemble(args) -> int:
    try:
        prog = build(args.op, args.n, args.q, args.base)
    except (ValueError, InvalidQ) as e:
        raise UsageError(str(e))
    pipe = PipelineConfig.parse(args.pipe)
    if pipe is not PipelineConfig.FULL_PIPE:
        prog = schedule_for(pipe, prog)
    _emit(prog.dump(), args.out)
    return EXIT_OK


def _rows(text: str) -> tuple[int, int]:
    try:
        lo, hi = (int(t) for t in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError("expected LO:HI")
    return lo, hi


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="picaso", description="PiCaSO PIM overlay simulator "
                                "and analytical comparison models")
    sub = p.add_subparsers(dest="command", required=True)

    def common_sim(sp):
        sp.add_argument("--workload", choices=("mac", "gemv"), default="mac")
        sp.add_argument("--n", type=int, default=8, help="operand width in bits")
        sp.add_argument("--q", type=int, default=16,
                        help="columns accumulated (mac) / matrix rows (gemv)")
        sp.add_argument("--k", type=int, default=8, help="matrix columns (gemv)")
        sp.add_argument("--seed", type=int, default=1)
        sp.add_argument("--out", help="write output to this file")

    s = sub.add_parser("simulate", help="run a MAC or GEMV workload on the simulator")
    common_sim(s)
    s.set_defaults(func=cmd_simulate)

    d = sub.add_parser("dump-state", help="simulate, then dump the array state as JSON")
    common_sim(d)
    d.add_argument("--rows", type=_rows, default=(0, 64),
                   help="register-file row range LO:HI to include (default 0:64)")
    d.set_defaults(func=cmd_dump_state)

    r = sub.add_parser("report", help="emit a comparison table")
    r.add_argument("kind", choices=KINDS)
    r.add_argument("--n", type=_int_list, help="precisions, e.g. 4,8,16")
    r.add_argument("--q", type=int, default=16)
    r.add_argument("--device", default="U55")
    r.add_argument("--arch", type=lambda t: t.split(","), help="comma-separated profiles")
    r.add_argument("--format", choices=("csv", "json"), default="csv")
    r.add_argument("--booth-effective", action="store_true")
    r.add_argument("--percent", action="store_true", help="memory efficiency in percent")
    r.add_argument("--catalog", help="JSON file with device/profile overrides")
    r.add_argument("--out")
    r.set_defaults(func=cmd_report)

    a = sub.add_parser("assemble", help="dump a microprogram listing")
    a.add_argument("--op", choices=("add", "sub", "mult", "accum"), required=True)
    a.add_argument("--n", type=int, default=8)
    a.add_argument("--q", type=int, default=16)
    a.add_argument("--base", type=int, default=0)
    a.add_argument("--pipe", default="full-pipe",
                   choices=[c.value for c in PipelineConfig])
    a.add_argument("--out")
    a.set_defaults(func=cmd_assemble)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
