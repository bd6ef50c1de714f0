"""Write every comparison table as CSV and JSON into an output directory.

    python scripts/reproduce_tables.py --out results/
"""

import argparse
from pathlib import Path

from picaso.reports import KINDS, ReportSpec, make_report


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default="results")
    ap.add_argument("--device", default="U55")
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    jobs = {kind: ReportSpec(kind, device=args.device) for kind in KINDS}
    jobs["throughput-booth"] = ReportSpec("throughput", device=args.device, booth_effective=True)
    jobs["memeff"] = ReportSpec("memeff", precisions=[2, 4, 8, 16, 24])
    jobs["cycle-formulas"] = ReportSpec("cycle-formulas", precisions=[8, 16, 32], q=128)

    for name, spec in jobs.items():
        table = make_report(spec)
        for fmt in ("csv", "json"):
            (out / f"{name}.{fmt}").write_text(table.render(fmt))
        print(f"== {name}")
        print(table.to_csv())


if __name__ == "__main__":
    main()
