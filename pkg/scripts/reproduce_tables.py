#!/usr/bin/env python3
"""Recompute the global controller margins and physical-margin infima for
both case studies and write the plot-ready CSVs.

Usage: python scripts/reproduce_tables.py [outdir]
"""
import sys
import time
from pathlib import Path

from zohcbf.cli import _write_rows
from zohcbf.margins import margins_table, physical_table, provenance_report
from zohcbf.systems import make_system
from zohcbf.verify import TABLE_CONFIG


def main() -> None:
    out = Path(sys.argv[1]) if len(sys.argv) > 1 else Path("out")
    out.mkdir(parents=True, exist_ok=True)
    for name in ("unicycle", "spacecraft"):
        bundle = make_system(name)
        t0 = time.perf_counter()
        rows = margins_table(bundle, 0.1, TABLE_CONFIG)
        _write_rows(out / f"margins_{name}_T0.1.csv", rows)
        rows = physical_table(bundle, (0.1, 0.01, 0.001), TABLE_CONFIG)
        _write_rows(out / f"physical_{name}.csv", rows)
        print(f"== {name} ({time.perf_counter() - t0:.1f}s) ==")
        print(provenance_report(bundle, 0.1, TABLE_CONFIG))
        print()


if __name__ == "__main__":
    main()
