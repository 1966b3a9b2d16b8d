#!/usr/bin/env python3
"""Run the obstacle-avoidance, slew, and corridor scenarios for every margin
variant and write one trace CSV per run plus a summary table.

Usage: python scripts/run_scenarios.py [outdir]
"""
import sys
from pathlib import Path

from zohcbf.cli import _write_rows
from zohcbf.sim import SimConfig, max_h_over_trace, run, task_completed, trace_filename, write_trace_csv
from zohcbf.verify import LOCAL_CONFIG, TABLE_CONFIG

VARIANTS = ("phi0g", "phi1l", "phi1g", "phi2l", "phi2g", "phi3l", "phi3g")
SCENARIOS = (("unicycle", 45.0), ("spacecraft", 240.0), ("corridor", 45.0))


def main() -> None:
    out = Path(sys.argv[1]) if len(sys.argv) > 1 else Path("out")
    out.mkdir(parents=True, exist_ok=True)
    rows = []
    for system, duration in SCENARIOS:
        for variant in VARIANTS:
            cfg = SimConfig(system=system, variant=variant, T=0.1, duration=duration,
                            sup_config=TABLE_CONFIG, local_sup_config=LOCAL_CONFIG)
            trace = run(cfg)
            write_trace_csv(trace, out / trace_filename(cfg))
            rows.append({
                "system": system,
                "variant": variant,
                "completed": task_completed(trace),
                "reached": trace.reached,
                "closest_h": max_h_over_trace(trace),
                "relaxations": trace.relax_count,
                "terminated": trace.terminated,
            })
            r = rows[-1]
            print(f"{system}/{variant}: completed={r['completed']} closest h={r['closest_h']:.4g} "
                  f"relax={r['relaxations']}")
    _write_rows(out / "scenario_summary.csv", rows)


if __name__ == "__main__":
    main()
