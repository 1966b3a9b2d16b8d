"""Command-line front end.

Subcommands: margins-table, physical-table, simulate, sweep, corridor,
verify. Output directory precedence: --out flag, then ZOHCBF_OUT, then
./out. Exit codes: 0 success, 1 property failure, 2 usage error.

Config files are INI: [engine] budget/refine_rounds/top_k/inflation/seed/
workers, [system] overrides forwarded to the system factory, [scenario]
x0/target/duration/gains, [sim] T/variant/duration/substeps/gamma. Flags
override config values.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path

import numpy as np

from .engine import SupConfig
from .margins import margins_table, physical_table, provenance_report
from .sim import SimConfig, max_h_over_trace, run, task_completed, trace_filename, write_trace_csv
from .systems import SYSTEMS, Scenario, make_system
from .verify import CHECKS, TABLE_CONFIG, run_all

VARIANT_CHOICES = ("phi0g", "phi1l", "phi1g", "phi2l", "phi2g", "phi3l", "phi3g", "all")


def _out_dir(args) -> Path:
    out = args.out or os.environ.get("ZOHCBF_OUT", "out")
    p = Path(out)
    p.mkdir(parents=True, exist_ok=True)
    return p


def _load_config(path: str | None) -> configparser.ConfigParser:
    cp = configparser.ConfigParser()
    if path:
        if not Path(path).exists():
            print(f"error: config file not found: {path}", file=sys.stderr)
            sys.exit(2)
        cp.read(path)
    return cp


def _engine_config(cp: configparser.ConfigParser, args) -> SupConfig:
    sec = cp["engine"] if cp.has_section("engine") else {}
    cfg = SupConfig(
        budget=int(sec.get("budget", TABLE_CONFIG.budget)),
        refine_rounds=int(sec.get("refine_rounds", TABLE_CONFIG.refine_rounds)),
        top_k=int(sec.get("top_k", TABLE_CONFIG.top_k)),
        inflation=float(sec.get("inflation", TABLE_CONFIG.inflation)),
        seed=int(sec.get("seed", TABLE_CONFIG.seed)),
        workers=int(sec.get("workers", TABLE_CONFIG.workers)),
    )
    if getattr(args, "seed", None) is not None:
        cfg = replace(cfg, seed=args.seed)
    if getattr(args, "workers", None) is not None:
        cfg = replace(cfg, workers=args.workers)
    return cfg


def _system_overrides(cp: configparser.ConfigParser) -> dict:
    if not cp.has_section("system"):
        return {}
    out = {}
    for key, val in cp["system"].items():
        if key == "name":
            continue
        try:
            out[key] = float(val)
        except ValueError:
            out[key] = val
    return out


def _scenario(cp: configparser.ConfigParser, bundle) -> Scenario:
    scen = bundle.scenario
    if not cp.has_section("scenario"):
        return scen
    sec = cp["scenario"]
    kw = {}
    if "x0" in sec:
        kw["x0"] = np.array([float(v) for v in sec["x0"].split(",")])
    if "target" in sec:
        kw["target"] = np.array([float(v) for v in sec["target"].split(",")])
    for key in ("duration", "gain_v", "gain_w", "gain_p", "gain_d"):
        if key in sec:
            kw[key] = float(sec[key])
    return replace(scen, **kw)


def _write_rows(path: Path, rows: list[dict]) -> None:
    with path.open("w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=list(rows[0].keys()))
        w.writeheader()
        for row in rows:
            w.writerow({k: (f"{v:.10g}" if isinstance(v, float) else v) for k, v in row.items()})


def cmd_margins_table(args) -> int:
    cp = _load_config(args.config)
    cfg = _engine_config(cp, args)
    bundle = make_system(args.system, **_system_overrides(cp))
    rows = margins_table(bundle, args.T, cfg)
    out = _out_dir(args) / f"margins_{args.system}_T{args.T:g}.csv"
    _write_rows(out, rows)
    print(provenance_report(bundle, args.T, cfg))
    print(f"wrote {out}")
    return 0


def cmd_physical_table(args) -> int:
    cp = _load_config(args.config)
    cfg = _engine_config(cp, args)
    bundle = make_system(args.system, **_system_overrides(cp))
    Ts = [float(t) for t in args.T_list.split(",")]
    rows = physical_table(bundle, Ts, cfg)
    out = _out_dir(args) / f"physical_{args.system}.csv"
    _write_rows(out, rows)
    for T in Ts:
        print(provenance_report(bundle, T, cfg))
    print(f"wrote {out}")
    return 0


def _run_one(payload) -> dict:
    name, variant, T, seed, overrides, scen_kw, engine_kw, duration, out = payload
    bundle = make_system(name, **overrides)
    scen = replace(bundle.scenario, **scen_kw) if scen_kw else bundle.scenario
    cfg = SimConfig(
        system=name,
        variant=variant,
        T=T,
        duration=duration if duration is not None else scen.duration,
        seed=seed,
        scenario=scen,
        system_overrides=overrides,
        sup_config=SupConfig(**engine_kw),
    )
    trace = run(cfg, bundle=bundle)
    path = write_trace_csv(trace, Path(out) / trace_filename(cfg))
    return {
        "system": name,
        "variant": variant,
        "T": T,
        "seed": seed,
        "reached": trace.reached,
        "completed": task_completed(trace),
        "closest_h": max_h_over_trace(trace),
        "relaxations": trace.relax_count,
        "terminated": trace.terminated,
        "trace": str(path),
    }


def cmd_simulate(args) -> int:
    cp = _load_config(args.config)
    cfg = _engine_config(cp, args)
    overrides = _system_overrides(cp)
    bundle = make_system(args.system, **overrides)
    scen = _scenario(cp, bundle)
    scen_kw = {"x0": scen.x0, "target": scen.target, "duration": scen.duration,
               "gain_v": scen.gain_v, "gain_w": scen.gain_w,
               "gain_p": scen.gain_p, "gain_d": scen.gain_d}
    out = _out_dir(args)
    variants = list(VARIANT_CHOICES[:-1]) if args.variant == "all" else [args.variant]
    engine_kw = dict(budget=cfg.budget, refine_rounds=cfg.refine_rounds,
                     top_k=cfg.top_k, inflation=cfg.inflation, seed=cfg.seed,
                     workers=cfg.workers)
    for variant in variants:
        res = _run_one((args.system, variant, args.T, args.seed or 0, overrides,
                        scen_kw, engine_kw, args.duration, out))
        print(
            f"{res['system']}/{res['variant']}: completed={res['completed']} "
            f"closest h={res['closest_h']:.4g} relaxations={res['relaxations']} -> {res['trace']}"
        )
    return 0


def cmd_sweep(args) -> int:
    cp = _load_config(args.config)
    cfg = _engine_config(cp, args)
    overrides = _system_overrides(cp)
    out = _out_dir(args)
    variants = list(VARIANT_CHOICES[:-1]) if args.variant == "all" else args.variant.split(",")
    Ts = [float(t) for t in args.T_list.split(",")]
    seeds = [int(s) for s in args.seeds.split(",")]
    engine_kw = dict(budget=cfg.budget, refine_rounds=cfg.refine_rounds,
                     top_k=cfg.top_k, inflation=cfg.inflation, seed=cfg.seed,
                     workers=1)
    jobs = [
        (args.system, v, T, s, overrides, None, engine_kw, args.duration, out)
        for v in variants
        for T in Ts
        for s in seeds
    ]
    workers = args.workers or 1
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_one, jobs))
    else:
        results = [_run_one(j) for j in jobs]
    results.sort(key=lambda r: (r["system"], r["variant"], r["T"], r["seed"]))
    summary = out / f"sweep_{args.system}.csv"
    _write_rows(summary, results)
    print(f"wrote {summary} ({len(results)} runs)")
    return 0


def cmd_corridor(args) -> int:
    cp = _load_config(args.config)
    cfg = _engine_config(cp, args)
    out = _out_dir(args)
    print("corridor: two obstacles, 0.3-wide gap")
    failures = 0
    for variant, want in (("phi2l", False), ("phi3l", True), ("phi3g", True)):
        sim_cfg = SimConfig(system="corridor", variant=variant, T=args.T,
                            duration=45.0, sup_config=cfg)
        trace = run(sim_cfg)
        done = task_completed(trace)
        write_trace_csv(trace, out / trace_filename(sim_cfg))
        print(
            f"  {variant}: goal-reached={done} closest approach h={max_h_over_trace(trace):.4g} "
            f"relaxations={trace.relax_count}"
        )
        if done != want:
            failures += 1
    return 0 if failures == 0 else 1


def cmd_verify(args) -> int:
    names = args.checks.split(",") if args.checks else None
    code = run_all(names)
    if args.strict and code == 0:
        # strict mode also fails on documented expected failures
        strict_failures = 0
        for name in names or list(CHECKS):
            for result in CHECKS[name]():
                if not result.passed:
                    strict_failures += 1
        code = 1 if strict_failures else 0
    return code


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="zohcbf",
        description="Sampled-data barrier margins, reachability bounds, and the min-norm safety filter",
    )
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, system=True):
        if system:
            sp.add_argument("--system", default="unicycle", choices=sorted(SYSTEMS))
        sp.add_argument("--seed", type=int, default=None)
        sp.add_argument("--config", default=None, help="INI configuration file")
        sp.add_argument("--out", default=None, help="output directory (default $ZOHCBF_OUT or ./out)")
        sp.add_argument("--workers", type=int, default=None)

    sp = sub.add_parser("margins-table", help="global controller margins at one period")
    common(sp)
    sp.add_argument("--T", type=float, default=0.1)
    sp.set_defaults(fn=cmd_margins_table)

    sp = sub.add_parser("physical-table", help="physical-margin infima over a period list")
    common(sp)
    sp.add_argument("--T", dest="T_list", default="0.1,0.01,0.001")
    sp.set_defaults(fn=cmd_physical_table)

    sp = sub.add_parser("simulate", help="closed-loop run(s), one trace CSV per variant")
    common(sp)
    sp.add_argument("--variant", default="phi3l", choices=VARIANT_CHOICES)
    sp.add_argument("--T", type=float, default=0.1)
    sp.add_argument("--duration", type=float, default=None)
    sp.set_defaults(fn=cmd_simulate)

    sp = sub.add_parser("sweep", help="fan out runs over variants x periods x seeds")
    common(sp)
    sp.add_argument("--variant", default="all")
    sp.add_argument("--T", dest="T_list", default="0.1")
    sp.add_argument("--seeds", default="0")
    sp.add_argument("--duration", type=float, default=None)
    sp.set_defaults(fn=cmd_sweep)

    sp = sub.add_parser("corridor", help="narrow-gap scenario report")
    common(sp, system=False)
    sp.add_argument("--T", type=float, default=0.1)
    sp.set_defaults(fn=cmd_corridor)

    sp = sub.add_parser("verify", help="run the property battery")
    sp.add_argument("--checks", default=None, help="comma-separated subset")
    sp.add_argument("--strict", action="store_true",
                    help="fail on documented irreproducible table entries too")
    sp.set_defaults(fn=cmd_verify)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except KeyError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
