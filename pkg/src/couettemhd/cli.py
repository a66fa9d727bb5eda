"""Command-line entry points.

Subcommands: verify-multipliers, verify-linear, dioph, simulate, scan,
report.  Run and scan configs are TOML with a versioned schema; every
output directory receives the resolved configuration and a tool-version
stamp so results remain attributable.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

try:
    import tomllib  # python >= 3.11
except ModuleNotFoundError:  # pragma: no cover - environment dependent
    import tomli as tomllib

from . import __version__
from .diophantine import dioph_constant
from .experiments import (
    LINEAR_SUITES,
    ScanSpec,
    classify_transition,
    efold_time,
    fit_exp_rate,
    run_scan,
    write_records_csv,
    write_scan_csv,
    write_suite_csv,
)
from .multipliers import (
    GhostSampleSpec,
    MultiplierParams,
    SampleSpec,
    verify_ghost_enhanced,
    verify_lemma_stretch,
)
from .solver import Checkpoint, SolverConfig, run_simulation

SCHEMA_VERSION = 1


# -- config files -------------------------------------------------------


def load_run_config(path) -> SolverConfig:
    with open(path, "rb") as f:
        doc = tomllib.load(f)
    if doc.get("schema_version") != SCHEMA_VERSION:
        raise ValueError(f"{path}: expected schema_version = {SCHEMA_VERSION}")
    g = doc.get("grid", {})
    p = doc.get("physics", {})
    t = doc.get("time", {})
    i = doc.get("init", {})
    o = doc.get("output", {})
    return SolverConfig(
        nx=g.get("nx", 32), ny=g.get("ny", 64), nz=g.get("nz", 32),
        ly=g.get("ly", 4.0),
        nu=p.get("nu", 1e-3), alpha=p.get("alpha", 2.0),
        sigma=str(p.get("sigma", "sqrt2")), delta=p.get("delta", 0.01),
        t_end=t.get("t_end", 10.0), dt_max=t.get("dt_max", 0.05),
        cfl=t.get("cfl", 0.5),
        seed=i.get("seed", 0), epsilon=i.get("epsilon", 1e-5),
        peak_k=i.get("peak_k", 1.5), norm_index=i.get("norm_index", 16),
        spectrum=i.get("spectrum", "gaussian"),
        output_cadence=o.get("cadence", 0.5),
        tail_threshold=o.get("tail_threshold", 1e-6),
        dioph_n=p.get("dioph_n", 1),
    )


def load_scan_spec(path) -> ScanSpec:
    with open(path, "rb") as f:
        doc = tomllib.load(f)
    if doc.get("schema_version") != SCHEMA_VERSION:
        raise ValueError(f"{path}: expected schema_version = {SCHEMA_VERSION}")
    s = doc.get("scan", {})
    kwargs = {}
    for name in ("eps_prefactor", "rmax", "tend_factor", "nx", "ny", "nz", "ly",
                 "dt_max", "output_cadence", "peak_k", "dioph_bound"):
        if name in s:
            kwargs[name] = s[name]
    for name, key in (("nus", "nus"), ("gammas", "gammas"),
                      ("alpha_multiples", "alpha_multiples"),
                      ("sigmas", "sigmas"), ("seeds", "seeds")):
        if key in s:
            kwargs[name] = tuple(s[key])
    return ScanSpec(**kwargs)


def _toml_value(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, float)):
        return repr(v)
    if isinstance(v, str):
        return json.dumps(v)
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_toml_value(x) for x in v) + "]"
    raise TypeError(f"cannot serialize {type(v)}")


def dump_run_config_toml(cfg: SolverConfig) -> str:
    lines = [f"schema_version = {SCHEMA_VERSION}", ""]
    sections = {
        "grid": {"nx": cfg.nx, "ny": cfg.ny, "nz": cfg.nz, "ly": cfg.ly},
        "physics": {"nu": cfg.nu, "alpha": cfg.alpha, "sigma": cfg.sigma,
                    "delta": cfg.delta, "dioph_n": cfg.dioph_n},
        "time": {"t_end": cfg.t_end, "dt_max": cfg.dt_max, "cfl": cfg.cfl},
        "init": {"epsilon": cfg.epsilon, "peak_k": cfg.peak_k, "seed": cfg.seed,
                 "norm_index": cfg.norm_index, "spectrum": cfg.spectrum},
        "output": {"cadence": cfg.output_cadence,
                   "tail_threshold": cfg.tail_threshold},
    }
    for name, table in sections.items():
        lines.append(f"[{name}]")
        for k, v in table.items():
            lines.append(f"{k} = {_toml_value(v)}")
        lines.append("")
    return "\n".join(lines)


def dump_scan_spec_toml(spec: ScanSpec) -> str:
    lines = [f"schema_version = {SCHEMA_VERSION}", "", "[scan]"]
    for f in dataclasses.fields(spec):
        lines.append(f"{f.name} = {_toml_value(getattr(spec, f.name))}")
    lines.append("")
    return "\n".join(lines)


def stamp_output_dir(out_dir: Path, resolved_toml: str) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "resolved_config.toml").write_text(resolved_toml)
    (out_dir / "version.json").write_text(
        json.dumps({"tool": "couettemhd", "version": __version__,
                    "schema_version": SCHEMA_VERSION}) + "\n"
    )


# -- subcommands ----------------------------------------------------------


def cmd_verify_multipliers(args) -> int:
    nus = [float(v) for v in args.nu] or [1e-3]
    report = {"stretch": {}, "tool_version": __version__}
    sample = SampleSpec()
    for nu in nus:
        params = MultiplierParams(nu=nu, delta=args.delta)
        report["stretch"][repr(nu)] = verify_lemma_stretch(params, sample)
    ghost_nus = [float(v) for v in (args.ghost_nu or ["1e-2", "1e-4", "1e-6"])]
    report["ghost"] = verify_ghost_enhanced(ghost_nus, GhostSampleSpec())
    report["passed"] = bool(
        all(r["passed"] for r in report["stretch"].values())
        and report["ghost"]["passed"]
    )
    out = Path(args.report)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(json.dumps(report, indent=1))
    if args.grid_out:
        _write_weight_grid(Path(args.grid_out), nus[0], args.delta,
                           args.grid_weight)
    print(f"verify-multipliers: {'PASS' if report['passed'] else 'FAIL'} -> {out}")
    return 0 if report["passed"] else 1


def _write_weight_grid(path, nu, delta, name) -> None:
    """Long-form (x=t, y=eta, value) table of one weight at k=1, l=0."""
    import csv as _csv

    import numpy as np

    from .multipliers import log_weight

    params = MultiplierParams(nu=nu, delta=delta)
    ts = np.linspace(0.0, 10.0 * nu ** (-1.0 / 3.0), 81)
    etas = np.linspace(-16.0, 16.0, 65)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as f:
        w = _csv.writer(f)
        w.writerow(["x", "y", "value"])
        for t in ts:
            vals = np.exp(log_weight(params, t, 1.0, etas, 0.0, name))
            for eta, v in zip(etas, vals):
                w.writerow([repr(float(t)), repr(float(eta)), repr(float(v))])


def cmd_verify_linear(args) -> int:
    suites = list(LINEAR_SUITES) if args.suite == "all" else [args.suite]
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    summary = {}
    for name in suites:
        rows, info = LINEAR_SUITES[name]()
        write_suite_csv(rows, out_dir / f"{name}.csv")
        summary[name] = info
        print(f"verify-linear[{name}]: {'PASS' if info['passed'] else 'FAIL'}")
    (out_dir / "summary.json").write_text(json.dumps(summary, indent=1))
    return 0 if all(v["passed"] for v in summary.values()) else 1


def cmd_dioph(args) -> int:
    cert = dioph_constant(args.sigma, args.n, args.bound)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(json.dumps(cert.as_dict(), indent=1))
    print(f"dioph: c = {cert.c:.12g} ({cert.tail_method}) -> {out}")
    if cert.warning:
        print(f"dioph: warning: {cert.warning}", file=sys.stderr)
    return 0


def cmd_simulate(args) -> int:
    cfg = load_run_config(args.config)
    if args.seed is not None:
        cfg = dataclasses.replace(cfg, seed=args.seed)
    out_dir = Path(args.out)
    stamp_output_dir(out_dir, dump_run_config_toml(cfg))
    res = run_simulation(cfg)
    write_records_csv(res.records, out_dir / "records.csv")
    Checkpoint(res.final_state, int(round(res.final_state.time / res.dt)),
               cfg.hash()).save(out_dir / "final.ckpt")
    status, crossing = classify_transition(res.records, rmax=100.0)
    summary = {
        "status": res.status,
        "transition": status,
        "crossing_time": crossing,
        "dt": res.dt,
        "runtime_s": res.runtime,
        "records": len(res.records),
    }
    (out_dir / "summary.json").write_text(json.dumps(summary, indent=1))
    print(f"simulate: {res.status}, {len(res.records)} records -> {out_dir}")
    return 0 if res.status == "completed" else 1


def cmd_scan(args) -> int:
    spec = load_scan_spec(args.config)
    out_dir = Path(args.out)
    stamp_output_dir(out_dir, dump_scan_spec_toml(spec))
    rows = run_scan(spec, threads=args.threads)
    write_scan_csv(rows, out_dir / "scan.csv")
    n_bad = sum(1 for r in rows if str(r["status"]).startswith("error"))
    print(f"scan: {len(rows)} cells, {n_bad} errors -> {out_dir / 'scan.csv'}")
    return 0


def cmd_report(args) -> int:
    import csv as _csv

    src = Path(args.records)
    with open(src, newline="") as f:
        rows = list(_csv.DictReader(f))
    if not rows:
        raise SystemExit(f"{src}: empty records file")
    t = [float(r["t"]) for r in rows]
    summary = {"source": str(src), "n_records": len(rows), "t_end": t[-1],
               "columns": {}}
    for col in rows[0]:
        if col == "t":
            continue
        y = [float(r[col]) for r in rows]
        entry = {"peak": max(y), "final": y[-1]}
        pos = [(ti, yi) for ti, yi in zip(t, y) if yi > 0]
        if len(pos) > 3:
            tp = [p[0] for p in pos]
            yp = [p[1] for p in pos]
            try:
                entry["efold_time"] = efold_time(tp, yp)
            except ValueError:
                pass
            try:
                entry["exp_rate"] = fit_exp_rate(
                    tp, yp, (tp[len(tp) // 2], tp[-1])
                )
            except ValueError:
                pass
        summary["columns"][col] = entry
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(json.dumps(summary, indent=1))
    print(f"report: {len(summary['columns'])} columns -> {out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="couettemhd",
        description="Spectral laboratory for sheared, magnetized channel-free flow",
    )
    ap.add_argument("--version", action="version", version=__version__)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--threads", type=int, default=1, help="worker processes")
    common.add_argument("--seed", type=int, default=None,
                        help="override config seed")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=(
        lambda **kw: argparse.ArgumentParser(parents=[common], **kw)))

    p = sub.add_parser("verify-multipliers", help="weight-inequality report")
    p.add_argument("--nu", action="append", default=[], help="viscosity (repeatable)")
    p.add_argument("--ghost-nu", action="append", default=[],
                   help="viscosities for the ghost bound (>= 3 decades)")
    p.add_argument("--delta", type=float, default=0.01)
    p.add_argument("--report", default="multiplier_report.json")
    p.add_argument("--grid-out", default=None,
                   help="also write a (t, eta, value) weight grid CSV at k=1, l=0")
    p.add_argument("--grid-weight", default="stretch")
    p.set_defaults(func=cmd_verify_multipliers)

    p = sub.add_parser("verify-linear", help="linear closed-form suites")
    p.add_argument("--suite", default="all",
                   choices=["all"] + sorted(LINEAR_SUITES))
    p.add_argument("--out", default="verify_linear")
    p.set_defaults(func=cmd_verify_linear)

    p = sub.add_parser("dioph", help="tilt non-resonance certificate")
    p.add_argument("--sigma", required=True)
    p.add_argument("--n", type=int, default=1)
    p.add_argument("--bound", type=int, default=100000)
    p.add_argument("--out", default="cert.json")
    p.set_defaults(func=cmd_dioph)

    p = sub.add_parser("simulate", help="single nonlinear run")
    p.add_argument("--config", required=True)
    p.add_argument("--out", default="run_out")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("scan", help="threshold scan over (nu, gamma, alpha, sigma)")
    p.add_argument("--config", required=True)
    p.add_argument("--out", default="scan_out")
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("report", help="summarize a diagnostics CSV")
    p.add_argument("--records", required=True)
    p.add_argument("--out", default="report.json")
    p.set_defaults(func=cmd_report)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
