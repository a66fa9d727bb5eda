#!/usr/bin/env python3
"""Render the solver's CSV outputs into figures with recorded fits.

Usage: python3 plots/render.py --job job.toml

The job file names input CSVs, a plot kind, the output image, and an
optional fit window.  Kinds:

  decay    time series on a log axis with a fitted exponential envelope
  growth   log-log series with a fitted power law
  damping  compensated series with a flat reference over the window
  suite    closed-form vs numeric overlay for verify-linear CSVs
  heatmap  long-form (x, y, value) table as a color map
  phase    scan table as a (nu, gamma) stability diagram

Every render writes a sibling JSON fit summary (slope, interval, window,
or none) and never mutates its inputs.  Figures are byte-stable for a
fixed matplotlib version.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

sys.path.insert(0, str(Path(__file__).resolve().parent))
from fitkit import fit_decay_rate, fit_growth_exponent  # noqa: E402

try:
    import tomllib
except ModuleNotFoundError:  # python 3.10
    import tomli as tomllib

SAVEFIG = {"dpi": 110, "metadata": {"Software": "couettemhd-plots"}}


class SchemaError(ValueError):
    pass


def read_table(path) -> dict:
    with open(path, newline="") as f:
        rows = list(csv.DictReader(f))
    if rows and any(v is None for v in rows[0].values()):
        raise SchemaError(f"{path}: ragged CSV row")
    cols = list(rows[0].keys()) if rows else _header_only(path)
    return {"path": str(path), "columns": cols, "rows": rows}


def _header_only(path):
    with open(path, newline="") as f:
        first = f.readline().strip()
    return first.split(",") if first else []

def column(table, name, numeric=True):
    if name not in table["columns"]:
        raise SchemaError(
            f"{table['path']}: required column {name!r} not found; "
            f"have {table['columns']}"
        )
    vals = [r[name] for r in table["rows"]]
    if not numeric:
        return vals
    out = []
    for v in vals:
        try:
            out.append(float(v) if v != "" else float("nan"))
        except ValueError as exc:
            raise SchemaError(f"{table['path']}: column {name!r}: {exc}") from None
    return out


def load_job(path) -> dict:
    with open(path, "rb") as f:
        job = tomllib.load(f)
    for key in ("kind", "inputs", "output"):
        if key not in job:
            raise ValueError(f"{path}: job is missing {key!r}")
    return job


def render(job) -> dict:
    kind = job["kind"]
    tables = [read_table(p) for p in job["inputs"]]
    out = Path(job["output"])
    out.parent.mkdir(parents=True, exist_ok=True)
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    fit = None
    try:
        if kind == "decay":
            fit = _render_decay(ax, tables[0], job)
        elif kind == "growth":
            fit = _render_growth(ax, tables[0], job)
        elif kind == "damping":
            fit = _render_damping(ax, tables[0], job)
        elif kind == "suite":
            _render_suite(ax, tables[0])
        elif kind == "heatmap":
            _render_heatmap(fig, ax, tables[0], job)
        elif kind == "phase":
            _render_phase(ax, tables[0], job)
        else:
            raise ValueError(f"unknown plot kind {kind!r}")
        fig.savefig(out, **SAVEFIG)
    finally:
        plt.close(fig)
    summary = {"kind": kind, "inputs": list(job["inputs"]),
               "output": str(out), "fit": fit}
    summary_path = out.with_suffix(".fit.json")
    summary_path.write_text(json.dumps(summary, indent=1) + "\n")
    return summary


def _series(table, job):
    ycol = job.get("column", "ed_lap")
    t = column(table, job.get("time_column", "t"))
    y = column(table, ycol)
    pairs = [(a, b) for a, b in zip(t, y) if b == b]  # drop NaNs
    return [p[0] for p in pairs], [p[1] for p in pairs], ycol


def _render_decay(ax, table, job):
    t, y, ycol = _series(table, job)
    ax.set_xlabel("t")
    ax.set_ylabel(ycol)
    if not t:
        ax.set_title("decay (no data)")
        return None
    ax.semilogy(t, y, "k.-", lw=0.8, ms=3, label=ycol)
    window = job.get("fit_window") or [t[0] + 0.25 * (t[-1] - t[0]), t[-1]]
    try:
        fit = fit_decay_rate(t, y, window)
    except ValueError:
        ax.legend()
        return None
    import math

    ts = [x for x in t if window[0] <= x <= window[1]]
    ax.semilogy(
        ts, [math.exp(fit["rate"] * x + fit["intercept"]) for x in ts],
        "r--", label=f"exp({fit['rate']:.4g} t)",
    )
    ax.legend()
    return fit


def _render_growth(ax, table, job):
    t, y, ycol = _series(table, job)
    ax.set_xlabel("t")
    ax.set_ylabel(ycol)
    if not t:
        ax.set_title("growth (no data)")
        return None
    pos = [(a, b) for a, b in zip(t, y) if a > 0 and b > 0]
    if not pos:
        return None
    t, y = [p[0] for p in pos], [p[1] for p in pos]
    ax.loglog(t, y, "k.-", lw=0.8, ms=3, label=ycol)
    window = job.get("fit_window") or [t[0] + 0.25 * (t[-1] - t[0]), t[-1]]
    try:
        fit = fit_growth_exponent(t, y, window)
    except ValueError:
        ax.legend()
        return None
    import math

    ts = [x for x in t if window[0] <= x <= window[1]]
    ax.loglog(
        ts,
        [math.exp(fit["exponent"] * math.log(x) + fit["intercept"]) for x in ts],
        "r--", label=f"t^{fit['exponent']:.3f}",
    )
    ax.legend()
    return fit


def _render_damping(ax, table, job):
    t, y, ycol = _series(table, job)
    ax.set_xlabel("t")
    ax.set_ylabel(ycol)
    if not t:
        ax.set_title("damping (no data)")
        return None
    ax.plot(t, y, "k.-", lw=0.8, ms=3, label=ycol)
    window = job.get("fit_window") or [t[0], t[-1]]
    ref = next((b for a, b in zip(t, y) if a >= window[0] and b > 0), None)
    fit = None
    if ref is not None:
        ax.axhline(ref, color="r", ls="--", label="flat reference")
        inside = [b / ref for a, b in zip(t, y) if window[0] <= a <= window[1]]
        fit = {"kind": "damping", "window": list(window),
               "max_over_reference": max(inside), "min_over_reference": min(inside)}
    ax.legend()
    return fit


def _render_suite(ax, table):
    t = column(table, "t")
    want = column(table, "closed_form")
    got = column(table, "numeric")
    ax.plot(t, want, "r-", lw=1.0, label="closed form")
    ax.plot(t, got, "k.", ms=3, label="numeric")
    ax.set_xlabel("t")
    ax.legend()


def _render_heatmap(fig, ax, table, job):
    xs = column(table, job.get("x_column", "x"))
    ys = column(table, job.get("y_column", "y"))
    vs = column(table, job.get("value_column", "value"))
    xu = sorted(set(xs))
    yu = sorted(set(ys))
    grid = [[float("nan")] * len(xu) for _ in yu]
    xi = {v: i for i, v in enumerate(xu)}
    yi = {v: i for i, v in enumerate(yu)}
    for x, y, v in zip(xs, ys, vs):
        grid[yi[y]][xi[x]] = v
    im = ax.imshow(grid, origin="lower", aspect="auto",
                   extent=[min(xu), max(xu), min(yu), max(yu)] if xu else None)
    fig.colorbar(im, ax=ax)
    ax.set_xlabel(job.get("x_column", "x"))
    ax.set_ylabel(job.get("y_column", "y"))


STATUS_COLORS = {
    "stable": "tab:blue",
    "transitioned": "tab:red",
    "blow-up": "black",
    "resolution-alarm": "tab:orange",
}


def _render_phase(ax, table, job):
    nus = column(table, "nu")
    gammas = column(table, "gamma")
    status = column(table, "status", numeric=False)
    for st in sorted(set(status)):
        pts = [(n, g) for n, g, s in zip(nus, gammas, status) if s == st]
        ax.scatter(
            [p[0] for p in pts], [p[1] for p in pts],
            s=60, label=st, color=STATUS_COLORS.get(st, "gray"),
        )
    ax.set_xscale("log")
    ax.set_xlabel("nu")
    ax.set_ylabel("gamma")
    if status:
        ax.legend()


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--job", required=True, help="TOML job description")
    args = ap.parse_args(argv)
    summary = render(load_job(args.job))
    print(json.dumps(summary["fit"]) if summary["fit"] else "fit: none")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
