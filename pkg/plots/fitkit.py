"""Log-space fits with explicit windows and normal-theory intervals."""

from __future__ import annotations

import math


def _linfit(xs, ys):
    """Least-squares slope/intercept with the slope's standard error."""
    n = len(xs)
    if n < 3:
        raise ValueError(f"need at least 3 points to fit, got {n}")
    mx = sum(xs) / n
    my = sum(ys) / n
    sxx = sum((x - mx) ** 2 for x in xs)
    if sxx == 0:
        raise ValueError("degenerate abscissa: no spread in fit window")
    sxy = sum((x - mx) * (y - my) for x, y in zip(xs, ys))
    slope = sxy / sxx
    intercept = my - slope * mx
    resid2 = sum((y - (slope * x + intercept)) ** 2 for x, y in zip(xs, ys))
    se = math.sqrt(resid2 / max(n - 2, 1) / sxx)
    return slope, intercept, se


def _window(ts, ys, window):
    lo, hi = window
    pairs = [(t, y) for t, y in zip(ts, ys) if lo <= t <= hi and y > 0]
    if len(pairs) < 3:
        raise ValueError(
            f"fit window [{lo}, {hi}] keeps {len(pairs)} positive points; need >= 3"
        )
    return [p[0] for p in pairs], [p[1] for p in pairs]


def fit_growth_exponent(ts, ys, window) -> dict:
    """Exponent p of y ~ t^p, fitted as log y against log t."""
    xs, ys = _window(ts, ys, window)
    if min(xs) <= 0:
        raise ValueError("growth fit needs positive times")
    slope, intercept, se = _linfit([math.log(x) for x in xs],
                                   [math.log(y) for y in ys])
    return {"kind": "growth", "exponent": slope, "ci95": 1.96 * se,
            "intercept": intercept, "window": list(window), "n_points": len(xs)}


def fit_decay_rate(ts, ys, window) -> dict:
    """Rate r of y ~ exp(r t), fitted as log y against t."""
    xs, ys = _window(ts, ys, window)
    slope, intercept, se = _linfit(xs, [math.log(y) for y in ys])
    return {"kind": "decay", "rate": slope, "ci95": 1.96 * se,
            "intercept": intercept, "window": list(window), "n_points": len(xs)}
