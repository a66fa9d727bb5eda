"""Derived unknowns, weighted Sobolev norms, and per-record diagnostics.

Everything the runs track is computed here from an ElsasserState: the
velocity/field reconstruction, the sheared-Laplacian unknowns, weighted
norms at the four regularity levels of the ladder, zero/nonzero x-mode
splits, the damping and dissipation metrics, and the map back to the
unsheared frame.

Sobolev norms use the l1 wavenumber convention: ||f||_{H^s}^2 is the sum
over modes of <|k|+|eta|+|l|>^{2s} |fhat|^2 (with z-plane multiplicity),
so the plain s = 0 norm coincides with the physical root mean square.
"""

from __future__ import annotations

from dataclasses import dataclass, fields

import numpy as np

from .multipliers import MultiplierParams, log_weight
from .spectral import ElsasserState, Grid


@dataclass(frozen=True)
class RegularityLadder:
    """The four derived norm indices, all set by the top index and n.

    high = N, inter = N - 4 - 2n, low = N - 9 - 3n, mid = inter + 2 + n,
    with N >= 11 + 3n so that the low index stays above 3/2.
    """

    n: int
    high: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("certificate exponent n must be >= 1")
        if self.high < 11 + 3 * self.n:
            raise ValueError(f"top index {self.high} < {11 + 3 * self.n} = 11 + 3n")

    @classmethod
    def default(cls, n: int = 1) -> "RegularityLadder":
        return cls(n=n, high=11 + 3 * n)

    @property
    def inter(self) -> int:
        return self.high - 4 - 2 * self.n

    @property
    def low(self) -> int:
        return self.high - 9 - 3 * self.n

    @property
    def mid(self) -> int:
        return self.inter + 2 + self.n


def weighted_sobolev_norm(
    grid: Grid,
    field: np.ndarray,
    weight,
    s: float,
    params: MultiplierParams | None = None,
    t: float = 0.0,
) -> float:
    """Weighted H^s norm of a spectral field (leading axes summed over).

    `weight` is a weight name (evaluated at (params, t) over the grid),
    a precomputed array broadcastable to the field, or None for the
    plain norm.
    """
    if s < 0:
        raise ValueError("norm index must be nonnegative")
    w2 = None
    if isinstance(weight, str):
        if params is None:
            raise ValueError("weight by name needs multiplier parameters")
        w2 = np.exp(
            2.0 * log_weight(params, t, grid.KX, grid.ETA, grid.KZ, weight)
        )
    elif weight is not None:
        w2 = np.asarray(weight) ** 2
    dens = grid.mult * grid.bracket ** (2.0 * s) * np.abs(field) ** 2
    if w2 is not None:
        dens = dens * w2
    return float(np.sqrt(np.sum(dens)))


def nonzero_x(field: np.ndarray) -> np.ndarray:
    """Projection onto nonzero x-frequencies (exact in spectral space)."""
    out = field.copy()
    out[..., 0, :, :] = 0.0
    return out


def zero_x(field: np.ndarray) -> np.ndarray:
    """The x-average: only the k = 0 plane survives."""
    out = np.zeros_like(field)
    out[..., 0, :, :] = field[..., 0, :, :]
    return out


def derived_unknowns(state: ElsasserState, alpha: float, sigma: float) -> dict:
    """Velocity/field profiles and the sheared-Laplacian unknowns.

    Unwinds the field-line transport: vel = (T_{-a} z+ + T_{+a} z-)/2,
    mag = (T_{+a} z- - T_{-a} z+)/2; lap_* are -|k_t|^2 times the
    corresponding profile (per mode).
    """
    g = state.grid
    t = state.time
    theta = sigma * g.KX + g.KZ
    ph = np.exp(-1j * alpha * theta * t)  # transport by -alpha
    wp = ph * state.z[0]
    wm = np.conj(ph) * state.z[1]
    vel = 0.5 * (wp + wm)
    mag = 0.5 * (wm - wp)
    kt2 = g.kt_norm_sq(t)
    return {
        "vel": vel,
        "mag": mag,
        "lap_z_plus": -kt2 * state.z[0],
        "lap_z_minus": -kt2 * state.z[1],
        "lap_vel": -kt2 * vel,
        "lap_mag": -kt2 * mag,
    }


def tail_fraction(state: ElsasserState) -> float:
    """Energy fraction in the outer third of the retained band.

    The dealiased state has no energy outside the retained cube, so
    resolution is monitored on the slab of retained indices above 2/3
    of the cutoff in any direction.
    """
    g = state.grid
    cx, cy, cz = g.cutoff
    outer = (
        (np.abs(g.KX) > 2 * cx / 3)
        | (np.abs(g.ETA * g.ly) > 2 * cy / 3)
        | (g.KZ > 2 * cz / 3)
    )
    dens = g.mult * np.abs(state.z) ** 2
    total = float(np.sum(dens))
    if total == 0.0:
        return 0.0
    return float(np.sum(dens * outer) / total)


def map_to_original_frame(grid: Grid, spec: np.ndarray, t: float) -> np.ndarray:
    """Evaluate a profile on the unsheared grid: g(x, y, z) = G(x - y t, y, z).

    Per mode the map only shifts the y frequency by -k t, so it is exact
    on grid points: inverse transform in y, twist by exp(-i k t y),
    then the remaining inverse transforms.
    """
    import scipy.fft as _fft

    half = _fft.ifft(spec, axis=-2, norm="forward")
    y = grid.y[None, :, None]
    half = half * np.exp(-1j * grid.KX * t * y)
    out = _fft.ifft(half, axis=-3, norm="forward")
    out = _fft.irfft(out, n=grid.nz, axis=-1, norm="forward")
    return out


def original_frame_sobolev_norm(
    grid: Grid, field: np.ndarray, s: float, t: float
) -> float:
    """H^s norm measured in unsheared coordinates.

    The shear map sends mode (k, eta, l) to frequency (k, eta - k t, l)
    with the same coefficient, so the norm is computable per mode with
    the shifted bracket; no resampling is involved.
    """
    l1 = np.abs(grid.KX) + np.abs(grid.eta_shifted(t)) + grid.KZ
    br = np.sqrt(1.0 + l1 * l1)
    dens = grid.mult * br ** (2.0 * s) * np.abs(field) ** 2
    return float(np.sqrt(np.sum(dens)))


@dataclass
class DiagnosticsRecord:
    """One row of tracked quantities; column order is field order."""

    t: float
    hn_f1: float  # tail-capped weight, top index, first components, k != 0
    hn_f3: float  # capped weight, top index, third components
    hn_h2: float  # capped weight, top index, magnetic sheared Laplacian (2nd comp)
    hn_q2: float  # capped weight, top index, kinetic sheared Laplacian (2nd comp)
    hn_zero: float  # plain top-index norm of zero-x sheared Laplacians
    mid_f2: float  # time-averaged half weight, mid index
    inter_f2: float  # half weight, intermediate index
    low_f1: float
    low_f3: float
    zero_ub: float  # plain top-index norm of zero-x velocity and field
    damp_grad: float  # <t> * x,z-gradient of 2nd components, inter-1 index
    ed_lap: float  # x,z-Laplacian of 2nd components, top index
    ub_low: float  # plain low-index norm of (vel, mag), profile frame
    ub_low_orig: float  # same, measured in unsheared coordinates
    tail_frac: float

    @classmethod
    def columns(cls) -> tuple:
        return tuple(f.name for f in fields(cls))

    def as_dict(self) -> dict:
        return {name: getattr(self, name) for name in self.columns()}

    def values(self) -> tuple:
        return tuple(getattr(self, name) for name in self.columns())


def record(
    state: ElsasserState,
    ladder: RegularityLadder,
    params: MultiplierParams,
    alpha: float,
    sigma: float,
) -> DiagnosticsRecord:
    """Evaluate every tracked quantity on one state."""
    g = state.grid
    t = state.time
    d = derived_unknowns(state, alpha, sigma)
    w_full = np.exp(log_weight(params, t, g.KX, g.ETA, g.KZ, "full"))
    w_tail = np.exp(log_weight(params, t, g.KX, g.ETA, g.KZ, "full_tail"))
    w_half = np.exp(log_weight(params, t, g.KX, g.ETA, g.KZ, "half"))
    w_half_avg = w_half / np.hypot(t, 1.0) ** 0.5

    fp, fm = d["lap_z_plus"], d["lap_z_minus"]
    f1 = nonzero_x(np.stack([fp[0], fm[0]]))
    f3 = nonzero_x(np.stack([fp[2], fm[2]]))
    f2 = nonzero_x(np.stack([fp[1], fm[1]]))
    q2 = nonzero_x(d["lap_vel"][1])
    h2 = nonzero_x(d["lap_mag"][1])
    zero_lap = zero_x(np.stack([d["lap_vel"], d["lap_mag"]]))

    u0b0 = zero_x(np.stack([d["vel"], d["mag"]]))
    v2 = nonzero_x(np.stack([d["vel"][1], d["mag"][1]]))
    grad_xz = np.sqrt(g.KX**2 + g.KZ**2)
    lap_xz = g.KX**2 + g.KZ**2
    ub = np.stack([d["vel"], d["mag"]])

    n = weighted_sobolev_norm
    return DiagnosticsRecord(
        t=t,
        hn_f1=n(g, f1, w_tail, ladder.high),
        hn_f3=n(g, f3, w_full, ladder.high),
        hn_h2=n(g, h2, w_full, ladder.high),
        hn_q2=n(g, q2, w_full, ladder.high),
        hn_zero=n(g, zero_lap, None, ladder.high),
        mid_f2=n(g, f2, w_half_avg, ladder.mid),
        inter_f2=n(g, f2, w_half, ladder.inter),
        low_f1=n(g, f1, w_tail, ladder.low),
        low_f3=n(g, f3, w_full, ladder.low),
        zero_ub=n(g, u0b0, None, ladder.high),
        damp_grad=float(np.hypot(t, 1.0)) * n(g, grad_xz * v2, None, ladder.inter - 1),
        ed_lap=n(g, lap_xz * v2, None, ladder.high),
        ub_low=n(g, ub, None, ladder.low),
        ub_low_orig=original_frame_sobolev_norm(g, ub, ladder.low, t),
        tail_frac=tail_fraction(state),
    )


def damping_two_routes(
    state: ElsasserState,
    ladder: RegularityLadder,
    params: MultiplierParams,
    alpha: float,
    sigma: float,
) -> tuple:
    """The damping metric directly and through the weighted-Laplacian route.

    Route A is <t> ||grad_{X,Z} (vel2, mag2)_{k!=0}||_{H^{inter-1}}; route B
    bounds it by the (stretch_sqrt * ghost)-weighted intermediate norm of
    the sheared Laplacians, through the per-mode chain
    sqrt(k^2+l^2) <= C stretch_sqrt |k_t| and |k_t|^{-1} <= <t>^{-1} <mode>.
    Their ratio measures the empirical constant of that chain.
    """
    g = state.grid
    t = state.time
    d = derived_unknowns(state, alpha, sigma)
    v2 = nonzero_x(np.stack([d["vel"][1], d["mag"][1]]))
    grad_xz = np.sqrt(g.KX**2 + g.KZ**2)
    route_a = float(np.hypot(t, 1.0)) * weighted_sobolev_norm(
        g, grad_xz * v2, None, ladder.inter - 1
    )
    g2 = nonzero_x(np.stack([d["lap_vel"][1], d["lap_mag"][1]]))
    w = np.exp(
        log_weight(params, t, g.KX, g.ETA, g.KZ, "stretch_sqrt")
        + log_weight(params, t, g.KX, g.ETA, g.KZ, "ghost")
    )
    route_b = weighted_sobolev_norm(g, g2, w, ladder.inter)
    return route_a, route_b
