"""Pseudo-spectral solver for the wave-profile system in the moving frame.

The state is the pair of 3-component profiles z[0] (u - b side) and z[1]
(u + b side) in spectral space.  One right-hand-side evaluation builds
the cross-sign advection (T_{±2a} z∓) · grad_L z± pseudo-spectrally
(transport phase per mode, moving-frame gradient symbols, products on
the physical grid, 2/3-rule dealiasing), adds the lift-up coupling,
projects, and adds the shear-pressure term

    (k k_t / |k_t|^2) zhat±_2,

which is what keeps the time-dependent constraint k_t . zhat = 0 exactly
invariant: the plain orthogonal projection alone would let it drift at
rate -k zhat_2 because the constraint direction rotates with the frame.

Viscosity is applied exactly per mode through the closed-form factor
exp(-nu * int |k_s|^2 ds) between the stage times of a classical
4th-order step (integrating-factor RK4), so the scheme has no stiff
viscous stability limit.
"""

from __future__ import annotations

import hashlib
import json
import math
import time as _time
from dataclasses import dataclass, field, asdict

import numpy as np
import scipy.fft as _fft

from .diagnostics import RegularityLadder, record
from .diophantine import sigma_value
from .multipliers import MultiplierParams
from .spectral import FFT_WORKERS, ElsasserState, Grid, leray_project_moving

CHECKPOINT_MAGIC = "couettemhd-checkpoint"
CHECKPOINT_VERSION = 1


@dataclass(frozen=True)
class InitSpec:
    """Random divergence-free initial data with a prescribed envelope.

    The pair (u, b) is drawn from seeded white noise, shaped by the
    spectral envelope, projected divergence-free, and rescaled so its
    H^{norm_index} norm is exactly epsilon.  Envelope kinds:
    'gaussian' (exp(-|k|_2^2/peak_k^2)); 'shell' (unit annulus of width
    1 around radius peak_k; may miss the grid entirely, which is an
    error); 'pancake' (gaussian in the x/z wavenumbers, hard cutoff
    |eta| <= 1 so that every excited mode has its critical time within
    one shear unit -- the clean configuration for decay-rate scaling
    measurements).
    """

    epsilon: float
    peak_k: float = 1.2
    seed: int = 0
    norm_index: int = 16
    kind: str = "gaussian"

    def __post_init__(self):
        if self.epsilon < 0:
            raise ValueError("epsilon must be nonnegative")
        if self.peak_k <= 0:
            raise ValueError("peak_k must be positive")
        if self.kind not in ("gaussian", "shell", "pancake"):
            raise ValueError(f"unknown spectrum kind {self.kind!r}")


@dataclass(frozen=True)
class SolverConfig:
    nx: int = 32
    ny: int = 64
    nz: int = 32
    ly: float = 4.0
    nu: float = 1e-3
    alpha: float = 2.0
    sigma: str = "sqrt2"
    delta: float = 0.01
    t_end: float = 10.0
    dt_max: float = 0.05
    cfl: float = 0.5
    seed: int = 0
    epsilon: float = 1e-5
    peak_k: float = 1.2
    norm_index: int = 16
    spectrum: str = "gaussian"
    output_cadence: float = 0.5
    tail_threshold: float = 1e-6
    dioph_n: int = 1

    def __post_init__(self):
        if not 0 < self.cfl <= 1:
            raise ValueError("cfl must lie in (0, 1]")
        if self.t_end <= 0:
            raise ValueError("t_end must be positive")

    def grid(self) -> Grid:
        return Grid(self.nx, self.ny, self.nz, self.ly)

    def init_spec(self) -> InitSpec:
        return InitSpec(self.epsilon, self.peak_k, self.seed, self.norm_index,
                        self.spectrum)

    def sigma_float(self) -> float:
        return sigma_value(self.sigma)

    def ladder(self) -> RegularityLadder:
        return RegularityLadder.default(self.dioph_n)

    def hash(self) -> str:
        blob = json.dumps(asdict(self), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


def initial_data(grid: Grid, spec: InitSpec) -> ElsasserState:
    """Seeded random state, divergence-free and exactly normalized.

    At t = 0 the moving-frame and static divergence conditions coincide,
    so the static projection used here is the right one.
    """
    rng = np.random.default_rng(spec.seed)
    if spec.epsilon == 0.0:
        return ElsasserState(grid, np.zeros((2, 3) + grid.spec_shape, complex), 0.0)
    phys = rng.standard_normal((2, 3) + grid.phys_shape)
    ub = grid.to_spectral(phys)
    k2 = grid.KX**2 + grid.ETA**2 + grid.KZ**2
    if spec.kind == "gaussian":
        envelope = np.exp(-k2 / spec.peak_k**2) * grid.dealias_mask
    elif spec.kind == "pancake":
        envelope = (
            np.exp(-(grid.KX**2 + grid.KZ**2) / spec.peak_k**2)
            * (np.abs(grid.ETA) <= 1.0)
            * grid.dealias_mask
        )
    else:
        envelope = (np.abs(np.sqrt(k2) - spec.peak_k) <= 0.5) * grid.dealias_mask
    if not np.any(envelope > 0):
        raise ValueError("spectral envelope lies entirely outside the grid")
    ub = ub * envelope
    ub[..., 0, 0, 0] = 0.0
    ub = leray_project_moving(grid, ub, 0.0)
    # discrete H^{norm_index} norm of the (u, b) pair
    dens = grid.mult * grid.bracket ** (2 * spec.norm_index) * np.abs(ub) ** 2
    norm = math.sqrt(float(np.sum(dens)))
    ub *= spec.epsilon / norm
    z = np.stack([ub[0] - ub[1], ub[0] + ub[1]])
    return ElsasserState(grid, z, 0.0)


class BlowupError(RuntimeError):
    def __init__(self, t):
        super().__init__(f"non-finite state at t = {t:.6g}")
        self.time = t


class Solver:
    """Advances an ElsasserState; owns the precomputed symbol tables."""

    def __init__(self, grid: Grid, nu: float, alpha: float, sigma: float,
                 forcing=None):
        self.grid = grid
        self.nu = nu
        self.alpha = alpha
        self.sigma = sigma
        self.forcing = forcing
        self.theta = sigma * grid.KX + grid.KZ  # (nx, 1, nzh)
        self._static_k2 = grid.KX**2 + grid.ETA**2 + grid.KZ**2
        self._keta = grid.KX * grid.ETA
        self._kxx = grid.KX**2
        # scratch for the 24 transforms of one tendency evaluation
        self._batch = np.empty((24,) + grid.spec_shape, dtype=complex)
        self._conv = np.empty((2, 3) + grid.phys_shape)

    # -- per-mode tables ----------------------------------------------

    def _kt(self, t: float):
        g = self.grid
        ky = g.ETA - t * g.KX
        n2 = g.KX**2 + ky**2 + g.KZ**2
        inv = np.zeros_like(n2)
        np.divide(1.0, n2, out=inv, where=n2 > 0)
        return ky, n2, inv

    def _visc_integral(self, t: float):
        return self._static_k2 * t - self._keta * t * t + self._kxx * t**3 / 3.0

    def _decay(self, t0: float, t1: float):
        """exp(-nu * int_{t0}^{t1} |k_s|^2 ds), exact per mode."""
        return np.exp(-self.nu * (self._visc_integral(t1) - self._visc_integral(t0)))

    # -- right-hand side ------------------------------------------------

    def nonlinear_term(self, z: np.ndarray, t: float) -> np.ndarray:
        """Dealiased spectral (T_{±2a} z∓) · grad_L z± for both signs."""
        g = self.grid
        ky, _, _ = self._kt(t)
        ph = np.exp((2j * self.alpha * t) * self.theta)
        batch = self._batch
        # advecting fields: opposite sign with the transport phase applied
        np.multiply(ph, z[1], out=batch[0:3])
        np.multiply(np.conj(ph), z[0], out=batch[3:6])
        # moving-frame gradients of all six components
        view = batch[6:].reshape((2, 3, 3) + g.spec_shape)
        for s in range(2):
            np.multiply(1j * g.KX, z[s], out=view[s, 0])
            np.multiply(1j * ky, z[s], out=view[s, 1])
            np.multiply(1j * g.KZ, z[s], out=view[s, 2])
        phys = _fft.irfftn(batch, s=g.phys_shape, axes=(-3, -2, -1),
                           norm="forward", workers=FFT_WORKERS)
        w = phys[:6].reshape((2, 3) + g.phys_shape)
        gr = phys[6:].reshape((2, 3, 3) + g.phys_shape)
        conv = self._conv
        for s in range(2):
            for c in range(3):
                np.multiply(w[s, 0], gr[s, 0, c], out=conv[s, c])
                conv[s, c] += w[s, 1] * gr[s, 1, c]
                conv[s, c] += w[s, 2] * gr[s, 2, c]
        out = _fft.rfftn(conv, axes=(-3, -2, -1), norm="forward",
                         workers=FFT_WORKERS)
        out *= g.dealias_mask
        return out

    def rhs(self, z: np.ndarray, t: float) -> np.ndarray:
        """The non-viscous tendency: advection, lift-up, pressure, forcing."""
        g = self.grid
        ky, _n2, inv = self._kt(t)
        r = self.nonlinear_term(z, t)
        np.negative(r, out=r)
        ph = np.exp((2j * self.alpha * t) * self.theta)
        r[0, 0] -= ph * z[1, 1]
        r[1, 0] -= np.conj(ph) * z[0, 1]
        # orthogonal projection plus the shear-pressure completion
        coef = (g.KX * r[:, 0] + ky * r[:, 1] + g.KZ * r[:, 2]) * inv
        shear = (g.KX * inv) * z[:, 1]
        r[:, 0] += g.KX * (shear - coef)
        r[:, 1] += ky * (shear - coef)
        r[:, 2] += g.KZ * (shear - coef)
        if self.forcing is not None:
            r = r + self.forcing(t)
        r[..., 0, 0, 0] = 0.0
        return r

    # -- stepping ---------------------------------------------------------

    def step(self, state: ElsasserState, dt: float) -> ElsasserState:
        """One integrating-factor RK4 step; reprojects the constraint."""
        z, t = state.z, state.time
        h = dt
        e_half = self._decay(t, t + 0.5 * h)
        e_half2 = self._decay(t + 0.5 * h, t + h)
        e_full = e_half * e_half2
        a = self.rhs(z, t)
        b = self.rhs(e_half * (z + (0.5 * h) * a), t + 0.5 * h)
        c = self.rhs(e_half * z + (0.5 * h) * b, t + 0.5 * h)
        d = self.rhs(e_full * z + h * (e_half2 * c), t + h)
        z_new = e_full * z + (h / 6.0) * (e_full * a + 2.0 * (e_half2 * (b + c)) + d)
        z_new = leray_project_moving(self.grid, z_new, t + h)
        z_new[..., 0, 0, 0] = 0.0
        if not np.isfinite(z_new.view(float)).all():
            raise BlowupError(t + h)
        return ElsasserState(self.grid, z_new, t + h)

    def resolve_dt(self, state: ElsasserState, dt_max: float, cfl: float) -> float:
        """dt from the advective CFL and the transport-phase resolution."""
        g = self.grid
        phys = _fft.irfftn(state.z, s=g.phys_shape, axes=(-3, -2, -1),
                           norm="forward", workers=FFT_WORKERS)
        vmax = float(np.max(np.abs(phys)))
        kmax = max(g.nx / 2.0, g.ny / (2.0 * g.ly), g.nz / 2.0)
        dt = min(dt_max, 0.1 / (1.0 + 2.0 * self.alpha))
        if vmax > 0:
            dt = min(dt, cfl / (vmax * kmax))
        return dt


@dataclass
class Checkpoint:
    state: ElsasserState
    step: int
    config_hash: str

    def save(self, path) -> None:
        g = self.state.grid
        header = {
            "format": CHECKPOINT_MAGIC,
            "version": CHECKPOINT_VERSION,
            "grid": {"nx": g.nx, "ny": g.ny, "nz": g.nz, "ly": g.ly},
            "time": self.state.time,
            "step": self.step,
            "config_hash": self.config_hash,
            "component_order": ["plus.x", "plus.y", "plus.z",
                                "minus.x", "minus.y", "minus.z"],
            "layout": "spectral rfft-half along z, C order (2,3,nx,ny,nz//2+1)",
            "dtype": "complex128 interleaved re,im",
            "byte_order": "little",
            "shape": list(self.state.z.shape),
        }
        with open(path, "wb") as f:
            f.write(json.dumps(header).encode() + b"\n\0")
            f.write(self.state.z.astype("<c16").tobytes(order="C"))

    @classmethod
    def load(cls, path) -> "Checkpoint":
        with open(path, "rb") as f:
            raw = f.read()
        sep = raw.index(b"\n\0")
        header = json.loads(raw[:sep].decode())
        if header.get("format") != CHECKPOINT_MAGIC:
            raise ValueError(f"{path}: not a checkpoint file")
        g = header["grid"]
        grid = Grid(g["nx"], g["ny"], g["nz"], g["ly"])
        shape = tuple(header["shape"])
        z = np.frombuffer(raw[sep + 2:], dtype="<c16").reshape(shape).astype(
            np.complex128
        )
        state = ElsasserState(grid, z.copy(), header["time"])
        return cls(state, header["step"], header["config_hash"])


@dataclass
class SimulationResult:
    status: str  # completed | blow-up | resolution-alarm
    records: list
    final_state: ElsasserState
    checkpoints: list  # in-memory Checkpoint objects
    dt: float
    runtime: float
    config: SolverConfig

    def record_rows(self) -> list:
        return [r.as_dict() for r in self.records]


def run_simulation(
    config: SolverConfig,
    forcing=None,
    checkpoint_steps=(),
    record_hook=None,
) -> SimulationResult:
    """Advance to t_end or failure, recording diagnostics on a cadence.

    Times are step_index * dt so that a reloaded checkpoint reproduces
    the continuation bitwise.  Status is 'completed', 'blow-up' (state
    went non-finite), or 'resolution-alarm' (retained-band tail energy
    fraction crossed the configured threshold).
    """
    t_start = _time.perf_counter()
    grid = config.grid()
    sigma = config.sigma_float()
    solver = Solver(grid, config.nu, config.alpha, sigma, forcing=forcing)
    params = MultiplierParams(nu=config.nu, delta=config.delta)
    ladder = config.ladder()
    state = initial_data(grid, config.init_spec())
    dt = solver.resolve_dt(state, config.dt_max, config.cfl)
    n_steps = max(1, int(math.ceil(config.t_end / dt - 1e-12)))
    dt = config.t_end / n_steps
    stride = max(1, int(round(config.output_cadence / dt)))
    cfg_hash = config.hash()

    def make_record(s):
        r = record(s, ladder, params, config.alpha, sigma)
        if record_hook is not None:
            record_hook(s, r)
        return r

    records = [make_record(state)]
    checkpoints = []
    status = "completed"
    for i in range(n_steps):
        try:
            state = solver.step(state, dt)
        except BlowupError:
            status = "blow-up"
            break
        state.time = (i + 1) * dt  # keep times exact multiples of dt
        if (i + 1) in checkpoint_steps:
            checkpoints.append(Checkpoint(state.copy(), i + 1, cfg_hash))
        if (i + 1) % stride == 0 or (i + 1) == n_steps:
            rec = make_record(state)
            records.append(rec)
            if not all(np.isfinite(v) for v in rec.values()):
                status = "blow-up"
                break
            if rec.tail_frac > config.tail_threshold and config.epsilon > 0:
                status = "resolution-alarm"
                break
    return SimulationResult(
        status=status,
        records=records,
        final_state=state,
        checkpoints=checkpoints,
        dt=dt,
        runtime=_time.perf_counter() - t_start,
        config=config,
    )
