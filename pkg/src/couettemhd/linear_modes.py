"""Per-mode integrators and closed forms for the linearized dynamics.

Each function integrates one Fourier mode of a linear or model system in
the moving frame with a classical 4th-order scheme: the full 6-component
linearization of the wave-profile pair, the 2-component second-component
system (with its stretching symbol S(t) = k(eta-kt)/|k_t|^2 and
oscillation frequency 2 alpha (sigma k + l)), the first/third component
systems with their doubled stretching, the scalar model oscillator posed
for t >= 1, and the exact enhanced-dissipation factor.

States are tuples of python complex scalars; the loops are deliberately
allocation-free since oscillation frequencies 2*alpha*(sigma*k+l) can
require hundreds of thousands of steps.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class LinParams:
    """Viscosity, field strength, tilt, and the mode being integrated."""

    nu: float
    alpha: float
    sigma: float
    mode: tuple  # (k, eta, l)

    def __post_init__(self):
        if self.nu < 0 or self.alpha < 0:
            raise ValueError("nu and alpha must be nonnegative")
        if self.sigma < 0:
            raise ValueError("tilt must be nonnegative")

    @property
    def theta(self) -> float:
        k, _, l = self.mode
        return self.sigma * k + l

    @property
    def omega(self) -> float:
        """Oscillation frequency of the cross-coupling terms."""
        return 2.0 * self.alpha * self.theta


@dataclass
class ModeTrajectory:
    times: np.ndarray
    values: np.ndarray  # (n_times, dim) complex
    system: str

    def norms(self) -> np.ndarray:
        return np.sqrt(np.sum(np.abs(self.values) ** 2, axis=1))


def suggested_dt(params: LinParams) -> float:
    """Step resolving the cross-coupling phase, capped at 0.01."""
    return min(0.01, 0.1 / (1.0 + abs(params.omega)))


def _span_steps(t_span, dt):
    t0, t1 = float(t_span[0]), float(t_span[1])
    if t1 <= t0:
        raise ValueError("time span must be increasing")
    n = max(1, int(round((t1 - t0) / dt)))
    return t0, (t1 - t0) / n, n


def _record_times(t0, h, n, stride):
    idx = list(range(0, n + 1, stride))
    if idx[-1] != n:
        idx.append(n)
    return idx


def enhanced_dissipation_factor(nu: float, mode, t: float) -> float:
    """exp(-nu * integral of |k_s|^2 from 0 to t), in closed form."""
    k, eta, l = mode
    if t < 0:
        raise ValueError("t must be nonnegative")
    integral = (k * k + eta * eta + l * l) * t - k * eta * t * t + k * k * t**3 / 3.0
    return float(np.exp(-nu * integral))


def evolve_linear_full(
    params: LinParams, init, t_span, dt: float | None = None, stride: int = 16,
    div_tol: float = 1e-8,
) -> ModeTrajectory:
    """Integrate the 6-component per-mode linearization.

    `init` is ((z+_1, z+_2, z+_3), (z-_1, z-_2, z-_3)) at t_span[0]; it
    must satisfy the moving-frame incompressibility k_t . z = 0 there.
    The right-hand side is the projected lift-up coupling (with its
    transport phase), the shear-pressure term that keeps the constraint
    invariant, and the exact viscous symbol -nu |k_t|^2.
    """
    k, eta, l = params.mode
    zp = tuple(complex(v) for v in init[0])
    zm = tuple(complex(v) for v in init[1])
    t0, h, n = _span_steps(t_span, dt or suggested_dt(params))

    def split_err(z, t):
        ky = eta - k * t
        n2 = k * k + ky * ky + l * l
        dot = k * z[0] + ky * z[1] + l * z[2]
        return abs(dot) / max(n2**0.5, 1.0)

    scale = max(max(abs(v) for v in zp + zm), 1e-300)
    if max(split_err(zp, t0), split_err(zm, t0)) > div_tol * scale:
        raise ValueError("initial data violates moving-frame incompressibility")

    nu, om = params.nu, params.omega

    def rhs(t, zp, zm):
        ky = eta - k * t
        n2 = k * k + ky * ky + l * l
        ph = cmath.exp(1j * om * t)
        out = []
        for s, (za, zb) in enumerate(((zp, zm), (zm, zp))):
            phase = ph if s == 0 else ph.conjugate()
            lift = phase * zb[1]
            # project -lift*e1, add shear pressure (k/n2) kt z2, viscous decay
            if n2 > 0:
                coef = (-lift * k) / n2  # k_t . (-lift e1) / |k_t|^2
                shear = k * za[1] / n2
                out.append(
                    (
                        -lift - k * coef + k * shear - nu * n2 * za[0],
                        -ky * coef + ky * shear - nu * n2 * za[1],
                        -l * coef + l * shear - nu * n2 * za[2],
                    )
                )
            else:
                out.append((0j, 0j, 0j))
        return out[0], out[1]

    def project(z, t):
        ky = eta - k * t
        n2 = k * k + ky * ky + l * l
        if n2 == 0:
            return z
        dot = (k * z[0] + ky * z[1] + l * z[2]) / n2
        return (z[0] - k * dot, z[1] - ky * dot, z[2] - l * dot)

    rec_idx = set(_record_times(t0, h, n, stride))
    times, values = [], []
    if 0 in rec_idx:
        times.append(t0)
        values.append(zp + zm)
    for i in range(n):
        t = t0 + i * h
        a_p, a_m = rhs(t, zp, zm)
        zp1 = tuple(z + 0.5 * h * a for z, a in zip(zp, a_p))
        zm1 = tuple(z + 0.5 * h * a for z, a in zip(zm, a_m))
        b_p, b_m = rhs(t + 0.5 * h, zp1, zm1)
        zp2 = tuple(z + 0.5 * h * b for z, b in zip(zp, b_p))
        zm2 = tuple(z + 0.5 * h * b for z, b in zip(zm, b_m))
        c_p, c_m = rhs(t + 0.5 * h, zp2, zm2)
        zp3 = tuple(z + h * c for z, c in zip(zp, c_p))
        zm3 = tuple(z + h * c for z, c in zip(zm, c_m))
        d_p, d_m = rhs(t + h, zp3, zm3)
        zp = tuple(
            z + (h / 6.0) * (a + 2 * b + 2 * c + d)
            for z, a, b, c, d in zip(zp, a_p, b_p, c_p, d_p)
        )
        zm = tuple(
            z + (h / 6.0) * (a + 2 * b + 2 * c + d)
            for z, a, b, c, d in zip(zm, a_m, b_m, c_m, d_m)
        )
        zp = project(zp, t + h)
        zm = project(zm, t + h)
        if (i + 1) in rec_idx:
            times.append(t0 + (i + 1) * h)
            values.append(zp + zm)
    return ModeTrajectory(np.array(times), np.array(values), "linear_full")


def evolve_F2_pair(
    params: LinParams, init, t_span, dt: float | None = None, stride: int = 64,
    coupled: bool = True,
) -> ModeTrajectory:
    """Integrate the second-component pair under stretch and oscillation.

    d/dt F± = -S(t) F± + S(t} e^{±i omega t} F∓ with
    S(t) = k(eta - kt)/|k_t|^2.  `coupled=False` drops the oscillating
    term, leaving the exactly solvable stretching envelope.
    """
    k, eta, l = params.mode
    if k == 0:
        raise ValueError("second-component system needs k != 0")
    fp, fm = complex(init[0]), complex(init[1])
    t0, h, n = _span_steps(t_span, dt or suggested_dt(params))
    om = params.omega
    a2 = k * k + l * l

    def rhs(t, fp, fm):
        ky = eta - k * t
        S = k * ky / (a2 + ky * ky)
        if coupled:
            ph = cmath.exp(1j * om * t)
            return (-S * fp + S * ph * fm, -S * fm + S * ph.conjugate() * fp)
        return (-S * fp, -S * fm)

    rec_idx = set(_record_times(t0, h, n, stride))
    times, values = [], []
    if 0 in rec_idx:
        times.append(t0)
        values.append((fp, fm))
    for i in range(n):
        t = t0 + i * h
        a0, a1 = rhs(t, fp, fm)
        b0, b1 = rhs(t + 0.5 * h, fp + 0.5 * h * a0, fm + 0.5 * h * a1)
        c0, c1 = rhs(t + 0.5 * h, fp + 0.5 * h * b0, fm + 0.5 * h * b1)
        d0, d1 = rhs(t + h, fp + h * c0, fm + h * c1)
        fp += (h / 6.0) * (a0 + 2 * b0 + 2 * c0 + d0)
        fm += (h / 6.0) * (a1 + 2 * b1 + 2 * c1 + d1)
        if (i + 1) in rec_idx:
            times.append(t0 + (i + 1) * h)
            values.append((fp, fm))
    return ModeTrajectory(np.array(times), np.array(values), "second_component")


def evolve_F13(
    params: LinParams, j: int, init, t_span, dt: float | None = None, stride: int = 64,
    f2_init=None,
) -> ModeTrajectory:
    """Integrate the first or third component with its doubled stretching.

    d/dt F±_j = -2 S(t) F±_j - [j=1] e^{±i omega t} F∓_2
                + (k_j k/|k_t|^2)(F±_2 + e^{±i omega t} F∓_2)
    driven by the second-component pair, which is co-integrated from
    `f2_init` (required; pass zeros for the pure-envelope case).  The
    trajectory holds the j components; index with values[:, 0:2].
    """
    if j not in (1, 3):
        raise ValueError("component must be 1 or 3")
    if f2_init is None:
        raise ValueError("second-component initial data is required as forcing")
    k, eta, l = params.mode
    if k == 0:
        raise ValueError("nonzero x-mode required")
    kj = k if j == 1 else l
    fp, fm = complex(init[0]), complex(init[1])
    gp, gm = complex(f2_init[0]), complex(f2_init[1])
    t0, h, n = _span_steps(t_span, dt or suggested_dt(params))
    om = params.omega
    a2 = k * k + l * l

    def rhs(t, y):
        fp, fm, gp, gm = y
        ky = eta - k * t
        n2 = a2 + ky * ky
        S = k * ky / n2
        ph = cmath.exp(1j * om * t)
        press = kj * k / n2
        dfp = -2 * S * fp - (ph * gm if j == 1 else 0j) + press * (gp + ph * gm)
        dfm = -2 * S * fm - (ph.conjugate() * gp if j == 1 else 0j) + press * (
            gm + ph.conjugate() * gp
        )
        dgp = -S * gp + S * ph * gm
        dgm = -S * gm + S * ph.conjugate() * gp
        return (dfp, dfm, dgp, dgm)

    y = (fp, fm, gp, gm)
    rec_idx = set(_record_times(t0, h, n, stride))
    times, values = [], []
    if 0 in rec_idx:
        times.append(t0)
        values.append(y)
    for i in range(n):
        t = t0 + i * h
        a = rhs(t, y)
        b = rhs(t + 0.5 * h, tuple(z + 0.5 * h * u for z, u in zip(y, a)))
        c = rhs(t + 0.5 * h, tuple(z + 0.5 * h * u for z, u in zip(y, b)))
        d = rhs(t + h, tuple(z + h * u for z, u in zip(y, c)))
        y = tuple(
            z + (h / 6.0) * (u + 2 * v + 2 * w + x)
            for z, u, v, w, x in zip(y, a, b, c, d)
        )
        if (i + 1) in rec_idx:
            times.append(t0 + (i + 1) * h)
            values.append(y)
    return ModeTrajectory(np.array(times), np.array(values), f"component_{j}")


def evolve_model(
    omega: float, init, t_span, dt: float | None = None, stride: int = 64
) -> ModeTrajectory:
    """Integrate the model oscillator d/dt F± - F±/t = e^{±i omega t} F∓/t.

    Posed for t >= 1 only; the 1/t coefficients are otherwise degenerate.
    """
    if t_span[0] < 1.0:
        raise ValueError("model system is posed for t >= 1 (degenerate 1/t)")
    fp, fm = complex(init[0]), complex(init[1])
    if dt is None:
        dt = min(0.01, 0.1 / (1.0 + abs(omega)))
    t0, h, n = _span_steps(t_span, dt)

    def rhs(t, fp, fm):
        ph = cmath.exp(1j * omega * t)
        return ((fp + ph * fm) / t, (fm + ph.conjugate() * fp) / t)

    rec_idx = set(_record_times(t0, h, n, stride))
    times, values = [], []
    if 0 in rec_idx:
        times.append(t0)
        values.append((fp, fm))
    for i in range(n):
        t = t0 + i * h
        a0, a1 = rhs(t, fp, fm)
        b0, b1 = rhs(t + 0.5 * h, fp + 0.5 * h * a0, fm + 0.5 * h * a1)
        c0, c1 = rhs(t + 0.5 * h, fp + 0.5 * h * b0, fm + 0.5 * h * b1)
        d0, d1 = rhs(t + h, fp + h * c0, fm + h * c1)
        fp += (h / 6.0) * (a0 + 2 * b0 + 2 * c0 + d0)
        fm += (h / 6.0) * (a1 + 2 * b1 + 2 * c1 + d1)
        if (i + 1) in rec_idx:
            times.append(t0 + (i + 1) * h)
            values.append((fp, fm))
    return ModeTrajectory(np.array(times), np.array(values), "model_oscillator")


def stretch_envelope(mode, t: float) -> float:
    """sqrt(|k_t|^2/|k_0|^2): the exact no-oscillation growth of F2."""
    k, eta, l = mode
    return float(
        np.sqrt((k * k + (eta - k * t) ** 2 + l * l) / (k * k + eta * eta + l * l))
    )


def fit_exponent(times, norms, window) -> float:
    """Log-log slope of norms(t) over the window (t_lo, t_hi)."""
    times = np.asarray(times, float)
    norms = np.asarray(norms, float)
    mask = (times >= window[0]) & (times <= window[1]) & (norms > 0)
    if mask.sum() < 2:
        raise ValueError("fit window contains fewer than two samples")
    return float(np.polyfit(np.log(times[mask]), np.log(norms[mask]), 1)[0])
