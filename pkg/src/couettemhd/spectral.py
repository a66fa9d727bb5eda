"""Fourier grid, spectral containers, and moving-frame operators.

Everything downstream works on profile variables in the frame that moves
with the background shear, so the basic objects here are the wavenumber
tables, the time-shifted wave vector (k, eta - k*t, l), transport phases
exp(i*a*(sigma*k + l)*t), and the divergence-free projection taken with
respect to the moving gradient.

Conventions
-----------
The domain is [0, 2pi) x [0, 2pi*Ly) x [0, 2pi), so x/z wavenumbers are
integers and y wavenumbers are integer multiples of 1/Ly.  Derivatives
act as multiplication by i*(wavenumber).  Spectral arrays hold Fourier
coefficients normalised so that f(x) = sum_k fhat_k exp(i k.x), stored
in the half-spectrum layout (Nx, Ny, Nz//2 + 1) of a real-to-complex
transform along z (physical fields are real).  Sums over modes that
represent L2 quantities must use `Grid.mult`, which doubles the interior
z-planes.
"""

from __future__ import annotations

from dataclasses import dataclass, field
import numpy as np
import scipy.fft as _fft

FFT_WORKERS = 2


def _wavenumber_table(n: int) -> np.ndarray:
    """Integer wavenumbers in FFT storage order, Nyquist taken as +n/2."""
    k = np.fft.fftfreq(n, d=1.0 / n).astype(np.float64)
    k[n // 2] = n // 2
    return k


@dataclass(frozen=True)
class Grid:
    """Truncated Fourier grid for the shear-periodic box.

    Parameters
    ----------
    nx, ny, nz : int
        Modes per direction; even and >= 4.
    ly : float
        Aspect ratio of the y period relative to the unit x/z periods,
        so on-grid y wavenumbers are integers divided by ly.
    """

    nx: int
    ny: int
    nz: int
    ly: float = 4.0

    def __post_init__(self):
        for n, name in ((self.nx, "nx"), (self.ny, "ny"), (self.nz, "nz")):
            if n < 4 or n % 2 != 0:
                raise ValueError(f"{name}={n}: grid sizes must be even and >= 4")
        if self.ly <= 0:
            raise ValueError(f"ly={self.ly}: aspect ratio must be positive")
        object.__setattr__(self, "nzh", self.nz // 2 + 1)
        kx = _wavenumber_table(self.nx)
        eta = _wavenumber_table(self.ny) / self.ly
        kz = np.arange(self.nzh, dtype=np.float64)
        object.__setattr__(self, "kx", kx)
        object.__setattr__(self, "eta", eta)
        object.__setattr__(self, "kz", kz)
        # broadcastable symbol tables
        object.__setattr__(self, "KX", kx[:, None, None])
        object.__setattr__(self, "ETA", eta[None, :, None])
        object.__setattr__(self, "KZ", kz[None, None, :])
        # 2/3 rule: retain the inner cube of indices
        cx, cy, cz = self.nx // 3, self.ny // 3, self.nz // 3
        mask = (
            (np.abs(kx)[:, None, None] <= cx)
            & (np.abs(eta * self.ly)[None, :, None] <= cy)
            & (kz[None, None, :] <= cz)
        )
        object.__setattr__(self, "dealias_mask", mask)
        object.__setattr__(self, "cutoff", (cx, cy, cz))
        # multiplicity of each stored mode in full-spectrum sums
        mult = np.full(self.nzh, 2.0)
        mult[0] = 1.0
        if self.nz % 2 == 0:
            mult[-1] = 1.0
        object.__setattr__(self, "mult", mult[None, None, :])
        # l1 wavenumber magnitude |k| + |eta| + |l| and its Japanese bracket
        l1 = np.abs(kx)[:, None, None] + np.abs(eta)[None, :, None] + kz[None, None, :]
        object.__setattr__(self, "l1", l1)
        object.__setattr__(self, "bracket", np.sqrt(1.0 + l1 * l1))
        object.__setattr__(self, "spec_shape", (self.nx, self.ny, self.nzh))
        object.__setattr__(self, "phys_shape", (self.nx, self.ny, self.nz))
        object.__setattr__(self, "x", 2 * np.pi * np.arange(self.nx) / self.nx)
        object.__setattr__(self, "y", 2 * np.pi * self.ly * np.arange(self.ny) / self.ny)
        object.__setattr__(self, "z", 2 * np.pi * np.arange(self.nz) / self.nz)

    # -- transforms --------------------------------------------------

    def to_spectral(self, phys: np.ndarray) -> np.ndarray:
        """Fourier coefficients of a real field; leading axes are batch axes."""
        return _fft.rfftn(phys, axes=(-3, -2, -1), norm="forward", workers=FFT_WORKERS)

    def to_physical(self, spec: np.ndarray) -> np.ndarray:
        """Real field from coefficients; leading axes are batch axes."""
        return _fft.irfftn(
            spec, s=self.phys_shape, axes=(-3, -2, -1), norm="forward", workers=FFT_WORKERS
        )

    # -- moving-frame symbol tables ----------------------------------

    def eta_shifted(self, t: float) -> np.ndarray:
        """Sheared y wavenumber eta - k*t, shape (nx, ny, 1)."""
        return self.ETA - t * self.KX

    def kt_norm_sq(self, t: float) -> np.ndarray:
        """|k_t|^2 = k^2 + (eta - k t)^2 + l^2 over the grid."""
        return self.KX**2 + self.eta_shifted(t) ** 2 + self.KZ**2

    def dealias(self, spec: np.ndarray) -> np.ndarray:
        return spec * self.dealias_mask

    def l2_norm(self, spec: np.ndarray) -> float:
        """L2 norm (root mean square over the box) from coefficients.

        Sums over all leading axes, e.g. vector components.
        """
        return float(np.sqrt(np.sum(self.mult * np.abs(spec) ** 2)))


def make_grid(nx: int, ny: int, nz: int, ly: float = 4.0) -> Grid:
    return Grid(nx, ny, nz, ly)


# -- single-mode helpers ---------------------------------------------


@dataclass(frozen=True)
class MovingWaveVector:
    """The time-shifted wave vector of one mode."""

    kt: tuple[float, float, float]
    norm_sq: float


def moving_wave_vector(mode, t: float) -> MovingWaveVector:
    """(k, eta - k t, l) and its squared norm for a mode (k, eta, l)."""
    k, eta, l = mode
    ky = eta - k * t
    return MovingWaveVector((float(k), float(ky), float(l)), float(k * k + ky * ky + l * l))


def transport_phase(a: float, mode, sigma: float, t: float) -> complex:
    """Unit phase exp(i a (sigma k + l) t) of the field-line transport."""
    k, _, l = mode
    return complex(np.exp(1j * a * (sigma * k + l) * t))


def project_mode(v, kt) -> np.ndarray:
    """Remove from a 3-vector its component along k_t; (0,0,0) passes through."""
    v = np.asarray(v, dtype=complex)
    kt = np.asarray(kt, dtype=float)
    n2 = float(kt @ kt)
    if n2 == 0.0:
        return v
    return v - kt * ((kt @ v) / n2)


def leray_project_moving(grid: Grid, v: np.ndarray, t: float) -> np.ndarray:
    """Project a spectral 3-vector field onto moving-frame divergence-free part.

    `v` has shape (..., 3, nx, ny, nzh).  Per mode this is
    v - k_t (k_t . v)/|k_t|^2; the (0,0,0) mode is left unchanged.
    """
    ky = grid.eta_shifted(t)
    n2 = grid.KX**2 + ky**2 + grid.KZ**2
    inv = np.zeros_like(n2)
    np.divide(1.0, n2, out=inv, where=n2 > 0)
    dot = v[..., 0, :, :, :] * grid.KX + v[..., 1, :, :, :] * ky + v[..., 2, :, :, :] * grid.KZ
    coef = dot * inv
    out = v.copy()
    out[..., 0, :, :, :] -= grid.KX * coef
    out[..., 1, :, :, :] -= ky * coef
    out[..., 2, :, :, :] -= grid.KZ * coef
    return out


def divergence_error(grid: Grid, v: np.ndarray, t: float) -> float:
    """max over modes of |k_t . vhat| for a spectral 3-vector field."""
    ky = grid.eta_shifted(t)
    dot = v[..., 0, :, :, :] * grid.KX + v[..., 1, :, :, :] * ky + v[..., 2, :, :, :] * grid.KZ
    return float(np.max(np.abs(dot)))


# -- containers ------------------------------------------------------


@dataclass
class SpectralField:
    """Coefficients of one scalar component, tagged with time and a label."""

    grid: Grid
    data: np.ndarray
    time: float = 0.0
    label: str = ""

    def copy(self) -> "SpectralField":
        return SpectralField(self.grid, self.data.copy(), self.time, self.label)


@dataclass
class ElsasserState:
    """The pair of 3-component wave profiles advanced by the solver.

    `z` has shape (2, 3, nx, ny, nz//2+1); index 0 along the first axis
    is the co-propagating combination u - b, index 1 is u + b, both
    unwound by the shear and field-line transport.
    """

    grid: Grid
    z: np.ndarray
    time: float = 0.0

    @property
    def z_plus(self) -> np.ndarray:
        return self.z[0]

    @property
    def z_minus(self) -> np.ndarray:
        return self.z[1]

    def copy(self) -> "ElsasserState":
        return ElsasserState(self.grid, self.z.copy(), self.time)

    def divergence_error(self) -> float:
        return divergence_error(self.grid, self.z, self.time)

    def reality_error(self) -> float:
        """Deviation of the would-be physical field from being real.

        The half-spectrum layout makes the z direction real by
        construction; this checks Hermitian symmetry of the l = 0 and
        l = nz/2 planes, which the layout does not enforce.
        """
        err = 0.0
        for plane in (0, -1):
            a = self.z[..., plane]
            b = np.conj(a[..., ::-1, ::-1])
            b = np.roll(b, (1, 1), axis=(-2, -1))
            err = max(err, float(np.max(np.abs(a - b))))
        return err
