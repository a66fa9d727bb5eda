"""Grid construction, transforms, phases, and the moving projection."""

import numpy as np
import pytest

from couettemhd.spectral import (
    ElsasserState,
    Grid,
    divergence_error,
    leray_project_moving,
    make_grid,
    moving_wave_vector,
    project_mode,
    transport_phase,
)


class TestGrid:
    def test_wavenumber_sets(self):
        g = make_grid(8, 8, 8, 1.0)
        assert sorted(g.kx.astype(int)) == list(range(-3, 5))
        assert sorted((g.eta * g.ly).astype(int)) == list(range(-3, 5))
        assert list(g.kz.astype(int)) == [0, 1, 2, 3, 4]

    def test_eta_spacing(self):
        g = make_grid(8, 16, 8, 4.0)
        spacings = np.diff(np.sort(g.eta))
        assert np.allclose(spacings, 0.25)

    def test_odd_size_rejected(self):
        with pytest.raises(ValueError):
            make_grid(7, 8, 8, 1.0)
        with pytest.raises(ValueError):
            make_grid(8, 2, 8, 1.0)
        with pytest.raises(ValueError):
            make_grid(8, 8, 8, -1.0)

    def test_round_trip_transform(self):
        g = make_grid(16, 16, 16, 2.0)
        rng = np.random.default_rng(0)
        phys = rng.standard_normal(g.phys_shape)
        back = g.to_physical(g.to_spectral(phys))
        assert np.max(np.abs(back - phys)) < 1e-12 * np.max(np.abs(phys))

    def test_parseval(self):
        g = make_grid(16, 16, 16, 2.0)
        rng = np.random.default_rng(1)
        phys = rng.standard_normal(g.phys_shape)
        rms = np.sqrt(np.mean(phys**2))
        assert abs(g.l2_norm(g.to_spectral(phys)) - rms) < 1e-12 * rms


class TestMovingWaveVector:
    def test_critical_time(self):
        mv = moving_wave_vector((1, 2, 0), 2.0)
        assert mv.kt == (1.0, 0.0, 0.0)
        assert mv.norm_sq == 1.0

    def test_zero_x_mode_invariant(self):
        mv = moving_wave_vector((0, 3, 1), 100.0)
        assert mv.kt == (0.0, 3.0, 1.0)
        assert mv.norm_sq == 10.0

    def test_general(self):
        mv = moving_wave_vector((2, -1, 1), 1.0)
        assert mv.kt == (2.0, -3.0, 1.0)
        assert mv.norm_sq == 14.0


class TestTransportPhase:
    def test_resonant_direction(self):
        # sigma*k + l = 0 gives no transport for any amplitude or time
        sigma = 0.5
        for t in (0.0, 3.7, 100.0):
            assert transport_phase(11.3, (2, 5.0, -1), sigma, t) == 1.0

    def test_zero_x_mode_is_z_shift(self):
        # on k = 0 the phase depends on l alone, matching a pure z translation
        sigma = np.sqrt(2)
        a, t, l = 2.4, 1.3, 3
        ph = transport_phase(a, (0, 7.0, l), sigma, t)
        assert abs(ph - np.exp(1j * a * l * t)) < 1e-15

    def test_unit_modulus_and_inverse(self):
        rng = np.random.default_rng(2)
        for _ in range(1000):
            a, sigma, t = rng.standard_normal(3) * 10
            mode = (rng.integers(-8, 9), rng.standard_normal() * 8, rng.integers(-8, 9))
            ph = transport_phase(a, mode, sigma, t)
            assert abs(abs(ph) - 1.0) < 1e-14
            assert abs(ph * transport_phase(-a, mode, sigma, t) - 1.0) < 1e-14


class TestProjection:
    def test_parallel_part_removed(self):
        out = project_mode((1.0, 1.0, 0.0), (1.0, 0.0, 0.0))
        assert np.allclose(out, [0.0, 1.0, 0.0])

    def test_orthogonal_unchanged(self):
        v = np.array([0.0, 2.0, 1.0 + 1j])
        kt = np.array([1.0, 0.0, 0.0])
        assert np.allclose(project_mode(v, kt), v)

    def test_zero_mode_passthrough(self):
        v = np.array([1.0, 2.0, 3.0], dtype=complex)
        assert np.allclose(project_mode(v, (0.0, 0.0, 0.0)), v)

    def test_idempotent_and_divergence_free(self):
        g = make_grid(8, 8, 8, 4.0)
        rng = np.random.default_rng(3)
        v = rng.standard_normal((3,) + g.spec_shape) + 1j * rng.standard_normal(
            (3,) + g.spec_shape
        )
        for t in (0.0, 0.5, 7.0):
            p1 = leray_project_moving(g, v, t)
            p2 = leray_project_moving(g, p1, t)
            assert np.max(np.abs(p2 - p1)) < 1e-14 * np.max(np.abs(v))
            assert divergence_error(g, p1, t) < 1e-13 * np.max(np.abs(v)) * 20


class TestDealias:
    def test_retained_band_unchanged(self):
        g = make_grid(12, 12, 12, 1.0)
        f = np.zeros(g.spec_shape, dtype=complex)
        f[1, 2, 3] = 1.0 + 2.0j  # indices within |k| <= 4
        assert np.array_equal(g.dealias(f), f)

    def test_outside_band_zeroed(self):
        g = make_grid(12, 12, 12, 1.0)
        f = np.zeros(g.spec_shape, dtype=complex)
        f[5, 0, 0] = 1.0  # k = 5 > 12//3
        assert np.all(g.dealias(f) == 0)

    def test_quadratic_product_leaves_band(self):
        # two modes whose sum frequency lands outside the retained cube:
        # the product must vanish after dealiasing (convolution by hand)
        g = make_grid(12, 12, 12, 1.0)
        f = np.zeros(g.spec_shape, dtype=complex)
        h = np.zeros(g.spec_shape, dtype=complex)
        f[3, 0, 0] = 1.0
        f[-3, 0, 0] = 1.0  # cos(3x)
        h[2, 0, 0] = 0.5
        h[-2, 0, 0] = 0.5  # cos(2x)
        prod = g.to_spectral(g.to_physical(f) * g.to_physical(h))
        # convolution puts mass at k = 1 and k = 5; only k = 5 is outside
        assert abs(prod[5, 0, 0]) > 0.2
        deal = g.dealias(prod)
        assert deal[5, 0, 0] == 0
        assert abs(deal[1, 0, 0] - prod[1, 0, 0]) == 0


class TestElsasserState:
    def test_reality_error_detects_asymmetry(self):
        g = make_grid(8, 8, 8, 1.0)
        z = np.zeros((2, 3) + g.spec_shape, dtype=complex)
        state = ElsasserState(g, z, 0.0)
        assert state.reality_error() == 0.0
        z[0, 0, 1, 2, 0] = 1.0 + 1.0j  # l = 0 plane entry without its mirror
        assert state.reality_error() > 0.5
