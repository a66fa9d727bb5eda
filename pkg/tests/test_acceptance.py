"""Acceptance gate: one test per criterion, one printed line per criterion.

The solver criteria share the three enhanced-dissipation runs at the
mandated 32x64x32 resolution (module-scoped fixture, ~15 minutes); all
other criteria run in seconds to a minute.  Tolerances are fixed here
and nowhere else.
"""

import math
import time

import numpy as np
import pytest

from couettemhd.diophantine import dioph_constant, inv_dsigma_magnitude
from couettemhd.experiments import fit_loglog_slope, fitted_efold_time
from couettemhd.linear_modes import (
    LinParams,
    evolve_F2_pair,
    evolve_F13,
    evolve_linear_full,
    evolve_model,
    fit_exponent,
    stretch_envelope,
)
from couettemhd.multipliers import (
    GHOST_FLOOR,
    MultiplierParams,
    verify_ghost_enhanced,
    verify_lemma_stretch,
)
from couettemhd.solver import SolverConfig, run_simulation
from couettemhd.spectral import Grid, leray_project_moving

SQRT2 = float(np.sqrt(2.0))
C_SQRT2 = 6.0 - 4.0 * SQRT2

ED_NUS = (1e-3, 1e-4, 1e-5)
ED_SLOPE_TOL = 0.07
DAMPING_FACTOR = 4.0
LIFTUP_FACTOR = 10.0
LIFTUP_SEEDS = (0, 1, 2, 3, 4)


@pytest.fixture
def criterion(capfd):
    """Context manager that always prints one pass/fail line per criterion."""
    from contextlib import contextmanager

    @contextmanager
    def _c(name):
        try:
            yield
        except BaseException:
            with capfd.disabled():
                print(f"\nACCEPTANCE[{name}]: FAIL")
            raise
        with capfd.disabled():
            print(f"\nACCEPTANCE[{name}]: PASS")

    return _c


# ---------------------------------------------------------------------
# multiplier lemma suite


def test_multiplier_lemma_suite(criterion):
    with criterion("multiplier-lemma-suite"):
        t0 = time.perf_counter()
        report = verify_lemma_stretch(MultiplierParams(nu=1e-3))
        assert report["passed"], report
        assert set(report["checks"]) == {
            "ordering", "xz_recovery", "floor_nu23", "floor_t2",
            "freq_shift", "tail_decay",
        }
        for name, chk in report["checks"].items():
            assert math.isfinite(chk["constant"]), name
        assert report["checks"]["ordering"]["constant"] <= 1e-12
        ghost = verify_ghost_enhanced([1e-2, 1e-4, 1e-6])
        assert ghost["ghost_min"] >= GHOST_FLOOR
        assert ghost["ghost_min"] <= 1.0
        assert ghost["rate_min_variation"] <= 0.10, ghost
        elapsed = time.perf_counter() - t0
        assert elapsed < 60.0, f"multiplier suite took {elapsed:.1f}s"


# ---------------------------------------------------------------------
# closed-form oracle suite


def test_closed_form_oracle_suite(criterion):
    with criterion("closed-form-oracle-suite"):
        # zero-mode oscillation amplitude |sin(a l t)|/(a l)
        p = LinParams(nu=0.0, alpha=1.0, sigma=SQRT2, mode=(0, 0.0, 1))
        traj = evolve_linear_full(p, ((0, 0, 0), (0, 1, 0)), (0.0, 12.0),
                                  dt=1e-3, stride=100)
        want = np.abs(np.sin(traj.times))
        err = np.max(np.abs(np.abs(traj.values[:, 0]) - want))
        assert err <= 1e-6 * max(1.0, float(np.max(want)))

        # alpha = 0 lift-up: streamwise mean is exactly -t
        p0 = LinParams(nu=0.0, alpha=0.0, sigma=SQRT2, mode=(0, 0.0, 1))
        traj = evolve_linear_full(p0, ((0, 1, 0), (0, 1, 0)), (0.0, 5.0),
                                  dt=1e-3, stride=100)
        u1 = (traj.values[:, 0] + traj.values[:, 3]) / 2
        assert np.max(np.abs(u1 + traj.times)) <= 1e-6 * 5.0

        # stretching envelope of the second component, oscillation off
        p2 = LinParams(nu=0.0, alpha=0.0, sigma=SQRT2, mode=(1, 4.0, 1))
        traj = evolve_F2_pair(p2, (1.0, 0.0), (0.0, 40.0), dt=1e-3, stride=200,
                              coupled=False)
        envs = np.array([stretch_envelope(p2.mode, t) for t in traj.times])
        rel = np.max(np.abs(np.abs(traj.values[:, 0]) - envs) / envs)
        assert rel <= 1e-6


# ---------------------------------------------------------------------
# rate dichotomies


def test_rate_dichotomies(criterion):
    with criterion("rate-dichotomies"):
        t0 = time.perf_counter()
        resonant = evolve_model(0.0, (1.0, 1.0), (1.0, 1000.0), stride=200)
        osc = evolve_model(10.0, (1.0, 1.0), (1.0, 1000.0), stride=200)
        e_res = fit_exponent(resonant.times, resonant.norms(), (100.0, 1000.0))
        e_osc = fit_exponent(osc.times, osc.norms(), (100.0, 1000.0))
        assert abs(e_res - 2.0) <= 0.1, e_res
        assert abs(e_osc - 1.0) <= 0.1, e_osc

        # strongly oscillating second-component pair grows at most linearly
        alpha = 10.0 / C_SQRT2
        p = LinParams(nu=0.0, alpha=alpha, sigma=SQRT2, mode=(1, 0.0, 1))
        traj = evolve_F2_pair(p, (1.0, 1.0), (0.0, 1000.0), stride=400)
        t, n = traj.times, traj.norms()
        early = np.max(n[(t >= 10) & (t <= 100)] / t[(t >= 10) & (t <= 100)])
        late = np.max(n[t >= 100] / t[t >= 100])
        assert late <= 3.0 * early, (early, late)

        # first/third components grow quadratically
        traj = evolve_F13(p, 1, (1.0, 1.0), (0.0, 1000.0), stride=400,
                          f2_init=(1.0, 1.0))
        n13 = np.sqrt(np.sum(np.abs(traj.values[:, :2]) ** 2, axis=1))
        e13 = fit_exponent(traj.times, n13, (10.0, 1000.0))
        assert abs(e13 - 2.0) <= 0.1, e13
        elapsed = time.perf_counter() - t0
        assert elapsed < 60.0, f"dichotomies took {elapsed:.1f}s"


# ---------------------------------------------------------------------
# nonlinear solver criteria (shared runs)


def _ed_config(nu, seed=0):
    return SolverConfig(
        nx=32, ny=64, nz=32, ly=4.0, nu=nu, alpha=2.0, sigma="sqrt2",
        epsilon=0.01 * nu, spectrum="pancake", peak_k=1.2,
        t_end=2.1 * nu ** (-1.0 / 3.0), dt_max=0.05, output_cadence=0.25,
        seed=seed,
    )


@pytest.fixture(scope="module")
def ed_runs():
    out = {}
    for nu in ED_NUS:
        res = run_simulation(_ed_config(nu))
        assert res.status == "completed", (nu, res.status)
        out[nu] = res
    return out


def test_enhanced_dissipation_scaling(ed_runs, criterion):
    with criterion("enhanced-dissipation-scaling"):
        t0 = time.perf_counter()
        taus = [fitted_efold_time(ed_runs[nu].records, nu) for nu in ED_NUS]
        slope, _ = fit_loglog_slope(ED_NUS, taus)
        print(f"\n  e-folding times {[round(x, 3) for x in taus]}, "
              f"slope {slope:.4f}")
        assert abs(slope + 1.0 / 3.0) <= ED_SLOPE_TOL, (taus, slope)
        total_runtime = sum(ed_runs[nu].runtime for nu in ED_NUS)
        assert total_runtime <= 1800.0, f"runs took {total_runtime:.0f}s"
        del t0


def test_inviscid_damping(ed_runs, criterion):
    # the compensated gradient metric stays bounded by 4x its t = 5 value
    # over [5, 2 nu^{-1/3}]; the one-sided reading is forced by enhanced
    # dissipation, which drives the metric far below the reference well
    # inside the window (min ratios are reported, not asserted)
    with criterion("inviscid-damping"):
        for nu in ED_NUS:
            recs = ed_runs[nu].records
            t = np.array([r.t for r in recs])
            dg = np.array([r.damp_grad for r in recs])
            ref = dg[np.argmin(np.abs(t - 5.0))]
            m = (t >= 5.0) & (t <= 2.0 * nu ** (-1.0 / 3.0))
            ratio_max = float(dg[m].max() / ref)
            ratio_min = float(dg[m].min() / ref)
            print(f"\n  nu={nu:g}: max ratio {ratio_max:.3f}, "
                  f"min ratio {ratio_min:.3f}")
            assert ratio_max <= DAMPING_FACTOR, (nu, ratio_max)


def test_liftup_suppression(criterion):
    with criterion("liftup-suppression"):
        nu = 1e-3
        horizon = 0.2 / nu
        for seed in LIFTUP_SEEDS:
            base = dict(nx=16, ny=32, nz=16, ly=2.0, nu=nu, sigma="sqrt2",
                        epsilon=0.01 * nu, peak_k=1.0, dt_max=0.05,
                        output_cadence=0.5, seed=seed)
            mag = run_simulation(SolverConfig(alpha=2.0, t_end=80.0, **base))
            ctl = run_simulation(SolverConfig(alpha=0.0, t_end=80.0, **base))
            assert mag.status == "completed" and ctl.status == "completed"
            zm = np.array([r.zero_ub for r in mag.records])
            zc = np.array([r.zero_ub for r in ctl.records])
            tc = np.array([r.t for r in ctl.records])
            ratio_mag = float(zm.max() / zm[0])
            crossings = tc[zc / zc[0] >= LIFTUP_FACTOR]
            assert ratio_mag <= LIFTUP_FACTOR, (seed, ratio_mag)
            assert crossings.size > 0, f"seed {seed}: control never crossed"
            assert crossings[0] < horizon, (seed, crossings[0])
            print(f"\n  seed {seed}: magnetized peak {ratio_mag:.2f}, "
                  f"control crossed at t={crossings[0]:.1f}")


# ---------------------------------------------------------------------
# diophantine certificates


def test_diophantine_certificates(criterion):
    with criterion("diophantine-certificates"):
        t0 = time.perf_counter()
        cert = dioph_constant("sqrt2", 1, 100000)
        assert cert.tail_method == "quadratic-irrational-exact"
        assert abs(cert.c - C_SQRT2) <= 1e-12
        # per-mode bound |sigma k + l| >= c/|k| for every |k| <= 1e4
        for k in range(1, 10001):
            gap = 1.0 / inv_dsigma_magnitude("sqrt2", (k, -round(k * SQRT2)))
            assert gap >= cert.c / k * (1 - 1e-9), k
        rat = dioph_constant("1/2", 1, 10)
        assert rat.c == 0.0
        assert (rat.best_p, rat.best_q) == (1, 2)
        assert "rational" in rat.warning
        elapsed = time.perf_counter() - t0
        assert elapsed < 120.0, f"certificates took {elapsed:.1f}s"


# ---------------------------------------------------------------------
# solver invariants


def test_solver_invariants(criterion):
    from test_solver import manufactured_forcing, _reform2_rhs
    from couettemhd.solver import InitSpec, Solver, initial_data

    with criterion("solver-invariants"):
        # divergence stays at 1e-10 through a nonlinear run
        g = Grid(16, 16, 16, 2.0)
        s = Solver(g, 1e-2, 1.0, SQRT2)
        st = initial_data(g, InitSpec(0.05, peak_k=2.0, seed=21))
        div_max = 0.0
        energy_ip_max = 0.0
        s0 = Solver(g, 0.0, 0.0, SQRT2)  # ideal, unmagnetized for the budget
        stn = initial_data(g, InitSpec(0.1, peak_k=2.0, seed=22))
        for i in range(40):
            st = s.step(st, 0.005)
            div_max = max(div_max, st.divergence_error())
            stn = s0.step(stn, 0.005)
            z = leray_project_moving(g, stn.z, stn.time)
            nl = s0.nonlinear_term(z, stn.time)
            ip = abs(float(np.sum(g.mult * np.real(np.conj(z) * nl))))
            scale = float(
                np.sqrt(np.sum(g.mult * np.abs(z) ** 2))
                * np.sqrt(np.sum(g.mult * np.abs(nl) ** 2))
            )
            energy_ip_max = max(energy_ip_max, ip / scale)
        assert div_max <= 1e-10, div_max
        assert energy_ip_max <= 1e-11, energy_ip_max

        # reformulation residual on a stored trajectory
        nu, alpha = 1e-2, 1.0
        s2 = Solver(g, nu, alpha, SQRT2)
        st2 = initial_data(g, InitSpec(0.05, peak_k=2.0, seed=13))
        dt = 0.004
        snaps = []
        for i in range(60):
            st2 = s2.step(st2, dt)
            st2.time = (i + 1) * dt
            if i >= 52:
                snaps.append(st2.copy())
        sm, sc, sp = snaps[2], snaps[3], snaps[4]

        def lap2(state):
            return -state.grid.kt_norm_sq(state.time) * state.z[:, 1]

        fd = (lap2(sp) - lap2(sm)) / (2 * dt)
        rhs = _reform2_rhs(g, sc, nu, alpha, SQRT2)
        resid = float(
            np.sqrt(np.sum(g.mult * np.abs(fd - rhs) ** 2))
            / np.sqrt(np.sum(g.mult * np.abs(rhs) ** 2))
        )
        assert resid <= 1e-3, resid

        # manufactured-solution convergence order
        g8 = Grid(8, 8, 8, 1.0)
        s3 = Solver(g8, 5e-2, 0.8, SQRT2)
        mf, forcing = manufactured_forcing(g8, s3)
        s3.forcing = forcing
        errs = []
        for n in (8, 16, 32):
            stm = mf.state(0.0)
            h = 0.4 / n
            for i in range(n):
                stm = s3.step(stm, h)
                stm.time = (i + 1) * h
            errs.append(np.max(np.abs(stm.z - mf.state(0.4).z)))
        orders = [math.log2(errs[i] / errs[i + 1]) for i in range(2)]
        assert min(orders) >= 3.8, (errs, orders)
        print(f"\n  divergence {div_max:.2e}, energy form {energy_ip_max:.2e}, "
              f"residual {resid:.2e}, orders {[round(o, 2) for o in orders]}")
