"""Moving-domain solver: stress condition, domain motion, remap, growth law."""

import math

import numpy as np
import pytest

from mhdlab import (FluidState, Geometry, GeometryCollapse, PhysParams,
                    Profile, Scheme, SolverSettings, Weight,
                    boundary_stress_residual, growth_check, integrate,
                    make_grid)
from mhdlab.diagnostics import DiagnosticsRecord
from mhdlab.freeboundary import (FreeStats, MovingGrid, advance_domain,
                                 enforce_boundary_stress, free_step,
                                 remap_state)


def params(mu=0.25, lam=0.0):
    return PhysParams(mu=mu, lam=lam, gamma=1.4, geometry=Geometry.DISK2D_FREE)


def free_state(mgrid, rho=None, u=None, P=None, B=None):
    n1 = mgrid.n + 1

    def pick(x):
        return np.zeros(n1) if x is None else np.asarray(x, dtype=float)

    return FluidState(rho=pick(rho), u=pick(u), P=pick(P), B=pick(B))


class TestStressResidual:
    def test_quiet_boundary(self):
        mg = MovingGrid(n=64, a=1.0, a0=1.0)
        st = free_state(mg, rho=np.ones(65))
        assert boundary_stress_residual(st, mg, params()) == 0.0

    def test_linear_velocity_closed_form(self):
        # u = c r: u_r + u/a = 2c at the boundary, residual -(2mu+lam) 2c
        mg = MovingGrid(n=128, a=1.0, a0=1.0)
        c = 0.4
        r = mg.xi * mg.a
        st = free_state(mg, rho=np.ones(129), u=c * r)
        p = params()
        assert boundary_stress_residual(st, mg, p) == pytest.approx(
            -p.two_mu_lam * 2.0 * c, rel=1e-12)

    def test_enforcement_zeroes_residual(self):
        mg = MovingGrid(n=128, a=1.0, a0=1.0)
        rng = np.random.default_rng(3)
        st = free_state(mg, rho=np.ones(129),
                        u=0.2 * np.sin(np.pi * mg.xi) * mg.xi,
                        P=np.full(129, 0.1) * (1 - mg.xi),
                        B=0.3 * mg.xi * (1 - mg.xi))
        p = params()
        enforce_boundary_stress(st, mg.grid(), p)
        scale = max(abs(st.P[-1]), p.two_mu_lam, 1.0)
        assert abs(boundary_stress_residual(st, mg, p)) <= 1e-12 * scale


class TestAdvanceDomain:
    def test_static_field(self):
        mg = MovingGrid(n=64, a=1.0, a0=1.0)
        st = free_state(mg, rho=np.ones(65))
        out = advance_domain(mg, st, 0.05)
        assert out.a == 1.0

    def test_constant_velocity_exact(self):
        mg = MovingGrid(n=64, a=1.0, a0=1.0)
        st = free_state(mg, u=np.full(65, 0.25))
        for _ in range(8):
            mg = advance_domain(mg, st, 0.05)
        assert mg.a == pytest.approx(1.0 + 0.25 * 0.4, rel=1e-13)

    def test_collapse_raises(self):
        mg = MovingGrid(n=64, a=0.1, a0=1.0)
        st = free_state(mg, u=np.full(65, -1.0))
        with pytest.raises(GeometryCollapse):
            advance_domain(mg, st, 0.2)


class TestRemap:
    def test_constant_fields_exact(self):
        old = MovingGrid(n=64, a=1.0, a0=1.0)
        new = MovingGrid(n=64, a=1.05, a0=1.0)
        st = free_state(old, rho=np.full(65, 2.0), P=np.full(65, 0.3))
        out = remap_state(st, old, new)
        assert np.allclose(out.rho, 2.0) and np.allclose(out.P, 0.3)

    def test_mass_defect_second_order(self):
        p_rho = Profile.parse("bump 0.2 0.8 1.0")
        defects = []
        for n in (128, 256):
            old = MovingGrid(n=n, a=1.0, a0=1.0)
            new = MovingGrid(n=n, a=1.02, a0=1.0)
            st = free_state(old, rho=1.0 + p_rho(old.xi))
            stats = FreeStats()
            remap_state(st, old, new, stats)
            defects.append(stats.remap_mass_defect)
        assert defects[0] / defects[1] > 3.0

    def test_pins_preserved(self):
        old = MovingGrid(n=64, a=1.0, a0=1.0)
        new = MovingGrid(n=64, a=0.98, a0=1.0)
        st = free_state(old, u=0.1 * old.xi, B=0.2 * old.xi)
        st.u[0] = st.B[0] = 0.0
        out = remap_state(st, old, new)
        assert out.u[0] == 0.0 and out.B[0] == 0.0


class TestGrowthCheck:
    def rec(self, t, a):
        return DiagnosticsRecord(t=t, energy=0.0, dissipation_cum=0.0,
                                 div_l2=0.0, max_gradu=0.0, dt=0.0,
                                 a_boundary=a)

    def test_quiescent_passes(self):
        hist = [self.rec(t, 1.0) for t in (0.0, 0.5, 1.0)]
        rep = growth_check(hist, a0=1.0, E0=2.0, p=params(mu=1.0))
        assert rep.passed
        # C = a0 + sqrt(E0/(2mu+lam)) = 1 + 1 = 2
        assert rep.envelope_constant == pytest.approx(2.0, rel=1e-13)

    def test_envelope_boundary_value(self):
        # a(t) = 1 + sqrt(t) exactly rides the envelope for E0=2, 2mu+lam=2
        hist = [self.rec(t, 1.0 + math.sqrt(t)) for t in (0.0, 0.3, 0.9)]
        rep = growth_check(hist, a0=1.0, E0=2.0, p=params(mu=1.0))
        assert rep.passed and abs(rep.worst_excess) < 1e-12

    def test_violation_detected(self):
        hist = [self.rec(t, 1.0 + 2.0 * math.sqrt(t)) for t in (0.0, 0.25, 1.0)]
        rep = growth_check(hist, a0=1.0, E0=2.0, p=params(mu=1.0))
        assert not rep.passed and rep.worst_excess > 0.9


class TestFreeStep:
    def test_quiescent_grid_static(self):
        mg = MovingGrid(n=64, a=1.0, a0=1.0)
        st = free_state(mg, rho=np.ones(65))
        p = params()
        out, mg2 = free_step(st, 1e-3, p, mg, SolverSettings())
        assert mg2.a == 1.0
        assert np.allclose(out.rho, 1.0)

    def test_stress_residual_tracked_small(self):
        mg = MovingGrid(n=128, a=1.0, a0=1.0)
        prof = Profile.parse("bump 0.2 0.7 0.5")
        st = free_state(mg, rho=np.ones(129), u=prof(mg.xi),
                        B=prof(mg.xi))
        p = params(mu=0.2)
        stats = FreeStats()
        s = SolverSettings(scheme=Scheme.RK2_IMPLICIT_VISCOUS)
        for _ in range(10):
            st, mg = free_step(st, 5e-4, p, mg, s, stats)
        assert stats.max_stress_residual_rel <= 1e-10

    def test_outflow_expands_domain(self):
        # boundary blob pushing outward moves a and conserves mass to remap error
        mg = MovingGrid(n=256, a=1.0, a0=1.0)
        r = mg.xi
        u0 = 0.3 * r ** 2
        st = free_state(mg, rho=np.ones(257), u=u0)
        st.u[0] = 0.0
        p = params(mu=0.3)
        s = SolverSettings(scheme=Scheme.RK2_IMPLICIT_VISCOUS)
        stats = FreeStats()
        m0 = integrate(st.rho, mg.grid(), Weight.RADIAL_R)
        for _ in range(40):
            st, mg = free_step(st, 1e-3, p, mg, s, stats)
        assert mg.a > 1.0
        m1 = integrate(st.rho, mg.grid(), Weight.RADIAL_R)
        assert abs(m1 - m0) / m0 < 1e-3

    def test_energy_identity_with_moving_boundary(self):
        # the stress condition kills all boundary work terms: with the
        # boundary genuinely travelling, E(t) + dissipation stays at E0
        from mhdlab import cfl_dt
        from mhdlab.diagnostics import dissipation_rate, total_energy
        from mhdlab.freeboundary import enforce_boundary_stress
        n = 512
        mg = MovingGrid(n=n, a=1.0, a0=1.0)
        xi = mg.xi
        p = params(mu=0.15)
        st = free_state(mg, rho=np.ones(n + 1), u=0.2 * xi * xi * (1.5 - xi),
                        P=0.3 * (1 - xi ** 2),
                        B=Profile.parse("bump 0.2 0.7 0.4")(xi))
        st.u[0] = st.B[0] = 0.0
        s = SolverSettings(scheme=Scheme.RK2_IMPLICIT_VISCOUS)
        stats = FreeStats()
        enforce_boundary_stress(st, mg.grid(), p)
        e0 = total_energy(st, mg.grid(), p)
        diss = 0.0
        d_prev = dissipation_rate(st, mg.grid(), p)
        while st.t < 0.5:
            grid = mg.grid()
            dt = min(cfl_dt(st, grid, p, s), 0.5 - st.t)
            st, mg = free_step(st, dt, p, mg, s, stats)
            d = dissipation_rate(st, mg.grid(), p)
            diss += 0.5 * (d_prev + d) * dt
            d_prev = d
        assert mg.a > 1.05                      # the boundary really moved
        e_final = total_energy(st, mg.grid(), p)
        assert abs(e_final + diss - e0) / e0 < 2e-3
        assert stats.max_stress_residual_rel < 1e-10
