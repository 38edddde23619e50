"""Moving-domain variant of the disk solver for the free-surface problem.

The fluid occupies [0, a(t)] with a'(t) = u(a(t), t) and the stress condition

    F = B^2/2 + P - (2mu+lam)(u_r + u/r) = 0   at r = a(t),

enforced strongly every stage by solving the one-sided second-order
discretization of F = 0 for the boundary velocity itself (a Robin relation:
u_N appears in both u_r and u/r). Mesh motion is affine: the reference nodes
xi in [0,1] scale with a(t), the physical grid stays uniform, and after each
step the fields are remapped onto the rescaled radii by piecewise-linear
interpolation with the mass/flux remap defect logged.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .core import (FluidState, PhysParams, RadialGrid, Weight, integrate,
                   integrate_to, make_grid)
from .errors import GeometryCollapse
from .solver import SolverSettings, StepStats, step as fixed_step
from .vacuum import advance_radius


@dataclass
class MovingGrid:
    """Affinely moving uniform grid: physical node radii are xi * a."""

    n: int
    a: float
    a0: float

    def __post_init__(self):
        if self.a <= 0.0:
            raise GeometryCollapse(f"free boundary radius collapsed to a={self.a}")

    @property
    def xi(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.n + 1)

    def grid(self) -> RadialGrid:
        return make_grid(self.n, self.a)


@dataclass
class FreeStats(StepStats):
    remap_mass_defect: float = 0.0
    remap_flux_defect: float = 0.0
    max_stress_residual_rel: float = 0.0


def _residual_and_scale(state: FluidState, grid: RadialGrid, p: PhysParams):
    dr = grid.dr
    a = grid.r_outer
    u = state.u
    ur = (3.0 * u[-1] - 4.0 * u[-2] + u[-3]) / (2.0 * dr)
    stress_mag = 0.5 * state.B[-1] ** 2 + state.P[-1]
    residual = stress_mag - p.two_mu_lam * (ur + u[-1] / a)
    scale = max(stress_mag, p.two_mu_lam * (abs(ur) + abs(u[-1]) / a), 1e-30)
    return residual, scale


def boundary_stress_residual(state: FluidState, mgrid: MovingGrid,
                             p: PhysParams) -> float:
    """F = B^2/2 + P - (2mu+lam)(u_r + u/a) at r = a, one-sided second order."""
    residual, _ = _residual_and_scale(state, mgrid.grid(), p)
    return residual


def stress_scale(state: FluidState, mgrid: MovingGrid, p: PhysParams) -> float:
    """Magnitude reference for the boundary stress condition."""
    _, scale = _residual_and_scale(state, mgrid.grid(), p)
    return scale


def enforce_boundary_stress(state: FluidState, grid: RadialGrid,
                            p: PhysParams) -> None:
    """Solve F(a) = 0 for u_N; mutates the state in place."""
    dr = grid.dr
    a = grid.r_outer
    u = state.u
    target = (0.5 * state.B[-1] ** 2 + state.P[-1]) / p.two_mu_lam
    coeff = 3.0 / (2.0 * dr) + 1.0 / a
    u[-1] = (target + (4.0 * u[-2] - u[-3]) / (2.0 * dr)) / coeff


def advance_domain(mgrid: MovingGrid, state: FluidState, dt: float) -> MovingGrid:
    """Advance a by the midpoint rule on the boundary velocity of the frozen field."""
    grid = mgrid.grid()
    a_new = advance_radius(state.u, grid, mgrid.a, dt)
    if a_new <= 0.0:
        raise GeometryCollapse(f"free boundary radius collapsed to a={a_new}")
    return MovingGrid(n=mgrid.n, a=a_new, a0=mgrid.a0)


def remap_state(state: FluidState, mgrid_old: MovingGrid, mgrid_new: MovingGrid,
                stats: Optional[FreeStats] = None) -> FluidState:
    """Resample all fields at the rescaled node radii (linear interpolation).

    np.interp extends by the end values, so the thin freshly-uncovered strip
    at an expanding boundary inherits the old boundary state; the resulting
    mass and flux defects are measured and accumulated.
    """
    r_old = mgrid_old.xi * mgrid_old.a
    r_new = mgrid_new.xi * mgrid_new.a
    grid_old = mgrid_old.grid()
    grid_new = mgrid_new.grid()
    out = FluidState(
        rho=np.interp(r_new, r_old, state.rho),
        u=np.interp(r_new, r_old, state.u),
        P=np.interp(r_new, r_old, state.P),
        B=np.interp(r_new, r_old, state.B),
        t=state.t,
        v=None if state.v is None else np.interp(r_new, r_old, state.v),
        w=None if state.w is None else np.interp(r_new, r_old, state.w),
    )
    out.u[0] = 0.0
    out.B[0] = 0.0
    if stats is not None:
        # defect of the interpolation itself, measured on the overlap domain
        # (the uncovered/truncated strip belongs to the boundary-flux budget)
        a_min = min(mgrid_old.a, mgrid_new.a)
        stats.remap_mass_defect += abs(
            integrate_to(out.rho * r_new, grid_new, a_min, Weight.PLAIN)
            - integrate_to(state.rho * r_old, grid_old, a_min, Weight.PLAIN))
        stats.remap_flux_defect += abs(
            integrate_to(out.B, grid_new, a_min, Weight.PLAIN)
            - integrate_to(state.B, grid_old, a_min, Weight.PLAIN))
    return out


def free_step(state: FluidState, dt: float, p: PhysParams, mgrid: MovingGrid,
              s: SolverSettings, stats: Optional[FreeStats] = None):
    """One step of the moving-domain solver; returns (state, mgrid).

    The PDE step runs on the frozen current grid with the stress condition
    enforced after every stage; the boundary then moves with the midpoint
    rule on the time-centered velocity field, and the fields are remapped
    onto the rescaled radii.
    """
    grid = mgrid.grid()

    def free_bc(st: FluidState) -> None:
        enforce_boundary_stress(st, grid, p)
        if stats is not None:
            residual, scale = _residual_and_scale(st, grid, p)
            stats.max_stress_residual_rel = max(stats.max_stress_residual_rel,
                                                abs(residual) / scale)

    new_state = fixed_step(state, dt, p, grid, s, stats=stats, free_bc=free_bc)
    u_mid = FluidState(rho=new_state.rho, u=0.5 * (state.u + new_state.u),
                       P=new_state.P, B=new_state.B, t=state.t)
    mgrid_new = advance_domain(mgrid, u_mid, dt)
    new_state = remap_state(new_state, mgrid, mgrid_new, stats)
    enforce_boundary_stress(new_state, mgrid_new.grid(), p)
    return new_state, mgrid_new


@dataclass(frozen=True)
class GrowthReport:
    passed: bool
    worst_excess: float      # max over records of a(t) - envelope(t)
    envelope_constant: float  # C = a0 + sqrt(E0/(2mu+lam))


def growth_check(history: Sequence, a0: float, E0: float,
                 p: PhysParams, slack: float = 1e-8) -> GrowthReport:
    """Verify a(t) <= a0 + sqrt(t E0/(2mu+lam)) + slack on every record."""
    worst = -math.inf
    for rec in history:
        if rec.a_boundary is None:
            continue
        envelope = a0 + math.sqrt(max(rec.t, 0.0) * E0 / p.two_mu_lam)
        worst = max(worst, rec.a_boundary - envelope)
    c_env = a0 + math.sqrt(E0 / p.two_mu_lam)
    return GrowthReport(passed=(worst <= slack), worst_excess=worst,
                        envelope_constant=c_env)
