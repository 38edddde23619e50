"""Successive linearization of the disk system over a short time window.

Each sweep freezes the transport velocity at the previous iterate's velocity
trajectory V and integrates the linear system

    rho_t + (rho V)_r + rho V / r = 0
    rho (u_t + V u_r) + P_r = (2mu+lam)(u_r + u/r)_r - B (B_r + B/r)
    P_t + V P_r + gamma P (V_r + V/r) = 0
    B_t + (V B)_r = 0

with the same spatial discretization as the nonlinear solver (SSP-RK3 in
time, fixed step over the window so successive iterates share their time
grid). The sweep-to-sweep contraction functional

    phi(t) = |rho~|^2 + |P~|^2 + |B~|^2 + |sqrt(rho) u~|^2     (r-weighted L2)

drives the stopping rule; at the fixed point V equals the solution velocity
and the linear system coincides with the nonlinear one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List

import numpy as np

from . import _kernels as kern
from .core import FluidState, Geometry, PhysParams, RadialGrid, Weight, integrate
from .errors import ConfigError
from .solver import Scheme, SolverSettings, cfl_dt

_DIVERGENCE_STRIKES = 3


@dataclass
class PicardReport:
    iterations: int = 0
    sup_phis: List[float] = field(default_factory=list)
    ratios: List[float] = field(default_factory=list)
    converged: bool = False
    diverged: bool = False
    n_steps: int = 0
    dt: float = 0.0

    @property
    def contraction_ratio(self) -> float:
        """Geometric mean of the observed sweep-to-sweep ratios."""
        usable = [r for r in self.ratios if r > 0.0 and math.isfinite(r)]
        if not usable:
            return 0.0
        return float(np.exp(np.mean(np.log(usable))))


def _linear_tendency(y: FluidState, V: np.ndarray, p: PhysParams,
                     grid: RadialGrid, eps_vac: float):
    r = grid.nodes
    dr = grid.dr
    n = grid.n_cells
    rho_star = np.maximum(y.rho, eps_vac)

    Vr = kern.gradient(V, dr)
    Vr0 = (4.0 * V[1] - V[2]) / (2.0 * dr)
    Vor = kern.over_r(V, r, Vr0)
    ur = kern.gradient(y.u, dr)
    ur[0] = (4.0 * y.u[1] - y.u[2]) / (2.0 * dr)
    Br = kern.gradient(y.B, dr)
    Br[0] = (4.0 * y.B[1] - y.B[2]) / (2.0 * dr)
    Bor = kern.over_r(y.B, r, Br[0])
    Pr = kern.gradient(y.P, dr)

    # mass and induction: interior flux form transported by V, one-sided
    # point forms at the ends (same boundary treatment as the nonlinear rhs)
    r_face = 0.5 * (r[:-1] + r[1:])
    mom = y.rho * V
    G = r_face * 0.5 * (mom[:-1] + mom[1:])
    vol = r * dr
    drho = np.empty(n + 1)
    drho[1:-1] = -(G[1:] - G[:-1]) / vol[1:-1]
    drho[0] = -2.0 * (-3.0 * mom[0] + 4.0 * mom[1] - mom[2]) / (2.0 * dr)
    drho[-1] = -((3.0 * mom[-1] - 4.0 * mom[-2] + mom[-3]) / (2.0 * dr)
                 + mom[-1] / r[-1])

    vb = V * y.B
    H = 0.5 * (vb[:-1] + vb[1:])
    dB = np.empty(n + 1)
    dB[0] = 0.0
    dB[1:-1] = -(H[1:] - H[:-1]) / dr
    dB[-1] = -(3.0 * vb[-1] - 4.0 * vb[-2] + vb[-3]) / (2.0 * dr)

    visc = np.zeros_like(y.u)
    visc[1:-1] = ((y.u[2:] - 2.0 * y.u[1:-1] + y.u[:-2]) / (dr * dr)
                  + (y.u[2:] - y.u[:-2]) / (2.0 * dr * r[1:-1])
                  - y.u[1:-1] / (r[1:-1] * r[1:-1]))
    du = (-y.rho * V * ur - Pr + p.two_mu_lam * visc
          - y.B * (Br + Bor)) / rho_star
    du[0] = du[-1] = 0.0

    dP = -V * Pr - p.gamma * y.P * (Vr + Vor)
    return drho, du, dP, dB


def _pin(y: FluidState) -> None:
    y.u[0] = 0.0
    y.B[0] = 0.0
    y.u[-1] = 0.0


def _sweep(state0: FluidState, v_traj, dt: float, n_steps: int, p: PhysParams,
           grid: RadialGrid, eps_vac: float):
    """Integrate the linear system over the window against a frozen V trajectory.

    Returns (trajectory, finite): a sweep that leaves the floating-point range
    is truncated (remaining snapshots repeat the last state) and flagged.
    """

    traj = [state0.copy()]
    y = state0.copy()
    for k in range(n_steps):
        v_lo, v_hi = v_traj[k], v_traj[k + 1]
        v_mid = 0.5 * (v_lo + v_hi)

        d = _linear_tendency(y, v_lo, p, grid, eps_vac)
        y1 = FluidState(rho=y.rho + dt * d[0], u=y.u + dt * d[1],
                        P=y.P + dt * d[2], B=y.B + dt * d[3], t=y.t + dt)
        _pin(y1)
        d = _linear_tendency(y1, v_hi, p, grid, eps_vac)
        y2 = FluidState(rho=0.75 * y.rho + 0.25 * (y1.rho + dt * d[0]),
                        u=0.75 * y.u + 0.25 * (y1.u + dt * d[1]),
                        P=0.75 * y.P + 0.25 * (y1.P + dt * d[2]),
                        B=0.75 * y.B + 0.25 * (y1.B + dt * d[3]),
                        t=y.t + 0.5 * dt)
        _pin(y2)
        d = _linear_tendency(y2, v_mid, p, grid, eps_vac)
        y = FluidState(rho=(y.rho + 2.0 * (y2.rho + dt * d[0])) / 3.0,
                       u=(y.u + 2.0 * (y2.u + dt * d[1])) / 3.0,
                       P=(y.P + 2.0 * (y2.P + dt * d[2])) / 3.0,
                       B=(y.B + 2.0 * (y2.B + dt * d[3])) / 3.0,
                       t=y.t + dt)
        _pin(y)
        if not all(np.all(np.isfinite(arr)) for _, arr in y.fields()):
            traj.extend(y.copy() for _ in range(n_steps - k))
            return traj, False
        traj.append(y.copy())
    return traj, True


def _phi(a: FluidState, b: FluidState, grid: RadialGrid) -> float:
    d_rho = a.rho - b.rho
    d_u = a.u - b.u
    d_p = a.P - b.P
    d_b = a.B - b.B
    return (integrate(d_rho * d_rho, grid, Weight.RADIAL_R)
            + integrate(d_p * d_p, grid, Weight.RADIAL_R)
            + integrate(d_b * d_b, grid, Weight.RADIAL_R)
            + integrate(a.rho * d_u * d_u, grid, Weight.RADIAL_R))


def picard_iterate(state0: FluidState, T_window: float, k_max: int, tol: float,
                   p: PhysParams, grid: RadialGrid, s: SolverSettings):
    """Successive linearization from state0 over [0, T_window].

    Returns (trajectory, report): the last sweep's states at the shared step
    times, and the iteration log. Divergence (sup phi growing three sweeps in
    a row) stops early and reports the best sweep.
    """
    if p.geometry is not Geometry.DISK2D:
        raise ConfigError("the linearized sweep is defined for disk2d")
    if T_window <= 0.0:
        raise ConfigError(f"window must be positive, got {T_window}")
    state0 = state0.copy()
    state0.t = 0.0

    explicit = SolverSettings(cfl=s.cfl, scheme=Scheme.SSPRK3_EXPLICIT_VISCOUS,
                              vacuum_strategy=s.vacuum_strategy, eps_vac=s.eps_vac,
                              blowup_gradu_max=s.blowup_gradu_max, dt_min=s.dt_min)
    dt0 = cfl_dt(state0, grid, p, explicit)
    n_steps = max(1, int(math.ceil(T_window / min(dt0, T_window))))
    dt = T_window / n_steps

    report = PicardReport(n_steps=n_steps, dt=dt)
    # sweep 0: transport field frozen at the initial velocity
    v_traj = [state0.u.copy() for _ in range(n_steps + 1)]
    prev_traj = [state0.copy() for _ in range(n_steps + 1)]

    best_traj = prev_traj
    best_phi = math.inf
    strikes = 0
    for it in range(1, k_max + 1):
        # overflowing sweeps are reported as divergence, not warning spam
        with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
            traj, finite = _sweep(state0, v_traj, dt, n_steps, p, grid, s.eps_vac)
            sup_phi = (max(_phi(a, b, grid) for a, b in zip(traj, prev_traj))
                       if finite else math.inf)
        report.iterations = it
        blown = not (finite and math.isfinite(sup_phi))
        if report.sup_phis:
            last = report.sup_phis[-1]
            report.ratios.append(sup_phi / last if last > 0.0 else 0.0)
        report.sup_phis.append(sup_phi)
        if not blown and sup_phi < best_phi:
            best_phi = sup_phi
            best_traj = traj
        if not blown and sup_phi < tol:
            report.converged = True
            return traj, report
        grew = blown or (len(report.sup_phis) >= 2
                         and sup_phi > report.sup_phis[-2])
        strikes = strikes + 1 if grew else 0
        if strikes >= _DIVERGENCE_STRIKES:
            report.diverged = True
            return best_traj, report
        prev_traj = traj
        v_traj = [st.u.copy() for st in traj]
    return best_traj, report
