"""NumPy implementation of the hot per-step kernels.

This is the fallback backend; `_core.pyx` holds the compiled twin. Both
evaluate the same expressions in the same order so results agree to within a
few ulps, and every physics test passes under either backend.

Shared conventions (uniform node grid r[0..N], dr = spacing):

* central first derivatives in the interior, second-order one-sided at the
  ends; fields pinned to zero at r=0 use (4 f[1] - f[2]) / (2 dr) there
* f/r at the axis is replaced by its limit f_r(0)
* mass and induction updates are finite-volume face-flux differences, so the
  discrete mass integral and the total of B are telescoping-exact when the
  boundary fluxes vanish
* `lf_fc` carries per-face Lax-Friedrichs coefficients (zero where disabled);
  `up_fc` marks faces that switch the mass flux to donor-cell form
"""

import numpy as np
from scipy.linalg import solve_banded

BACKEND_NAME = "pure"


def gradient(f, dr):
    """Second-order derivative: central interior, one-sided at both ends."""
    out = np.empty_like(f)
    out[1:-1] = (f[2:] - f[:-2]) / (2.0 * dr)
    out[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * dr)
    out[-1] = (3.0 * f[-1] - 4.0 * f[-2] + f[-3]) / (2.0 * dr)
    return out


def over_r(f, r, f_r0):
    """f/r with the axis value replaced by the limit f_r(0)."""
    out = np.empty_like(f)
    out[1:] = f[1:] / r[1:]
    out[0] = f_r0
    return out


def _face_flux_diff(flux, flux_in, flux_out, widths):
    """-(F_{i+1/2} - F_{i-1/2}) / width_i for node-centered control volumes."""
    n1 = len(widths)
    out = np.empty(n1)
    out[0] = -(flux[0] - flux_in) / widths[0]
    out[1:-1] = -(flux[1:] - flux[:-1]) / widths[1:-1]
    out[-1] = -(flux_out - flux[-1]) / widths[-1]
    return out


def disk_tendency(r, dr, rho, u, P, B, rho_star, two_mu_lam, gamma,
                  include_visc, lf_fc, up_fc):
    """Tendency arrays (drho, du, dP, dB) for the 2D radial system.

        rho_t = -(rho u)_r - rho u / r                     (face-flux form)
        u_t   = [-rho u u_r - P_r + (2mu+lam)(u_r + u/r)_r
                 - B (B_r + B/r)] / rho*
        P_t   = -u P_r - gamma P (u_r + u/r)
        B_t   = -(u B)_r                                   (face-flux form)
    """
    n = len(r) - 1
    ur = gradient(u, dr)
    ur[0] = (4.0 * u[1] - u[2]) / (2.0 * dr)      # u[0] = 0 pinned
    u_over_r = over_r(u, r, ur[0])
    div = ur + u_over_r

    Br = gradient(B, dr)
    Br[0] = (4.0 * B[1] - B[2]) / (2.0 * dr)
    B_over_r = over_r(B, r, Br[0])

    Pr = gradient(P, dr)

    # mass: faces between nodes j and j+1
    r_face = 0.5 * (r[:-1] + r[1:])
    mom = rho * u
    fv = 0.5 * (mom[:-1] + mom[1:])
    up = up_fc != 0
    if np.any(up):
        ubar = 0.5 * (u[:-1] + u[1:])
        donor = np.where(ubar >= 0.0, rho[:-1], rho[1:]) * ubar
        fv = np.where(up, donor, fv)
    G = r_face * fv - lf_fc * r_face * (rho[1:] - rho[:-1])
    vol = r * dr
    drho = np.empty(n + 1)
    drho[1:-1] = -(G[1:] - G[:-1]) / vol[1:-1]
    # point-value one-sided forms at both ends: node 0 has zero quadrature
    # weight and node N contributes O(dr^3) to the mass ledger, so the
    # interior telescoping is what conserves mass
    mom_r0 = (-3.0 * mom[0] + 4.0 * mom[1] - mom[2]) / (2.0 * dr)
    drho[0] = -2.0 * mom_r0
    mom_rn = (3.0 * mom[-1] - 4.0 * mom[-2] + mom[-3]) / (2.0 * dr)
    drho[-1] = -(mom_rn + mom[-1] / r[-1])

    # momentum
    visc = np.zeros_like(u)
    if include_visc:
        visc[1:-1] = ((u[2:] - 2.0 * u[1:-1] + u[:-2]) / (dr * dr)
                      + (u[2:] - u[:-2]) / (2.0 * dr * r[1:-1])
                      - u[1:-1] / (r[1:-1] * r[1:-1]))
    lorentz = B * (Br + B_over_r)
    du = (-rho * u * ur - Pr + two_mu_lam * visc - lorentz) / rho_star
    du[0] = 0.0
    du[-1] = 0.0

    # pressure (with band diffusion where lf_fc is active)
    dP = -u * Pr - gamma * P * div
    if np.any(lf_fc != 0.0):
        D = lf_fc * (P[1:] - P[:-1])
        widths = np.full(n + 1, dr)
        widths[0] = widths[-1] = 0.5 * dr
        dP += _face_flux_diff(-D, 0.0, 0.0, widths)

    # induction: faces in the interior, one-sided point form at the far end
    ub = u * B
    H = 0.5 * (ub[:-1] + ub[1:]) - lf_fc * (B[1:] - B[:-1])
    dB = np.empty(n + 1)
    dB[1:-1] = -(H[1:] - H[:-1]) / dr
    dB[0] = 0.0                                    # B(0) = 0 is exact
    dB[-1] = -(3.0 * ub[-1] - 4.0 * ub[-2] + ub[-3]) / (2.0 * dr)

    return drho, du, dP, dB


def cylinder_tendency(r, dr, rho, u, v, w, P, B, rho_star, two_mu_lam, mu,
                      gamma, include_visc, lf_fc, up_fc):
    """Disk tendency plus swirl/axial components of the cylindrical system.

        u_t gains + rho v^2 / r inside the rho-weighted bracket
        v_t = [-rho (u v_r + u v / r) + mu (v_r + v/r)_r] / rho*
        w_t = [-rho u w_r + mu (r w_r)_r / r] / rho*
    """
    drho, du, dP, dB = disk_tendency(r, dr, rho, u, P, B, rho_star, two_mu_lam,
                                     gamma, include_visc, lf_fc, up_fc)
    # centrifugal correction: v^2/r -> 0 at the axis since v(0) = 0
    centrif = np.zeros_like(u)
    centrif[1:] = rho[1:] * v[1:] * v[1:] / r[1:]
    du += centrif / rho_star
    du[0] = 0.0
    du[-1] = 0.0

    vr = gradient(v, dr)
    vr[0] = (4.0 * v[1] - v[2]) / (2.0 * dr)
    v_over_r = over_r(v, r, vr[0])
    visc_v = np.zeros_like(v)
    if include_visc:
        visc_v[1:-1] = ((v[2:] - 2.0 * v[1:-1] + v[:-2]) / (dr * dr)
                        + (v[2:] - v[:-2]) / (2.0 * dr * r[1:-1])
                        - v[1:-1] / (r[1:-1] * r[1:-1]))
    dv = (-rho * (u * vr + u * v_over_r) + mu * visc_v) / rho_star
    dv[0] = 0.0
    dv[-1] = 0.0

    wr = gradient(w, dr)
    visc_w = np.zeros_like(w)
    if include_visc:
        visc_w[1:-1] = ((w[2:] - 2.0 * w[1:-1] + w[:-2]) / (dr * dr)
                        + (w[2:] - w[:-2]) / (2.0 * dr * r[1:-1]))
        visc_w[0] = 4.0 * (w[1] - w[0]) / (dr * dr)   # 2 w_rr(0)
    dw = (-rho * u * wr + mu * visc_w) / rho_star
    dw[-1] = 0.0

    return drho, du, dv, dw, dP, dB


def thomas(sub, diag, sup, rhs):
    """Solve the tridiagonal system; sub/sup have length n-1.

    Raises ZeroDivisionError on singular systems (same contract as the
    compiled twin's elimination loop).
    """
    n = len(diag)
    ab = np.zeros((3, n))
    ab[0, 1:] = sup
    ab[1, :] = diag
    ab[2, :-1] = sub
    try:
        return solve_banded((1, 1), ab, rhs)
    except np.linalg.LinAlgError as exc:
        raise ZeroDivisionError(f"singular tridiagonal system: {exc}") from None
