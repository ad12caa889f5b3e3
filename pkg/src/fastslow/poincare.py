"""Fast-slow Poincare maps from ODEs with one slowly drifting parameter.

Given a standard-form system  z' = f~(z, alpha, eps),  alpha' = eps g~(...)
whose frozen-alpha layer problem has a hyperbolic limit cycle, the first
return to a transverse section Delta = {y = Y(x, alpha)} (in adapted
coordinates z = (x, y) with scalar y) defines a fast-slow map on (x, alpha)
with slow dimension 1:

    N = (I_{n-1}; 0),   f(x, alpha) = xbar(x, alpha, 0) - x,
    eps G = full return displacement minus N f.

Returns are located with an adaptive high-order Runge-Kutta integrator
(dense output + directional root refinement on the section residual).
Derivatives of the return map come from integrating the variational
equations and projecting the monodromy matrix onto the section; finite
differences of an adaptively integrated flow carry too much noise for the
multiplier tolerances this module is held to.

The averaged slow drift g(phi0(alpha), alpha, 0) is the integral of g~ over
one layer cycle; its simple zeros mark the parameter values where the
perturbed system keeps a hyperbolic limit cycle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.integrate import solve_ivp

from .core import Domain, FastSlowMap, fd_jacobian
from .errors import NewtonDiverged, NoReturn, StepUnderflow, TangentialCrossing
from .models import CycleOde

DEFAULT_TOL = 1e-10


@dataclass(frozen=True)
class SectionSpec:
    """Section Delta = {(x, Y(x, alpha), alpha)} in adapted coordinates.

    ``direction`` is the sign of d/dt (y - Y) required at a crossing.
    ``dY`` returns (dY/dx, dY/dalpha); finite differences fill in when it is
    absent.  ``transversality_min`` is the smallest |d(sigma)/dt| accepted at
    a crossing.
    """

    Y: Callable
    v_x: tuple            # (lo, hi) arrays for the x block
    v_alpha: tuple        # (lo, hi) scalars
    direction: int = 1
    dY: Optional[Callable] = None
    transversality_min: float = 1e-6

    def y_derivs(self, x, alpha):
        if self.dY is not None:
            dx, da = self.dY(x, alpha)
            return np.atleast_1d(np.asarray(dx, dtype=float)), float(da)
        x = np.atleast_1d(np.asarray(x, dtype=float))
        h = 1e-7
        dx = np.empty(x.shape[0])
        for i in range(x.shape[0]):
            xp, xm = x.copy(), x.copy()
            xp[i] += h
            xm[i] -= h
            dx[i] = (self.Y(xp, alpha) - self.Y(xm, alpha)) / (2 * h)
        da = (self.Y(x, alpha + h) - self.Y(x, alpha - h)) / (2 * h)
        return dx, float(da)


def hopf_section(x_lo=0.05, x_hi=2.5, alpha_lo=0.02, alpha_hi=2.0):
    """Default section {y = 0, x > 0} for the planar oscillator."""
    return SectionSpec(
        Y=lambda x, alpha: 0.0,
        dY=lambda x, alpha: (np.zeros(np.atleast_1d(x).shape[0]), 0.0),
        v_x=(np.array([x_lo]), np.array([x_hi])),
        v_alpha=(alpha_lo, alpha_hi),
        direction=1,
    )


@dataclass(frozen=True)
class ReturnRecord:
    start: np.ndarray        # (x, alpha) on Delta
    landing: np.ndarray      # (x, alpha) on Delta
    time: float
    eps: float
    tol: float
    crossing_residual: float
    landing_full: np.ndarray = field(repr=False, default=None)


def _combined_field(ode: CycleOde, eps):
    m = ode.m

    def rhs(t, u):
        z, alpha = u[:m], u[m]
        du = np.empty(m + 1)
        du[:m] = ode.f_eval(z, alpha, eps)
        du[m] = eps * ode.g_eval(z, alpha, eps) if eps != 0.0 else 0.0
        return du

    return rhs


def _combined_jac(ode: CycleOde, eps):
    m = ode.m

    def jac(u):
        z, alpha = u[:m], u[m]
        out = np.zeros((m + 1, m + 1))
        if ode.jac_f is not None:
            out[:m, :] = np.asarray(ode.jac_f(z, alpha, eps), dtype=float)
        else:
            out[:m, :] = fd_jacobian(
                lambda w: np.asarray(ode.f_eval(w[:m], w[m], eps), dtype=float), u
            )
        if eps != 0.0:
            if ode.jac_g is not None:
                out[m, :] = eps * np.asarray(ode.jac_g(z, alpha, eps), dtype=float)
            else:
                out[m, :] = eps * fd_jacobian(
                    lambda w: np.atleast_1d(ode.g_eval(w[:m], w[m], eps)), u
                )[0]
        return out

    return jac


def integrate(ode: CycleOde, u0, eps, t_end, tol=DEFAULT_TOL, events=None):
    """Adaptive embedded Runge-Kutta integration of (z, alpha) with dense
    output; per-step tolerance ``tol`` both absolute and relative."""
    sol = solve_ivp(
        _combined_field(ode, eps),
        (0.0, float(t_end)),
        np.asarray(u0, dtype=float),
        method="DOP853",
        rtol=tol,
        atol=tol,
        dense_output=True,
        events=events,
    )
    if sol.status == -1:
        raise StepUnderflow(f"integration step failure: {sol.message}")
    return sol


def _section_residual(section, u, m):
    return u[m - 1] - section.Y(u[: m - 1], u[m])


def _sigma_dot(ode, section, u, eps):
    m = ode.m
    du = _combined_field(ode, eps)(0.0, u)
    dYdx, dYda = section.y_derivs(u[: m - 1], u[m])
    return du[m - 1] - float(dYdx @ du[: m - 1]) - dYda * du[m]


def _first_return(ode, section, u0, eps, tol, t_cap, t_blank):
    """Integrate from ``u0`` until the first directional section crossing
    after ``t_blank``; returns (landing u, time, residual)."""
    m = ode.m
    u0 = np.asarray(u0, dtype=float)
    t0 = 0.0
    u_start = u0
    if t_blank > 0.0:
        lead = integrate(ode, u0, eps, t_blank, tol=tol)
        u_start = lead.y[:, -1]
        t0 = t_blank

    def event(t, u):
        return _section_residual(section, u, m)

    event.terminal = True
    event.direction = float(section.direction)

    sol = solve_ivp(
        _combined_field(ode, eps),
        (t0, float(t_cap)),
        u_start,
        method="DOP853",
        rtol=tol,
        atol=tol,
        dense_output=True,
        events=event,
    )
    if sol.status == -1:
        raise StepUnderflow(f"integration step failure: {sol.message}")
    if sol.status != 1 or len(sol.t_events[0]) == 0:
        raise NoReturn(f"no directional section crossing within t = {t_cap}")
    t_hit = float(sol.t_events[0][0])
    u_hit = sol.y_events[0][0]
    sdot = _sigma_dot(ode, section, u_hit, eps)
    if abs(sdot) < section.transversality_min:
        raise TangentialCrossing(
            f"|d sigma/dt| = {abs(sdot):.2e} below margin {section.transversality_min:.1e}"
        )
    resid = abs(_section_residual(section, u_hit, m))
    return u_hit, t_hit, resid


def return_map(ode: CycleOde, section: SectionSpec, p, eps, tol=DEFAULT_TOL,
               t_cap=None, t_blank=None) -> ReturnRecord:
    """First return to Delta from the section point p = (x, alpha).

    The start is blanked for a fraction of the expected period so the
    departure itself (which sits on the section) is not reported as the
    return.  NoReturn is raised past ``t_cap`` (default ten periods).
    """
    m = ode.m
    p = np.asarray(p, dtype=float)
    x, alpha = p[: m - 1], p[m - 1]
    u0 = np.concatenate([x, [section.Y(x, alpha)], [alpha]])
    if t_cap is None:
        t_cap = 10.0 * ode.period_hint
    if t_blank is None:
        t_blank = 0.05 * ode.period_hint
    u_hit, t_hit, resid = _first_return(ode, section, u0, eps, tol, t_cap, t_blank)
    landing = np.concatenate([u_hit[: m - 1], [u_hit[m]]])
    return ReturnRecord(start=p, landing=landing, time=t_hit, eps=float(eps),
                        tol=tol, crossing_residual=resid, landing_full=u_hit)


def monodromy_return(ode: CycleOde, section: SectionSpec, p, eps, tol=DEFAULT_TOL,
                     t_cap=None, t_blank=None):
    """Return-map derivative via the variational equations.

    Integrates the flow together with M' = DF(u) M, then projects the
    monodromy matrix onto the section chart:

        D(landing) = (I - F grad(sigma)^T / sigma_dot) M Du0,

    restricted to the (x, alpha) rows.  Returns (DP, record) where DP is the
    (n_x+1) x (n_x+1) Jacobian of the section map.
    """
    m = ode.m
    nx = m - 1
    p = np.asarray(p, dtype=float)
    x, alpha = p[:nx], p[nx]
    u0 = np.concatenate([x, [section.Y(x, alpha)], [alpha]])
    if t_cap is None:
        t_cap = 10.0 * ode.period_hint
    if t_blank is None:
        t_blank = 0.05 * ode.period_hint
    dim = m + 1
    jac_u = _combined_jac(ode, eps)
    rhs_u = _combined_field(ode, eps)

    def rhs(t, w):
        u = w[:dim]
        M = w[dim:].reshape(dim, dim)
        dv = np.empty_like(w)
        dv[:dim] = rhs_u(t, u)
        dv[dim:] = (jac_u(u) @ M).ravel()
        return dv

    def event(t, w):
        return _section_residual(section, w[:dim], m)

    event.terminal = True
    event.direction = float(section.direction)

    w0 = np.concatenate([u0, np.eye(dim).ravel()])
    lead = solve_ivp(rhs, (0.0, t_blank), w0, method="DOP853", rtol=tol, atol=tol)
    if lead.status == -1:
        raise StepUnderflow(lead.message)
    sol = solve_ivp(rhs, (t_blank, t_cap), lead.y[:, -1], method="DOP853",
                    rtol=tol, atol=tol, events=event)
    if sol.status == -1:
        raise StepUnderflow(sol.message)
    if sol.status != 1 or len(sol.t_events[0]) == 0:
        raise NoReturn(f"no directional section crossing within t = {t_cap}")
    w_hit = sol.y_events[0][0]
    t_hit = float(sol.t_events[0][0])
    u_hit = w_hit[:dim]
    M = w_hit[dim:].reshape(dim, dim)

    dYdx0, dYda0 = section.y_derivs(x, alpha)
    Du0 = np.zeros((dim, nx + 1))
    Du0[:nx, :nx] = np.eye(nx)
    Du0[nx, :nx] = dYdx0
    Du0[nx, nx] = dYda0
    Du0[m, nx] = 1.0

    dYdxL, dYdaL = section.y_derivs(u_hit[:nx], u_hit[m])
    grad_sigma = np.concatenate([-dYdxL, [1.0], [-dYdaL]])
    F_L = rhs_u(t_hit, u_hit)
    denom = float(grad_sigma @ F_L)
    if abs(denom) < section.transversality_min:
        raise TangentialCrossing(f"|d sigma/dt| = {abs(denom):.2e} at crossing")
    W = M @ Du0
    Dtau = -(grad_sigma @ W) / denom
    DLand = W + np.outer(F_L, Dtau)
    rows = list(range(nx)) + [m]
    DP = DLand[rows, :]
    landing = np.concatenate([u_hit[:nx], [u_hit[m]]])
    record = ReturnRecord(start=p, landing=landing, time=t_hit, eps=float(eps),
                          tol=tol,
                          crossing_residual=abs(_section_residual(section, u_hit, m)),
                          landing_full=u_hit)
    return DP, record


def build_poincare_map(ode: CycleOde, section: SectionSpec, tol=DEFAULT_TOL,
                       eps_fd=1e-5) -> FastSlowMap:
    """Assemble the section return map as a FastSlowMap on (x, alpha).

    f is the eps = 0 x-displacement, G carries the fast remainder and the
    slow drift; ``direct_eval`` forwards straight to the return map so a map
    application costs one integration.  Df is registered analytically
    through the monodromy projection; the eps-derivative entering G at
    eps = 0 is one-sided with step ``eps_fd``.
    """
    nx = ode.m - 1
    n = nx + 1
    N_mat = np.vstack([np.eye(nx), np.zeros((1, nx))])

    def f_eval(z):
        rec = return_map(ode, section, z, 0.0, tol=tol)
        return rec.landing[:nx] - z[:nx]

    def df(z):
        DP, _ = monodromy_return(ode, section, z, 0.0, tol=tol)
        out = DP[:nx, :].copy()
        out[:, :nx] -= np.eye(nx)
        return out

    def direct_eval(z, eps):
        if eps == 0.0:
            rec = return_map(ode, section, z, 0.0, tol=tol)
            return np.concatenate([rec.landing[:nx], [z[nx]]])
        rec = return_map(ode, section, z, eps, tol=tol)
        return rec.landing

    def G_eval(z, eps):
        e = eps if eps > 0.0 else eps_fd
        he = return_map(ode, section, z, e, tol=tol).landing
        base = z + N_mat @ f_eval(z)
        return (he - base) / e

    lo = np.concatenate([np.asarray(section.v_x[0], dtype=float), [section.v_alpha[0]]])
    hi = np.concatenate([np.asarray(section.v_x[1], dtype=float), [section.v_alpha[1]]])
    return FastSlowMap(
        n=n,
        k=1,
        N_eval=lambda z: N_mat,
        f_eval=f_eval,
        G_eval=G_eval,
        df=df,
        dN=lambda z: np.zeros((n, nx, n)),
        direct_eval=direct_eval,
        domain=Domain(lo, hi),
        name=f"poincare:{ode.name}",
        params=dict(ode.params, tol=tol),
    )


def critical_point_x(ode, section, alpha, x_seed, tol=DEFAULT_TOL,
                     newton_tol=1e-11, accept_tol=1e-9, max_iter=15):
    """Newton solve of the layer return displacement f(x, alpha) = 0, i.e.
    the intersection of the cycle manifold with the section at this alpha."""
    nx = ode.m - 1
    x = np.atleast_1d(np.asarray(x_seed, dtype=float)).copy()
    best_x, best_r = x.copy(), np.inf
    for _ in range(max_iter):
        p = np.concatenate([x, [alpha]])
        rec = return_map(ode, section, p, 0.0, tol=tol)
        res = rec.landing[:nx] - x
        rnorm = float(np.max(np.abs(res)))
        if rnorm < best_r:
            best_x, best_r = x.copy(), rnorm
        if rnorm <= newton_tol:
            return x
        DP, _ = monodromy_return(ode, section, p, 0.0, tol=tol)
        jac = DP[:nx, :nx] - np.eye(nx)
        x = x + np.linalg.solve(jac, -res)
    if best_r <= accept_tol:
        return best_x
    raise NewtonDiverged(f"cycle-section Newton stalled at |f| = {best_r:.3e}")


def averaged_g(ode: CycleOde, section: SectionSpec, alpha, x_on_cycle=None,
               x_seed=None, tol=DEFAULT_TOL):
    """Average of the slow drift over one layer cycle through the section:
    the integral of g~ along the eps = 0 orbit from (phi0(alpha), Y, alpha)
    back to the section, computed by augmenting the integrator state."""
    nx = ode.m - 1
    if x_on_cycle is None:
        if x_seed is None:
            raise ValueError("need x_on_cycle or x_seed")
        x_on_cycle = critical_point_x(ode, section, alpha, x_seed, tol=tol)
    x = np.atleast_1d(np.asarray(x_on_cycle, dtype=float))
    u0 = np.concatenate([x, [section.Y(x, alpha)], [alpha], [0.0]])
    m = ode.m
    layer = _combined_field(ode, 0.0)

    def rhs(t, w):
        u = w[: m + 1]
        return np.concatenate([layer(t, u), [ode.g_eval(u[:m], u[m], 0.0)]])

    def event(t, w):
        return _section_residual(section, w[: m + 1], m)

    event.terminal = True
    event.direction = float(section.direction)

    t_blank = 0.05 * ode.period_hint
    lead = solve_ivp(rhs, (0.0, t_blank), u0, method="DOP853", rtol=tol, atol=tol)
    if lead.status == -1:
        raise StepUnderflow(lead.message)
    sol = solve_ivp(rhs, (t_blank, 10.0 * ode.period_hint), lead.y[:, -1],
                    method="DOP853", rtol=tol, atol=tol, events=event)
    if sol.status == -1:
        raise StepUnderflow(sol.message)
    if sol.status != 1 or len(sol.t_events[0]) == 0:
        raise NoReturn("layer cycle did not return to the section")
    return float(sol.y_events[0][0][-1])


def limit_cycle_condition(ode: CycleOde, section: SectionSpec, alpha_lo, alpha_hi,
                          num, x_seed, tol=DEFAULT_TOL, deriv_rel_step=1e-4,
                          hyperbolic_tol=1e-6):
    """Roots of the averaged drift over [alpha_lo, alpha_hi].

    Samples averaged_g on a grid (continuing the cycle point x(alpha) from
    node to node), refines each sign change by the secant method, and
    reports D_alpha g by central differences with step
    ``deriv_rel_step * (alpha_hi - alpha_lo)``.  A root is flagged
    hyperbolic when |D_alpha g| exceeds ``hyperbolic_tol``.
    """
    alphas = np.linspace(float(alpha_lo), float(alpha_hi), int(num))
    width = float(alpha_hi) - float(alpha_lo)
    xs = []
    gs = []
    x = np.atleast_1d(np.asarray(x_seed, dtype=float))
    for a in alphas:
        x = critical_point_x(ode, section, a, x, tol=tol)
        xs.append(x.copy())
        gs.append(averaged_g(ode, section, a, x_on_cycle=x, tol=tol))
    gs = np.asarray(gs)

    def g_at(a, seed):
        xx = critical_point_x(ode, section, a, seed, tol=tol)
        return averaged_g(ode, section, a, x_on_cycle=xx, tol=tol), xx

    hits = []
    for i in range(len(alphas) - 1):
        if gs[i] == 0.0 or gs[i] * gs[i + 1] < 0.0:
            a0, a1 = alphas[i], alphas[i + 1]
            g0, g1 = gs[i], gs[i + 1]
            seed = xs[i]
            for _ in range(60):
                if g1 == g0:
                    break
                a2 = a1 - g1 * (a1 - a0) / (g1 - g0)
                a2 = min(max(a2, alpha_lo), alpha_hi)
                g2, seed = g_at(a2, seed)
                a0, g0, a1, g1 = a1, g1, a2, g2
                if abs(g1) <= 10.0 * tol or abs(a1 - a0) <= 1e-14 * max(1.0, abs(a1)):
                    break
            a_root = a1
            h = deriv_rel_step * width
            gp, seed_p = g_at(min(a_root + h, alpha_hi + h), seed)
            gm, _ = g_at(max(a_root - h, alpha_lo - h), seed)
            dg = (gp - gm) / (2.0 * h)
            hits.append({
                "alpha": float(a_root),
                "d_alpha_g": float(dg),
                "hyperbolic": bool(abs(dg) > hyperbolic_tol),
            })
    return hits


def slow_fixed_point_alpha(pmap: FastSlowMap, s_eps_graph, eps):
    """Fixed point of the section map restricted to its numeric slow
    manifold: the root of alpha -> H^alpha(x(alpha), alpha) - alpha."""
    a_idx = s_eps_graph.x_idx[0]

    def psi(a):
        z = s_eps_graph.embed(np.array([a]))
        return float(pmap.evaluate(z, eps)[a_idx] - a)

    grid = s_eps_graph.grid
    vals = [psi(a) for a in grid]
    for i in range(len(grid) - 1):
        if vals[i] == 0.0:
            return float(grid[i])
        if vals[i] * vals[i + 1] < 0.0:
            a0, a1 = grid[i], grid[i + 1]
            f0, f1 = vals[i], vals[i + 1]
            for _ in range(80):
                am = 0.5 * (a0 + a1)
                fm = psi(am)
                if fm == 0.0 or (a1 - a0) < 1e-13:
                    return float(am)
                if f0 * fm < 0.0:
                    a1, f1 = am, fm
                else:
                    a0, f0 = am, fm
            return float(0.5 * (a0 + a1))
    raise NewtonDiverged("no sign change of the restricted slow map on the grid")


def cycle_manifold_residuals(ode: CycleOde, section: SectionSpec, s_eps_graph,
                             eps, phases=8, tol=DEFAULT_TOL):
    """Invariance proxy for the perturbed manifold of cycles.

    Each interior slow-manifold node is flowed (at this eps) to one of
    ``phases`` equally spaced fractions of its return time, producing
    section slices of the swept tube; continuing each slice point to the
    next section crossing must land back on the slow-manifold graph.
    Returns the matrix of landing residuals |x_land - phi_eps(alpha_land)|
    with shape (phases, interior nodes).
    """
    nx = ode.m - 1
    m = ode.m
    if s_eps_graph.interior_mask is not None:
        grid = s_eps_graph.grid[s_eps_graph.interior_mask]
    else:
        grid = s_eps_graph.grid
    resid = np.empty((int(phases), len(grid)))
    for i, a in enumerate(grid):
        z = s_eps_graph.embed(np.array([a]))
        x = z[:nx]
        u0 = np.concatenate([x, [section.Y(x, a)], [a]])
        rec = return_map(ode, section, np.concatenate([x, [a]]), eps, tol=tol)
        T = rec.time
        for j in range(int(phases)):
            frac = j / float(phases)
            if frac == 0.0:
                u_mid = u0
            else:
                leg = integrate(ode, u0, eps, frac * T, tol=tol)
                u_mid = leg.y[:, -1]
            blank = 0.05 * ode.period_hint if frac == 0.0 else 0.0
            u_land, _, _ = _first_return(ode, section, u_mid, eps, tol,
                                         t_cap=10.0 * ode.period_hint, t_blank=blank)
            a_land = u_land[m]
            x_land = u_land[:nx]
            phi_land = np.atleast_1d(s_eps_graph.phi(a_land))
            resid[j, i] = float(np.max(np.abs(x_land - phi_land)))
    return resid
