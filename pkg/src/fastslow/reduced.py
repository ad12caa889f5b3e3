"""Reduced and m-th-iterate dynamics on slow manifolds, fixed points, and
fiber contraction probes.

On a normally hyperbolic piece of S the full map restricted to the slow
manifold moves base points by eps * Pi(z) G(z, 0) up to O(eps^2), with Pi the
oblique projection along the fast fibers.  Composing m such steps collapses,
to the same order, to a single displacement eps * m * Pi(z) G(z, 0); the
remainder of the m-step composition is O(eps^2 m^2), which is why eps * m is
capped.  Fiber probes iterate a base point on the slow manifold together
with a transversally offset partner and record the per-step distance ratios,
whose tail is bounded by the spectral quantities of the branch.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import newton_invert
from .errors import AssumptionViolated, NewtonDiverged
from .manifold import DEFAULT_FOLD_TOL, projection
from .models import ChialvoParams, check_unique_equilibrium, chialvo_reduced_g
from .spectral import ON_MANIFOLD_TOL, require_on_manifold

DEFAULT_STABILITY_TOL = 1e-8
DEFAULT_EPS_M_CAP = 1.0


@dataclass(frozen=True)
class FixedPointReport:
    z: np.ndarray
    eps: float
    multipliers: np.ndarray     # full-map multipliers at z
    stability: str              # 'stable' | 'unstable' | 'saddle' | 'marginal'
    residual: float
    degenerate_on_s: bool = False  # eps = 0: every point of S is fixed


@dataclass(frozen=True)
class FiberRateReport:
    base: np.ndarray
    offset: np.ndarray
    inverse: bool
    distances: np.ndarray       # d_j = |H^j(xi) - H^j(z)|, j = 0..steps
    ratios: np.ndarray          # r_j = d_j / d_{j-1}
    chi: float                  # geometric mean of the valid post-transient ratios
    transient: int
    n_valid: int                # ratios beyond this index sit on the probe floor
    floor: float
    spectral_bound: Optional[float] = None

    @property
    def valid_ratios(self):
        return self.ratios[self.transient:self.n_valid]

    def to_dict(self):
        return {
            "base": self.base.tolist(),
            "offset": self.offset.tolist(),
            "inverse": self.inverse,
            "distances": self.distances.tolist(),
            "ratios": self.ratios.tolist(),
            "chi": self.chi,
            "transient": self.transient,
            "n_valid": self.n_valid,
            "floor": self.floor,
            "spectral_bound": self.spectral_bound,
        }


def reduced_step(fsmap, z, eps, fold_tol=DEFAULT_FOLD_TOL, on_tol=ON_MANIFOLD_TOL):
    """One step of the reduced map z -> z + eps * Pi(z) G(z, 0) for z on S."""
    z = np.asarray(z, dtype=float)
    if np.isfinite(on_tol):
        require_on_manifold(fsmap, z, on_tol)
    if eps == 0.0:
        return z.copy()
    pi = projection(fsmap, z, fold_tol=fold_tol)
    return z + eps * (pi @ fsmap.G(z, 0.0))


def mth_iterate_reduced(fsmap, z, eps, m, fold_tol=DEFAULT_FOLD_TOL,
                        on_tol=ON_MANIFOLD_TOL, eps_m_cap=DEFAULT_EPS_M_CAP):
    """Leading-order m-step displacement z -> z + eps * m * Pi(z) G(z, 0).

    The truncation error grows like O(eps^2 m^2), so eps * m is capped
    (default 1); beyond that the formula is no longer asymptotic.
    """
    m = int(m)
    if m < 1:
        raise ValueError("m must be a positive integer")
    if eps * m > eps_m_cap:
        raise ValueError(f"eps*m = {eps * m:.3g} exceeds the cap {eps_m_cap}")
    z = np.asarray(z, dtype=float)
    if np.isfinite(on_tol):
        require_on_manifold(fsmap, z, on_tol)
    if eps == 0.0:
        return z.copy()
    pi = projection(fsmap, z, fold_tol=fold_tol)
    return z + eps * m * (pi @ fsmap.G(z, 0.0))


def reduced_orbit(fsmap, s_graph, x0, eps, steps, fold_tol=DEFAULT_FOLD_TOL):
    """Iterate the reduced map within S, re-embedding on the critical graph
    after each step (the graph coordinate carries the slow dynamics).

    Returns the (<= steps+1, n) array of on-S points; stops early if the
    graph coordinate leaves the grid.
    """
    x = float(x0)
    out = np.empty((int(steps) + 1, fsmap.n))
    out[0] = s_graph.embed(np.array([x]))
    for i in range(1, int(steps) + 1):
        z = out[i - 1]
        z_new = reduced_step(fsmap, z, eps, fold_tol=fold_tol, on_tol=np.inf)
        x = float(z_new[s_graph.x_idx[0]])
        if not s_graph.contains_x(x):
            return out[:i]
        out[i] = s_graph.embed(np.array([x]))
    return out


def classify_fixed_point(multipliers, tol=DEFAULT_STABILITY_TOL):
    moduli = np.abs(np.atleast_1d(multipliers))
    if np.any(np.abs(moduli - 1.0) <= tol):
        return "marginal"
    if np.all(moduli < 1.0):
        return "stable"
    if np.all(moduli > 1.0):
        return "unstable"
    return "saddle"


def find_fixed_point(fsmap, guess, eps, tol=1e-12, max_iter=50,
                     stability_tol=DEFAULT_STABILITY_TOL):
    """Newton solve of H(z, eps) = z, classified by the full-map multipliers.

    At eps = 0 every point of S is fixed (k trivial unit multipliers), so the
    guess is projected onto S along the fast directions instead and the
    report is flagged degenerate.
    """
    eps = float(eps)
    if eps == 0.0:
        z = _project_to_s(fsmap, np.asarray(guess, dtype=float), tol=tol, max_iter=max_iter)
        mus = np.linalg.eigvals(fsmap.jacobian(z, 0.0))
        resid = float(np.max(np.abs(fsmap.evaluate(z, 0.0) - z)))
        return FixedPointReport(z=z, eps=0.0, multipliers=mus, stability="marginal",
                                residual=resid, degenerate_on_s=True)
    z = _newton_fixed_point(fsmap, guess, eps, tol, max_iter)
    mus = np.linalg.eigvals(fsmap.jacobian(z, eps))
    resid = float(np.max(np.abs(fsmap.evaluate(z, eps) - z)))
    return FixedPointReport(z=z, eps=eps, multipliers=mus,
                            stability=classify_fixed_point(mus, stability_tol),
                            residual=resid)


def _newton_fixed_point(fsmap, guess, eps, tol, max_iter):
    z = np.asarray(guess, dtype=float).copy()
    res = fsmap.evaluate(z, eps) - z
    rnorm = float(np.max(np.abs(res)))
    eye = np.eye(fsmap.n)
    for _ in range(max_iter):
        if rnorm <= tol:
            return z
        jac = fsmap.jacobian(z, eps) - eye
        try:
            dz = np.linalg.solve(jac, -res)
        except np.linalg.LinAlgError as exc:
            raise NewtonDiverged(f"singular Jacobian in fixed-point solve: {exc}") from exc
        lam = 1.0
        for _ in range(40):
            z_new = z + lam * dz
            res_new = fsmap.evaluate(z_new, eps) - z_new
            rnorm_new = float(np.max(np.abs(res_new)))
            if rnorm_new < rnorm or rnorm_new <= tol:
                break
            lam *= 0.5
        else:
            raise NewtonDiverged("damping failed in fixed-point solve")
        z, res, rnorm = z_new, res_new, rnorm_new
    if rnorm <= tol:
        return z
    raise NewtonDiverged(f"fixed-point Newton stalled at residual {rnorm:.3e}")


def _project_to_s(fsmap, z, tol=1e-12, max_iter=50):
    """Newton in the fast offsets: move z along col(N) until f = 0."""
    z = z.copy()
    for _ in range(max_iter):
        res = fsmap.f(z)
        if np.max(np.abs(res)) <= tol:
            return z
        jac = fsmap.Df(z) @ fsmap.N(z)
        u = np.linalg.solve(jac, -res)
        z = z + fsmap.N(z) @ u
    raise NewtonDiverged("projection onto S stalled")


def chialvo_equilibrium_v(a, b, c, k, tol=1e-12, strict=True):
    """Unique root v* in (k, inf) of the reduced drift
    c - (b + a) v - a ln((v - k)/v^2) = 0, by bracketing and bisection.

    The drift tends to +inf as v -> k+ and to -inf as v -> inf, so a bracket
    always exists; uniqueness is guaranteed by the monotonicity condition
    checked by ``check_unique_equilibrium`` (AssumptionViolated otherwise).
    ``strict=False`` skips that check and brackets anyway: the condition is
    sufficient, not necessary, and fails for parameter sets whose drift has
    a positive local minimum near k while the root stays unique (the
    chaotic-bursting reference set is one); with a genuinely multi-root
    drift the non-strict mode returns one root without further guarantees.
    """
    params = ChialvoParams(a=a, b=b, c=c, k=k)
    ok, witness = check_unique_equilibrium(params)
    if strict and not ok:
        raise AssumptionViolated(f"drift not strictly decreasing: {witness['branch']}")

    def g(v):
        return float(chialvo_reduced_g(v, params))

    lo = k + 1e-12 if k > 0 else 1e-12
    while g(lo) <= 0.0:
        lo = k + (lo - k) * 0.5  # approach k until the +inf side shows
        if lo - k < 1e-300:
            raise AssumptionViolated("could not bracket the equilibrium near v = k")
    hi = max(2.0 * k, 1.0)
    while g(hi) >= 0.0:
        hi *= 2.0
        if hi > 1e12:
            raise AssumptionViolated("could not bracket the equilibrium at large v")
    mid = 0.5 * (lo + hi)
    for _ in range(400):
        mid = 0.5 * (lo + hi)
        gm = g(mid)
        if abs(gm) <= tol or (hi - lo) <= 1e-16 * max(1.0, abs(mid)):
            return mid
        if gm > 0.0:
            lo = mid
        else:
            hi = mid
    return mid


def fiber_rate_probe(fsmap, z_eps, eps, offset, steps, inverse=False, transient=3,
                     spectral_bound=None, max_offset=1e-4, floor_rel=None):
    """Iterate a slow-manifold base point and an offset partner, recording
    per-step distance ratios r_j and the fitted rate chi.

    chi is the geometric mean of the valid post-transient ratios.  Two
    windows are excluded from the fit, both measurement honesty rather than
    theorem content: the first ``transient`` ratios (contraction bounds are
    uniform, not monotone from step one), and everything after the pair
    distance falls below the probe floor.  The floor exists because a
    straight offset along col(N) misses the true invariant fiber by
    O(eps * |offset|): once the transverse separation has contracted to that
    level the pair distance measures the fiber tilt, not fiber contraction.
    Default floor is ``50 * eps * |offset|``.

    ``inverse=True`` iterates backward via damped Newton solves of
    H(z, eps) = target and is only meaningful on repelling (backward
    invariant) branches.  The caller is responsible for ``z_eps`` lying on
    the numeric slow manifold (to ~1e-10) and for |offset| <= ``max_offset``
    so the probe stays inside the locally invariant neighbourhood.
    """
    z = np.asarray(z_eps, dtype=float).copy()
    offset = np.asarray(offset, dtype=float)
    if float(np.max(np.abs(offset))) > max_offset:
        raise ValueError(f"|offset| exceeds {max_offset:.1e}; probe must stay local")
    xi = z + offset
    steps = int(steps)
    dists = np.empty(steps + 1)
    dists[0] = float(np.linalg.norm(xi - z))
    if floor_rel is None:
        floor_rel = 50.0 * eps
    floor = floor_rel * dists[0]
    z_guess, xi_guess = z.copy(), xi.copy()
    for j in range(1, steps + 1):
        if inverse:
            z_new = newton_invert(fsmap, z, eps, z_guess)
            xi_new = newton_invert(fsmap, xi, eps, xi_guess)
        else:
            z_new = fsmap.evaluate(z, eps)
            xi_new = fsmap.evaluate(xi, eps)
        z_guess, xi_guess = z, xi
        z, xi = z_new, xi_new
        dists[j] = float(np.linalg.norm(xi - z))
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = dists[1:] / dists[:-1]
    below = np.flatnonzero(dists < floor)
    n_valid = int(below[0]) if below.size else steps
    tail = ratios[transient:n_valid]
    tail = tail[np.isfinite(tail) & (tail > 0)]
    chi = float(np.exp(np.mean(np.log(tail)))) if tail.size else float("nan")
    return FiberRateReport(
        base=np.asarray(z_eps, dtype=float),
        offset=offset,
        inverse=inverse,
        distances=dists,
        ratios=ratios,
        chi=chi,
        transient=transient,
        n_valid=n_valid,
        floor=floor,
        spectral_bound=spectral_bound,
    )
