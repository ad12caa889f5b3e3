"""Representation and evaluation of fast-slow maps in non-standard form.

A fast-slow map is a discrete dynamical system

    z  ->  z + N(z) f(z) + eps * G(z, eps),        z in R^n,

with an (n-k) x 1 fast part ``f``, an n x (n-k) matrix ``N`` of full column
rank along the critical manifold S = {f = 0}, and a perturbation term ``G``.
Everything downstream (spectra, manifolds, reduced dynamics) only needs the
evaluators collected here plus their derivatives, which are taken from
registered analytic Jacobians when available and central finite differences
otherwise.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import NewtonDiverged, NonFinite, StepUnderflow

_EPS_MACHINE = float(np.finfo(float).eps)


def _as_vector(z, n=None):
    z = np.asarray(z, dtype=float)
    if z.ndim != 1:
        z = z.reshape(-1)
    if n is not None and z.shape[0] != n:
        raise ValueError(f"expected a vector of length {n}, got shape {z.shape}")
    return z


def fd_step(z):
    """Per-coordinate central-difference step sqrt(machine eps) * max(1, |z_i|)."""
    z = np.asarray(z, dtype=float)
    step = np.sqrt(_EPS_MACHINE) * np.maximum(1.0, np.abs(z))
    floor = 16.0 * _EPS_MACHINE * np.abs(z)
    if np.any(step < floor):
        raise StepUnderflow("finite-difference step below 16*eps*|z|")
    return step


def fd_jacobian(func, z, step=None):
    """Central-difference Jacobian of a vector-valued ``func`` at ``z``."""
    z = np.asarray(z, dtype=float)
    if step is None:
        step = fd_step(z)
    f0 = np.atleast_1d(np.asarray(func(z), dtype=float))
    jac = np.empty((f0.shape[0], z.shape[0]))
    for i in range(z.shape[0]):
        zp = z.copy()
        zm = z.copy()
        zp[i] += step[i]
        zm[i] -= step[i]
        fp = np.atleast_1d(np.asarray(func(zp), dtype=float))
        fm = np.atleast_1d(np.asarray(func(zm), dtype=float))
        jac[:, i] = (fp - fm) / (zp[i] - zm[i])
    return jac


@dataclass(frozen=True)
class Domain:
    """Axis-aligned working box (the neighbourhood on which all local
    statements are made).  Iteration reports exit instead of extrapolating."""

    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "lo", np.asarray(self.lo, dtype=float))
        object.__setattr__(self, "hi", np.asarray(self.hi, dtype=float))
        if self.lo.shape != self.hi.shape or np.any(self.lo >= self.hi):
            raise ValueError("domain box needs lo < hi componentwise")

    def contains(self, z):
        z = np.asarray(z, dtype=float)
        return bool(np.all(z >= self.lo) and np.all(z <= self.hi))


@dataclass
class Trajectory:
    """Ordered iterates of a map, with eps, model id and per-point notes.

    ``points`` has shape (m, n) and satisfies points[i+1] = H(points[i], eps)
    to round-off for i < m-1.  ``exit_index`` is the index of the first point
    outside the domain box (iteration stops there); None if no exit.
    """

    model: str
    eps: float
    points: np.ndarray
    exit_index: Optional[int] = None
    dist_to_s_eps: Optional[np.ndarray] = None
    flags: Optional[list] = None

    def __len__(self):
        return self.points.shape[0]

    @property
    def w_range(self):
        return self.points.min(axis=0), self.points.max(axis=0)

    def to_csv(self, path):
        n = self.points.shape[1]
        cols = ["step"] + [f"z_{i}" for i in range(n)] + ["dist_to_S_eps", "flags"]
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("# schema: 1\n")
            fh.write(",".join(cols) + "\n")
            for i, p in enumerate(self.points):
                dist = ""
                if self.dist_to_s_eps is not None and np.isfinite(self.dist_to_s_eps[i]):
                    dist = format(self.dist_to_s_eps[i], ".17g")
                flag = ""
                if self.exit_index is not None and i == self.exit_index:
                    flag = "domain-exit"
                if self.flags is not None and self.flags[i]:
                    flag = self.flags[i] if not flag else flag + ";" + self.flags[i]
                row = [str(i)] + [format(x, ".17g") for x in p] + [dist, flag]
                fh.write(",".join(row) + "\n")


@dataclass(frozen=True)
class FastSlowMap:
    """A fast-slow map z -> z + N(z) f(z) + eps G(z, eps).

    Parameters
    ----------
    n, k : int
        Phase-space dimension and slow dimension, 0 < k < n.
    N_eval : callable z -> (n, n-k) array
    f_eval : callable z -> (n-k,) array
    G_eval : callable (z, eps) -> (n,) array
    df, dN, dG : optional analytic Jacobians.  ``df(z)`` is (n-k, n);
        ``dN(z)`` is an (n, n-k, n) tensor of N-derivatives; ``dG(z, eps)``
        is (n, n) of z-derivatives.  Missing entries fall back to central
        finite differences.
    direct_eval : optional callable (z, eps) -> (n,) evaluating the full map
        in one shot (used when assembling N f + eps G would be wasteful, e.g.
        Poincare maps whose pieces each require an integration).
    domain : working box; required for iteration exit reporting.

    The map object is immutable and all evaluations are pure; eps is always
    an explicit argument so eps-sweeps never rebuild the map.
    """

    n: int
    k: int
    N_eval: Callable
    f_eval: Callable
    G_eval: Callable
    domain: Domain
    df: Optional[Callable] = None
    dN: Optional[Callable] = None
    dG: Optional[Callable] = None
    direct_eval: Optional[Callable] = None
    name: str = "custom"
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if not (0 < self.k < self.n):
            raise ValueError("need 0 < k < n")

    # -- raw pieces ------------------------------------------------------

    def f(self, z):
        return np.atleast_1d(np.asarray(self.f_eval(_as_vector(z, self.n)), dtype=float))

    def N(self, z):
        N = np.asarray(self.N_eval(_as_vector(z, self.n)), dtype=float)
        return N.reshape(self.n, self.n - self.k)

    def G(self, z, eps):
        return np.atleast_1d(np.asarray(self.G_eval(_as_vector(z, self.n), float(eps)), dtype=float))

    def Df(self, z):
        """(n-k, n) Jacobian of f: analytic when registered, else central FD."""
        z = _as_vector(z, self.n)
        if self.df is not None:
            return np.asarray(self.df(z), dtype=float).reshape(self.n - self.k, self.n)
        return fd_jacobian(self.f_eval, z)

    def DfN(self, z):
        """The (n-k) x (n-k) matrix Df(z) N(z) whose eigenvalues shift the
        non-trivial multipliers off 1."""
        return self.Df(z) @ self.N(z)

    # -- map evaluation ---------------------------------------------------

    def evaluate(self, z, eps):
        """One application of the map.  Raises NonFinite on NaN/Inf output."""
        z = _as_vector(z, self.n)
        eps = float(eps)
        with np.errstate(all="ignore"):
            if self.direct_eval is not None:
                out = np.asarray(self.direct_eval(z, eps), dtype=float)
            else:
                out = z + self.N(z) @ self.f(z)
                if eps != 0.0:
                    out = out + eps * self.G(z, eps)
        if not np.all(np.isfinite(out)):
            raise NonFinite(f"map evaluation produced non-finite output at z={z}")
        return out

    def jacobian(self, z, eps):
        """Full n x n Jacobian DH(z, eps).

        Assembled from analytic pieces when df, dN and dG are all registered
        (dG only matters for eps != 0); otherwise central finite differences
        of ``evaluate``.  On S at eps = 0 this is I + N Df with k trivial
        unit multipliers.
        """
        z = _as_vector(z, self.n)
        eps = float(eps)
        have_analytic = (
            self.df is not None
            and self.dN is not None
            and (eps == 0.0 or self.dG is not None)
        )
        if have_analytic:
            fz = self.f(z)
            jac = np.eye(self.n) + self.N(z) @ self.Df(z)
            dN = np.asarray(self.dN(z), dtype=float).reshape(self.n, self.n - self.k, self.n)
            jac += np.einsum("ilj,l->ij", dN, fz)
            if eps != 0.0:
                jac += eps * np.asarray(self.dG(z, eps), dtype=float).reshape(self.n, self.n)
            return jac
        return fd_jacobian(lambda p: self.evaluate(p, eps), z)

    def iterate(self, z0, eps, steps, dist_fn=None):
        """Apply the map ``steps`` times from ``z0``.

        Stops early (recording the exit index) once an iterate leaves the
        domain box; the offending point is kept so the exit is visible.
        ``dist_fn`` optionally annotates each point (e.g. distance to a slow
        manifold graph).
        """
        z = _as_vector(z0, self.n)
        pts = np.empty((int(steps) + 1, self.n))
        pts[0] = z
        dists = None
        if dist_fn is not None:
            dists = np.full(int(steps) + 1, np.nan)
            dists[0] = dist_fn(z)
        exit_index = None
        m = 1
        for i in range(1, int(steps) + 1):
            z = self.evaluate(z, eps)
            pts[i] = z
            if dists is not None:
                dists[i] = dist_fn(z)
            m = i + 1
            if not self.domain.contains(z):
                exit_index = i
                break
        traj = Trajectory(
            model=self.name,
            eps=float(eps),
            points=pts[:m],
            exit_index=exit_index,
            dist_to_s_eps=None if dists is None else dists[:m],
        )
        return traj

    # -- assumption checks -------------------------------------------------

    def check_rank_assumptions(self, points, sv_tol=1e-10):
        """Verify full column rank of N and full row rank of Df at sampled
        points of {f = 0} via smallest singular values.

        Returns the minimum singular values found (min_sv_N, min_sv_Df).
        """
        min_n, min_df = np.inf, np.inf
        for z in np.atleast_2d(points):
            sN = np.linalg.svd(self.N(z), compute_uv=False)
            sD = np.linalg.svd(self.Df(z), compute_uv=False)
            min_n = min(min_n, sN[-1])
            min_df = min(min_df, sD[-1])
        if min_n < sv_tol:
            raise ValueError(f"N loses column rank on S (min sv {min_n:.3e})")
        if min_df < sv_tol:
            raise ValueError(f"Df loses row rank on S (min sv {min_df:.3e})")
        return min_n, min_df


def newton_invert(fsmap, target, eps, guess, tol=1e-12, max_iter=50):
    """Solve H(z, eps) = target by damped Newton (step halving).

    Seeded by ``guess``; raises NewtonDiverged after ``max_iter`` iterations
    or when damping cannot reduce the residual.
    """
    z = _as_vector(guess, fsmap.n)
    target = _as_vector(target, fsmap.n)
    res = fsmap.evaluate(z, eps) - target
    rnorm = float(np.max(np.abs(res)))
    for _ in range(max_iter):
        if rnorm <= tol:
            return z
        jac = fsmap.jacobian(z, eps)
        try:
            dz = np.linalg.solve(jac, -res)
        except np.linalg.LinAlgError as exc:
            raise NewtonDiverged(f"singular Jacobian in inverse solve: {exc}") from exc
        lam = 1.0
        for _ in range(40):
            z_new = z + lam * dz
            try:
                res_new = fsmap.evaluate(z_new, eps) - target
            except NonFinite:
                lam *= 0.5
                continue
            rnorm_new = float(np.max(np.abs(res_new)))
            if rnorm_new < rnorm or rnorm_new <= tol:
                break
            lam *= 0.5
        else:
            raise NewtonDiverged("damping failed to reduce residual in inverse solve")
        z, res, rnorm = z_new, res_new, rnorm_new
    if rnorm <= tol:
        return z
    raise NewtonDiverged(f"inverse solve stalled at residual {rnorm:.3e}")
