"""Critical-manifold continuation, the fiber projection, and slow manifolds.

The critical manifold S = {f = 0} is continued as a graph y = phi0(x) over a
chosen subset of the coordinates (for the neuron map the graph runs over the
fast variable v; nothing here assumes the graph coordinate is slow in the
standard-form sense).  Two slow-manifold constructions are provided:

* the first-order formula
      phi_eps(x) = phi0(x) - eps (D_y f)^-1 (Df N)^-1 Df G |_(x, phi0(x)),
  exact up to O(eps^2), and

* a numerically exact invariant graph obtained as the fixed point of the
  graph transform: push the current graph through the map (or through the
  Newton-inverse branch for repelling pieces), re-interpolate the image as a
  graph over the same grid, repeat until the sup-norm update stalls below
  tolerance.  Boundary nodes receive one-sided extrapolated updates, so
  invariance residuals are only meaningful on interior nodes.

Between any two locally invariant slow manifolds over the same branch the
distance is beyond all polynomial orders in eps; the graph-transform fixed
point on a fixed grid is *the* manifold this toolkit reports.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional

import numpy as np
from scipy.interpolate import CubicSpline, interp1d

from .core import newton_invert
from .errors import (
    FoldSingularity,
    MaxIterations,
    NewtonDiverged,
    NotContracting,
    SingularJacobian,
)

DEFAULT_FOLD_TOL = 1e-4


def _interpolator(x, values, order):
    if order == "cubic" and len(x) >= 4:
        return CubicSpline(x, values, axis=0, extrapolate=True)
    return interp1d(x, values, axis=0, kind="linear", fill_value="extrapolate")


@dataclass(frozen=True)
class GraphManifold:
    """A k-dimensional manifold stored as a graph y = phi(x).

    ``x_idx`` / ``y_idx`` name which coordinates of z parameterize the graph
    and which are its values.  The grid is uniform; interpolation is cubic
    (not-a-knot) with a linear fallback below 4 nodes.  ``eps`` tags which
    manifold this is (0 for the critical manifold).  Only one-dimensional
    grids are supported by the numeric machinery; every built-in model has a
    single graph coordinate.
    """

    n: int
    x_idx: tuple
    y_idx: tuple
    grid: np.ndarray          # (num,) uniform nodes
    values: np.ndarray        # (num, n - len(x_idx))
    eps: float = 0.0
    interp_order: str = "cubic"
    interior_mask: Optional[np.ndarray] = None  # False on inflow boundary strip

    def __post_init__(self):
        if len(self.x_idx) != 1:
            raise NotImplementedError("graph machinery is implemented for 1-D grids")
        object.__setattr__(self, "grid", np.asarray(self.grid, dtype=float))
        vals = np.asarray(self.values, dtype=float).reshape(len(self.grid), -1)
        object.__setattr__(self, "values", vals)

    @property
    def num(self):
        return self.grid.shape[0]

    def _phi(self):
        return _interpolator(self.grid, self.values, self.interp_order)

    def phi(self, x):
        """Interpolated graph values at scalar or array x."""
        return self._phi()(x)

    def embed(self, x, y=None):
        """Assemble the full phase-space point(s) for graph coordinate x."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        y = self.phi(x) if y is None else np.asarray(y, dtype=float).reshape(len(x), -1)
        z = np.empty((x.shape[0], self.n))
        z[:, self.x_idx[0]] = x
        for j, idx in enumerate(self.y_idx):
            z[:, idx] = y[:, j]
        return z[0] if z.shape[0] == 1 else z

    def sample_points(self):
        """All grid nodes embedded in phase space, shape (num, n)."""
        return np.atleast_2d(self.embed(self.grid))

    def contains_x(self, x):
        return bool(np.all(x >= self.grid[0]) and np.all(x <= self.grid[-1]))

    def distance_to(self, other, interior_only=True):
        """Sup-norm distance between graphs sharing the same grid.

        Boundary-strip nodes (one-sided updates, see slow_manifold_numeric)
        are excluded by default whenever either graph carries a mask.
        """
        if other.num != self.num or not np.allclose(other.grid, self.grid):
            raise ValueError("graphs must share their grid")
        diff = np.abs(self.values - other.values)
        if interior_only:
            mask = np.ones(self.num, dtype=bool)
            if self.interior_mask is not None:
                mask &= self.interior_mask
            if other.interior_mask is not None:
                mask &= other.interior_mask
            diff = diff[mask]
        return float(np.max(diff))

    def offset_of(self, z):
        """Transverse offset |y - phi(x)| of a phase-space point."""
        z = np.asarray(z, dtype=float)
        x = z[self.x_idx[0]]
        y = np.array([z[i] for i in self.y_idx])
        return float(np.max(np.abs(y - np.atleast_1d(self.phi(x)))))


def complement_indices(n, x_idx):
    return tuple(i for i in range(n) if i not in set(x_idx))


def solve_critical_graph(fsmap, x_idx, lo, hi, num, y_seed, y_idx=None,
                         tol=1e-12, max_iter=50, det_tol=1e-12, max_jump=1.0,
                         fold_det_tol=1e-3):
    """Continue the branch of {f = 0} through (x_0, y_seed) as a graph.

    Per-node Newton solve of f(x, y) = 0 in the y coordinates, each solution
    seeding the next node.  A fold of the branch in this chart (D_y f
    singular) is reported as SingularJacobian, detected three ways: the hard
    in-loop trigger |det D_y f| < ``det_tol``, a between-node jump larger
    than ``max_jump`` (Newton escaping to another branch past the fold),
    and a Newton stall whose iterates saw |det D_y f| below ``fold_det_tol``
    (hovering at the fold).  A stall away from small determinants raises
    NewtonDiverged(node).
    """
    x_idx = tuple(np.atleast_1d(x_idx).tolist())
    if y_idx is None:
        y_idx = complement_indices(fsmap.n, x_idx)
    grid = np.linspace(float(lo), float(hi), int(num))
    nk = fsmap.n - fsmap.k
    values = np.empty((len(grid), nk))
    y = np.asarray(y_seed, dtype=float).reshape(nk)

    def embed(x, yv):
        z = np.empty(fsmap.n)
        z[x_idx[0]] = x
        for j, idx in enumerate(y_idx):
            z[idx] = yv[j]
        return z

    for node, x in enumerate(grid):
        y_prev = y.copy()
        min_det = np.inf
        for it in range(max_iter + 1):
            z = embed(x, y)
            res = fsmap.f(z)
            if np.max(np.abs(res)) <= tol:
                break
            if it == max_iter:
                if min_det < fold_det_tol:
                    raise SingularJacobian(
                        f"Newton stalled at node {node} with |det D_y f| down to "
                        f"{min_det:.1e}: fold of the branch in this chart"
                    )
                raise NewtonDiverged(f"critical-graph Newton stalled at node {node}", node=node)
            jac = fsmap.Df(z)[:, list(y_idx)]
            det = abs(np.linalg.det(jac))
            min_det = min(min_det, det)
            if det < det_tol:
                raise SingularJacobian(
                    f"|det D_y f| < {det_tol:.1e} at node {node}: fold of the branch in this chart"
                )
            y = y + np.linalg.solve(jac, -res)
        if node > 0 and np.max(np.abs(y - y_prev)) > max_jump:
            raise SingularJacobian(
                f"branch jump at node {node} (|dy| > {max_jump}): fold of the branch in this chart"
            )
        values[node] = y
    return GraphManifold(n=fsmap.n, x_idx=x_idx, y_idx=tuple(y_idx), grid=grid,
                         values=values, eps=0.0)


def projection(fsmap, z, fold_tol=DEFAULT_FOLD_TOL):
    """Oblique projection Pi = I - N (Df N)^-1 Df onto the tangent space of
    S along the transverse fiber bundle.

    Undefined at folds: raises FoldSingularity when Df N has an eigenvalue of
    modulus below ``fold_tol`` (the default is wide enough to flag points
    within ~1e-4 of a fold of the neuron map, where the projection entries
    are already numerically useless).
    """
    N = fsmap.N(z)
    Df = fsmap.Df(z)
    A = Df @ N
    if np.min(np.abs(np.linalg.eigvals(A))) < fold_tol:
        raise FoldSingularity(f"Df N eigenvalue below {fold_tol:.1e}: projection undefined")
    return np.eye(fsmap.n) - N @ np.linalg.solve(A, Df)


def slow_manifold_first_order(fsmap, s_graph, eps, fold_tol=DEFAULT_FOLD_TOL):
    """First-order slow manifold from the critical graph:

        phi_eps = phi0 - eps (D_y f)^-1 (Df N)^-1 Df G(., 0)

    evaluated nodewise at (x, phi0(x)).  Every node must be normally
    hyperbolic; fold proximity raises FoldSingularity.
    """
    if s_graph.eps != 0.0:
        raise ValueError("first-order construction starts from the critical graph (eps tag 0)")
    eps = float(eps)
    if eps == 0.0:
        return replace(s_graph, eps=0.0)
    y_cols = list(s_graph.y_idx)
    new_vals = np.empty_like(s_graph.values)
    for i, x in enumerate(s_graph.grid):
        z = s_graph.embed(np.array([x]), s_graph.values[i:i + 1])
        Df = fsmap.Df(z)
        N = fsmap.N(z)
        A = Df @ N
        if np.min(np.abs(np.linalg.eigvals(A))) < fold_tol:
            raise FoldSingularity(f"Df N eigenvalue below {fold_tol:.1e} at node {i}")
        Dyf = Df[:, y_cols]
        rhs = Df @ fsmap.G(z, 0.0)
        corr = -eps * np.linalg.solve(Dyf, np.linalg.solve(A, rhs))
        new_vals[i] = s_graph.values[i] + corr
    return replace(s_graph, values=new_vals, eps=eps)


def _transform_sweep(fsmap, graph, eps, direction, preimages):
    """One graph-transform sweep: map every node (forward or through the
    Newton-inverse branch), then read the image back as a graph over the
    same grid.

    Grid nodes outside the image hull (the inflow boundary strip, whose
    width is set by the slow drift per sweep) receive the *update* of the
    nearest covered node, one-sidedly: extrapolating the graph itself there
    is unstable, while the update field tends to zero at the fixed point, so
    this boundary rule does not bias the converged manifold.

    Returns (new values, preimage cache for the backward mode).
    """
    xs = graph.grid
    pts = np.atleast_2d(graph.embed(xs))
    images = np.empty_like(pts)
    if direction == "forward":
        for i in range(pts.shape[0]):
            images[i] = fsmap.evaluate(pts[i], eps)
    else:
        prev = None
        for i in range(pts.shape[0]):
            if preimages is not None:
                seed = preimages[i]
            elif prev is not None:
                seed = prev  # previous node's preimage on the first sweep
            else:
                seed = pts[i]
            images[i] = newton_invert(fsmap, pts[i], eps, seed)
            prev = images[i]
        preimages = images.copy()
    x_im = images[:, graph.x_idx[0]]
    y_im = images[:, list(graph.y_idx)]
    order = np.argsort(x_im)
    x_s, y_s = x_im[order], y_im[order]
    if np.any(np.diff(x_s) <= 0):
        keep = np.concatenate([[True], np.diff(x_s) > 0])
        x_s, y_s = x_s[keep], y_s[keep]
    fit = _interpolator(x_s, y_s, graph.interp_order)
    covered = (xs >= x_s[0]) & (xs <= x_s[-1])
    if not np.any(covered):
        raise NotContracting("image graph does not overlap the grid; eps too large")
    new_vals = graph.values.copy()
    new_vals[covered] = fit(xs[covered])
    if not np.all(covered):
        # Inflow-strip nodes (not covered by the image graph) take the
        # update of the nearest covered node, one-sidedly.  Re-deriving
        # them from the covered side would run the map backwards along an
        # attracting graph and amplifies errors; the copied update vanishes
        # at the fixed point, so it cannot destabilize the iteration.
        idx_cov = np.flatnonzero(covered)
        for j in np.flatnonzero(~covered):
            edge = idx_cov[0] if j < idx_cov[0] else idx_cov[-1]
            new_vals[j] = graph.values[j] + (new_vals[edge] - graph.values[edge])
    return new_vals, covered, preimages


def slow_manifold_numeric(fsmap, s_graph, eps, direction="forward",
                          update_tol=1e-12, max_sweeps=10_000,
                          fold_tol=DEFAULT_FOLD_TOL, start=None):
    """Numerically exact slow-manifold graph via the graph transform.

    Starts from the first-order formula (or ``start``), sweeps until the
    sup-norm update drops below ``update_tol``.  ``direction='backward'``
    applies the transform to the inverse branch (Newton solves of
    H(z, eps) = zbar seeded by the previous sweep's preimages), which is the
    contracting direction on repelling branches.

    Raises NotContracting when the update norm grows five sweeps in a row,
    MaxIterations at the sweep cap.
    """
    if direction not in ("forward", "backward"):
        raise ValueError("direction must be 'forward' or 'backward'")
    eps = float(eps)
    if start is not None:
        graph = replace(start, eps=eps)
    else:
        graph = replace(slow_manifold_first_order(fsmap, s_graph, eps, fold_tol=fold_tol),
                        eps=eps)
    if eps == 0.0:
        new_vals, covered, _ = _transform_sweep(fsmap, graph, 0.0, direction, None)
        return replace(graph, values=new_vals, eps=0.0, interior_mask=covered)

    preimages = None
    prev_update = np.inf
    grow_streak = 0
    for sweep in range(1, int(max_sweeps) + 1):
        new_vals, covered, preimages = _transform_sweep(fsmap, graph, eps, direction, preimages)
        update = float(np.max(np.abs(new_vals - graph.values)))
        graph = replace(graph, values=new_vals, eps=eps,
                        interior_mask=_erode_boundary_layer(covered))
        if update < update_tol:
            return graph
        if update > prev_update:
            grow_streak += 1
            if grow_streak >= 5:
                raise NotContracting(
                    f"graph transform expanding for 5 sweeps (update {update:.3e}); "
                    f"wrong direction or eps too large"
                )
        else:
            grow_streak = 0
        prev_update = update
    raise MaxIterations(f"graph transform did not converge in {max_sweeps} sweeps")


def _erode_boundary_layer(covered, factor=4):
    """The boundary layer of the transform is the uncovered inflow strip
    plus the zone its images feed, a few strip-widths deep (the one-sided
    strip data relaxes toward collocated values at the transverse
    contraction rate per strip-width hop).  Nodes there are masked out of
    invariance assertions."""
    mask = covered.copy()
    num = len(mask)
    idx = np.flatnonzero(covered)
    if idx.size == 0 or idx.size == num:
        return mask
    lo_strip = idx[0]            # uncovered run at the low end
    hi_strip = num - 1 - idx[-1]  # uncovered run at the high end
    if lo_strip > 0:
        mask[: min(num, factor * lo_strip + 1)] = False
    if hi_strip > 0:
        mask[max(0, num - factor * hi_strip - 1):] = False
    return mask


def invariance_residual(fsmap, graph, eps, interior_margin=1):
    """Max forward-invariance defect |H^y(x, phi(x)) - phi(H^x(x, phi(x)))|
    over interior nodes whose image stays inside the grid.

    Nodes on the inflow boundary strip (graph.interior_mask False) carry
    one-sided updates rather than collocated invariance and are skipped, as
    are their images (the interpolant is only trustworthy on the interior).
    """
    mask = np.ones(graph.num, dtype=bool)
    if graph.interior_mask is not None:
        mask &= graph.interior_mask
    mask[:interior_margin] = False
    if interior_margin > 0:
        mask[-interior_margin:] = False
    idx = np.flatnonzero(mask)
    if idx.size == 0:
        return float("nan")
    x_lo, x_hi = graph.grid[idx[0]], graph.grid[idx[-1]]
    pts = np.atleast_2d(graph.embed(graph.grid[idx]))
    worst = 0.0
    for p in pts:
        img = fsmap.evaluate(p, eps)
        x_im = img[graph.x_idx[0]]
        if not (x_lo <= x_im <= x_hi):
            continue
        y_im = np.array([img[i] for i in graph.y_idx])
        worst = max(worst, float(np.max(np.abs(y_im - np.atleast_1d(graph.phi(x_im))))))
    return worst


def on_s_curve(fsmap, graph, tol=1e-12, max_iter=20):
    """Callable s -> z(s) on S: graph interpolation polished by Newton in the
    y coordinates, for use as a singularity-scan curve."""
    y_cols = list(graph.y_idx)

    def curve(s):
        y = np.atleast_1d(graph.phi(s)).astype(float)
        z = graph.embed(np.array([float(s)]), y.reshape(1, -1))
        for _ in range(max_iter):
            res = fsmap.f(z)
            if np.max(np.abs(res)) <= tol:
                break
            jac = fsmap.Df(z)[:, y_cols]
            y = y + np.linalg.solve(jac, -res)
            z = graph.embed(np.array([float(s)]), y.reshape(1, -1))
        return z

    return curve
