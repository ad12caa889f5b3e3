"""Built-in model factories and their closed-form oracles.

The map-based neuron model
--------------------------
The voltage/recovery map

    w -> w + eps * (c - b v - a w)
    v -> v + f(w, v),        f(w, v) = -v + v^2 exp(w - v) + k,

is the scaled fast-slow form of the classic two-variable neuron map with
recovery rate a(eps) = 1 - a*eps, coupling b(eps) = b*eps and bias
c(eps) = c*eps.  Its critical manifold is the graph

    w = phi0(v) = v + ln((v - k) / v^2),        v > k,

with a single non-trivial multiplier mu(v) = (v - k)(2 - v) / v.  For
k in (0, 3 - 2*sqrt(2)) the manifold is S-shaped with two folds (mu = 1) at

    v_pm = (1 + k -+ sqrt(k^2 - 6k + 1)) / 2,

and a flip (mu = -1) at v_flip = (3 + k + sqrt(k^2 - 2k + 9)) / 2.  All of
these closed forms are exposed as oracle functions so the generic pipeline
can be tested against them.

Also provided: a generic Euler discretizer for fast-slow ODEs in the same
non-standard form, the standard-form adapter, a synthetic two-fast/one-slow
ODE with polynomial data (its slow manifold is known exactly, which makes it
suitable for discretization-error scaling studies), a constant-spectrum
saddle map, and a planar limit-cycle oscillator with slowly drifting
parameter for the Poincare-map suite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .core import Domain, FastSlowMap
from .errors import ConfigError, ParamOutOfRange, ZeroEigenvalue

K_SHAPE_MAX = 3.0 - 2.0 * math.sqrt(2.0)


# ---------------------------------------------------------------------------
# Chialvo map
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ChialvoParams:
    """Scaled parameters (a, b, c, k), all dimensionless.

    a, b, c > 0 are the leading coefficients of the eps-expansions of the
    recovery parameters; k >= 0 is the additive voltage perturbation.  The
    S-shaped-manifold analysis requires k < 3 - 2*sqrt(2); k = 0 collapses
    the lower fold and is only admitted when explicitly requested.
    """

    a: float = 1.0
    b: float = 5.0
    c: float = 3.5
    k: float = 0.035

    def validate(self, allow_k_zero=False):
        if not (self.a > 0 and self.b > 0 and self.c > 0):
            raise ParamOutOfRange("need a, b, c > 0")
        if self.k < 0 or self.k >= K_SHAPE_MAX:
            raise ParamOutOfRange(
                f"need 0 <= k < 3 - 2*sqrt(2) ~= {K_SHAPE_MAX:.6f}, got k={self.k}"
            )
        if self.k == 0 and not allow_k_zero:
            raise ParamOutOfRange("k = 0 degenerates the lower fold; pass allow_k_zero=True")


def chialvo_phi0(v, k):
    """Critical-manifold graph w = phi0(v), defined for v > k."""
    v = np.asarray(v, dtype=float)
    return v + np.log((v - k) / v**2)


def chialvo_mu(v, k):
    """Non-trivial multiplier mu(v) = (v - k)(2 - v)/v along S."""
    v = np.asarray(v, dtype=float)
    return (v - k) * (2.0 - v) / v


def chialvo_folds(k):
    """Fold locations (v_minus, v_plus); degenerate to (0, 1) at k = 0."""
    disc = k * k - 6.0 * k + 1.0
    if disc < 0:
        raise ParamOutOfRange("no real folds for this k")
    root = math.sqrt(disc)
    return (1.0 + k - root) / 2.0, (1.0 + k + root) / 2.0


def chialvo_flip(k):
    """Flip location v_flip."""
    return (3.0 + k + math.sqrt(k * k - 2.0 * k + 9.0)) / 2.0


def chialvo_branch(v, k):
    """Which piece of S the point (phi0(v), v) belongs to.

    Returns one of 'S-a', 'S-r', 'S+a', 'S+r', 'fold-', 'fold+', 'flip'
    using exact comparison against the closed-form singularity locations.
    """
    v_minus, v_plus = chialvo_folds(k)
    v_flip = chialvo_flip(k)
    if v == v_minus:
        return "fold-"
    if v == v_plus:
        return "fold+"
    if v == v_flip:
        return "flip"
    if v < v_minus:
        return "S-a"
    if v < v_plus:
        return "S-r"
    if v < v_flip:
        return "S+a"
    return "S+r"


def chialvo_reduced_g(v, params):
    """Slow drift g(phi0(v), v, 0) = c - (b + a) v - a ln((v - k)/v^2)."""
    v = np.asarray(v, dtype=float)
    return params.c - (params.b + params.a) * v - params.a * np.log((v - params.k) / v**2)


def chialvo_slow_manifold(v, eps, params):
    """First-order slow-manifold graph phi_eps(v) = phi0 - eps*g/(mu - 1)."""
    v = np.asarray(v, dtype=float)
    return chialvo_phi0(v, params.k) - eps * chialvo_reduced_g(v, params) / (
        chialvo_mu(v, params.k) - 1.0
    )


def chialvo_reduced_v_step(v, eps, params):
    """One step of the 1-D reduced map v -> v - eps*(v-k)/(mu-1)*g."""
    k = params.k
    return v - eps * (v - k) / (chialvo_mu(v, k) - 1.0) * chialvo_reduced_g(v, params)


def chialvo(params: ChialvoParams, allow_k_zero=False) -> FastSlowMap:
    """Fast-slow map for the neuron model, with analytic Jacobians."""
    params.validate(allow_k_zero=allow_k_zero)
    a, b, c, k = params.a, params.b, params.c, params.k

    def f_eval(z):
        w, v = z
        with np.errstate(over="ignore"):
            return np.array([-v + v * v * np.exp(w - v) + k])

    def df(z):
        w, v = z
        with np.errstate(over="ignore"):
            e = np.exp(w - v)
        return np.array([[v * v * e, -1.0 + (2.0 * v - v * v) * e]])

    def N_eval(z):
        return np.array([[0.0], [1.0]])

    def dN(z):
        return np.zeros((2, 1, 2))

    def G_eval(z, eps):
        w, v = z
        return np.array([c - b * v - a * w, 0.0])

    def dG(z, eps):
        return np.array([[-a, -b], [0.0, 0.0]])

    return FastSlowMap(
        n=2,
        k=1,
        N_eval=N_eval,
        f_eval=f_eval,
        G_eval=G_eval,
        df=df,
        dN=dN,
        dG=dG,
        domain=Domain([-6.0, -2.0], [9.0, 14.0]),
        name="chialvo",
        params={"a": a, "b": b, "c": c, "k": k},
    )


def check_unique_equilibrium(params: ChialvoParams):
    """Test the unique-equilibrium condition for the reduced drift.

    The drift g(phi0(v), v, 0) is strictly decreasing for all v > k iff the
    quadratic

        q(v) = -2ka + (a + ak + bk) v - (a + b) v^2

    is negative on (k, inf).  Since the leading coefficient -(a+b) is
    negative, this holds iff the discriminant is negative or both real roots
    lie at or below k.  Returns (ok, witness) with the discriminant, roots
    and the branch of the decision that fired.
    """
    a, b, k = params.a, params.b, params.k
    A = a + b
    B = a + a * k + b * k
    C = 2.0 * k * a
    witness = {"quadratic": (-C, B, -A)}
    if A <= 0:  # degenerate a = b = 0 limit: q is not strictly negative
        witness["branch"] = "degenerate-leading-coefficient"
        witness["discriminant"] = float("nan")
        return False, witness
    disc = B * B - 4.0 * A * C
    witness["discriminant"] = disc
    if disc < 0:
        witness["branch"] = "negative-discriminant"
        return True, witness
    r_lo = (B - math.sqrt(disc)) / (2.0 * A)
    r_hi = (B + math.sqrt(disc)) / (2.0 * A)
    witness["roots"] = (r_lo, r_hi)
    if r_hi <= k:
        witness["branch"] = "roots-below-k"
        return True, witness
    witness["branch"] = "positive-on-interval"
    return False, witness


# ---------------------------------------------------------------------------
# Fast-slow ODEs and Euler discretization
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SlowOde:
    """Continuous-time fast-slow system z' = N(z) f(z) + eps G(z, eps).

    Shares the rank conditions of FastSlowMap along {f = 0}.  ``df``/``dN``/
    ``dG`` are optional analytic Jacobians with the same shapes as on the map
    side.
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
    name: str = "ode"
    params: dict = field(default_factory=dict)

    def field_eval(self, z, eps):
        z = np.asarray(z, dtype=float)
        N = np.asarray(self.N_eval(z), dtype=float).reshape(self.n, self.n - self.k)
        rhs = N @ np.atleast_1d(self.f_eval(z))
        if eps != 0.0:
            rhs = rhs + eps * np.atleast_1d(self.G_eval(z, eps))
        return rhs


def euler_discretize(ode: SlowOde, h, h_max=10.0) -> FastSlowMap:
    """Euler map z -> z + h N(z) f(z) + eps h G(z, eps).

    The step is absorbed into N and G, so the discretized map shares the
    critical set with the ODE: ``f_eval`` is the *same function object*.
    Multipliers obey mu_j = 1 + h * lambda_j,ode at every on-S point.
    """
    h = float(h)
    if not (0 < h <= h_max):
        raise ParamOutOfRange(f"need 0 < h <= {h_max}, got h={h}")

    nk = ode.n - ode.k

    def N_eval(z):
        return h * np.asarray(ode.N_eval(z), dtype=float).reshape(ode.n, nk)

    def G_eval(z, eps):
        return h * np.atleast_1d(np.asarray(ode.G_eval(z, eps), dtype=float))

    dN = None if ode.dN is None else (lambda z: h * np.asarray(ode.dN(z), dtype=float))
    dG = None if ode.dG is None else (lambda z, eps: h * np.asarray(ode.dG(z, eps), dtype=float))

    return FastSlowMap(
        n=ode.n,
        k=ode.k,
        N_eval=N_eval,
        f_eval=ode.f_eval,
        G_eval=G_eval,
        df=ode.df,
        dN=dN,
        dG=dG,
        domain=ode.domain,
        name=f"euler:{ode.name}",
        params=dict(ode.params, h=h),
    )


def euler_hyperbolicity_boundary(lam_ode):
    """Critical Euler step at which an attracting ODE eigenvalue loses
    normal hyperbolicity: h_crit = -2 Re(lam) / |lam|^2 for Re(lam) < 0.

    Returns None when Re(lam) >= 0 (no positive-h crossing).  A zero
    eigenvalue is a fold that persists for every h and is reported by
    raising ZeroEigenvalue.
    """
    lam = complex(lam_ode)
    if lam == 0:
        raise ZeroEigenvalue("lambda = 0: fold persists for all step sizes")
    if lam.real >= 0:
        return None
    return -2.0 * lam.real / abs(lam) ** 2


# ---------------------------------------------------------------------------
# Standard-form adapter
# ---------------------------------------------------------------------------

def from_standard_form(g_tilde, f_tilde, k, n, domain, eps_max=0.1,
                       name="standard", params=None) -> FastSlowMap:
    """Wrap a standard-form map  x -> x + eps*g~(x,y,eps),  y -> y + f~(x,y,eps)
    as a general fast-slow map with

        N = (O_{k,n-k}; I_{n-k}),   f(z) = f~(x, y, 0),
        G(z, eps) = (g~(x, y, eps); (f~(x,y,eps) - f~(x,y,0)) / eps).

    The eps -> 0 limit of the fast remainder is taken by one-sided
    differencing with step 1e-6 * max(1, eps_max); accuracy O(step).
    """
    nk = n - k
    N_mat = np.vstack([np.zeros((k, nk)), np.eye(nk)])
    step0 = 1e-6 * max(1.0, float(eps_max))

    def split(z):
        return z[:k], z[k:]

    def f_eval(z):
        x, y = split(z)
        return np.atleast_1d(np.asarray(f_tilde(x, y, 0.0), dtype=float))

    def G_eval(z, eps):
        x, y = split(z)
        g = np.atleast_1d(np.asarray(g_tilde(x, y, eps), dtype=float))
        f0 = np.atleast_1d(np.asarray(f_tilde(x, y, 0.0), dtype=float))
        if eps == 0.0:
            fe = np.atleast_1d(np.asarray(f_tilde(x, y, step0), dtype=float))
            frem = (fe - f0) / step0
        else:
            fe = np.atleast_1d(np.asarray(f_tilde(x, y, eps), dtype=float))
            frem = (fe - f0) / eps
        return np.concatenate([g, frem])

    return FastSlowMap(
        n=n,
        k=k,
        N_eval=lambda z: N_mat,
        f_eval=f_eval,
        G_eval=G_eval,
        dN=lambda z: np.zeros((n, nk, n)),
        domain=domain,
        name=name,
        params=params or {},
    )


# ---------------------------------------------------------------------------
# Synthetic test systems
# ---------------------------------------------------------------------------

def twofast_ode(lam1=-1.0, lam2=-2.0, d1=1.0, d2=1.0) -> SlowOde:
    """Two fast, one slow ODE with constant diagonal Df N = diag(lam1, lam2):

        x'  = eps,
        y1' = lam1 (y1 - x^2) + eps (2x - d1),
        y2' = lam2 (y2 - x^3) + eps (3x^2 - d2).

    The exact invariant slow manifold is y = (x^2 + eps d1/lam1,
    x^3 + eps d2/lam2): the first-order term is the whole series, so the
    distance between any numeric slow manifold and this closed form isolates
    discretization error.
    """
    N_mat = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])

    def f_eval(z):
        x, y1, y2 = z
        return np.array([lam1 * (y1 - x * x), lam2 * (y2 - x**3)])

    def df(z):
        x = z[0]
        return np.array([[-2.0 * lam1 * x, lam1, 0.0], [-3.0 * lam2 * x * x, 0.0, lam2]])

    def G_eval(z, eps):
        x = z[0]
        return np.array([1.0, 2.0 * x - d1, 3.0 * x * x - d2])

    def dG(z, eps):
        x = z[0]
        return np.array([[0.0, 0.0, 0.0], [2.0, 0.0, 0.0], [6.0 * x, 0.0, 0.0]])

    return SlowOde(
        n=3,
        k=1,
        N_eval=lambda z: N_mat,
        f_eval=f_eval,
        G_eval=G_eval,
        df=df,
        dN=lambda z: np.zeros((3, 2, 3)),
        dG=dG,
        domain=Domain([-3.0, -10.0, -30.0], [3.0, 12.0, 30.0]),
        name="twofast",
        params={"lam1": lam1, "lam2": lam2, "d1": d1, "d2": d2},
    )


def twofast_phi0(x, params):
    x = np.asarray(x, dtype=float)
    return np.stack([x**2, x**3], axis=-1)


def twofast_slow_manifold(x, eps, params):
    """Exact invariant graph of the ODE (equals its first-order expansion)."""
    x = np.asarray(x, dtype=float)
    c1 = eps * params["d1"] / params["lam1"]
    c2 = eps * params["d2"] / params["lam2"]
    return np.stack([x**2 + c1, x**3 + c2], axis=-1)


def saddle_map(mu_a=0.5, mu_r=1.5) -> FastSlowMap:
    """Three-dimensional map with constant transverse spectrum {mu_a, mu_r}.

    Df N = diag(mu_a - 1, mu_r - 1), so the critical manifold
    {y1 = sin x, y2 = x^2} is uniformly saddle-type.
    """
    la, lr = mu_a - 1.0, mu_r - 1.0
    N_mat = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])

    def f_eval(z):
        x, y1, y2 = z
        return np.array([la * (y1 - math.sin(x)), lr * (y2 - x * x)])

    def df(z):
        x = z[0]
        return np.array([[-la * math.cos(x), la, 0.0], [-2.0 * lr * x, 0.0, lr]])

    def G_eval(z, eps):
        x = z[0]
        return np.array([1.0, x, -x])

    def dG(z, eps):
        return np.array([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [-1.0, 0.0, 0.0]])

    return FastSlowMap(
        n=3,
        k=1,
        N_eval=lambda z: N_mat,
        f_eval=f_eval,
        G_eval=G_eval,
        df=df,
        dN=lambda z: np.zeros((3, 2, 3)),
        dG=dG,
        domain=Domain([-4.0, -5.0, -5.0], [4.0, 5.0, 20.0]),
        name="saddle",
        params={"mu_a": mu_a, "mu_r": mu_r},
    )


def standard_chialvo(params: ChialvoParams, allow_k_zero=False) -> FastSlowMap:
    """The neuron map built through the standard-form adapter (used to
    cross-check the adapter against the direct factory)."""
    params.validate(allow_k_zero=allow_k_zero)
    a, b, c, k = params.a, params.b, params.c, params.k

    def g_tilde(x, y, eps):
        return np.array([c - b * y[0] - a * x[0]])

    def f_tilde(x, y, eps):
        return np.array([-y[0] + y[0] ** 2 * math.exp(x[0] - y[0]) + k])

    return from_standard_form(
        g_tilde,
        f_tilde,
        k=1,
        n=2,
        domain=Domain([-6.0, -2.0], [9.0, 14.0]),
        name="standard:chialvo",
        params={"a": a, "b": b, "c": c, "k": k},
    )


# ---------------------------------------------------------------------------
# Planar limit-cycle oscillator with slow parameter drift
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CycleOde:
    """Standard-form ODE with fast block z' = f~(z, alpha, eps) in R^m and a
    single slow equation alpha' = eps g~(z, alpha, eps).

    ``jac`` is the (m+1) x (m+1) Jacobian of the combined field with respect
    to (z, alpha) at eps = 0's structure: rows are D f~ and eps * D g~ (the
    caller scales the last row by eps).  Used for variational/monodromy
    integration; finite differences are substituted when absent.
    """

    m: int
    f_eval: Callable  # (z, alpha, eps) -> (m,)
    g_eval: Callable  # (z, alpha, eps) -> scalar
    jac_f: Optional[Callable] = None  # (z, alpha, eps) -> (m, m+1)
    jac_g: Optional[Callable] = None  # (z, alpha, eps) -> (m+1,)
    period_hint: float = 6.283185307179586
    name: str = "cycle-ode"
    params: dict = field(default_factory=dict)


def hopf_ode(a_g=0.5, g_eval=None, name="hopf") -> CycleOde:
    """Rotationally symmetric oscillator with an exact circular limit cycle:

        x' = alpha x - y - x (x^2 + y^2),
        y' = x + alpha y - y (x^2 + y^2),
        alpha' = eps g~(x, y, alpha),    default g~ = a_g - (x^2 + y^2).

    For alpha > 0 the layer cycle is r = sqrt(alpha) with period 2*pi and
    Floquet multiplier exp(-4*pi*alpha); the default drift averages to
    2*pi*(a_g - alpha) over one period.
    """

    def f_eval(z, alpha, eps):
        x, y = z
        r2 = x * x + y * y
        return np.array([alpha * x - y - x * r2, x + alpha * y - y * r2])

    def jac_f(z, alpha, eps):
        x, y = z
        r2 = x * x + y * y
        return np.array(
            [
                [alpha - r2 - 2.0 * x * x, -1.0 - 2.0 * x * y, x],
                [1.0 - 2.0 * x * y, alpha - r2 - 2.0 * y * y, y],
            ]
        )

    if g_eval is None:
        def g_eval(z, alpha, eps):
            return a_g - (z[0] ** 2 + z[1] ** 2)

        def jac_g(z, alpha, eps):
            return np.array([-2.0 * z[0], -2.0 * z[1], 0.0])
    else:
        jac_g = None

    return CycleOde(
        m=2,
        f_eval=f_eval,
        g_eval=g_eval,
        jac_f=jac_f,
        jac_g=jac_g,
        period_hint=2.0 * math.pi,
        name=name,
        params={"a_g": a_g},
    )


# ---------------------------------------------------------------------------
# Registry
# ---------------------------------------------------------------------------

_CUSTOM_FACTORIES = {}


def register_model(name, factory):
    """Register a user model factory (callable params-dict -> FastSlowMap)
    under a config-referencable name."""
    if name in MODEL_NAMES:
        raise ConfigError(f"'{name}' is a built-in model name")
    _CUSTOM_FACTORIES[name] = factory


def build_model(name, params=None):
    """Construct a FastSlowMap by registry name.

    Built-in names: ``chialvo``, ``standard:chialvo``, ``saddle``,
    ``euler:twofast`` (params: h plus the ODE constants); user factories
    registered via ``register_model`` are looked up last.
    """
    params = dict(params or {})
    if name == "chialvo":
        allow0 = bool(params.pop("allow_k_zero", False))
        return chialvo(ChialvoParams(**params), allow_k_zero=allow0)
    if name == "standard:chialvo":
        allow0 = bool(params.pop("allow_k_zero", False))
        return standard_chialvo(ChialvoParams(**params), allow_k_zero=allow0)
    if name == "saddle":
        return saddle_map(**params)
    if name == "euler:twofast":
        h = params.pop("h", 0.1)
        return euler_discretize(twofast_ode(**params), h)
    if name in _CUSTOM_FACTORIES:
        return _CUSTOM_FACTORIES[name](params)
    raise ConfigError(f"unknown model '{name}'")


def build_ode(name, params=None):
    params = dict(params or {})
    if name == "twofast":
        return twofast_ode(**params)
    raise ConfigError(f"unknown ODE '{name}'")


def build_cycle_ode(name, params=None):
    params = dict(params or {})
    if name == "hopf":
        return hopf_ode(**params)
    raise ConfigError(f"unknown cycle ODE '{name}'")


MODEL_NAMES = ("chialvo", "standard:chialvo", "saddle", "euler:twofast")
