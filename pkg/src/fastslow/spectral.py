"""Multiplier spectra along the critical manifold and their classification.

The n-k non-trivial multipliers of the layer map at z in S are exactly the
eigenvalues of the small matrix I + Df(z) N(z); the remaining k multipliers
are 1.  Normal hyperbolicity asks that no non-trivial multiplier sits on the
unit circle, with the attracting / repelling / saddle split decided by the
moduli.  Points inside the tolerance band around the circle are reported as
non-hyperbolic (with the nearest singularity archetype) rather than silently
assigned to a side.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import NonHyperbolicSample, NotOnManifold

ATTRACTING = "attracting"
REPELLING = "repelling"
SADDLE = "saddle"
NONHYPERBOLIC = "nonhyperbolic"

FOLD = "fold"
FLIP = "flip"
NEIMARK_SACKER = "neimark-sacker"

DEFAULT_BAND_TOL = 1e-8
ON_MANIFOLD_TOL = 1e-10


@dataclass(frozen=True)
class Classification:
    label: str
    n_attracting: int = 0
    n_repelling: int = 0
    kind: Optional[str] = None  # singularity archetype when nonhyperbolic

    def __str__(self):
        if self.label == SADDLE:
            return f"saddle({self.n_attracting},{self.n_repelling})"
        if self.label == NONHYPERBOLIC:
            return f"nonhyperbolic({self.kind})"
        return self.label


@dataclass(frozen=True)
class SpectrumReport:
    """Multipliers and classification at a base point of S."""

    z: np.ndarray
    multipliers: np.ndarray  # mu_j, sorted by modulus desc, argument tiebreak
    eigenvalues: np.ndarray  # lambda_j = mu_j - 1 of Df N
    classification: Classification
    band_tol: float


@dataclass(frozen=True)
class SingularityHit:
    coord: float  # curve parameter (slow coordinate or arclength)
    z: np.ndarray
    kind: str
    mu: complex


@dataclass(frozen=True)
class SpectralBounds:
    """nu_a = sup of stable-multiplier moduli (0 if none), nu_r = inf of
    unstable moduli (inf if none) over the sampled submanifold."""

    nu_a: float
    nu_r: float
    n_samples: int


def _sorted_mus(mus):
    order = np.lexsort((np.angle(mus), -np.abs(mus)))
    return mus[order]


def require_on_manifold(fsmap, z, tol=ON_MANIFOLD_TOL):
    resid = float(np.max(np.abs(fsmap.f(z))))
    if resid > tol:
        raise NotOnManifold(f"|f(z)| = {resid:.3e} exceeds on-S tolerance {tol:.1e}")
    return resid


def nontrivial_multipliers(fsmap, z, on_tol=ON_MANIFOLD_TOL):
    """Eigenvalues of I + Df(z) N(z), sorted by modulus descending with the
    complex argument as tie-break (the ordering is part of the contract so
    multiplier paths along curves can be matched between samples)."""
    require_on_manifold(fsmap, z, on_tol)
    nk = fsmap.n - fsmap.k
    mat = np.eye(nk) + fsmap.DfN(z)
    return _sorted_mus(np.linalg.eigvals(mat))


def classify_multipliers(mus, tol=DEFAULT_BAND_TOL):
    """Classification from multiplier moduli with a +-tol band around the
    unit circle.  Any multiplier inside the band makes the point
    non-hyperbolic; the singularity kind comes from the nearest archetype."""
    mus = np.atleast_1d(np.asarray(mus, dtype=complex))
    moduli = np.abs(mus)
    banded = np.abs(moduli - 1.0) <= tol
    if np.any(banded):
        mu = mus[banded][0]
        if abs(mu.imag) > tol:
            kind = NEIMARK_SACKER
        elif mu.real > 0:
            kind = FOLD
        else:
            kind = FLIP
        return Classification(NONHYPERBOLIC, kind=kind)
    n_att = int(np.sum(moduli < 1.0))
    n_rep = int(np.sum(moduli > 1.0))
    if n_rep == 0:
        return Classification(ATTRACTING, n_attracting=n_att)
    if n_att == 0:
        return Classification(REPELLING, n_repelling=n_rep)
    return Classification(SADDLE, n_attracting=n_att, n_repelling=n_rep)


def classify_by_eigenvalues(lams, tol=DEFAULT_BAND_TOL):
    """Classification through the eigenvalue criterion on lambda = mu - 1:
    attracting iff 2 Re(lambda) < -|lambda|^2 for all j, repelling iff > for
    all j.  Equivalent to classify_multipliers(1 + lambda)."""
    lams = np.atleast_1d(np.asarray(lams, dtype=complex))
    return classify_multipliers(1.0 + lams, tol=tol)


def classify_point(fsmap, z, tol=DEFAULT_BAND_TOL, on_tol=ON_MANIFOLD_TOL):
    return classify_multipliers(nontrivial_multipliers(fsmap, z, on_tol), tol=tol)


def spectrum_report(fsmap, z, tol=DEFAULT_BAND_TOL, on_tol=ON_MANIFOLD_TOL):
    mus = nontrivial_multipliers(fsmap, z, on_tol)
    return SpectrumReport(
        z=np.asarray(z, dtype=float),
        multipliers=mus,
        eigenvalues=mus - 1.0,
        classification=classify_multipliers(mus, tol=tol),
        band_tol=tol,
    )


def _match_order(prev, cur):
    """Reorder ``cur`` to follow ``prev`` by nearest neighbour in C, keeping
    multiplier paths continuous between adjacent curve samples."""
    cur = list(cur)
    out = np.empty(len(prev), dtype=complex)
    for i, p in enumerate(prev):
        j = int(np.argmin([abs(c - p) for c in cur]))
        out[i] = cur.pop(j)
    return out


def locate_singularities(fsmap, curve, s_lo, s_hi, num, tol=1e-10,
                         band_tol=DEFAULT_BAND_TOL, on_tol=ON_MANIFOLD_TOL):
    """Find fold/flip/Neimark-Sacker crossings of |mu_j| = 1 along an on-S
    curve ``s -> z(s)``.

    The sampling must be fine enough that |mu_j| - 1 changes sign at most
    once per segment (caller's responsibility).  Each sign change is refined
    by bisection in s until ||mu| - 1| <= tol at the emitted point; the kind
    is resolved from Im(mu) and the sign of Re(mu).
    """
    grid = np.linspace(float(s_lo), float(s_hi), int(num))

    def mus_at(s):
        return nontrivial_multipliers(fsmap, curve(s), on_tol=on_tol)

    hits = []
    prev = mus_at(grid[0])
    for s0, s1 in zip(grid[:-1], grid[1:]):
        cur = _match_order(prev, mus_at(s1))
        for j in range(len(prev)):
            lev0 = abs(prev[j]) - 1.0
            lev1 = abs(cur[j]) - 1.0
            if lev0 == 0.0:
                lev0 = -np.sign(lev1) * 1e-300  # sample exactly on the circle
            if lev0 * lev1 < 0.0:
                a, b = s0, s1
                mu_a = prev[j]
                for _ in range(200):
                    mid = 0.5 * (a + b)
                    mus_mid = _match_order([mu_a], mus_at(mid))
                    lev_mid = abs(mus_mid[0]) - 1.0
                    if abs(lev_mid) <= tol or (b - a) < 1e-15 * max(1.0, abs(b)):
                        break
                    if lev0 * lev_mid < 0.0:
                        b = mid
                    else:
                        a, lev0, mu_a = mid, lev_mid, mus_mid[0]
                mu = complex(mus_mid[0])
                if abs(mu.imag) > band_tol:
                    kind = NEIMARK_SACKER
                elif mu.real > 0:
                    kind = FOLD
                else:
                    kind = FLIP
                hits.append(SingularityHit(coord=float(mid), z=curve(mid), kind=kind, mu=mu))
        prev = cur
    return hits


def spectral_bounds(fsmap, samples, band_tol=DEFAULT_BAND_TOL, on_tol=ON_MANIFOLD_TOL):
    """Spectral gap bounds over sampled points of a normally hyperbolic
    submanifold: nu_a is the largest stable modulus, nu_r the smallest
    unstable one.  Raises NonHyperbolicSample at the first banded sample."""
    samples = np.atleast_2d(np.asarray(samples, dtype=float))
    nu_a = 0.0
    nu_r = np.inf
    for z in samples:
        mus = nontrivial_multipliers(fsmap, z, on_tol=on_tol)
        moduli = np.abs(mus)
        if np.any(np.abs(moduli - 1.0) <= band_tol):
            raise NonHyperbolicSample(
                f"sample not normally hyperbolic (|mu| within {band_tol:.1e} of 1)",
                location=z,
            )
        stable = moduli[moduli < 1.0]
        unstable = moduli[moduli > 1.0]
        if stable.size:
            nu_a = max(nu_a, float(stable.max()))
        if unstable.size:
            nu_r = min(nu_r, float(unstable.min()))
    return SpectralBounds(nu_a=nu_a, nu_r=nu_r, n_samples=samples.shape[0])
