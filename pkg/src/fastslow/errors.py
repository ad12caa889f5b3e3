"""Exception types raised by the toolkit.

Numerical failures are always signalled by exceptions from this hierarchy so
that callers (and the CLI) can distinguish them from usage errors.  Leaving
the working domain during iteration is a recorded status, not an error.
"""

from __future__ import annotations


class FastSlowError(Exception):
    """Base class for all numerical failures raised by the toolkit."""


class NonFinite(FastSlowError):
    """A map or vector-field evaluation produced NaN or Inf."""


class StepUnderflow(FastSlowError):
    """A finite-difference or integrator step collapsed below round-off."""


class NotOnManifold(FastSlowError):
    """A point handed to an on-manifold operation violates |f(z)| tolerance."""


class NonHyperbolicSample(FastSlowError):
    """A sample point expected to be normally hyperbolic is inside the
    unit-circle tolerance band.  Carries the offending location."""

    def __init__(self, message, location=None):
        super().__init__(message)
        self.location = location


class NewtonDiverged(FastSlowError):
    """Newton iteration failed to converge.  ``node`` identifies the failing
    continuation node when applicable."""

    def __init__(self, message, node=None):
        super().__init__(message)
        self.node = node


class SingularJacobian(FastSlowError):
    """The Newton Jacobian became numerically singular (graph fold in the
    chosen chart)."""


class FoldSingularity(FastSlowError):
    """The projection operator is undefined: Df N has an eigenvalue at or
    numerically near zero."""


class NotContracting(FastSlowError):
    """The graph-transform iteration is expanding instead of contracting."""


class MaxIterations(FastSlowError):
    """An iterative solver hit its sweep/iteration cap before converging."""


class NoReturn(FastSlowError):
    """The flow failed to return to the section within the time cap."""


class TangentialCrossing(FastSlowError):
    """A section crossing violated the transversality margin."""


class AssumptionViolated(FastSlowError):
    """A model assumption required by an operation fails for the supplied
    parameters."""


class ParamOutOfRange(FastSlowError):
    """Model parameters violate the factory's admissible range."""


class ZeroEigenvalue(FastSlowError):
    """An eigenvalue is exactly zero where a sign decision is required
    (fold persists for every step size)."""


class ConfigError(Exception):
    """Malformed configuration or CLI usage.  Maps to exit code 2; never a
    numerical failure."""
