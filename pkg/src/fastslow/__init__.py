"""fastslow: numerical geometric analysis of fast-slow maps.

Library layout:

* ``core``      - fast-slow map representation, evaluation, iteration
* ``spectral``  - non-trivial multipliers, hyperbolicity, singularities
* ``manifold``  - critical-graph continuation, projection, slow manifolds
* ``reduced``   - reduced / m-th-iterate dynamics, fixed points, fiber rates
* ``models``    - built-in model factories and closed-form oracles
* ``poincare``  - fast-slow Poincare maps of ODEs with a drifting parameter
* ``cli``       - command-line front end (``fastslow`` executable)
"""

from .core import Domain, FastSlowMap, Trajectory, newton_invert
from .errors import FastSlowError
from .manifold import (
    GraphManifold,
    invariance_residual,
    projection,
    slow_manifold_first_order,
    slow_manifold_numeric,
    solve_critical_graph,
)
from .models import ChialvoParams, SlowOde, chialvo, euler_discretize, from_standard_form
from .reduced import find_fixed_point, mth_iterate_reduced, reduced_step
from .spectral import (
    classify_by_eigenvalues,
    classify_point,
    locate_singularities,
    nontrivial_multipliers,
    spectral_bounds,
)

__all__ = [
    "Domain",
    "FastSlowMap",
    "Trajectory",
    "newton_invert",
    "FastSlowError",
    "GraphManifold",
    "invariance_residual",
    "projection",
    "slow_manifold_first_order",
    "slow_manifold_numeric",
    "solve_critical_graph",
    "ChialvoParams",
    "SlowOde",
    "chialvo",
    "euler_discretize",
    "from_standard_form",
    "find_fixed_point",
    "mth_iterate_reduced",
    "reduced_step",
    "classify_by_eigenvalues",
    "classify_point",
    "locate_singularities",
    "nontrivial_multipliers",
    "spectral_bounds",
]

__version__ = "0.1.0"
