"""Figure scripts for the fast-slow map toolkit's file outputs.

These scripts are pure readers: they consume the CSV/JSON files written by
the ``fastslow`` CLI (schema version 1) and never recompute dynamics.
Rendering is headless (Agg) with deterministic styling from the checked-in
``figures.mplstyle``.
"""

import matplotlib

matplotlib.use("Agg")

from .io import SchemaError  # noqa: E402
from .spec import FigureSpec  # noqa: E402

__all__ = ["FigureSpec", "SchemaError"]
__version__ = "0.1.0"
