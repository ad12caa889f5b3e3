"""Figure specification shared by the three entry points."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence


@dataclass
class FigureSpec:
    """Inputs and toggles for one figure.

    ``inputs`` maps logical names (report, slow_manifold, trajectory,
    regime dirs, euler table) to file paths; which keys are required depends
    on the renderer.  ``overlays`` switches optional layers: critical-branch
    curves, the numeric slow manifold, fold/flip markers, fixed points, the
    trajectory, and the slow nullcline on regime panels.
    """

    inputs: dict
    out: str
    panel_layout: Optional[Sequence[int]] = None
    xlim: Optional[Sequence[float]] = None
    ylim: Optional[Sequence[float]] = None
    overlays: dict = field(default_factory=dict)

    def overlay(self, name, default=True):
        return bool(self.overlays.get(name, default))
