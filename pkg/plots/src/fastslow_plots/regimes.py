"""Four-panel regime figure from the CLI's regimes output directory."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import matplotlib.pyplot as plt
import numpy as np

from .io import SchemaError, load_csv, load_json, style_path
from .spec import FigureSpec

CASES = ("I", "II", "III", "IV")


def render_regimes(spec: FigureSpec):
    """2x2 panel figure, one panel per reference case.

    Each panel shows the trajectory in the (w, v) plane with the fold/flip
    w-levels and the fixed point from the regime diagnostics; the slow
    nullcline w = (c - b v)/a can be toggled on (it is a closed-form line in
    the reported parameters, not a recomputation).
    """
    regime_dir = Path(spec.inputs["regimes"])
    missing = [case for case in CASES
               if not (regime_dir / f"regime_{case}.json").exists()
               or not (regime_dir / f"trajectory_{case}.csv").exists()]
    if missing:
        raise SchemaError(f"regime bundle incomplete; missing panels: {', '.join(missing)}")

    plt.style.use(style_path())
    fig, axes = plt.subplots(2, 2, figsize=(9.5, 7.5))
    layers = {"nullcline": 0}
    for ax, case in zip(axes.ravel(), CASES):
        report = load_json(regime_dir / f"regime_{case}.json")
        traj = load_csv(regime_dir / f"trajectory_{case}.csv")
        ax.plot(traj["z_0"], traj["z_1"], ".", markersize=1.0, color="0.45", alpha=0.6)
        geo = report["diagnostics"].get("geometry", {})
        for key, color in (("w_fold_plus", "tab:orange"), ("w_fold_minus", "tab:orange"),
                           ("w_flip", "tab:green")):
            if key in geo:
                ax.axvline(geo[key], color=color, linewidth=0.9,
                           linestyle="--" if key == "w_flip" else "-")
        fp = report["diagnostics"].get("fixed_point")
        if fp:
            ax.plot([fp["z"][0]], [fp["z"][1]], marker="*", markersize=10,
                    color="k" if fp["stability"] == "stable" else "crimson")
        if spec.overlay("slow_nullcline", default=False):
            p = report["parameter_table"]
            v = np.linspace(float(np.nanmin(traj["z_1"])), float(np.nanmax(traj["z_1"])), 50)
            ax.plot((p["c"] - p["b"] * v) / p["a"], v, color="0.2", linewidth=0.8,
                    linestyle=":")
            layers["nullcline"] += 1
        ax.set_title(f"Case {case}: {report['label']}")
        ax.set_xlabel("w")
        ax.set_ylabel("v")
    fig.tight_layout()
    fig.savefig(spec.out)
    return fig, layers


def main(argv=None):
    ap = argparse.ArgumentParser(prog="plot-regimes",
                                 description="four-panel regime figure")
    ap.add_argument("--regimes", required=True, help="directory with regime_*.json and trajectory_*.csv")
    ap.add_argument("--out", required=True)
    ap.add_argument("--slow-nullcline", action="store_true")
    args = ap.parse_args(argv)
    spec = FigureSpec(inputs={"regimes": args.regimes}, out=args.out,
                      overlays={"slow_nullcline": args.slow_nullcline})
    try:
        render_regimes(spec)
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
