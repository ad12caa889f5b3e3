"""Phase portrait of a fast-slow map analysis bundle.

Draws the critical-manifold branches color-coded by classification, the
detected singular points, the numeric slow manifold, fixed points and an
optional trajectory overlay, all read from the CLI's analyze/simulate
outputs.  Legend entries enumerate the singular structure (one per branch
plus one per singular point); data overlays stay out of the legend.
"""

from __future__ import annotations

import argparse
import sys

import matplotlib.pyplot as plt
import numpy as np

from .io import SchemaError, load_csv, load_json, style_path
from .spec import FigureSpec

BRANCH_COLORS = {"attracting": "tab:blue", "repelling": "tab:red"}
SINGULARITY_STYLE = {
    "fold": {"marker": "o", "color": "tab:orange"},
    "flip": {"marker": "s", "color": "tab:green"},
    "neimark-sacker": {"marker": "D", "color": "tab:purple"},
}


def render_phase_portrait(spec: FigureSpec):
    """Render the portrait and save it to ``spec.out``.

    Returns (figure, layers) where ``layers`` records which optional layers
    were drawn.
    """
    report = load_json(spec.inputs["report"])
    layers = {"branches": 0, "singularities": 0, "slow_manifold": False,
              "fixed_points": 0, "trajectory": False}

    plt.style.use(style_path())
    fig, ax = plt.subplots()

    if spec.overlay("trajectory") and spec.inputs.get("trajectory"):
        traj = load_csv(spec.inputs["trajectory"])
        if len(traj.get("z_0", [])) > 0:
            ax.plot(traj["z_0"], traj["z_1"], ".", color="0.55", markersize=1.2,
                    alpha=0.6, zorder=1, label="_nolegend_")
            layers["trajectory"] = True

    if spec.overlay("branches"):
        for branch in report["branches"]:
            pts = np.asarray(branch["points"])
            if pts.size == 0:
                continue
            cls = branch["classification"]
            color = BRANCH_COLORS.get(cls.split("(")[0], "tab:gray")
            label = f"S [{branch['lo']:.3g}, {branch['hi']:.3g}] ({cls})"
            ax.plot(pts[:, 0], pts[:, 1], color=color, zorder=3, label=label)
            layers["branches"] += 1

    if spec.overlay("slow_manifold") and spec.inputs.get("slow_manifold"):
        sm = load_csv(spec.inputs["slow_manifold"])
        ax.plot(sm["phi_eps_numeric_0"], sm["x_0"], "--", color="k",
                linewidth=1.0, zorder=4, label="_nolegend_")
        layers["slow_manifold"] = True

    if spec.overlay("singularities"):
        for hit in report["singularities"]:
            style = SINGULARITY_STYLE.get(hit["kind"], SINGULARITY_STYLE["fold"])
            ax.plot([hit["z"][0]], [hit["z"][1]], linestyle="none", zorder=5,
                    label=f"{hit['kind']} @ {hit['coord']:.4g}", **style)
            layers["singularities"] += 1

    if spec.overlay("fixed_points"):
        for fp in report.get("fixed_points", []):
            ax.plot([fp["z"][0]], [fp["z"][1]], marker="*", markersize=11,
                    color="k" if fp["stability"] == "stable" else "crimson",
                    linestyle="none", zorder=6, label="_nolegend_")
            layers["fixed_points"] += 1

    ax.set_xlabel("w (recovery)")
    ax.set_ylabel("v (voltage)")
    params = ", ".join(f"{k}={v:g}" for k, v in sorted(report["parameter_table"].items()))
    ax.set_title(f"{report['model']}  ({params}, eps={report['eps']:g})")
    if spec.xlim:
        ax.set_xlim(*spec.xlim)
    if spec.ylim:
        ax.set_ylim(*spec.ylim)
    ax.legend(loc="best")
    fig.savefig(spec.out)
    return fig, layers


def main(argv=None):
    ap = argparse.ArgumentParser(prog="plot-portrait",
                                 description="phase portrait from analyze/simulate outputs")
    ap.add_argument("--report", required=True, help="analyze report.json")
    ap.add_argument("--slow-manifold", default=None, help="slow_manifold.csv")
    ap.add_argument("--trajectory", default=None, help="trajectory.csv")
    ap.add_argument("--out", required=True, help="output image (png or svg)")
    ap.add_argument("--xlim", type=float, nargs=2, default=None)
    ap.add_argument("--ylim", type=float, nargs=2, default=None)
    args = ap.parse_args(argv)
    spec = FigureSpec(
        inputs={"report": args.report, "slow_manifold": args.slow_manifold,
                "trajectory": args.trajectory},
        out=args.out,
        xlim=args.xlim,
        ylim=args.ylim,
    )
    try:
        render_phase_portrait(spec)
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
