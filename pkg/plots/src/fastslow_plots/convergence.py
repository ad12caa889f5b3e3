"""Log-log convergence-order figure from the euler-study table."""

from __future__ import annotations

import argparse
import sys

import matplotlib.pyplot as plt
import numpy as np

from .io import SchemaError, load_csv, style_path
from .spec import FigureSpec


def render_convergence(spec: FigureSpec):
    """Two panels: manifold distance vs eps (per h) and vs h (per eps),
    with slope-2 and slope-1 reference lines."""
    table = load_csv(spec.inputs["euler"])
    eps, h, dist = table["eps"], table["h"], table["dist"]

    plt.style.use(style_path())
    fig, (ax_e, ax_h) = plt.subplots(1, 2, figsize=(9.5, 4.2))

    for hv in np.unique(h):
        sel = h == hv
        order = np.argsort(eps[sel])
        ax_e.loglog(eps[sel][order], dist[sel][order], "o-", label=f"h = {hv:g}")
    e_ref = np.array([eps.min(), eps.max()])
    ax_e.loglog(e_ref, dist.max() * (e_ref / eps.max()) ** 2, "k--", linewidth=0.8,
                label="slope 2")
    ax_e.set_xlabel("eps")
    ax_e.set_ylabel("dist(S_eps_h, S_ode_eps)")
    ax_e.set_title("step fixed, eps halved")
    ax_e.legend()

    for ev in np.unique(eps):
        sel = eps == ev
        order = np.argsort(h[sel])
        ax_h.loglog(h[sel][order], dist[sel][order], "s-", label=f"eps = {ev:g}")
    h_ref = np.array([h.min(), h.max()])
    ax_h.loglog(h_ref, dist.max() * (h_ref / h.max()), "k--", linewidth=0.8,
                label="slope 1")
    ax_h.set_xlabel("h")
    ax_h.set_ylabel("dist(S_eps_h, S_ode_eps)")
    ax_h.set_title("eps fixed, step halved")
    ax_h.legend()

    fig.tight_layout()
    fig.savefig(spec.out)
    return fig


def main(argv=None):
    ap = argparse.ArgumentParser(prog="plot-convergence",
                                 description="discretization-error scaling figure")
    ap.add_argument("--euler", required=True, help="euler_study.csv")
    ap.add_argument("--out", required=True)
    args = ap.parse_args(argv)
    try:
        render_convergence(FigureSpec(inputs={"euler": args.euler}, out=args.out))
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
