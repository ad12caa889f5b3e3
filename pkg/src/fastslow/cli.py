"""Command-line front end.

Subcommands: analyze, simulate, slow-manifold, singularities, reduced,
regimes, euler-study, poincare, oracle.  All outputs are deterministic given
the configuration (fixed iteration orders, no wall-clock content): JSON with
sorted keys and a ``schema`` field, CSV with 17-significant-digit decimals
and a ``# schema: 1`` header line.  Exit codes: 0 success, 1 numerical
failure, 2 usage or configuration error.  Output files are assembled in
memory and written only after the computation succeeds, so a failing run
leaves no partial files.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import manifold, models, poincare, reduced, spectral
from .errors import ConfigError, FastSlowError

SCHEMA = 1

REGIME_EXCITABLE = "Excitable"
REGIME_RELAXATION = "Relaxation"
REGIME_NONCHAOTIC = "NonChaoticBursting"
REGIME_CHAOTIC = "ChaoticBursting"
REGIME_UNCLASSIFIED = "Unclassified"

REGIME_CASES = {
    "I": {"c": 7.0, "k": 0.07},
    "II": {"c": 3.5, "k": 0.07},
    "III": {"c": 3.5, "k": 0.035},
    "IV": {"c": 3.5, "k": 0.02},
}

# Frozen regime-predicate thresholds, tuned once on the four reference
# parameter sets at eps = 1e-3 and not revisited (they are the acceptance
# contract for the regime labels, not physical constants).
TAIL_LEN = 1000
TAIL_RADIUS = 1e-2
SPAN_MARGIN = 0.05
LOWER_BRANCH_V = 0.3
FLIP_MARGIN_W = 0.002
MIN_RUN_LEN = 8
RUN_TRANSIENT = 3
ALTERNATION_MIN = 0.8
BAND_TIGHTNESS = 0.2
PASS_FRACTION = 0.8
MIN_ALTERNATING_TOTAL = 50


def _fmt(x):
    return format(float(x), ".17g")


def _dump_json(obj):
    return json.dumps(obj, sort_keys=True, indent=1) + "\n"


def _write_outputs(out_dir, files):
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for name, content in files.items():
        (out / name).write_text(content, encoding="utf-8")


def _csv(header_cols, rows):
    lines = ["# schema: 1", ",".join(header_cols)]
    for row in rows:
        lines.append(",".join(_fmt(x) if isinstance(x, (int, float, np.floating)) else str(x)
                              for x in row))
    return "\n".join(lines) + "\n"


def load_config(path):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config JSON error at line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    if not isinstance(cfg, dict):
        raise ConfigError("config root must be a JSON object")
    if "model" not in cfg:
        raise ConfigError("config is missing required key 'model'")
    if not isinstance(cfg.get("params", {}), dict):
        raise ConfigError("'params' must be an object")
    return cfg


def _build_from_config(cfg):
    return models.build_model(cfg["model"], cfg.get("params", {}))


def _grid_spec(cfg, fsmap):
    g = cfg.get("grid", {})
    for key in ("lo", "hi"):
        if key not in g:
            raise ConfigError(f"config grid is missing '{key}'")
    x_index = int(g.get("x_index", 1 if fsmap.name.startswith("chialvo") else 0))
    num = int(g.get("num", 400))
    lo, hi = float(g["lo"]), float(g["hi"])
    if "y_seed" in g:
        y_seed = np.asarray(g["y_seed"], dtype=float)
    elif fsmap.name == "chialvo":
        y_seed = np.array([models.chialvo_phi0(lo, fsmap.params["k"])])
    else:
        raise ConfigError("config grid needs 'y_seed' for this model")
    return x_index, lo, hi, num, y_seed


def _critical_graph(cfg, fsmap):
    x_index, lo, hi, num, y_seed = _grid_spec(cfg, fsmap)
    return manifold.solve_critical_graph(fsmap, x_idx=(x_index,), lo=lo, hi=hi,
                                         num=num, y_seed=y_seed)


def _slow_manifold_bundle(fsmap, graph, eps):
    first = manifold.slow_manifold_first_order(fsmap, graph, eps)
    numeric = manifold.slow_manifold_numeric(fsmap, graph, eps)
    resid = manifold.invariance_residual(fsmap, numeric, eps)
    return first, numeric, resid


def _slow_manifold_csv(graph, first, numeric, fsmap, eps):
    nk = graph.values.shape[1]
    cols = (["x_0"] + [f"phi0_{j}" for j in range(nk)]
            + [f"phi_eps_firstorder_{j}" for j in range(nk)]
            + [f"phi_eps_numeric_{j}" for j in range(nk)] + ["residual"])
    mask = numeric.interior_mask
    rows = []
    for i, x in enumerate(graph.grid):
        if mask is not None and mask[i]:
            z = numeric.embed(np.array([x]))
            img = fsmap.evaluate(z, eps)
            x_im = img[numeric.x_idx[0]]
            if numeric.contains_x(x_im):
                y_im = np.array([img[j] for j in numeric.y_idx])
                resid = float(np.max(np.abs(y_im - np.atleast_1d(numeric.phi(x_im)))))
            else:
                resid = float("nan")
        else:
            resid = float("nan")
        rows.append([x, *graph.values[i], *first.values[i], *numeric.values[i], resid])
    return _csv(cols, rows)


def _singularity_scan(cfg, fsmap, graph):
    s = cfg.get("singularities", {})
    lo = float(s.get("lo", graph.grid[0]))
    hi = float(s.get("hi", graph.grid[-1]))
    num = int(s.get("num", 2000))
    if fsmap.name == "chialvo":
        k = fsmap.params["k"]

        def curve(v):
            return np.array([models.chialvo_phi0(v, k), v])
    else:
        curve = manifold.on_s_curve(fsmap, graph)
    return spectral.locate_singularities(fsmap, curve, lo, hi, num)


def cmd_analyze(args):
    cfg = load_config(args.config)
    fsmap = _build_from_config(cfg)
    eps = float(cfg.get("eps", 1e-3))
    graph = _critical_graph(cfg, fsmap)
    hits = _singularity_scan(cfg, fsmap, graph)
    first, numeric, resid = _slow_manifold_bundle(fsmap, graph, eps)
    bounds = spectral.spectral_bounds(fsmap, graph.sample_points())

    fixed_points = []
    if fsmap.name == "chialvo":
        p = fsmap.params
        v_star = reduced.chialvo_equilibrium_v(p["a"], p["b"], p["c"], p["k"], strict=False)
        guess = np.array([models.chialvo_phi0(v_star, p["k"]), v_star])
        rep = reduced.find_fixed_point(fsmap, guess, eps)
        fixed_points.append({
            "z": [float(x) for x in rep.z],
            "stability": rep.stability,
            "residual": rep.residual,
            "multipliers_abs": [float(abs(mu)) for mu in rep.multipliers],
            "branch": models.chialvo_branch(float(rep.z[1]), p["k"]),
        })

    rng = np.random.default_rng(args.seed)
    sample = np.atleast_2d(graph.embed(rng.uniform(graph.grid[0], graph.grid[-1], size=25)))
    sv_n, sv_df = fsmap.check_rank_assumptions(sample)

    report = {
        "schema": SCHEMA,
        "model": fsmap.name,
        "parameter_table": {k: float(v) for k, v in fsmap.params.items()},
        "eps": eps,
        "rank_check": {"min_sv_N": sv_n, "min_sv_Df": sv_df, "seed": args.seed,
                       "samples": 25},
        "grid": {"lo": float(graph.grid[0]), "hi": float(graph.grid[-1]),
                 "num": int(graph.num), "x_index": int(graph.x_idx[0])},
        "singularities": [
            {"coord": h.coord, "kind": h.kind, "mu_re": h.mu.real, "mu_im": h.mu.imag,
             "z": [float(x) for x in h.z]}
            for h in hits
        ],
        "spectral_bounds": {"nu_a": bounds.nu_a,
                            "nu_r": None if math.isinf(bounds.nu_r) else bounds.nu_r},
        "slow_manifold_residual": resid,
        "fixed_points": fixed_points,
        "branches": _branch_table(fsmap, graph, hits, cfg.get("singularities", {})),
    }
    files = {
        "report.json": _dump_json(report),
        "critical_graph.csv": _csv(
            ["x_0"] + [f"phi0_{j}" for j in range(graph.values.shape[1])],
            [[x, *graph.values[i]] for i, x in enumerate(graph.grid)],
        ),
        "slow_manifold.csv": _slow_manifold_csv(graph, first, numeric, fsmap, eps),
    }
    _write_outputs(args.out, files)
    return 0


def _branch_table(fsmap, graph, hits, scan_cfg):
    """Split the scanned coordinate range at singularities and classify each
    open segment at its midpoint."""
    cuts = sorted(h.coord for h in hits)
    if fsmap.name == "chialvo":
        lo = float(scan_cfg.get("lo", graph.grid[0]))
        hi = float(scan_cfg.get("hi", graph.grid[-1]))
        curve = lambda v: np.array([models.chialvo_phi0(v, fsmap.params["k"]), v])
    else:
        lo, hi = float(graph.grid[0]), float(graph.grid[-1])
        curve = manifold.on_s_curve(fsmap, graph)
    edges = [lo] + [c for c in cuts if lo < c < hi] + [hi]
    out = []
    for a, b in zip(edges[:-1], edges[1:]):
        if b - a < 1e-10:
            continue
        mid = 0.5 * (a + b)
        cls = spectral.classify_point(fsmap, curve(mid))
        xs = np.linspace(a, b, 60)[1:-1] if len(edges) > 2 else np.linspace(a, b, 60)
        pts = [curve(float(x)) for x in xs]
        out.append({
            "lo": a,
            "hi": b,
            "classification": str(cls),
            "points": [[float(c) for c in p] for p in pts],
        })
    return out


def cmd_simulate(args):
    cfg = load_config(args.config)
    fsmap = _build_from_config(cfg)
    eps = float(cfg.get("eps", 1e-3))
    sim = cfg.get("simulate", {})
    z0 = np.asarray(sim.get("z0", [0.25, 2.0]), dtype=float)
    steps = int(args.steps or sim.get("steps", 10000))
    dist_fn = None
    if cfg.get("grid") is not None and sim.get("track_slow_manifold", False):
        graph = _critical_graph(cfg, fsmap)
        numeric = manifold.slow_manifold_numeric(fsmap, graph, eps)

        def dist_fn(z):
            x = z[numeric.x_idx[0]]
            if not numeric.contains_x(x):
                return float("nan")
            return numeric.offset_of(z)

    traj = fsmap.iterate(z0, eps, steps, dist_fn=dist_fn)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    traj.to_csv(out / "trajectory.csv")
    return 0


def cmd_slow_manifold(args):
    cfg = load_config(args.config)
    fsmap = _build_from_config(cfg)
    eps = float(cfg.get("eps", 1e-3))
    graph = _critical_graph(cfg, fsmap)
    direction = cfg.get("slow_manifold", {}).get("direction", "forward")
    first = manifold.slow_manifold_first_order(fsmap, graph, eps)
    numeric = manifold.slow_manifold_numeric(fsmap, graph, eps, direction=direction)
    files = {"slow_manifold.csv": _slow_manifold_csv(graph, first, numeric, fsmap, eps)}
    _write_outputs(args.out, files)
    return 0


def cmd_singularities(args):
    cfg = load_config(args.config)
    fsmap = _build_from_config(cfg)
    graph = _critical_graph(cfg, fsmap)
    hits = _singularity_scan(cfg, fsmap, graph)
    payload = {
        "schema": SCHEMA,
        "model": fsmap.name,
        "parameter_table": {k: float(v) for k, v in fsmap.params.items()},
        "hits": [
            {"coord": h.coord, "kind": h.kind, "mu_re": h.mu.real, "mu_im": h.mu.imag}
            for h in hits
        ],
    }
    _write_outputs(args.out, {"singularities.json": _dump_json(payload)})
    return 0


def _parse_range(text):
    try:
        lo, hi, num = text.split(":")
        return float(lo), float(hi), int(num)
    except ValueError as exc:
        raise ConfigError(f"range must be 'lo:hi:num', got '{text}'") from exc


def cmd_reduced(args):
    cfg = load_config(args.config)
    fsmap = _build_from_config(cfg)
    eps = float(args.eps)
    graph = _critical_graph(cfg, fsmap)
    lo, hi, num = _parse_range(args.base_grid)
    bases = np.linspace(lo, hi, num)

    rows = []
    for ti, x0 in enumerate(bases):
        orbit = reduced.reduced_orbit(fsmap, graph, x0, eps, args.steps)
        for si, z in enumerate(orbit):
            rows.append([ti, si, *z])
    csv_text = _csv(["traj_id", "step"] + [f"z_{i}" for i in range(fsmap.n)], rows)

    numeric = manifold.slow_manifold_numeric(fsmap, graph, eps)
    bounds = spectral.spectral_bounds(fsmap, graph.sample_points())
    reports = []
    offset = np.zeros(fsmap.n)
    offset[graph.y_idx[0]] = 1e-5
    for x0 in bases:
        z_eps = numeric.embed(np.array([x0]))
        rep = reduced.fiber_rate_probe(fsmap, z_eps, eps, offset, steps=args.m or 20,
                                       spectral_bound=bounds.nu_a)
        reports.append(rep.to_dict())
    payload = {"schema": SCHEMA, "model": fsmap.name, "eps": eps, "fiber_rates": reports}
    _write_outputs(args.out, {
        "reduced_trajectories.csv": csv_text,
        "fiber_rates.json": _dump_json(payload),
    })
    return 0


# -- regime classification ---------------------------------------------------

def _beyond_flip_runs(points, k, skip):
    w, v = points[:, 0], points[:, 1]
    w_flip = models.chialvo_phi0(models.chialvo_flip(k), k)
    sel = (v > LOWER_BRANCH_V) & (w > w_flip + FLIP_MARGIN_W)
    runs = []
    i = int(skip)
    n = len(v)
    while i < n:
        if sel[i]:
            j = i
            while j < n and sel[j]:
                j += 1
            if j - i >= MIN_RUN_LEN:
                runs.append((i, j))
            i = j
        else:
            i += 1
    return runs


def _period2_run_stats(v, i, j):
    seg = v[i + RUN_TRANSIENT:j]
    dv = np.diff(seg)
    if len(dv) < 4:
        return None
    alternation = float(np.mean(dv[:-1] * dv[1:] < 0))
    tightness = float(np.median(np.abs(seg[2:] - seg[:-2])))
    n_alternating = int(np.sum(dv[:-1] * dv[1:] < 0))
    return {"alternation": alternation, "tightness": tightness,
            "n_alternating": n_alternating,
            "passes": alternation >= ALTERNATION_MIN and tightness <= BAND_TIGHTNESS}


def classify_regime(fsmap, traj, eps):
    """Label a trajectory of the neuron map by the frozen diagnostics.

    Precedence: Excitable (tail parked at a stable fixed point); otherwise
    the w-range must span both folds; Relaxation when no beyond-flip burst
    segments exist (period-1 banding); among bursting trajectories, the
    period-2 banding test on the beyond-flip segments separates non-chaotic
    from chaotic bursting.
    """
    p = fsmap.params
    pts = traj.points
    w = pts[:, 0]
    diagnostics = {}

    v_star = reduced.chialvo_equilibrium_v(p["a"], p["b"], p["c"], p["k"], strict=False)
    guess = np.array([models.chialvo_phi0(v_star, p["k"]), v_star])
    try:
        rep = reduced.find_fixed_point(fsmap, guess, eps)
        diagnostics["fixed_point"] = {
            "z": [float(x) for x in rep.z],
            "stability": rep.stability,
            "branch": models.chialvo_branch(float(rep.z[1]), p["k"]),
        }
        if rep.stability == "stable":
            tail = pts[-TAIL_LEN:]
            tail_dist = float(np.max(np.linalg.norm(tail - rep.z, axis=1)))
            diagnostics["tail_distance"] = tail_dist
            if tail_dist <= TAIL_RADIUS:
                return REGIME_EXCITABLE, diagnostics
    except FastSlowError as exc:
        diagnostics["fixed_point_error"] = str(exc)

    v_minus, v_plus = models.chialvo_folds(p["k"])
    w_f_plus = float(models.chialvo_phi0(v_plus, p["k"]))
    w_f_minus = float(models.chialvo_phi0(v_minus, p["k"]))
    w_flip = float(models.chialvo_phi0(models.chialvo_flip(p["k"]), p["k"]))
    diagnostics["geometry"] = {"w_fold_plus": w_f_plus, "w_fold_minus": w_f_minus,
                               "w_flip": w_flip,
                               "flip_inside_folds": w_f_plus < w_flip < w_f_minus}
    spans = (float(w.min()) <= w_f_plus + SPAN_MARGIN
             and float(w.max()) >= w_f_minus - SPAN_MARGIN)
    diagnostics["w_range"] = [float(w.min()), float(w.max())]
    diagnostics["spans_folds"] = bool(spans)
    if not spans:
        return REGIME_UNCLASSIFIED, diagnostics

    runs = _beyond_flip_runs(pts, p["k"], skip=len(pts) // 5)
    stats = [s for s in (_period2_run_stats(pts[:, 1], i, j) for i, j in runs) if s]
    diagnostics["beyond_flip_runs"] = len(stats)
    if not stats:
        return REGIME_RELAXATION, diagnostics
    pass_fraction = float(np.mean([s["passes"] for s in stats]))
    total_alternating = int(sum(s["n_alternating"] for s in stats if s["passes"]))
    diagnostics["period2_pass_fraction"] = pass_fraction
    diagnostics["alternating_iterates"] = total_alternating
    if pass_fraction >= PASS_FRACTION and total_alternating >= MIN_ALTERNATING_TOTAL:
        return REGIME_NONCHAOTIC, diagnostics
    return REGIME_CHAOTIC, diagnostics


def run_regimes(case, eps=1e-3, steps=100_000, a=1.0, b=5.0, z0=(0.25, 2.0)):
    """Simulate one reference case and classify it.  Returns (label,
    diagnostics, trajectory)."""
    if case not in REGIME_CASES:
        raise ConfigError(f"unknown case '{case}' (choose from {sorted(REGIME_CASES)})")
    pc = REGIME_CASES[case]
    fsmap = models.chialvo(models.ChialvoParams(a=a, b=b, c=pc["c"], k=pc["k"]))
    traj = fsmap.iterate(np.asarray(z0, dtype=float), eps, steps)
    label, diagnostics = classify_regime(fsmap, traj, eps)
    return label, diagnostics, traj


def cmd_regimes(args):
    cases = list(REGIME_CASES) if args.case == "all" else [args.case]
    eps = float(args.eps)
    if eps > 1e-2:
        raise ConfigError("regimes requires eps <= 1e-2")
    out = Path(args.out)
    files = {}
    trajs = {}
    for case in cases:
        label, diagnostics, traj = run_regimes(case, eps=eps, steps=args.steps)
        report = {
            "schema": SCHEMA,
            "case": case,
            "label": label,
            "eps": eps,
            "parameter_table": {"a": 1.0, "b": 5.0, **REGIME_CASES[case]},
            "diagnostics": diagnostics,
        }
        files[f"regime_{case}.json"] = _dump_json(report)
        trajs[case] = traj
    _write_outputs(out, files)
    for case, traj in trajs.items():
        traj.to_csv(out / f"trajectory_{case}.csv")
    return 0


def euler_study_rows(eps_list, h_list, num=41, lo=0.2, hi=1.2, threads=1):
    """Distance between the Euler map's numeric slow manifold and the ODE's
    exact (first-order) slow manifold, per (eps, h), plus the layer
    classification and the worst multiplier-identity error."""
    ode = models.twofast_ode()

    def one(pair):
        eps, h = pair
        fsmap = models.euler_discretize(ode, h)
        g0 = manifold.solve_critical_graph(fsmap, x_idx=(0,), lo=lo, hi=hi, num=num,
                                           y_seed=[lo**2, lo**3])
        ref = models.twofast_slow_manifold(g0.grid, eps, ode.params)
        gn = manifold.slow_manifold_numeric(fsmap, g0, eps)
        mask = gn.interior_mask if gn.interior_mask is not None else slice(None)
        dist = float(np.max(np.abs(gn.values - ref)[mask]))
        z = g0.embed(np.array([0.5 * (lo + hi)]))
        mus = spectral.nontrivial_multipliers(fsmap, z)
        expected = np.array(sorted((1.0 + h * ode.params["lam1"], 1.0 + h * ode.params["lam2"]),
                                   key=abs, reverse=True))
        mu_err = float(np.max(np.abs(np.sort_complex(mus) - np.sort_complex(expected.astype(complex)))))
        cls = str(spectral.classify_point(fsmap, z))
        return [eps, h, dist, cls, mu_err]

    pairs = [(eps, h) for eps in eps_list for h in h_list]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(one, pairs))
    else:
        rows = [one(p) for p in pairs]
    return rows


def cmd_euler_study(args):
    eps_list = [float(e) for e in args.eps_list.split(",")]
    h_list = [float(h) for h in args.h_list.split(",")]
    rows = euler_study_rows(eps_list, h_list, threads=args.threads)
    body = _csv(["eps", "h", "dist", "classification", "mu_err"], rows)
    _write_outputs(args.out, {"euler_study.csv": body})
    return 0


def cmd_poincare(args):
    lo, hi, num = _parse_range(args.alpha_range)
    eps = float(args.eps)
    ode = models.build_cycle_ode(args.ode, {"a_g": args.a_g} if args.a_g is not None else {})
    sec = poincare.hopf_section()
    pmap = poincare.build_poincare_map(ode, sec)
    seed = math.sqrt(max(lo, 1e-3)) if args.ode == "hopf" else 1.0
    graph = manifold.solve_critical_graph(pmap, x_idx=(1,), lo=lo, hi=hi, num=num,
                                          y_seed=[seed], tol=1e-11)
    mus = [complex(spectral.nontrivial_multipliers(pmap, graph.embed(np.array([a])))[0])
           for a in graph.grid]
    g_samples = []
    x = graph.values[0].copy()
    for a in graph.grid:
        x = poincare.critical_point_x(ode, sec, a, x)
        g_samples.append(poincare.averaged_g(ode, sec, a, x_on_cycle=x))
    hits = poincare.limit_cycle_condition(ode, sec, lo, hi, max(num // 4, 5),
                                          x_seed=graph.values[0])
    numeric = manifold.slow_manifold_numeric(pmap, graph, eps, update_tol=1e-11)
    alpha_fix = None
    try:
        alpha_fix = poincare.slow_fixed_point_alpha(pmap, numeric, eps)
    except FastSlowError:
        pass
    payload = {
        "schema": SCHEMA,
        "ode": args.ode,
        "eps": eps,
        "critical_curve": {"alpha": [float(a) for a in graph.grid],
                           "x": [float(v) for v in graph.values[:, 0]]},
        "multipliers": [{"re": m.real, "im": m.imag} for m in mus],
        "averaged_g_samples": {"alpha": [float(a) for a in graph.grid],
                               "g": [float(g) for g in g_samples]},
        "roots": hits,
        "slow_fixed_point_alpha": alpha_fix,
    }
    # one layer-cycle sample for plotting
    a_mid = 0.5 * (lo + hi)
    x_mid = poincare.critical_point_x(ode, sec, a_mid, np.array([seed]))
    u0 = np.concatenate([x_mid, [sec.Y(x_mid, a_mid)], [a_mid]])
    sol = poincare.integrate(ode, u0, 0.0, ode.period_hint, tol=1e-10)
    ts = np.linspace(0.0, sol.t[-1], 200)
    ys = sol.sol(ts)
    rows = [[t, *ys[:, i]] for i, t in enumerate(ts)]
    files = {
        "poincare.json": _dump_json(payload),
        "cycle_samples.csv": _csv(["t"] + [f"u_{i}" for i in range(ys.shape[0])], rows),
    }
    _write_outputs(args.out, files)
    return 0


def cmd_oracle(args):
    params = json.loads(args.params) if args.params else {}
    if args.model == "chialvo":
        p = models.ChialvoParams(**params) if params else models.ChialvoParams()
        lo, hi, num = _parse_range(args.v_grid) if args.v_grid else (p.k + 0.01, 5.0, 101)
        v = np.linspace(lo, hi, num)
        ok, witness = models.check_unique_equilibrium(p)
        payload = {
            "schema": SCHEMA,
            "model": "chialvo",
            "parameter_table": {"a": p.a, "b": p.b, "c": p.c, "k": p.k},
            "v": [float(x) for x in v],
            "phi0": [float(x) for x in models.chialvo_phi0(v, p.k)],
            "mu": [float(x) for x in models.chialvo_mu(v, p.k)],
            "folds": list(models.chialvo_folds(p.k)),
            "flip": models.chialvo_flip(p.k),
            "unique_equilibrium": bool(ok),
            "discriminant": witness.get("discriminant"),
            "equilibrium_v": reduced.chialvo_equilibrium_v(p.a, p.b, p.c, p.k, strict=False),
        }
    elif args.model == "twofast":
        ode = models.twofast_ode(**params)
        lo, hi, num = _parse_range(args.v_grid) if args.v_grid else (0.2, 1.2, 41)
        x = np.linspace(lo, hi, num)
        eps = float(args.eps)
        ref = models.twofast_slow_manifold(x, eps, ode.params)
        payload = {
            "schema": SCHEMA,
            "model": "twofast",
            "parameter_table": {k: float(v) for k, v in ode.params.items()},
            "x": [float(u) for u in x],
            "slow_manifold": [[float(a) for a in row] for row in ref],
            "eps": eps,
        }
    else:
        raise ConfigError(f"no oracles for model '{args.model}'")
    text = _dump_json(payload)
    if args.out:
        _write_outputs(args.out, {"oracle.json": text})
    else:
        sys.stdout.write(text)
    return 0


def build_parser():
    ap = argparse.ArgumentParser(prog="fastslow",
                                 description="numerical analysis of fast-slow maps")
    ap.add_argument("--seed", type=int, default=0, help="seed for randomized sampling")
    ap.add_argument("--threads", type=int, default=1, help="worker threads for sweeps")
    sub = ap.add_subparsers(dest="command", required=True)

    def with_io(p, config=True):
        if config:
            p.add_argument("--config", required=True)
        p.add_argument("--out", required=True)

    with_io(sub.add_parser("analyze", help="bundled report: graph, spectra, manifolds"))
    p = sub.add_parser("simulate", help="iterate the map, write trajectory CSV")
    with_io(p)
    p.add_argument("--steps", type=int, default=None)
    with_io(sub.add_parser("slow-manifold", help="first-order and numeric slow manifolds"))
    with_io(sub.add_parser("singularities", help="fold/flip/Neimark-Sacker scan"))

    p = sub.add_parser("reduced", help="reduced trajectories and fiber-rate probes")
    with_io(p)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--m", type=int, default=20)
    p.add_argument("--steps", type=int, default=200)
    p.add_argument("--base-grid", required=True, help="lo:hi:num graph coordinates")

    p = sub.add_parser("regimes", help="classify the four reference regimes")
    p.add_argument("--case", choices=list(REGIME_CASES) + ["all"], default="all")
    p.add_argument("--eps", type=float, default=1e-3)
    p.add_argument("--steps", type=int, default=100_000)
    p.add_argument("--out", required=True)

    p = sub.add_parser("euler-study", help="discretization-error scaling table")
    p.add_argument("--eps-list", default="1e-2,5e-3,2.5e-3")
    p.add_argument("--h-list", default="0.4,0.2,0.1")
    p.add_argument("--out", required=True)

    p = sub.add_parser("poincare", help="fast-slow Poincare map suite")
    p.add_argument("--ode", default="hopf")
    p.add_argument("--section", default=None, help="section config (default built-in)")
    p.add_argument("--alpha-range", default="0.3:0.7:21")
    p.add_argument("--eps", type=float, default=1e-3)
    p.add_argument("--a-g", type=float, default=None)
    p.add_argument("--out", required=True)

    p = sub.add_parser("oracle", help="closed-form oracle values")
    p.add_argument("--model", required=True)
    p.add_argument("--params", default=None, help="JSON parameter object")
    p.add_argument("--v-grid", default=None, help="lo:hi:num")
    p.add_argument("--eps", type=float, default=1e-3)
    p.add_argument("--out", default=None)

    return ap


COMMANDS = {
    "analyze": cmd_analyze,
    "simulate": cmd_simulate,
    "slow-manifold": cmd_slow_manifold,
    "singularities": cmd_singularities,
    "reduced": cmd_reduced,
    "regimes": cmd_regimes,
    "euler-study": cmd_euler_study,
    "poincare": cmd_poincare,
    "oracle": cmd_oracle,
}


def main(argv=None):
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FastSlowError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
