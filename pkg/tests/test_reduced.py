import math

import numpy as np
import pytest
from scipy.optimize import brentq

from fastslow import find_fixed_point, mth_iterate_reduced, reduced_step, slow_manifold_numeric
from fastslow.errors import AssumptionViolated
from fastslow.models import (
    ChialvoParams,
    check_unique_equilibrium,
    chialvo,
    chialvo_branch,
    chialvo_mu,
    chialvo_phi0,
    chialvo_reduced_g,
    chialvo_reduced_v_step,
    euler_discretize,
    twofast_ode,
)
from fastslow.reduced import chialvo_equilibrium_v, fiber_rate_probe, reduced_orbit


def test_reduced_step_eps_zero_identity(chialvo_map):
    z = np.array([chialvo_phi0(2.0, 0.035), 2.0])
    np.testing.assert_array_equal(reduced_step(chialvo_map, z, 0.0), z)


def test_reduced_step_matches_closed_form(chialvo_map):
    p = ChialvoParams()
    eps = 1e-3
    for v in (1.4, 2.0, 2.6):
        z = np.array([chialvo_phi0(v, p.k), v])
        out = reduced_step(chialvo_map, z, eps)
        v_expected = chialvo_reduced_v_step(v, eps, p)
        w_expected = z[0] + eps * chialvo_reduced_g(v, p)
        assert abs(out[1] - v_expected) <= 1e-14
        assert abs(out[0] - w_expected) <= 1e-14


def test_mth_iterate_m1_equals_reduced_step(chialvo_map):
    z = np.array([chialvo_phi0(1.8, 0.035), 1.8])
    np.testing.assert_allclose(mth_iterate_reduced(chialvo_map, z, 1e-3, 1),
                               reduced_step(chialvo_map, z, 1e-3), atol=0)


def test_mth_iterate_cap():
    m = chialvo(ChialvoParams())
    z = np.array([chialvo_phi0(1.8, 0.035), 1.8])
    with pytest.raises(ValueError):
        mth_iterate_reduced(m, z, 0.2, 10)


def test_euler_reduced_step_eps_independent(twofast):
    # h = h_tilde / eps makes the reduced step eps-free
    h_tilde = 0.05
    outs = []
    for eps in (1e-2, 2e-3):
        fsmap = euler_discretize(twofast, h_tilde / eps, h_max=100.0)
        z = np.array([0.5, 0.25, 0.125])
        outs.append(reduced_step(fsmap, z, eps))
    np.testing.assert_allclose(outs[0], outs[1], atol=1e-14)


def test_m_composition_slope_two(twofast_map, twofast_graph):
    gaps = []
    for eps in (1e-2, 5e-3, 2.5e-3):
        orbit = reduced_orbit(twofast_map, twofast_graph, 0.5, eps, 10)
        z0 = twofast_graph.embed(np.array([0.5]))
        zm = mth_iterate_reduced(twofast_map, z0, eps, 10)
        gaps.append(float(np.max(np.abs(orbit[-1] - zm))))
    for i in range(2):
        assert 1.8 <= math.log2(gaps[i] / gaps[i + 1]) <= 2.2


def test_equilibrium_bracketing_signs():
    p = ChialvoParams()
    assert chialvo_reduced_g(p.k + 1e-9, p) > 0
    assert chialvo_reduced_g(1e6, p) < 0


def test_equilibrium_matches_independent_root():
    p = ChialvoParams()
    v_star = chialvo_equilibrium_v(p.a, p.b, p.c, p.k)
    assert abs(chialvo_reduced_g(v_star, p)) <= 1e-12
    oracle = brentq(lambda v: float(chialvo_reduced_g(v, p)), 0.2, 1.0, xtol=1e-14)
    assert abs(v_star - oracle) <= 1e-11
    assert chialvo_branch(v_star, p.k) == "S-r"


def test_equilibrium_branch_case_one():
    v_star = chialvo_equilibrium_v(1.0, 5.0, 7.0, 0.07)
    assert chialvo_branch(v_star, 0.07) == "S+a"


def test_check_unique_equilibrium_reference_set():
    ok, witness = check_unique_equilibrium(ChialvoParams())
    assert ok
    assert abs(witness["discriminant"] - (-0.2159)) <= 1e-10


def test_check_unique_equilibrium_violating_set():
    p = ChialvoParams(a=1.0, b=0.01, c=1.0, k=0.1)
    ok, witness = check_unique_equilibrium(p)
    assert not ok
    # grid-search oracle: the quadratic is positive somewhere right of k
    v = np.linspace(p.k + 1e-6, 5.0, 20000)
    q = -2 * p.k * p.a + (p.a + p.a * p.k + p.b * p.k) * v - (p.a + p.b) * v**2
    assert q.max() > 0


def test_check_unique_equilibrium_degenerate_leading_coefficient():
    # a = b = 0 limit: the quadratic collapses; handled by the leading
    # coefficient branch rather than the discriminant
    ok, witness = check_unique_equilibrium(ChialvoParams(a=0.0, b=0.0, c=1.0, k=0.0))
    assert not ok
    assert witness["branch"] == "degenerate-leading-coefficient"


def test_equilibrium_strict_flag():
    with pytest.raises(AssumptionViolated):
        chialvo_equilibrium_v(1.0, 5.0, 3.5, 0.02)
    v_star = chialvo_equilibrium_v(1.0, 5.0, 3.5, 0.02, strict=False)
    assert abs(chialvo_reduced_g(v_star, ChialvoParams(c=3.5, k=0.02))) <= 1e-12


def test_fixed_point_unstable_reference(chialvo_map):
    p = ChialvoParams()
    v_star = chialvo_equilibrium_v(p.a, p.b, p.c, p.k)
    guess = np.array([chialvo_phi0(v_star, p.k), v_star])
    rep = find_fixed_point(chialvo_map, guess + [0.01, -0.02], 1e-3)
    assert rep.stability == "unstable"
    assert rep.residual <= 1e-12
    assert np.max(np.abs(rep.z - guess)) <= 10 * 1e-3
    assert chialvo_branch(float(rep.z[1]), p.k) == "S-r"


def test_fixed_point_stable_case_one():
    m = chialvo(ChialvoParams(c=7.0, k=0.07))
    v_star = chialvo_equilibrium_v(1.0, 5.0, 7.0, 0.07)
    guess = np.array([chialvo_phi0(v_star, 0.07), v_star])
    rep = find_fixed_point(m, guess + [0.02, 0.03], 1e-3)
    assert rep.stability == "stable"
    assert chialvo_branch(float(rep.z[1]), 0.07) == "S+a"


def test_fixed_point_eps_zero_degenerate(chialvo_map):
    rep = find_fixed_point(chialvo_map, np.array([chialvo_phi0(2.1, 0.035) + 0.2, 2.1]), 0.0)
    assert rep.degenerate_on_s
    assert np.max(np.abs(chialvo_map.f(rep.z))) <= 1e-12


def test_fiber_probe_zero_offset_all_zero(chialvo_map, chialvo_graph):
    gn = slow_manifold_numeric(chialvo_map, chialvo_graph, 1e-3)
    rep = fiber_rate_probe(chialvo_map, gn.embed(np.array([2.0])), 1e-3,
                           np.zeros(2), steps=5)
    assert np.all(rep.distances == 0.0)


def test_fiber_probe_offset_cap(chialvo_map):
    z = np.array([chialvo_phi0(2.0, 0.035), 2.0])
    with pytest.raises(ValueError):
        fiber_rate_probe(chialvo_map, z, 1e-3, np.array([0.0, 1e-3]), steps=5)


def test_fiber_probe_forward_contracts(chialvo_map, chialvo_graph):
    eps = 1e-3
    gn = slow_manifold_numeric(chialvo_map, chialvo_graph, eps)
    rep = fiber_rate_probe(chialvo_map, gn.embed(np.array([2.8])), eps,
                           np.array([0.0, 1e-5]), steps=20)
    assert rep.n_valid > rep.transient
    assert np.max(rep.valid_ratios) < 1.0
    assert rep.chi < 1.0
    # chi tracks the local multiplier scale along the drift
    assert rep.chi <= abs(chialvo_mu(2.9, 0.035)) + 0.05
