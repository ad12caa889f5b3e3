import math

import numpy as np
import pytest

from fastslow import projection
from fastslow.errors import ParamOutOfRange, ZeroEigenvalue
from fastslow.models import (
    ChialvoParams,
    K_SHAPE_MAX,
    build_model,
    chialvo,
    chialvo_phi0,
    euler_discretize,
    euler_hyperbolicity_boundary,
    from_standard_form,
    standard_chialvo,
    twofast_ode,
    twofast_slow_manifold,
)


def test_phi0_zeroes_f(chialvo_map):
    k = chialvo_map.params["k"]
    for v in np.linspace(k + 1e-3, 6.0, 200):
        z = np.array([chialvo_phi0(v, k), v])
        assert abs(chialvo_map.f(z)[0]) <= 1e-12


def test_param_validation():
    with pytest.raises(ParamOutOfRange):
        chialvo(ChialvoParams(k=0.2))
    with pytest.raises(ParamOutOfRange):
        chialvo(ChialvoParams(k=0.0))
    chialvo(ChialvoParams(k=0.0), allow_k_zero=True)
    chialvo(ChialvoParams(k=0.17))
    with pytest.raises(ParamOutOfRange):
        chialvo(ChialvoParams(k=0.18))
    assert 0.17 < K_SHAPE_MAX < 0.1716


def test_euler_shares_f_object(twofast, twofast_map):
    assert twofast_map.f_eval is twofast.f_eval
    rng = np.random.default_rng(5)
    for _ in range(200):
        x = rng.uniform(0.2, 1.2)
        z = np.array([x, x**2, x**3])
        np.testing.assert_array_equal(twofast_map.f(z), np.atleast_1d(twofast.f_eval(z)))


def test_euler_h_validation(twofast):
    with pytest.raises(ParamOutOfRange):
        euler_discretize(twofast, -0.1)
    with pytest.raises(ParamOutOfRange):
        euler_discretize(twofast, 11.0)


def test_projection_invariant_under_discretization(twofast, twofast_graph):
    z = twofast_graph.embed(np.array([0.8]))
    pis = []
    for h in (0.05, 0.2, 0.5):
        pis.append(projection(euler_discretize(twofast, h), z))
    np.testing.assert_allclose(pis[0], pis[1], atol=1e-12)
    np.testing.assert_allclose(pis[1], pis[2], atol=1e-12)
    # equals the projection built from the raw ODE data
    N = np.asarray(twofast.N_eval(z))
    Df = np.asarray(twofast.df(z))
    pi_ode = np.eye(3) - N @ np.linalg.solve(Df @ N, Df)
    np.testing.assert_allclose(pis[0], pi_ode, atol=1e-12)


def test_hyperbolicity_boundary_values():
    assert euler_hyperbolicity_boundary(-2.0) == pytest.approx(1.0, abs=1e-15)
    assert euler_hyperbolicity_boundary(-1.0 + 1.0j) == pytest.approx(1.0, abs=1e-15)
    assert euler_hyperbolicity_boundary(1.0) is None
    with pytest.raises(ZeroEigenvalue):
        euler_hyperbolicity_boundary(0.0)


def test_adapter_matches_direct_factory():
    p = ChialvoParams()
    direct = chialvo(p)
    adapted = standard_chialvo(p)
    rng = np.random.default_rng(2)
    for _ in range(25):
        z = np.array([rng.uniform(0.5, 2.0), rng.uniform(0.5, 4.0)])
        for eps in (0.0, 1e-3, 1e-2):
            np.testing.assert_allclose(adapted.evaluate(z, eps), direct.evaluate(z, eps),
                                       rtol=0, atol=1e-14)


def test_adapter_layer_form():
    # eps = 0: slow part is the identity, fast part is y + f~(x, y, 0)
    def g_tilde(x, y, eps):
        return np.array([x[0] - y[0] + eps])

    def f_tilde(x, y, eps):
        return np.array([-0.5 * y[0] + x[0] ** 2 + eps * y[0]])

    from fastslow.core import Domain
    m = from_standard_form(g_tilde, f_tilde, k=1, n=2, domain=Domain([-5, -5], [5, 5]))
    z = np.array([0.7, -0.3])
    out = m.evaluate(z, 0.0)
    assert out[0] == z[0]
    assert abs(out[1] - (z[1] + f_tilde(z[:1], z[1:], 0.0)[0])) <= 1e-15


def test_adapter_multipliers_from_fast_jacobian():
    def g_tilde(x, y, eps):
        return np.array([1.0])

    def f_tilde(x, y, eps):
        return np.array([-0.4 * (y[0] - x[0] ** 2)])

    from fastslow.core import Domain
    from fastslow.spectral import nontrivial_multipliers
    m = from_standard_form(g_tilde, f_tilde, k=1, n=2, domain=Domain([-5, -5], [5, 5]))
    z = np.array([0.5, 0.25])
    mus = nontrivial_multipliers(m, z)
    assert abs(mus[0] - 0.6) <= 1e-8  # 1 + D_y f~ = 1 - 0.4


def test_adapter_eps_remainder_differencing():
    # f~ = f0 + eps*q: the adapter's fast G component approximates q
    def g_tilde(x, y, eps):
        return np.array([0.0])

    def f_tilde(x, y, eps):
        return np.array([-(y[0] - x[0]) + eps * (2.0 + x[0])])

    from fastslow.core import Domain
    m = from_standard_form(g_tilde, f_tilde, k=1, n=2, domain=Domain([-5, -5], [5, 5]))
    z = np.array([0.3, 0.3])
    g0 = m.G(z, 0.0)
    assert abs(g0[1] - 2.3) <= 1e-6  # one-sided differencing, O(step) accurate
    g1 = m.G(z, 1e-2)
    assert abs(g1[1] - 2.3) <= 1e-12  # exact quotient at eps > 0 (f~ linear in eps)


def test_twofast_exact_manifold(twofast):
    # the closed-form invariant graph of the ODE really is invariant
    for eps in (1e-2, 1e-3):
        for x in np.linspace(0.3, 1.1, 9):
            y = twofast_slow_manifold(x, eps, twofast.params)
            z = np.array([x, y[0], y[1]])
            rhs = twofast.field_eval(z, eps)
            # tangency: d/dt of (y - phi_eps(x)) must vanish on the graph
            dphi = np.array([2 * x, 3 * x * x])
            assert np.max(np.abs(rhs[1:] - dphi * rhs[0])) <= 1e-12


def test_registry_names():
    m = build_model("chialvo", {"a": 1.0, "b": 5.0, "c": 3.5, "k": 0.035})
    assert m.name == "chialvo"
    m2 = build_model("euler:twofast", {"h": 0.25})
    assert m2.name == "euler:twofast"
    assert m2.params["h"] == 0.25
    m3 = build_model("saddle")
    assert m3.name == "saddle"
    with pytest.raises(Exception):
        build_model("unknown-model")


def test_register_custom_factory():
    from fastslow.models import register_model

    def factory(params):
        return chialvo(ChialvoParams(**params))

    register_model("my-neuron", factory)
    m = build_model("my-neuron", {"k": 0.05})
    assert m.params["k"] == 0.05
