"""Weighted metric, complex structure, mirror map and forms on the tangent manifold."""

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from tangentkahler import jets
from tangentkahler import spaceform as sf
from tangentkahler import tangent_geometry as tg

cases = st.tuples(
    st.sampled_from([-1.0, 0.0, 1.0]),
    st.integers(2, 3),
    st.sampled_from([1.0, 4.0]),
    st.sampled_from([1.0, 2.5]),
    st.integers(0, 10_000),
)


def _setup(K, m, c1, c2, seed):
    M = sf.SpaceFormModel(K, m)
    W = tg.weights_kahler(K, c1, c2)
    p = tg.sample_tangent_points(M, W, np.random.default_rng(seed), 1)[0]
    return M, W, p, tg.frame_split_at(M, W, p)


def test_weights_kahler_values():
    W = tg.weights_kahler(-1.0, 4.0, 9.0)
    assert W.r0 == pytest.approx(2.0)
    assert W.mu(0.0) == pytest.approx(3.0 * math.sqrt(2.0))
    assert W.product(1.3) == pytest.approx(9.0)
    assert W.a(1.0) ** 2 == pytest.approx(3.0)
    with pytest.raises(ValueError):
        tg.weights_kahler(1.0, 0.0)
    with pytest.raises(ValueError):
        tg.weights_kahler(1.0, 1.0, -1.0)


def test_weights_ratio_and_constant():
    W = tg.weights_ratio(1.0, 2.0, 3.0, slope=-0.5)
    assert W.a(1.0) ** 2 == pytest.approx(1.5)
    assert W.product(1.0) == pytest.approx(3.0)
    assert W.r0 == pytest.approx(2.0)
    C = tg.weights_constant(2.0, 0.5)
    assert C.a(3.0) == pytest.approx(4.0) and C.product(3.0) == pytest.approx(1.0)
    S = tg.weights_sasaki(1.0)
    assert S.mu(0.3) == 1.0 and S.lam(0.3) == 1.0


def test_kahler_radius():
    assert tg.kahler_radius(-4.0, 1.0) == pytest.approx(0.5)
    assert math.isinf(tg.kahler_radius(0.0, 1.0))


def test_tangent_point_radius():
    M = sf.SpaceFormModel(-1.0, 2)
    p = tg.tangent_point(M, [1.0, 0.0], [0.0, 3.0])
    # e(x) = 1 / (1 - 1/4)
    assert p.r == pytest.approx(4.0)
    assert np.array_equal(tg.from_z(M, p.z).u, p.u)
    with pytest.raises(ValueError):
        tg.tangent_point(M, [0.0, 0.0], [1.0])


def test_check_radius():
    M = sf.SpaceFormModel(-1.0, 2)
    W = tg.weights_kahler(-1.0, 1.0)
    p = tg.tangent_point(M, [0.0, 0.0], [0.99, 0.0])
    tg.check_radius(W, p)
    with pytest.raises(sf.BoundaryError):
        tg.check_radius(W, p, cap=0.95)
    with pytest.raises(sf.BoundaryError):
        tg.frame_split_at(M, W, p, cap=0.95)


def test_sample_tangent_points_respect_cap(rng):
    M = sf.SpaceFormModel(-1.0, 3)
    W = tg.weights_kahler(-1.0, 4.0)
    pts = tg.sample_tangent_points(M, W, rng, 300, radius_cap=0.9)
    assert max(p.r for p in pts) <= 0.9 * W.r0
    flat = tg.sample_tangent_points(sf.SpaceFormModel(0.0, 2), tg.weights_kahler(0.0, 1.0), rng, 50, r_max=3.0)
    assert max(p.r for p in flat) <= 3.0


@given(cases)
def test_complex_structure_squares_to_minus_one(case):
    _, _, _, s = _setup(*case)
    n = len(s.J)
    assert np.allclose(s.J @ s.J, -np.eye(n), atol=1e-12)


@given(cases)
def test_metric_is_hermitian(case):
    _, _, _, s = _setup(*case)
    assert np.allclose(s.J.T @ s.g @ s.J, s.g, atol=1e-10 * np.abs(s.g).max())
    assert np.all(np.linalg.eigvalsh(s.g) > 0)


@given(cases)
def test_kahler_form_is_c2_times_omega0(case):
    K, m, c1, c2, seed = case
    _, _, _, s = _setup(*case)
    assert np.allclose(s.omega, c2 * s.omega0, atol=1e-10 * c2)
    assert np.allclose(s.omega, -s.omega.T, atol=1e-12)


@given(cases)
def test_mirror_map(case):
    M, W, p, s = _setup(*case)
    m = M.m
    assert np.allclose(s.B @ s.B, 0.0, atol=1e-14)
    # B h_i = v_i and B v_i = 0
    assert np.allclose(s.B @ s.horizontal, s.vertical, atol=1e-14)
    assert np.allclose(s.B @ s.vertical, 0.0, atol=1e-14)
    # J h = a v on horizontal lifts
    a = W.a(p.r**2)
    assert np.allclose(s.J @ s.horizontal, a * s.vertical, atol=1e-12)
    assert s.xi.shape == (2 * m,)


@given(cases)
def test_horizontal_lifts_in_kernel_of_connection_map(case):
    M, _, p, s = _setup(*case)
    for k in range(M.m):
        X, V = tg.adapted_components(M, p, s.horizontal[:, k])
        assert np.allclose(V, 0.0, atol=1e-14)
        assert np.allclose(tg.coordinate_vector(M, p, X, V), s.horizontal[:, k])


@given(cases)
def test_d_r_squared_is_twice_xi_flat(case):
    M, _, p, s = _setup(*case)
    _, d, _ = jets.derivatives(tg.radius_squared_field(M), p.z, order=1)
    g = sf.metric_at(M, p.x)
    rng = np.random.default_rng(case[-1])
    w = rng.normal(size=2 * M.m)
    _, V = tg.adapted_components(M, p, w)
    assert d @ w == pytest.approx(2 * p.u @ g @ V, abs=1e-10)


@given(cases)
def test_theta_vanishes_on_verticals(case):
    M, _, p, s = _setup(*case)
    assert np.allclose(s.theta @ s.vertical, 0.0, atol=1e-14)


def test_lagrangian_plane(rng):
    M, W, p, s = _setup(-1.0, 3, 1.0, 1.0, 7)
    P = tg.lagrangian_plane_at(p, s, 0.3, -1.2)
    assert np.abs(P.restriction(s.omega)).max() < 1e-12
    assert np.abs(P.rotated(s.J).restriction(s.omega)).max() < 1e-12
    with pytest.raises(ValueError):
        tg.lagrangian_plane_at(p, s, 0.0, 0.0)


@given(st.integers(0, 10_000))
def test_lifted_isometry_preserves_radius(seed):
    M = sf.SpaceFormModel(-1.0, 2)
    W = tg.weights_kahler(-1.0, 1.0)
    rng = np.random.default_rng(seed)
    p = tg.sample_tangent_points(M, W, rng, 1)[0]
    f = sf.mobius(sf.sample_points(M, rng, 1, fraction=0.5)[0])
    q = tg.lift_isometry(M, f, p)
    assert q.r == pytest.approx(p.r, abs=1e-12)
    D = tg.lifted_differential(M, f, p)
    G = tg.metric_field(M, W)
    assert np.abs(D.T @ G(q.z) @ D - G(p.z)).max() < 1e-9
