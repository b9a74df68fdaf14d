"""Complex frames over curvature +-1 surfaces, cross-checked against the real chart."""

import cmath

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from tangentkahler import complex_frames as cf
from tangentkahler import jets
from tangentkahler import spaceform as sf

signs = st.sampled_from([1, -1])
c1s = st.sampled_from([1.0, 2.5])
seeds = st.integers(0, 10_000)


def _point(sign, c1, seed):
    return cf.sample_surface_points(sign, c1, np.random.default_rng(seed), 1)[0]


def test_point_validation():
    with pytest.raises(ValueError):
        cf.SurfaceChartPoint(0j, 0j, 2)
    with pytest.raises(sf.DomainError):
        cf.SurfaceChartPoint(1.0 + 0j, 0j, -1)
    p = cf.SurfaceChartPoint(0.5 + 0j, 0.25 + 0j, -1)
    assert p.zeta == pytest.approx(0.75)
    assert p.r == pytest.approx(2 / 3)


def test_surface_connection_examples():
    assert cf.surface_connection(cf.SurfaceChartPoint(0j, 0j, 1)) == 0
    assert cf.surface_connection(cf.SurfaceChartPoint(1 + 0j, 0j, 1)) == pytest.approx(-1)


@given(signs, seeds)
def test_surface_connection_matches_real_chart(sign, seed):
    p = _point(sign, 1.0, seed)
    v = cf.surface_connection_from_chart(p)
    assert abs(v[0] - cf.surface_connection(p)) < 1e-10
    assert abs(v[1]) < 1e-10


def test_dictionary_round_trip(rng):
    c = rng.normal(size=4) + 1j * rng.normal(size=4)
    assert np.allclose(cf.chart_to_complex(cf.complex_to_chart(c)), c)
    real = rng.normal(size=4)
    # a real chart vector maps to conjugate coefficient pairs
    cc_ = cf.chart_to_complex(real)
    assert np.allclose(cc_[1::2], np.conj(cc_[0::2]))


def test_chart_metric_normalisation():
    # the surface metric 4/(1 + s|z|^2)^2 equals the chart metric in doubled coordinates
    for sign in (1, -1):
        p = cf.SurfaceChartPoint(0.3 + 0.2j, 0j, sign)
        tp = cf.to_chart_point(p)
        e = sf.conformal_factor(cf.chart_model(sign), tp.x)
        # d/dx = 2 d/dx_c, so |d/dx|^2 = 4 e^2
        assert 4 * e**2 == pytest.approx(4 / p.zeta**2)


def test_horizontal_basis_examples():
    X1, X2 = cf.horizontal_basis(1)
    s0 = cf.SurfaceChartPoint(0j, 0.7 + 0.1j, 1).coords
    assert np.allclose(X1(s0), [1, 0, 0, 0])
    s1 = cf.SurfaceChartPoint(1 + 0j, 1 + 0j, 1).coords
    assert np.allclose(X1(s1), [1, 0, 1, 0])
    assert np.allclose(X2(s1), [0, 1, 0, 1])


@given(signs, seeds)
def test_horizontal_basis_is_horizontal(sign, seed):
    assert cf.horizontal_defect(_point(sign, 1.0, seed)) < 1e-10


def test_a_function_examples():
    assert cf.a_function(cf.SurfaceChartPoint(0.3j, 0j, -1), 2.0) == pytest.approx(2.0**0.5)
    assert cf.a_function(cf.SurfaceChartPoint(0j, 1 + 0j, 1), 1.0) == pytest.approx(5**0.5)
    edge = cf.SurfaceChartPoint(0.5 + 0j, 0.375 + 0j, -1)  # |w| = zeta / 2
    with pytest.raises(sf.BoundaryError):
        cf.a_function(edge, 1.0)


@given(signs, c1s, seeds)
def test_a_matches_real_radius(sign, c1, seed):
    p = _point(sign, c1, seed)
    r = cf.to_chart_point(p).r
    assert r == pytest.approx(p.r)
    assert cf.a_function(p, c1) == pytest.approx(np.sqrt(c1 + sign * r * r), abs=1e-9)


@given(signs, c1s, seeds)
def test_pde_residuals(sign, c1, seed):
    p = _point(sign, c1, seed)
    r1, r2 = cf.pde_residual(p, cf.a_field(c1, sign))
    assert abs(r1) < 1e-10 and abs(r2) < 1e-10


@given(signs, seeds)
def test_constant_a_fails_second_equation(sign, seed):
    p = _point(sign, 1.0, seed)
    a = 1.3
    _, r2 = cf.pde_residual(p, lambda s: a + 0.0 * s[0])
    assert r2 == pytest.approx(-sign * 2 * np.conj(p.w) * a)


def test_xi_frame_at_origin():
    Xi1, Xi2 = cf.xi_frame(1, 1.0)
    s = cf.SurfaceChartPoint(0j, 0j, 1).coords
    assert np.allclose(Xi1(s), [1, 0, 1j, 0])
    assert np.allclose(Xi2(s), [0, 1, 0, 1j])
    const = lambda t: 3.0 + 0.0 * t[0]  # noqa: E731
    assert Xi1.apply(const, s) == 0


@given(signs, c1s, st.sampled_from([1.0, 3.0]), seeds)
def test_xi_spans_minus_i_eigenspace(sign, c1, c2, seed):
    assert cf.xi_eigen_defect(_point(sign, c1, seed), c1, c2) < 1e-9


@given(signs, c1s, seeds)
def test_commutator_table(sign, c1, seed):
    table = cf.commutator_table(_point(sign, c1, seed), c1)
    assert len(table) >= 14
    for name, res in table.items():
        assert res < 1e-8, name


def test_conjugation_is_an_involution(rng):
    X1, _ = cf.horizontal_basis(-1)
    s = cf.SurfaceChartPoint(0.2 + 0.1j, 0.3 - 0.2j, -1).coords
    assert np.allclose(X1.conj().conj()(s), X1(s))
    J = jets.Jet.variables(s, order=1)
    assert jets.is_jet(X1.conj()(J))


def test_beltrami_examples():
    out0 = cf.beltrami_check(0j)
    assert out0["f"] == pytest.approx(-0.5)
    out = cf.beltrami_check(0.5 + 0j)
    assert out["f"] == pytest.approx(-2 / 3)
    for k, v in out.items():
        if k != "f":
            assert v < 1e-10, k
    with pytest.raises(sf.DomainError):
        cf.beltrami_check(1.0 + 0j)


@given(st.floats(0.0, 0.95), st.floats(0.0, 2 * np.pi))
def test_beltrami_random_points(rad, ang):
    out = cf.beltrami_check(cmath.rect(rad, ang))
    assert max(v for k, v in out.items() if k != "f") < 1e-10


def test_other_multiplier_also_solves_displayed_equation():
    f = lambda s: 1.0 / (1.0 - (s[0] * s[0] + s[1] * s[1])) + 0j  # noqa: E731
    assert abs(cf.commuting_multiplier_residual(f, 0.4 - 0.3j)) < 1e-12


def test_sampled_points_inside_bundle(rng):
    for sign in (1, -1):
        for p in cf.sample_surface_points(sign, 2.0, rng, 50):
            cf.a_function(p, 2.0)
