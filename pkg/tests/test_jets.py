"""Dual-number jets: value, gradient and Hessian against analytic and finite-difference oracles."""

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from tangentkahler import jets
from tangentkahler.calculus import _fd_derivatives

coords = st.lists(st.floats(-1.5, 1.5), min_size=3, max_size=3).map(np.array)


def test_variables_seed_identity():
    J = jets.Jet.variables(np.array([1.0, 2.0]))
    assert np.array_equal(J.d1, np.eye(2))
    assert np.array_equal(J.d2, np.zeros((2, 2, 2)))
    assert J.order == 2 and J.n == 2


def test_polynomial_derivatives_exact():
    # f = x^2 y + 3 y^3
    f = lambda z: z[0] * z[0] * z[1] + 3.0 * z[1] ** 3  # noqa: E731
    v, d1, d2 = jets.derivatives(f, np.array([2.0, -1.0]))
    assert v == pytest.approx(-4.0 - 3.0)
    assert np.allclose(d1, [2 * 2 * -1, 4 + 9])
    assert np.allclose(d2, [[-2.0, 4.0], [4.0, -18.0]])


def test_elementary_functions():
    x = np.array([0.7])
    for fn, f0, f1, f2 in [
        (jets.sqrt, np.sqrt(0.7), 0.5 / np.sqrt(0.7), -0.25 * 0.7**-1.5),
        (jets.exp, np.exp(0.7), np.exp(0.7), np.exp(0.7)),
        (jets.log, np.log(0.7), 1 / 0.7, -1 / 0.49),
        (jets.sin, np.sin(0.7), np.cos(0.7), -np.sin(0.7)),
        (jets.cos, np.cos(0.7), -np.sin(0.7), -np.cos(0.7)),
    ]:
        v, d1, d2 = jets.derivatives(lambda z: fn(z[0]), x)
        assert v == pytest.approx(f0)
        assert d1[0] == pytest.approx(f1)
        assert d2[0, 0] == pytest.approx(f2)


def test_helpers_accept_plain_arrays():
    a = np.arange(6.0).reshape(2, 3)
    b = np.arange(3.0)
    assert np.array_equal(jets.einsum("ij,j->i", a, b), a @ b)
    assert np.array_equal(jets.block([[np.eye(2), np.zeros((2, 2))]]), np.hstack([np.eye(2), np.zeros((2, 2))]))
    assert jets.value(3.0) == 3.0
    assert not jets.is_jet(a)


def test_pow_and_reciprocal():
    v, d1, d2 = jets.derivatives(lambda z: z[0] ** 0.25 + 1.0 / z[1], np.array([2.0, 4.0]))
    assert d1[0] == pytest.approx(0.25 * 2.0**-0.75)
    assert d1[1] == pytest.approx(-1 / 16)
    assert d2[1, 1] == pytest.approx(2 / 64)


def test_complex_conjugation_and_parts():
    f = lambda z: jets.conj((z[0] + 1j * z[1]) ** 2)  # noqa: E731
    v, d1, _ = jets.derivatives(f, np.array([1.0, 2.0]))
    assert v == pytest.approx(np.conj((1 + 2j) ** 2))
    # d/dx conj(z^2) = conj(2z)
    assert d1[0] == pytest.approx(np.conj(2 * (1 + 2j)))
    J = jets.Jet.variables(np.array([1.0])) * (1 + 2j)
    assert J.real.val[0] == 1.0 and J.imag.val[0] == 2.0


def test_shape_manipulation():
    J = jets.Jet.variables(np.arange(6.0)).reshape(2, 3)
    assert J.shape == (2, 3)
    assert J.T.shape == (3, 2)
    assert J[..., 1].shape == (2,)
    s = J.sum(axis=1)
    assert np.allclose(s.val, [3.0, 12.0])
    assert np.allclose(s.d1[0], [1, 1, 1, 0, 0, 0])


def test_matmul_rejects_higher_rank():
    with pytest.raises(ValueError):
        jets.matmul(np.zeros((2, 2, 2)), np.zeros(2))


def _field(z):
    M = jets.stack([jets.stack([z[0] * z[1], jets.sin(z[2])]),
                    jets.stack([jets.exp(z[1]) * z[2], jets.sqrt(1.0 + z[0] * z[0])])])
    v = jets.stack([z[2], z[0] - z[1]])
    return jets.matmul(M, v) / (2.0 + jets.cos(z[0]))


@given(coords)
def test_jets_agree_with_finite_differences(z):
    v, d1, d2 = jets.derivatives(_field, z)
    fv, fd1, fd2 = _fd_derivatives(_field, z, 2, 1e-5, 1e-4)
    assert np.allclose(v, fv)
    assert np.allclose(d1, fd1, atol=1e-7)
    assert np.allclose(d2, fd2, atol=1e-5)


@given(coords)
def test_hessian_symmetric(z):
    _, _, d2 = jets.derivatives(_field, z)
    assert np.allclose(d2, np.swapaxes(d2, -1, -2), atol=1e-12)


@given(coords, coords)
def test_einsum_product_rule(a, b):
    def f(z):
        return jets.einsum("i,i->", z * a, jets.exp(z * b))

    _, d1, _ = jets.derivatives(f, a)
    expected = a * np.exp(a * b) + (a * a) * b * np.exp(a * b)
    assert np.allclose(d1, expected)
