"""Constant-curvature base manifolds realised in one conformally flat chart.

The chart metric is ``g_ij = e(x)^2 delta_ij`` with ``e(x) = 1 / (1 + K|x|^2/4)``:
stereographic coordinates of the radius ``1/sqrt(K)`` sphere for ``K > 0``,
Euclidean space for ``K = 0`` and the Poincare ball of radius ``2/sqrt(-K)`` for
``K < 0``.  Every evaluator accepts plain arrays or :class:`~tangentkahler.jets.Jet`
points, so derivatives of chart quantities come for free.

Curvature convention: ``R(X, Y)Z = nabla_X nabla_Y Z - nabla_Y nabla_X Z - nabla_[X,Y] Z``,
which for constant curvature gives ``R(X, Y)Z = K (g(Y, Z) X - g(X, Z) Y)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import jets


class DomainError(ValueError):
    """A point lies outside the region where a chart or structure is defined."""


class BoundaryError(DomainError):
    """A fibre radius reached the edge ``r0`` of the disk bundle."""


# Sign of the closed-form base curvature relative to the convention above.
# Pinned by tests/test_spaceform.py::test_curvature_sign_calibration.
CURVATURE_SIGN = 1.0


@dataclass(frozen=True)
class SpaceFormModel:
    K: float
    m: int

    def __post_init__(self):
        if int(self.m) != self.m or self.m < 2:
            raise ValueError(f"dimension m must be an integer >= 2, got {self.m}")

    @property
    def chart_radius(self) -> float:
        return 2.0 / math.sqrt(-self.K) if self.K < 0 else math.inf

    def sample_radius(self, fraction: float = 0.9) -> float:
        """Radius of the chart ball used for seeded sampling."""
        if self.K < 0:
            return fraction * self.chart_radius
        # K >= 0: the whole chart is admissible; |x| <= 2/sqrt(K) is a hemisphere.
        return 2.0 / math.sqrt(self.K) if self.K > 0 else 2.0

    def check_point(self, x) -> None:
        xv = np.asarray(jets.value(x)).real
        if xv.shape != (self.m,):
            raise ValueError(f"expected a point with {self.m} components, got shape {xv.shape}")
        if not np.all(np.isfinite(xv)):
            raise DomainError("non-finite chart point")
        if self.K < 0 and float(np.linalg.norm(xv)) >= self.chart_radius:
            raise DomainError(
                f"|x| = {np.linalg.norm(xv):.6g} outside chart radius {self.chart_radius:.6g}"
            )


def conformal_factor(model: SpaceFormModel, x):
    """``e(x) = (1 + K|x|^2/4)^-1``; the metric is ``e^2`` times the Euclidean one."""
    return 1.0 / (1.0 + 0.25 * model.K * (x * x).sum())


def log_factor_gradient(model: SpaceFormModel, x):
    """Gradient of ``log e(x)``, i.e. ``-(K/2) x e(x)``."""
    return x * (-0.5 * model.K * conformal_factor(model, x))


def metric_at(model: SpaceFormModel, x):
    model.check_point(x)
    e = conformal_factor(model, x)
    return (e * e) * np.eye(model.m)


def christoffel_at(model: SpaceFormModel, x):
    """``Gamma[k, i, j]`` for the chart metric (symmetric in i, j)."""
    model.check_point(x)
    return _christoffel(model, x)


def _christoffel(model: SpaceFormModel, x):
    s = log_factor_gradient(model, x)
    eye = np.eye(model.m)
    return (
        jets.einsum("ki,j->kij", eye, s)
        + jets.einsum("kj,i->kij", eye, s)
        - jets.einsum("ij,k->kij", eye, s)
    )


def riemann_base(model: SpaceFormModel, x, z, w, v):
    """Closed-form ``R(z, w)v = K (g(w, v) z - g(z, v) w)`` at chart point x."""
    g = metric_at(model, x)
    z, w, v = (np.asarray(a) for a in (z, w, v))
    return CURVATURE_SIGN * model.K * ((w @ g @ v) * z - (z @ g @ v) * w)


def riemann_tensor_base(model: SpaceFormModel, x):
    """Closed-form ``R[a, b, c, d] = dx^a(R(e_c, e_d) e_b)``."""
    g = np.asarray(metric_at(model, x))
    eye = np.eye(model.m)
    # R(e_c,e_d)e_b = K (g_db e_c - g_cb e_d)
    return CURVATURE_SIGN * model.K * (
        np.einsum("ac,db->abcd", eye, g) - np.einsum("ad,cb->abcd", eye, g)
    )


def riemann_from_christoffel(model: SpaceFormModel, x):
    """Curvature of the chart metric from exact derivatives of the Christoffels."""
    model.check_point(x)
    gam, dgam, _ = jets.derivatives(lambda y: _christoffel(model, y), np.asarray(x, float), order=1)
    # dgam[a, b, c, e] = d_e Gamma^a_bc
    return (
        np.einsum("adbc->abcd", dgam)
        - np.einsum("acbd->abcd", dgam)
        + np.einsum("ace,edb->abcd", gam, gam)
        - np.einsum("ade,ecb->abcd", gam, gam)
    )


def sectional_curvature(riemann, g, X, Y) -> float:
    """``g(R(X,Y)Y, X) / (|X|^2 |Y|^2 - g(X,Y)^2)`` from a (1,3) tensor ``R[a,b,c,d]``."""
    RXYY = np.einsum("abcd,b,c,d->a", riemann, Y, X, Y)
    num = X @ g @ RXYY
    den = (X @ g @ X) * (Y @ g @ Y) - (X @ g @ Y) ** 2
    return float(num / den)


def sample_points(model: SpaceFormModel, rng: np.random.Generator, count: int, fraction=0.9):
    """Seeded points uniform in the chart ball of radius ``model.sample_radius(fraction)``."""
    R = model.sample_radius(fraction)
    d = rng.normal(size=(count, model.m))
    d /= np.linalg.norm(d, axis=1, keepdims=True)
    rad = R * rng.uniform(size=(count, 1)) ** (1.0 / model.m)
    return d * rad


# -- isometries -------------------------------------------------------------------


@dataclass(frozen=True)
class BaseIsometry:
    """A chart map: ``kind`` is one of ``identity``, ``rotation``, ``mobius`` or ``scaling``.

    ``rotation`` parameters are the row-major entries of an orthogonal matrix;
    ``mobius`` parameters are the chart point sent to the origin (K < 0 only);
    ``scaling`` (a single factor) is not an isometry and serves as a negative control.
    """

    kind: str
    parameters: tuple = field(default_factory=tuple)

    def __call__(self, model: SpaceFormModel, x):
        m = model.m
        if self.kind == "identity":
            return x
        if self.kind == "rotation":
            Q = np.asarray(self.parameters, dtype=float).reshape(m, m)
            return jets.matmul(Q, x)
        if self.kind == "scaling":
            return x * float(self.parameters[0])
        if self.kind == "mobius":
            if model.K >= 0:
                raise ValueError("Mobius maps are only defined here for K < 0")
            s = math.sqrt(-model.K) / 2.0  # chart point x <-> unit ball point s*x
            a = np.asarray(self.parameters, dtype=float) * s
            y = x * s
            d = y - a
            aa = float(a @ a)
            num = d * (1.0 - aa) - (d * d).sum() * a
            den = 1.0 - 2.0 * (y * a).sum() + aa * (y * y).sum()
            return num / den / s
        raise ValueError(f"unknown isometry kind {self.kind!r}")


def rotation(theta: float, m: int = 2, plane=(0, 1)) -> BaseIsometry:
    Q = np.eye(m)
    i, j = plane
    c, s = math.cos(theta), math.sin(theta)
    Q[i, i], Q[i, j], Q[j, i], Q[j, j] = c, -s, s, c
    return BaseIsometry("rotation", tuple(Q.ravel()))


def random_rotation(rng: np.random.Generator, m: int) -> BaseIsometry:
    Q, R = np.linalg.qr(rng.normal(size=(m, m)))
    Q = Q * np.sign(np.diag(R))
    return BaseIsometry("rotation", tuple(Q.ravel()))


def mobius(a) -> BaseIsometry:
    return BaseIsometry("mobius", tuple(float(t) for t in a))


def apply_isometry(model: SpaceFormModel, isom: BaseIsometry, x):
    """Image point and differential (m x m Jacobian) of ``isom`` at x."""
    x = np.asarray(x, dtype=float)
    model.check_point(x)
    y, dy, _ = jets.derivatives(lambda t: isom(model, t), x, order=1)
    y = np.asarray(y, dtype=float)
    model.check_point(y)
    return y, np.asarray(dy, dtype=float)


def pullback_residual(model: SpaceFormModel, isom: BaseIsometry, x) -> float:
    y, D = apply_isometry(model, isom, x)
    return float(np.max(np.abs(D.T @ metric_at(model, y) @ D - metric_at(model, x))))
