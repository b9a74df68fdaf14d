"""Weighted Sasaki-type Hermitian structures on the tangent manifold of a space form.

A point of the tangent manifold is ``z = (x, u)``: ``x`` a base chart point and
``u`` the fibre vector in the chart basis ``d/dx^i``.  Tangent vectors to the
tangent manifold are ``(X, U)`` in the coordinate basis ``(d/dx, d/du)``.

The connection map sends ``(X, U)`` to its vertical part ``V = U + A X`` with
``A[k, i] = Gamma^k_ij(x) u^j``; the horizontal part is ``X``.  In these adapted
components the weighted metric is ``diag(mu^2 g, lam^2 g)`` and the complex
structure is ``h -> a v``, ``v -> -h / a`` with ``a = mu / lam``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import jets
from .spaceform import (
    BaseIsometry,
    BoundaryError,
    SpaceFormModel,
    _christoffel,
    conformal_factor,
    sample_points,
)


@dataclass(frozen=True)
class WeightSpec:
    """Radial weights ``mu(s)``, ``lam(s)`` as functions of ``s = r^2``.

    ``r0`` is the edge of the disk bundle on which the weights are defined.
    """

    mu: Callable
    lam: Callable
    K: float
    c1: float
    c2: float
    r0: float = math.inf
    name: str = "custom"

    def a(self, s):
        return self.mu(s) / self.lam(s)

    def product(self, s):
        return self.mu(s) * self.lam(s)


def _ratio_product_weights(ratio_sq, product, K, c1, c2, r0, name) -> WeightSpec:
    # mu = sqrt(P a), lam = sqrt(P / a) with a = sqrt(ratio_sq)
    def mu(s):
        return jets.sqrt(product(s) * jets.sqrt(ratio_sq(s)))

    def lam(s):
        return jets.sqrt(product(s) / jets.sqrt(ratio_sq(s)))

    return WeightSpec(mu, lam, K, c1, c2, r0, name)


def kahler_radius(K: float, c1: float) -> float:
    return math.sqrt(-c1 / K) if K < 0 else math.inf


def weights_kahler(K: float, c1: float, c2: float = 1.0) -> WeightSpec:
    """``mu = sqrt(c2) (c1 + K r^2)^(1/4)``, ``lam = c2 / mu``."""
    if c1 <= 0 or c2 <= 0:
        raise ValueError(f"c1 and c2 must be positive, got c1={c1}, c2={c2}")
    sc2 = math.sqrt(c2)

    def mu(s):
        return sc2 * (c1 + K * s) ** 0.25

    def lam(s):
        return sc2 * (c1 + K * s) ** -0.25

    return WeightSpec(mu, lam, K, c1, c2, kahler_radius(K, c1), "kahler")


def weights_ratio(
    K: float, c1: float, c2: float = 1.0, *, slope: float | None = None, product=None, name="ratio"
) -> WeightSpec:
    """Weights with ``a^2 = c1 + slope * r^2`` and ``mu lam = product(r^2)`` (default ``c2``).

    ``slope = K`` reproduces the Kahler ratio; other slopes are integrability controls.
    """
    if c1 <= 0 or c2 <= 0:
        raise ValueError(f"c1 and c2 must be positive, got c1={c1}, c2={c2}")
    slope = K if slope is None else slope
    r0 = math.sqrt(-c1 / slope) if slope < 0 else math.inf
    if product is None:

        def product(s):
            return c2 + 0.0 * s

    return _ratio_product_weights(lambda s: c1 + slope * s, product, K, c1, c2, r0, name)


def weights_constant(mu: float, lam: float, K: float = 0.0) -> WeightSpec:
    a = mu / lam
    return WeightSpec(
        lambda s: mu + 0.0 * s, lambda s: lam + 0.0 * s, K, a * a, mu * lam, math.inf, "constant"
    )


def weights_sasaki(K: float = 0.0) -> WeightSpec:
    return WeightSpec(lambda s: 1.0 + 0.0 * s, lambda s: 1.0 + 0.0 * s, K, 1.0, 1.0, math.inf, "sasaki")


# -- points ------------------------------------------------------------------------


@dataclass(frozen=True)
class TangentPoint:
    x: np.ndarray
    u: np.ndarray
    r: float

    @property
    def z(self) -> np.ndarray:
        return np.concatenate([self.x, self.u])


def tangent_point(model: SpaceFormModel, x, u) -> TangentPoint:
    x = np.asarray(x, dtype=float)
    u = np.asarray(u, dtype=float)
    model.check_point(x)
    if u.shape != (model.m,):
        raise ValueError(f"fibre vector must have {model.m} components")
    e = conformal_factor(model, x)
    return TangentPoint(x, u, float(e * np.linalg.norm(u)))


def from_z(model: SpaceFormModel, z) -> TangentPoint:
    z = np.asarray(z, dtype=float)
    return tangent_point(model, z[: model.m], z[model.m :])


def radius_squared(model: SpaceFormModel, z):
    m = model.m
    x, u = z[:m], z[m:]
    e = conformal_factor(model, x)
    return (e * e) * (u * u).sum()


def check_radius(weights: WeightSpec, p: TangentPoint, cap: float = 1.0) -> None:
    if math.isfinite(weights.r0) and p.r >= cap * weights.r0:
        raise BoundaryError(f"fibre radius {p.r:.6g} >= {cap:g} * r0 = {cap * weights.r0:.6g}")


def sample_tangent_points(
    model: SpaceFormModel,
    weights: WeightSpec,
    rng: np.random.Generator,
    count: int,
    radius_cap: float = 0.95,
    r_max: float = 2.0,
    r_min: float = 0.0,
) -> list[TangentPoint]:
    """Seeded points with fibre radius uniform in ``[r_min, cap]``.

    ``cap`` is ``radius_cap * r0`` when the disk bundle is finite, else ``r_max``.
    """
    xs = sample_points(model, rng, count)
    cap = radius_cap * weights.r0 if math.isfinite(weights.r0) else r_max
    pts = []
    for x in xs:
        d = rng.normal(size=model.m)
        d /= np.linalg.norm(d)
        r = rng.uniform(r_min, cap)
        u = d * r / conformal_factor(model, x)
        pts.append(tangent_point(model, x, u))
    return pts


# -- polymorphic field evaluators on z = (x, u) -------------------------------------


def connection_matrix(model: SpaceFormModel, z):
    """``A[k, i] = Gamma^k_ij(x) u^j``; the vertical part of (X, U) is ``U + A X``."""
    m = model.m
    return jets.einsum("kij,j->ki", _christoffel(model, z[:m]), z[m:])


def _to_adapted(model, z):
    m = model.m
    A = connection_matrix(model, z)
    I, O = np.eye(m), np.zeros((m, m))
    return A, jets.block([[I, O], [A, I]]), jets.block([[I, O], [-A, I]])


def metric_field(model: SpaceFormModel, weights: WeightSpec):
    m = model.m

    def g(z):
        e = conformal_factor(model, z[:m])
        s = radius_squared(model, z)
        mu, lam = weights.mu(s), weights.lam(s)
        A = connection_matrix(model, z)
        gv = (e * e * lam * lam) * np.eye(m)
        gh = (e * e * mu * mu) * np.eye(m)
        gvA = jets.einsum("ij,jk->ik", gv, A)
        return jets.block(
            [[gh + jets.einsum("ji,jk->ik", A, gvA), gvA.T], [gvA, gv]]
        )

    return g


def complex_structure_field(model: SpaceFormModel, weights: WeightSpec):
    m = model.m

    def J(z):
        s = radius_squared(model, z)
        a = weights.a(s)
        _, P, Pinv = _to_adapted(model, z)
        I, O = np.eye(m), np.zeros((m, m))
        Jad = jets.block([[O, (-1.0 / a) * I], [a * I, O]])
        return jets.matmul(Pinv, jets.matmul(Jad, P))

    return J


def mirror_field(model: SpaceFormModel):
    m = model.m

    def B(z):
        _, P, Pinv = _to_adapted(model, z)
        I, O = np.eye(m), np.zeros((m, m))
        return jets.matmul(Pinv, jets.matmul(np.block([[O, O], [I, O]]), P))

    return B


def omega_field(model: SpaceFormModel, weights: WeightSpec):
    """``omega[a, b] = g(J e_a, e_b)``."""
    g = metric_field(model, weights)
    J = complex_structure_field(model, weights)

    def omega(z):
        return jets.einsum("ca,cb->ab", J(z), g(z))

    return omega


def omega0_field(model: SpaceFormModel):
    return omega_field(model, weights_sasaki(model.K))


def theta_field(model: SpaceFormModel):
    """``theta(w) = g0(xi, B w)`` with ``xi = (0, u)`` and ``g0`` the Sasaki metric."""
    m = model.m
    g0 = metric_field(model, weights_sasaki(model.K))
    B = mirror_field(model)

    def theta(z):
        xi = jets.concatenate([np.zeros(m), z[m:]])
        return jets.einsum("ca,c->a", B(z), jets.einsum("cd,d->c", g0(z), xi))

    return theta


def radius_squared_field(model: SpaceFormModel):
    return lambda z: radius_squared(model, z)


# -- frame split -----------------------------------------------------------------


@dataclass(frozen=True)
class FrameSplit:
    horizontal: np.ndarray  # (2m, m) columns h_i = d/dx^i - A[k,i] d/du^k
    vertical: np.ndarray  # (2m, m) columns d/du^i
    B: np.ndarray
    g: np.ndarray
    J: np.ndarray
    omega: np.ndarray
    omega0: np.ndarray
    theta: np.ndarray
    xi: np.ndarray


def frame_split_at(
    model: SpaceFormModel, weights: WeightSpec, p: TangentPoint, cap: float = 1.0
) -> FrameSplit:
    check_radius(weights, p, cap)
    m = model.m
    z = p.z
    A = np.asarray(connection_matrix(model, z))
    H = np.vstack([np.eye(m), -A])
    V = np.vstack([np.zeros((m, m)), np.eye(m)])
    g = np.asarray(metric_field(model, weights)(z))
    J = np.asarray(complex_structure_field(model, weights)(z))
    return FrameSplit(
        horizontal=H,
        vertical=V,
        B=np.asarray(mirror_field(model)(z)),
        g=g,
        J=J,
        omega=J.T @ g,
        omega0=np.asarray(omega0_field(model)(z)),
        theta=np.asarray(theta_field(model)(z)),
        xi=np.concatenate([np.zeros(m), p.u]),
    )


def adapted_components(model: SpaceFormModel, p: TangentPoint, w):
    """Split a coordinate tangent vector into (horizontal X, vertical V) base components."""
    m = model.m
    A = np.asarray(connection_matrix(model, p.z))
    w = np.asarray(w)
    return w[:m], w[m:] + A @ w[:m]


def coordinate_vector(model: SpaceFormModel, p: TangentPoint, X, V):
    m = model.m
    A = np.asarray(connection_matrix(model, p.z))
    X, V = np.asarray(X), np.asarray(V)
    return np.concatenate([X, V - A @ X])


# -- Lagrangian planes -------------------------------------------------------------


@dataclass(frozen=True)
class LagrangianPlane:
    f1: float
    f2: float
    basis: np.ndarray  # (2m, m)

    def restriction(self, omega: np.ndarray) -> np.ndarray:
        return self.basis.T @ omega @ self.basis

    def rotated(self, J: np.ndarray) -> "LagrangianPlane":
        return LagrangianPlane(self.f1, self.f2, J @ self.basis)


def lagrangian_plane_at(p: TangentPoint, split: FrameSplit, f1: float, f2: float) -> LagrangianPlane:
    if f1 == 0 and f2 == 0:
        raise ValueError("(f1, f2) must not both vanish")
    return LagrangianPlane(f1, f2, f1 * split.horizontal + f2 * split.vertical)


# -- isometry lifts -----------------------------------------------------------------


def lift_isometry(model: SpaceFormModel, isom: BaseIsometry, p: TangentPoint) -> TangentPoint:
    """``f_*(u) = df_x(u)``."""
    y, dy, _ = jets.derivatives(lambda t: isom(model, t), p.x, order=1)
    return tangent_point(model, y, np.asarray(dy) @ p.u)


def lifted_differential(model: SpaceFormModel, isom: BaseIsometry, p: TangentPoint) -> np.ndarray:
    """Jacobian of ``(x, u) -> (f(x), df_x u)`` in the coordinate basis."""
    m = model.m
    _, dy, d2y = jets.derivatives(lambda t: isom(model, t), p.x, order=2)
    dy, d2y = np.asarray(dy), np.asarray(d2y)
    lower = np.einsum("kji,j->ki", d2y, p.u)
    return np.block([[dy, np.zeros((m, m))], [lower, dy]])
