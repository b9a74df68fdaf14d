"""Tensor calculus on coordinate charts: Christoffels, curvature, brackets, forms, transport.

Everything here works on *field evaluators*: callables taking a coordinate point
(a numpy array or a :class:`~tangentkahler.jets.Jet`) and returning an array.
A :class:`DiffEngine` turns a field into value/gradient/Hessian, either exactly
(dual numbers) or by central differences.

Index conventions: ``dg[a, b, c] = d_c g_ab``, ``Gamma[a, b, c] = Gamma^a_bc``,
``R[a, b, c, d] = dx^a(R(e_c, e_d) e_b)``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import jets
from .spaceform import DomainError, SpaceFormModel, riemann_base
from .tangent_geometry import (
    TangentPoint,
    WeightSpec,
    _to_adapted,
    complex_structure_field,
    connection_matrix,
    metric_field,
)

DEFAULT_TOLERANCES = {
    "ad_identity": 1e-8,
    "ad_curvature": 1e-6,
    "fd": 1e-5,
    "energy_drift": 1e-8,
}


@dataclass(frozen=True)
class DiffEngine:
    mode: str = "dual"
    fd_step: float = 1e-5
    fd_step2: float = 1e-4
    tolerances: dict = field(default_factory=lambda: dict(DEFAULT_TOLERANCES), hash=False)

    def __post_init__(self):
        if self.mode not in ("dual", "fd"):
            raise ValueError(f"unknown differentiation mode {self.mode!r}")

    def derivatives(self, fn: Callable, z, order: int = 1):
        """Value, first and (if ``order == 2``) second derivatives of ``fn`` at ``z``."""
        z = np.asarray(z, dtype=float)
        if self.mode == "dual":
            return jets.derivatives(fn, z, order=order)
        return _fd_derivatives(fn, z, order, self.fd_step, self.fd_step2)


def _fd_derivatives(fn, z, order, h, h2):
    n = len(z)
    f0 = np.asarray(fn(z))
    d1 = np.empty(f0.shape + (n,), dtype=f0.dtype)
    for a in range(n):
        e = np.zeros(n)
        e[a] = h
        d1[..., a] = (np.asarray(fn(z + e)) - np.asarray(fn(z - e))) / (2 * h)
    if order < 2:
        return f0, d1, None
    d2 = np.empty(f0.shape + (n, n), dtype=f0.dtype)
    for a in range(n):
        ea = np.zeros(n)
        ea[a] = h2
        for b in range(a, n):
            eb = np.zeros(n)
            eb[b] = h2
            v = (
                np.asarray(fn(z + ea + eb))
                - np.asarray(fn(z + ea - eb))
                - np.asarray(fn(z - ea + eb))
                + np.asarray(fn(z - ea - eb))
            ) / (4 * h2 * h2)
            d2[..., a, b] = v
            d2[..., b, a] = v
    return f0, d1, d2


DUAL = DiffEngine()


# -- Levi-Civita connection and curvature of a metric field ----------------------------


def christoffel_from_metric(g, dg):
    lower = 0.5 * (np.einsum("dcb->dbc", dg) + dg - np.einsum("bcd->dbc", dg))
    return np.einsum("ad,dbc->abc", np.linalg.inv(g), lower)


def christoffel(metric: Callable, z, engine: DiffEngine = DUAL):
    g, dg, _ = engine.derivatives(metric, z, order=1)
    return christoffel_from_metric(g, dg)


def _christoffel_and_derivative(metric, z, engine):
    g, dg, ddg = engine.derivatives(metric, z, order=2)
    ginv = np.linalg.inv(g)
    # lower[d, b, c] = 1/2 (d_b g_dc + d_c g_db - d_d g_bc)
    lower = 0.5 * (np.einsum("dcb->dbc", dg) + dg - np.einsum("bcd->dbc", dg))
    dlower = 0.5 * (
        np.einsum("dcbe->dbce", ddg) + ddg - np.einsum("bcde->dbce", ddg)
    )
    dginv = -np.einsum("ap,pqe,qd->ade", ginv, dg, ginv)
    gam = np.einsum("ad,dbc->abc", ginv, lower)
    dgam = np.einsum("ad,dbce->abce", ginv, dlower) + np.einsum("ade,dbc->abce", dginv, lower)
    return g, gam, dgam


def riemann_from_connection(gam, dgam):
    return (
        np.einsum("adbc->abcd", dgam)
        - np.einsum("acbd->abcd", dgam)
        + np.einsum("ace,edb->abcd", gam, gam)
        - np.einsum("ade,ecb->abcd", gam, gam)
    )


def riemann(metric: Callable, z, engine: DiffEngine = DUAL):
    _, gam, dgam = _christoffel_and_derivative(metric, z, engine)
    return riemann_from_connection(gam, dgam)


def ricci_from_riemann(R):
    return np.einsum("abad->bd", R)


def ricci(metric: Callable, z, engine: DiffEngine = DUAL):
    return ricci_from_riemann(riemann(metric, z, engine))


def scalar_curvature(metric: Callable, z, engine: DiffEngine = DUAL) -> float:
    g, gam, dgam = _christoffel_and_derivative(metric, z, engine)
    Ric = ricci_from_riemann(riemann_from_connection(gam, dgam))
    return float(np.einsum("bd,bd->", np.linalg.inv(g), Ric))


def lower_riemann(R, g):
    """``R_abcd = g_ae R^e_bcd``."""
    return np.einsum("ae,ebcd->abcd", g, R)


def riemann_symmetry_residuals(R, g) -> dict:
    Rl = lower_riemann(R, g)
    return {
        "antisym_cd": float(np.abs(Rl + np.einsum("abdc->abcd", Rl)).max()),
        "antisym_ab": float(np.abs(Rl + np.einsum("bacd->abcd", Rl)).max()),
        "pair": float(np.abs(Rl - np.einsum("cdab->abcd", Rl)).max()),
        "bianchi": float(
            np.abs(Rl + np.einsum("acdb->abcd", Rl) + np.einsum("adbc->abcd", Rl)).max()
        ),
    }


def metric_compatibility_residual(metric: Callable, z, engine: DiffEngine = DUAL) -> float:
    """Max of ``|d_c g_ab - Gamma^e_ca g_eb - Gamma^e_cb g_ae|`` (Koszul consistency)."""
    g, dg, _ = engine.derivatives(metric, z, order=1)
    gam = christoffel_from_metric(g, dg)
    res = dg - np.einsum("eca,eb->abc", gam, g) - np.einsum("ecb,ae->abc", gam, g)
    return float(np.abs(res).max())


# -- tangent-manifold specialisations -------------------------------------------------


def _near_boundary_warning(weights: WeightSpec, p: TangentPoint, cap: float, allow: bool):
    if math.isfinite(weights.r0) and p.r > cap * weights.r0:
        if not allow:
            raise DomainError(
                f"r = {p.r:.6g} beyond {cap:g} r0; pass allow_boundary=True to override"
            )
        warnings.warn(f"evaluating near the disk edge (r/r0 = {p.r / weights.r0:.4f})")


def christoffel_gTM(model, weights, p: TangentPoint, engine=DUAL, allow_boundary=False):
    _near_boundary_warning(weights, p, 0.95, allow_boundary)
    return christoffel(metric_field(model, weights), p.z, engine)


def riemann_gTM(model, weights, p: TangentPoint, engine=DUAL, allow_boundary=False):
    _near_boundary_warning(weights, p, 0.95, allow_boundary)
    return riemann(metric_field(model, weights), p.z, engine)


def ricci_gTM(model, weights, p: TangentPoint, engine=DUAL, allow_boundary=False):
    return ricci_from_riemann(riemann_gTM(model, weights, p, engine, allow_boundary))


def scal_gTM(model, weights, p: TangentPoint, engine=DUAL, allow_boundary=False) -> float:
    _near_boundary_warning(weights, p, 0.95, allow_boundary)
    return scalar_curvature(metric_field(model, weights), p.z, engine)


def christoffel_function(model: SpaceFormModel, weights: WeightSpec, engine=DUAL):
    """Fast ``z -> Gamma`` for transport and geodesics (first-order jets only)."""
    metric = metric_field(model, weights)

    def gamma(z):
        return christoffel(metric, z, engine)

    return gamma


def covariant_derivative_J_residual(model, weights, p: TangentPoint, engine=DUAL) -> float:
    """Max of ``|(nabla_c J)^a_b|`` for the Levi-Civita connection of the weighted metric."""
    J, dJ, _ = engine.derivatives(complex_structure_field(model, weights), p.z, order=1)
    gam = christoffel_gTM(model, weights, p, engine)
    nablaJ = dJ + np.einsum("ace,eb->abc", gam, J) - np.einsum("ecb,ae->abc", gam, J)
    return float(np.abs(nablaJ).max())


# -- brackets and the Nijenhuis tensor ---------------------------------------------------


def bracket_from_jets(X, dX, Y, dY):
    """``[X, Y]^k = X^j d_j Y^k - Y^j d_j X^k`` from values and ``d[k, j] = d_j (.)^k``."""
    return np.einsum("j,kj->k", X, dY) - np.einsum("j,kj->k", Y, dX)


def lie_bracket(Xf: Callable, Yf: Callable, z, engine: DiffEngine = DUAL):
    X, dX, _ = engine.derivatives(Xf, z)
    Y, dY, _ = engine.derivatives(Yf, z)
    return bracket_from_jets(X, dX, Y, dY)


def nijenhuis_tensor(J_field: Callable, z, engine: DiffEngine = DUAL):
    """``N[k, a, b]``: components of ``N(e_a, e_b)`` built from brackets of the fields ``J e_a``.

    ``N(w, z) = J[w, Jz] + J[Jw, z] + [w, z] - [Jw, Jz]``; coordinate fields commute.
    """
    J, dJ, _ = engine.derivatives(J_field, z)
    # column fields Y_b = J e_b with d_c Y_b^k = dJ[k, b, c]
    br_e_Je = dJ  # [e_a, J e_b]^k = d_a J^k_b -> indexed [k, b, a]
    t1 = np.einsum("kl,lba->kab", J, br_e_Je)  # J [e_a, J e_b]
    t2 = -np.einsum("kl,lab->kab", J, br_e_Je)  # J [J e_a, e_b] = -J [e_b, J e_a]
    # [J e_a, J e_b]^k = J^c_a d_c J^k_b - J^c_b d_c J^k_a
    t4 = np.einsum("ca,kbc->kab", J, dJ) - np.einsum("cb,kac->kab", J, dJ)
    return t1 + t2 - t4


def nijenhuis_at(J_field: Callable, z, engine: DiffEngine = DUAL) -> float:
    return float(np.abs(nijenhuis_tensor(J_field, z, engine)).max())


def nijenhuis_on(N, w, v):
    return np.einsum("kab,a,b->k", N, w, v)


def nijenhuis_closed_form(model, weights, p: TangentPoint, w, v):
    """Base-level value of ``N(w^h, v^h)``: ``-R(w, v)u + 2 a a' (g(v, u) w - g(w, u) v)``.

    Returned as a coordinate tangent vector (purely vertical).  ``a'`` is ``da/d(r^2)``.
    """
    m = model.m
    s = p.r**2
    a, da, _ = jets.derivatives(lambda t: weights.a(t[0]), np.array([s]), order=1)
    a, ap = float(a), float(da[0])
    from .spaceform import metric_at

    g = metric_at(model, p.x)
    vert = -riemann_base(model, p.x, w, v, p.u) + 2 * a * ap * (
        (v @ g @ p.u) * np.asarray(w) - (np.asarray(w) @ g @ p.u) * np.asarray(v)
    )
    return np.concatenate([np.zeros(m), vert])


# -- exterior derivative -------------------------------------------------------------------


def exterior_derivative(form: Callable, z, degree: int, engine: DiffEngine = DUAL):
    """Components of ``d(form)`` for a 1-form ``alpha[i]`` or 2-form ``beta[i, j]``."""
    f, df, _ = engine.derivatives(form, z)
    if degree == 1:
        # d alpha_ij = d_i alpha_j - d_j alpha_i ; df[j, i] = d_i alpha_j
        return df.T - df
    if degree == 2:
        # d beta_ijk = d_i beta_jk + d_j beta_ki + d_k beta_ij ; df[j, k, i] = d_i beta_jk
        return (
            np.einsum("jki->ijk", df) + np.einsum("kij->ijk", df) + np.einsum("ijk->ijk", df)
        )
    raise ValueError("degree must be 1 or 2")


def wedge_1_2(alpha, beta):
    """``(alpha ^ beta)_ijk = alpha_i beta_jk + alpha_j beta_ki + alpha_k beta_ij``."""
    return (
        np.einsum("i,jk->ijk", alpha, beta)
        + np.einsum("j,ki->ijk", alpha, beta)
        + np.einsum("k,ij->ijk", alpha, beta)
    )


# -- the connection nabla* and its torsion --------------------------------------------------


def _adapted_field(model, Wf):
    m = model.m

    def adapted(z):
        W = Wf(z)
        A = connection_matrix(model, z)
        X = W[:m]
        return jets.concatenate([X, W[m:] + jets.einsum("ki,i->k", A, X)])

    return adapted


def nabla_star(model: SpaceFormModel, Wf: Callable, Zf: Callable, z, engine: DiffEngine = DUAL):
    """``nabla*_W Z`` at z: the pulled-back base connection on horizontal and vertical parts."""
    from .spaceform import _christoffel

    m = model.m
    z = np.asarray(z, dtype=float)
    w = np.asarray(Wf(z))
    Zad, dZad, _ = engine.derivatives(_adapted_field(model, Zf), z)
    gam = np.asarray(_christoffel(model, z[:m]))
    Xw = w[:m]
    dir_deriv = dZad @ w
    H = dir_deriv[:m] + np.einsum("kij,i,j->k", gam, Xw, Zad[:m])
    V = dir_deriv[m:] + np.einsum("kij,i,j->k", gam, Xw, Zad[m:])
    A = np.asarray(connection_matrix(model, z))
    return np.concatenate([H, V - A @ H])


def torsion_residual(model: SpaceFormModel, Wf, Zf, z, engine: DiffEngine = DUAL):
    """``nabla*_W Z - nabla*_Z W - [W, Z] - pi*R(W, Z) xi`` as a coordinate vector."""
    m = model.m
    z = np.asarray(z, dtype=float)
    T = nabla_star(model, Wf, Zf, z, engine) - nabla_star(model, Zf, Wf, z, engine)
    T = T - lie_bracket(Wf, Zf, z, engine)
    w, v = np.asarray(Wf(z)), np.asarray(Zf(z))
    curv = riemann_base(model, z[:m], w[:m], v[:m], z[m:])
    return T - np.concatenate([np.zeros(m), curv])


# -- zero-section curvature blocks ---------------------------------------------------------------


@dataclass(frozen=True)
class CurvatureBlocks:
    """Closed-form curvature endomorphisms of the Kahler metric on the zero section.

    All maps act on adapted components ``(horizontal, vertical)`` of size 2m, with
    base vectors in chart components at ``x`` and ``<.,.>`` the base metric there.
    """

    model: SpaceFormModel
    c1: float
    c2: float = 1.0

    def _base(self, x, z, w):
        from .spaceform import metric_at

        g = np.asarray(metric_at(self.model, x))
        K = self.model.K
        # R^M(z, w) y = K(<w, y> z - <z, y> w)
        return K * (np.outer(z, g @ w) - np.outer(w, g @ z))

    def hh(self, x, z, w):
        RM = self._base(x, z, w)
        O = np.zeros_like(RM)
        return np.block([[RM, O], [O, RM]])

    def vv(self, x, z, w):
        return self.hh(x, z, w) / self.c1

    def hv(self, x, z, w):
        """``R(z^h, w^v)``; the horizontal-to-vertical block is ``(K/2)(<z,.>w - <z,w>. + <.,w>z)``."""
        from .spaceform import metric_at

        g = np.asarray(metric_at(self.model, x))
        K = self.model.K
        z, w = np.asarray(z), np.asarray(w)
        T = 0.5 * K * (np.outer(w, g @ z) - (z @ g @ w) * np.eye(len(z)) + np.outer(z, g @ w))
        O = np.zeros_like(T)
        return np.block([[O, -T / self.c1], [T, O]])

    def e_f_operator(self, i: int, j: int):
        """``(K/2)(f_j (x) e^i - delta_ij B + f_i (x) e^j)`` in an orthonormal frame at x = 0."""
        m = self.model.m
        E = np.eye(m)
        Tm = np.outer(E[j], E[i]) - (i == j) * np.eye(m) + np.outer(E[i], E[j])
        out = np.zeros((2 * m, 2 * m))
        out[m:, :m] = 0.5 * self.model.K * Tm
        return out

    def sectional(self) -> float:
        """Sectional curvature of horizontal and of vertical planes on the zero section."""
        return self.model.K / (self.c2 * math.sqrt(self.c1))

    def einstein_candidate(self) -> float:
        return (self.model.m - 2) * self.model.K / (2 * self.c2 * math.sqrt(self.c1))


def curvature_endomorphism(R, X, Y):
    """``R(X, Y)`` as a matrix acting on coordinate vectors."""
    return np.einsum("abcd,c,d->ab", R, X, Y)


# -- parallel transport --------------------------------------------------------------------------


def segment(p, q):
    p, q = np.asarray(p, float), np.asarray(q, float)
    d = q - p
    return lambda t: (p + t * d, d)


def polyline(points):
    """Piecewise-linear curve through ``points`` as a list of segments."""
    return [segment(points[k], points[k + 1]) for k in range(len(points) - 1)]


def transport(gamma_fn: Callable, curve, v0, n_steps: int = 16, check=None):
    """Parallel transport of ``v0`` (vector or matrix of column vectors) along ``curve``.

    ``curve`` is ``t -> (point, velocity)`` on ``[0, 1]`` or a list of such segments.
    Classical RK4 on ``dv/dt = -Gamma(c')(v)``.
    """
    if not isinstance(curve, (list, tuple)):
        curve = [curve]
    v = np.array(v0, dtype=float)
    for seg in curve:
        h = 1.0 / n_steps
        cache = {}

        def rhs(t, vv):
            key = round(t / h * 2)
            if key not in cache:
                pt, vel = seg(t)
                if check is not None:
                    check(pt)
                cache[key] = (np.einsum("abc,b->ac", gamma_fn(pt), vel))
            return -cache[key] @ vv

        for k in range(n_steps):
            t = k * h
            k1 = rhs(t, v)
            k2 = rhs(t + h / 2, v + h / 2 * k1)
            k3 = rhs(t + h / 2, v + h / 2 * k2)
            k4 = rhs(t + h, v + h * k3)
            v = v + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
    return v


def transport_adaptive(gamma_fn: Callable, curve, v0, rtol: float = 1e-11, n_start: int = 16, n_max: int = 4096, check=None):
    """RK4 transport with step doubling until two successive results agree to ``rtol``."""
    n = n_start
    prev = transport(gamma_fn, curve, v0, n, check)
    while n < n_max:
        n *= 2
        cur = transport(gamma_fn, curve, v0, n, check)
        if np.abs(cur - prev).max() <= rtol * max(1.0, np.abs(cur).max()):
            return cur
        prev = cur
    return prev


def parallel_transport(model, weights, curve, v0, engine=DUAL, n_steps: int = 16):
    """Transport along a chart curve for the weighted metric; raises on leaving the domain."""
    m = model.m

    def check(z):
        model.check_point(z[:m])
        if math.isfinite(weights.r0):
            from .tangent_geometry import from_z

            if from_z(model, z).r >= weights.r0:
                raise DomainError("transport curve leaves the disk bundle")

    return transport(christoffel_function(model, weights, engine), curve, v0, n_steps, check)


def square_loop(z0, a: int, b: int, eps: float):
    n = len(z0)
    ea, eb = np.zeros(n), np.zeros(n)
    ea[a], eb[b] = eps, eps
    z0 = np.asarray(z0, float)
    return polyline([z0, z0 + ea, z0 + ea + eb, z0 + eb, z0])


# -- geodesics -----------------------------------------------------------------------------------


@dataclass
class GeodesicResult:
    ts: np.ndarray
    zs: np.ndarray
    vs: np.ndarray
    arclength: float
    energy_drift: float
    escaped: bool
    escape_time: float | None
    stopped_at_radius: bool
    n_evaluations: int


def _geodesic_rhs(gamma_fn):
    def f(state):
        n = len(state) // 2
        z, v = state[:n], state[n:]
        return np.concatenate([v, -np.einsum("abc,b,c->a", gamma_fn(z), v, v)])

    return f


def _rk4(f, y, h):
    k1 = f(y)
    k2 = f(y + h / 2 * k1)
    k3 = f(y + h / 2 * k2)
    k4 = f(y + h * k3)
    return y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)


def geodesic_integrate(
    model: SpaceFormModel,
    weights: WeightSpec,
    p0: TangentPoint,
    v0,
    T: float,
    engine: DiffEngine = DUAL,
    *,
    rtol: float = 1e-11,
    atol: float = 1e-13,
    stop_radius: float | None = None,
    boundary_fraction: float = 0.95,
):
    """Adaptive (DOP853) geodesic from ``p0`` with initial velocity ``v0`` up to time ``T``.

    The run stops at the first time the fibre radius reaches ``stop_radius`` or, on a
    finite disk bundle, ``boundary_fraction * r0``.  A stop at the bundle edge is
    reported as an escape.  ``energy_drift`` is the largest relative change of
    ``g(v, v)`` along the stored trajectory.
    """
    from scipy.integrate import solve_ivp

    from .tangent_geometry import from_z

    metric = metric_field(model, weights)
    rhs = _geodesic_rhs(christoffel_function(model, weights, engine))
    m = model.m
    bound, escape_kind = None, False
    if math.isfinite(weights.r0):
        bound, escape_kind = boundary_fraction * weights.r0, True
    if stop_radius is not None and (bound is None or stop_radius < bound):
        bound, escape_kind = stop_radius, False

    def f(t, y):
        with np.errstate(all="ignore"):
            try:
                return rhs(y)
            except DomainError:
                # rejected trial step outside the chart
                return np.full_like(y, np.nan)

    def radius_event(t, y):
        try:
            return from_z(model, y[: 2 * m]).r - bound
        except DomainError:
            return math.inf

    radius_event.terminal = True
    radius_event.direction = 1.0

    y0 = np.concatenate([p0.z, np.asarray(v0, float)])
    sol = solve_ivp(
        f,
        (0.0, float(T)),
        y0,
        method="DOP853",
        rtol=rtol,
        atol=atol,
        events=radius_event if bound is not None else None,
    )
    if sol.status < 0:
        raise DomainError(f"geodesic integration failed: {sol.message}")
    ys = sol.y.T
    hit = sol.status == 1
    E = np.array([float(y[2 * m :] @ np.asarray(metric(y[: 2 * m])) @ y[2 * m :]) for y in ys])
    drift = float(np.max(np.abs(E - E[0])) / abs(E[0]))
    t_end = float(sol.t[-1])
    return GeodesicResult(
        ts=sol.t,
        zs=ys[:, : 2 * m],
        vs=ys[:, 2 * m :],
        arclength=math.sqrt(E[0]) * t_end,
        energy_drift=drift,
        escaped=hit and escape_kind,
        escape_time=t_end if hit else None,
        stopped_at_radius=hit,
        n_evaluations=int(sol.nfev),
    )