"""Complex-coordinate frames on the tangent manifold of a surface with curvature +1 or -1.

The surface chart has metric ``4(dx^2 + dy^2) / (1 + s(x^2 + y^2))^2`` with
``s = sign = +1`` (sphere) or ``-1`` (disk), ``z = x + iy``; the fibre coordinate
is ``w = p + iq`` for the tangent vector ``p d/dx + q d/dy``.  Vector fields are
stored as complex coefficients on ``(d_z, d_zbar, d_w, d_wbar)`` and evaluated on
the real coordinates ``(x, y, p, q)``; brackets use the same dual-number engine
as the real modules.

Dictionary to the real conformal chart of :mod:`tangentkahler.spaceform` with
``K = sign``: chart point ``x_c = 2(x, y)``, fibre ``u_c = 2(p, q)``, and real
vectors scale by 2 (``d/dx = 2 d/dx_c``).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import jets
from .calculus import DUAL, DiffEngine
from .spaceform import BoundaryError, DomainError, SpaceFormModel, _christoffel, riemann_base
from .tangent_geometry import (
    TangentPoint,
    complex_structure_field,
    connection_matrix,
    tangent_point,
    weights_kahler,
)

_HALF_I = 0.5j


def _complex_partials(n_pairs: int) -> np.ndarray:
    """Rows: ``d_z1, d_zbar1, ...`` as combinations of ``d_x1, d_y1, ...``."""
    W = np.zeros((2 * n_pairs, 2 * n_pairs), dtype=complex)
    for k in range(n_pairs):
        W[2 * k, 2 * k], W[2 * k, 2 * k + 1] = 0.5, -_HALF_I
        W[2 * k + 1, 2 * k], W[2 * k + 1, 2 * k + 1] = 0.5, _HALF_I
    return W


def complex_derivatives(fn: Callable, s, engine: DiffEngine = DUAL):
    """Value and complex partials ``(d_z, d_zbar, d_w, d_wbar)`` of a field at real coords s."""
    s = np.asarray(s, dtype=float)
    val, d1, _ = engine.derivatives(fn, s, order=1)
    return np.asarray(val), np.asarray(d1) @ _complex_partials(len(s) // 2).T


@dataclass(frozen=True)
class SurfaceChartPoint:
    z: complex
    w: complex
    sign: int

    def __post_init__(self):
        if self.sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")
        if self.sign == -1 and abs(self.z) >= 1:
            raise DomainError(f"|z| = {abs(self.z):.6g} outside the unit disk")

    @property
    def zeta(self) -> float:
        return 1.0 + self.sign * abs(self.z) ** 2

    @property
    def coords(self) -> np.ndarray:
        return np.array([self.z.real, self.z.imag, self.w.real, self.w.imag])

    @property
    def r(self) -> float:
        return 2 * abs(self.w) / self.zeta


def _zw(s):
    return s[0] + 1j * s[1], s[2] + 1j * s[3]


def _zeta(s, sign):
    return 1.0 + sign * (s[0] * s[0] + s[1] * s[1])


@dataclass(frozen=True)
class ComplexVectorField:
    """Complex vector field: ``components(s)`` gives coefficients on the complex coordinate basis."""

    components: Callable

    def __call__(self, s):
        return self.components(s)

    def conj(self) -> "ComplexVectorField":
        f = self.components

        def c(s):
            v = jets.conj(f(s))
            n = jets.value(v).shape[0]
            perm = np.arange(n).reshape(-1, 2)[:, ::-1].ravel()
            return v[perm]

        return ComplexVectorField(c)

    def __add__(self, other: "ComplexVectorField") -> "ComplexVectorField":
        f, g = self.components, other.components
        return ComplexVectorField(lambda s: f(s) + g(s))

    def __sub__(self, other: "ComplexVectorField") -> "ComplexVectorField":
        f, g = self.components, other.components
        return ComplexVectorField(lambda s: f(s) - g(s))

    def scaled(self, fn: Callable) -> "ComplexVectorField":
        f = self.components
        return ComplexVectorField(lambda s: fn(s) * f(s))

    def apply(self, fn: Callable, s, engine: DiffEngine = DUAL):
        """Directional derivative ``X(f)`` at s."""
        _, df = complex_derivatives(fn, s, engine)
        return df @ np.asarray(self(np.asarray(s, float)))

    def bracket(self, other: "ComplexVectorField", s, engine: DiffEngine = DUAL):
        X, dX = complex_derivatives(self.components, s, engine)
        Y, dY = complex_derivatives(other.components, s, engine)
        return dY @ X - dX @ Y


def constant_field(coeffs) -> ComplexVectorField:
    c = np.asarray(coeffs, dtype=complex)
    return ComplexVectorField(lambda s: c + 0.0 * s[0])


D_W = constant_field([0, 0, 1, 0])
D_WBAR = constant_field([0, 0, 0, 1])


# -- base connection -----------------------------------------------------------------------


def surface_connection(p: SurfaceChartPoint) -> complex:
    """Coefficient ``c`` in ``nabla_z d_z = c d_z``: ``-sign 2 zbar / (1 + sign |z|^2)``."""
    return -p.sign * 2 * np.conj(p.z) / p.zeta


def chart_model(sign: int) -> SpaceFormModel:
    return SpaceFormModel(float(sign), 2)


def to_chart_point(p: SurfaceChartPoint) -> TangentPoint:
    s = p.coords
    return tangent_point(chart_model(p.sign), 2 * s[:2], 2 * s[2:])


def complex_to_chart(coeffs) -> np.ndarray:
    """Complex-basis coefficients -> chart coordinate components (complexified)."""
    c = np.asarray(coeffs, dtype=complex)
    out = []
    for k in range(len(c) // 2):
        A, B = c[2 * k], c[2 * k + 1]
        out += [A + B, 1j * (B - A)]
    return np.asarray(out)


def chart_to_complex(v) -> np.ndarray:
    v = np.asarray(v, dtype=complex) / 2  # back to (x, y, p, q) components
    out = []
    for k in range(len(v) // 2):
        X, Y = v[2 * k], v[2 * k + 1]
        out += [X + 1j * Y, X - 1j * Y]
    return np.asarray(out)


def surface_connection_from_chart(p: SurfaceChartPoint) -> np.ndarray:
    """``nabla_{d_z} d_z`` on the ``(d_z, d_zbar)`` basis, computed from the real chart Christoffels."""
    V = complex_to_chart([1, 0])
    gam = np.asarray(_christoffel(chart_model(p.sign), 2 * p.coords[:2]))
    return chart_to_complex(np.einsum("kij,i,j->k", gam, V, V))


# -- frames and the function a ----------------------------------------------------------------


def horizontal_basis(sign: int) -> tuple[ComplexVectorField, ComplexVectorField]:
    """``X1 = d_z + sign (2 w zbar / zeta) d_w`` and ``X2 = conj(X1)``."""

    def x1(s):
        z, w = _zw(s)
        c = (sign * 2.0) * w * jets.conj(z) / _zeta(s, sign)
        return jets.stack([1.0 + 0.0 * c, 0.0 * c, c, 0.0 * c])

    X1 = ComplexVectorField(x1)
    return X1, X1.conj()


def a_field(c1: float, sign: int) -> Callable:
    def a(s):
        zeta = _zeta(s, sign)
        return jets.sqrt(c1 + sign * 4.0 * (s[2] * s[2] + s[3] * s[3]) / (zeta * zeta))

    return a


def a_function(p: SurfaceChartPoint, c1: float) -> float:
    rad = c1 + p.sign * 4 * abs(p.w) ** 2 / p.zeta**2
    if rad <= 0:
        raise BoundaryError(f"c1 + sign 4|w|^2/zeta^2 = {rad:.6g} <= 0: outside the disk bundle")
    return float(np.sqrt(rad))


def xi_frame(sign: int, c1: float) -> tuple[ComplexVectorField, ComplexVectorField]:
    """``Xi1 = X1 + i a d_w``, ``Xi2 = X2 + i a d_wbar``."""
    X1, X2 = horizontal_basis(sign)
    a = a_field(c1, sign)
    return X1 + D_W.scaled(lambda s: 1j * a(s)), X2 + D_WBAR.scaled(lambda s: 1j * a(s))


def _check(p: SurfaceChartPoint, c1: float):
    a_function(p, c1)


def pde_residual(p: SurfaceChartPoint, a_candidate: Callable, engine: DiffEngine = DUAL):
    """Residuals of the two integrability equations for a candidate function ``a(x, y, p, q)``."""
    sgn = p.sign
    z, w, zeta = p.z, p.w, p.zeta
    a, da = complex_derivatives(a_candidate, p.coords, engine)
    a = complex(a)
    a_z, a_w = da[0], da[2]
    res1 = zeta * a_z + sgn * 2 * w * np.conj(z) * a_w
    res2 = (
        zeta**2 * a**2 * a_w
        - sgn * 2 * np.conj(w) * a
        + sgn * 2 * z * np.conj(w) * zeta * a_z
        + 4 * abs(w) ** 2 * abs(z) ** 2 * a_w
    )
    return complex(res1), complex(res2)


# -- cross-module checks ----------------------------------------------------------------------


def horizontal_defect(p: SurfaceChartPoint) -> float:
    """Largest vertical part (connection map) of X1, X2 expressed in the real chart."""
    tp = to_chart_point(p)
    A = np.asarray(connection_matrix(chart_model(p.sign), tp.z))
    out = 0.0
    for X in horizontal_basis(p.sign):
        v = complex_to_chart(X(p.coords))
        out = max(out, float(np.abs(v[2:] + A @ v[:2]).max()))
    return out


def xi_eigen_defect(p: SurfaceChartPoint, c1: float, c2: float = 1.0) -> float:
    """``max |J Xi_k + i Xi_k|`` with J from the real-chart Kahler structure."""
    _check(p, c1)
    tp = to_chart_point(p)
    J = np.asarray(complex_structure_field(chart_model(p.sign), weights_kahler(p.sign, c1, c2))(tp.z))
    out = 0.0
    for Xi in xi_frame(p.sign, c1):
        v = complex_to_chart(Xi(p.coords))
        out = max(out, float(np.abs(J @ v + 1j * v).max()))
    return out


def torsion_vertical_defect(p: SurfaceChartPoint, engine: DiffEngine = DUAL) -> float:
    """``-[X1, X2]`` against the curvature term ``R(d_z, d_zbar) xi`` of the torsion identity."""
    X1, X2 = horizontal_basis(p.sign)
    br = X1.bracket(X2, p.coords, engine)
    tp = to_chart_point(p)
    model = chart_model(p.sign)
    Vz, Vzb = complex_to_chart([1, 0]), complex_to_chart([0, 1])
    curv = riemann_base(model, tp.x, Vz, Vzb, tp.u.astype(complex))
    curv_c = chart_to_complex(curv)
    return float(np.abs(-br[2:] - curv_c).max() + np.abs(br[:2]).max())


# -- commutator table --------------------------------------------------------------------------


def commutator_table(p: SurfaceChartPoint, c1: float, engine: DiffEngine = DUAL) -> dict:
    """Residual of each bracket identity of the frame at p (name -> max abs residual)."""
    _check(p, c1)
    s = p.coords
    sgn, z, w, zeta = p.sign, p.z, p.w, p.zeta
    a_f = a_field(c1, sgn)
    a = a_function(p, c1)
    X1, X2 = horizontal_basis(sgn)
    Xi1, Xi2 = xi_frame(sgn, c1)
    aDw, aDwb = D_W.scaled(a_f), D_WBAR.scaled(a_f)

    def vec(coeffs):
        return np.asarray(coeffs, dtype=complex)

    def res(v):
        return float(np.abs(v).max())

    _, da = complex_derivatives(a_f, s, engine)
    X12 = X1.bracket(X2, s, engine)
    X12_closed = sgn * 2 / zeta**2 * vec([0, 0, -w, np.conj(w)])
    Xi1_Xi2b = Xi1.bracket(Xi2.conj(), s, engine)
    out = {
        "da_dz": res(da[0] + 4 * np.conj(z) * abs(w) ** 2 / (a * zeta**3)),
        "da_dw": res(da[2] - sgn * 2 * np.conj(w) / (a * zeta**2)),
        "X1(a)": res(X1.apply(a_f, s, engine)),
        "X2(a)": res(X2.apply(a_f, s, engine)),
        "[X1,X2]": res(X12 - X12_closed),
        "[a dw,a dwbar]": res(aDw.bracket(aDwb, s, engine) - X12),
        "[X1,dwbar]": res(X1.bracket(D_WBAR, s, engine)),
        "[X2,dw]": res(X2.bracket(D_W, s, engine)),
        "[Xi1,Xi2]": res(Xi1.bracket(Xi2, s, engine)),
        "[Xi1,conj Xi2]": res(Xi1_Xi2b - sgn * 1j * 4 * a * np.conj(z) / zeta * vec([0, 0, 1, 0])),
        "[Xi1,conj Xi2]=2ia[dw,X1]": res(Xi1_Xi2b - 2j * a * D_W.bracket(X1, s, engine)),
        "[Xi1,conj Xi1]=2[X1,X2]": res(Xi1.bracket(Xi1.conj(), s, engine) - 2 * X12),
        "[Xi2,conj Xi2]=-2[X1,X2]": res(Xi2.bracket(Xi2.conj(), s, engine) + 2 * X12),
        # conj([Xi1, Xi2]) must equal [conj Xi1, conj Xi2]
        "conj symmetry": res(
            np.conj(Xi1.bracket(Xi2, s, engine))[[1, 0, 3, 2]]
            - Xi1.conj().bracket(Xi2.conj(), s, engine)
        ),
        "torsion vertical part": torsion_vertical_defect(p, engine),
    }
    return out


# -- the Beltrami example ----------------------------------------------------------------------


def _z1(s):
    return s[0] + 1j * s[1]


BELTRAMI_XI = ComplexVectorField(lambda s: jets.stack([jets.conj(_z1(s)), 1.0 + 0.0 * _z1(s)]))


def beltrami_phi(s):
    z = _z1(s)
    zb = jets.conj(z)
    return zb * zb - 2.0 * z


def beltrami_f(s):
    """``f = -1 / (2 (1 - |z|^2))``."""
    return -0.5 / (1.0 - (s[0] * s[0] + s[1] * s[1])) + 0j


def commuting_multiplier_residual(f: Callable, zc: complex, engine: DiffEngine = DUAL) -> complex:
    """Left side of the equation ``[f Xi, conj(f Xi)] = 0`` (its d_zbar component) at zc."""
    s = np.array([zc.real, zc.imag])
    fv, df = complex_derivatives(f, s, engine)
    fbv, dfb = complex_derivatives(lambda t: jets.conj(f(t)), s, engine)
    fv, fbv = complex(fv), complex(fbv)
    z = zc
    return complex(
        abs(z) ** 2 * fv * dfb[0]
        + z * fv * dfb[1]
        - z * fbv * df[1]
        - fbv * df[0]
        + np.conj(z) * abs(fv) ** 2
    )


def beltrami_check(zc: complex, engine: DiffEngine = DUAL) -> dict:
    if abs(zc) >= 1:
        raise DomainError(f"|z| = {abs(zc):.6g} outside the unit disk")
    s = np.array([zc.real, zc.imag])
    Xi = BELTRAMI_XI
    fXi = Xi.scaled(beltrami_f)
    f = complex(beltrami_f(s))
    xi_phibar = Xi.apply(lambda t: jets.conj(beltrami_phi(t)), s, engine)
    bracket = Xi.bracket(Xi.conj(), s, engine)
    expected = np.array([-zc, np.conj(zc)])
    return {
        "f": f,
        "Xi(phi)": abs(Xi.apply(beltrami_phi, s, engine)),
        "f Xi(conj phi) - 1": abs(f * xi_phibar - 1.0),
        "[fXi,conj fXi]": float(np.abs(fXi.bracket(fXi.conj(), s, engine)).max()),
        "[Xi,conj Xi]": float(np.abs(bracket - expected).max()),
        "multiplier equation": abs(commuting_multiplier_residual(beltrami_f, zc, engine)),
    }


def sample_surface_points(sign: int, c1: float, rng: np.random.Generator, count: int, cap=0.95):
    """Seeded points; base |z| <= 0.9 for the disk, fibre radius <= cap * sqrt(c1) there."""
    pts = []
    for _ in range(count):
        rz = 0.9 * np.sqrt(rng.uniform()) if sign < 0 else 1.5 * np.sqrt(rng.uniform())
        z = rz * np.exp(2j * np.pi * rng.uniform())
        zeta = 1 + sign * rz**2
        rmax = cap * np.sqrt(c1) if sign < 0 else 2.0
        r = rmax * rng.uniform()
        w = r * zeta / 2 * np.exp(2j * np.pi * rng.uniform())
        pts.append(SurfaceChartPoint(complex(z), complex(w), sign))
    return pts
