"""Seeded verification procedures, one per structural identity of the weighted metrics.

Each ``run_*`` function takes an :class:`ExperimentConfig` and returns an
:class:`ExperimentReport` made of :class:`CheckResult` rows.  Subject checks pass when
the largest residual is at most the tolerance.  Negative controls (``expect="above"``)
pass when the smallest residual exceeds the tolerance, so a control that unexpectedly
agrees with the identity turns the report red.
"""

from __future__ import annotations

import itertools
import math
import time
import zlib
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np
import scipy.linalg
from scipy import integrate, special

from . import calculus as cc
from . import complex_frames as cf
from . import jets
from . import tangent_geometry as tg
from .spaceform import (
    DomainError,
    SpaceFormModel,
    conformal_factor,
    metric_at,
    mobius,
    random_rotation,
    sample_points,
    sectional_curvature,
)

DEFAULT_TOLERANCES = {
    "symplectic": 1e-7,
    "control_match": 1e-6,
    "integrability": 1e-6,
    "control_floor": 1e-3,
    "ricci": 1e-5,
    "ricci_control": 1e-3,
    "flat": 1e-7,
    "blocks": 1e-5,
    "sectional": 1e-5,
    "fiber_scalar": 1e-6,
    "holonomy_threshold": 1e-6,
    "completeness": 1e-4,
    "totally_geodesic": 1e-9,
    "density": 1e-10,
    "volume_rel": 5e-3,
    "invariance": 1e-8,
    "invariance_control": 1e-2,
    "lagrangian": 1e-12,
    "surface_pde": 1e-10,
    "commutator": 1e-8,
    "xi_eigen": 1e-9,
    "beltrami": 1e-10,
}


class ConfigError(ValueError):
    """An experiment configuration violates its preconditions."""


@dataclass(frozen=True)
class ExperimentConfig:
    K: float = -1.0
    m: int = 2
    c1: float = 1.0
    c2: float = 1.0
    sample_count: int = 200
    seed: int = 0
    radius_cap: float = 0.95
    perturb: float = 1.0
    loop_count: int = 200
    loop_eps: float = 1e-3
    curvature_points: int = 50
    lagrangian_pairs: int = 20
    lagrangian_points: int = 50
    disk_points: int = 100
    tolerances: dict = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))

    def __post_init__(self):
        t = dict(DEFAULT_TOLERANCES)
        t.update(self.tolerances or {})
        object.__setattr__(self, "tolerances", t)
        self.validate()

    def validate(self) -> None:
        if not math.isfinite(self.K):
            raise ConfigError(f"K must be finite, got {self.K}")
        if int(self.m) != self.m or self.m < 2:
            raise ConfigError(f"m must be an integer >= 2, got {self.m}")
        if not self.c1 > 0:
            raise ConfigError(f"c1 must be positive, got {self.c1}")
        if not self.c2 > 0:
            raise ConfigError(f"c2 must be positive, got {self.c2}")
        for name in ("sample_count", "loop_count", "curvature_points", "lagrangian_pairs",
                     "lagrangian_points", "disk_points"):
            v = getattr(self, name)
            if int(v) != v or v < 1:
                raise ConfigError(f"{name} must be a positive integer, got {v}")
        if not 0 < self.radius_cap <= 0.95:
            raise ConfigError(f"radius_cap must lie in (0, 0.95], got {self.radius_cap}")
        if not self.loop_eps > 0:
            raise ConfigError(f"loop_eps must be positive, got {self.loop_eps}")
        if not math.isfinite(self.perturb):
            raise ConfigError(f"perturb must be finite, got {self.perturb}")
        unknown = set(self.tolerances) - set(DEFAULT_TOLERANCES)
        if unknown:
            raise ConfigError(f"unknown tolerance keys: {sorted(unknown)}")
        for k, v in self.tolerances.items():
            if not (isinstance(v, (int, float)) and v > 0):
                raise ConfigError(f"tolerance {k!r} must be a positive number, got {v!r}")

    @property
    def model(self) -> SpaceFormModel:
        return SpaceFormModel(float(self.K), int(self.m))

    @property
    def weights(self) -> tg.WeightSpec:
        return tg.weights_kahler(self.K, self.c1, self.c2)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["tolerances"] = dict(sorted(self.tolerances.items()))
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        known = {f for f in cls.__dataclass_fields__}
        extra = set(d) - known
        if extra:
            raise ConfigError(f"unknown config fields: {sorted(extra)}")
        return cls(**d)


@dataclass
class CheckResult:
    name: str
    max: float
    mean: float
    min: float
    count: int
    tolerance: float | None
    expect: str = "below"  # "below", "above" (negative control) or "info"
    status: str = ""

    def __post_init__(self):
        if not self.status:
            self.status = self._judge()

    def _judge(self) -> str:
        if self.expect == "info" or self.tolerance is None:
            return "info"
        if not (math.isfinite(self.max) and math.isfinite(self.min)):
            return "fail"
        if self.expect == "below":
            return "pass" if self.max <= self.tolerance else "fail"
        if self.expect == "above":
            return "pass" if self.min > self.tolerance else "fail"
        raise ValueError(f"unknown expectation {self.expect!r}")

    @classmethod
    def of(cls, name, values, tolerance=None, expect="below", status="") -> "CheckResult":
        v = np.atleast_1d(np.asarray(values, dtype=float))
        return cls(name, float(v.max()), float(v.mean()), float(v.min()), int(v.size),
                   tolerance, expect, status)


@dataclass
class ExperimentReport:
    name: str
    parameters: dict
    checks: list
    runtime: float = 0.0
    details: dict = field(default_factory=dict)

    @property
    def verdict(self) -> str:
        statuses = {c.status for c in self.checks}
        if "fail" in statuses:
            return "fail"
        if "inconclusive" in statuses:
            return "inconclusive"
        return "pass"

    def to_dict(self, include_runtime: bool = True) -> dict:
        d = {
            "name": self.name,
            "verdict": self.verdict,
            "parameters": self.parameters,
            "checks": [asdict(c) for c in self.checks],
            "details": _plain(self.details),
        }
        if include_runtime:
            d["runtime"] = self.runtime
        return d


def _plain(obj):
    """Recursively convert numpy values into JSON-friendly Python values."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, float) and not math.isfinite(obj):
        return repr(obj)
    return obj


def experiment_rng(config: ExperimentConfig, name: str) -> np.random.Generator:
    return np.random.default_rng([int(config.seed), zlib.crc32(name.encode())])


def _report(name: str, config: ExperimentConfig, body: Callable) -> ExperimentReport:
    t0 = time.perf_counter()
    checks, details = body(experiment_rng(config, name))
    return ExperimentReport(name, config.to_dict(), checks, time.perf_counter() - t0, details)


def _points(config, weights, rng, count=None, **kw):
    return tg.sample_tangent_points(
        config.model, weights, rng, count or config.sample_count, radius_cap=config.radius_cap, **kw
    )


# -- symplectic structure ---------------------------------------------------------------


def run_symplectic_check(config: ExperimentConfig) -> ExperimentReport:
    """Closedness of the Kahler form, the ``mu lam = 1 + r^2`` control and ``d theta = -omega0``."""
    tol = config.tolerances
    model = config.model
    W = config.weights
    control = tg.weights_ratio(config.K, config.c1, config.c2, product=lambda s: 1.0 + s,
                               name="product 1+r^2")

    def body(rng):
        pts = _points(config, W, rng)
        omega, omega_c = tg.omega_field(model, W), tg.omega_field(model, control)
        theta, omega0 = tg.theta_field(model), tg.omega0_field(model)
        rsq = tg.radius_squared_field(model)
        d_kahler, d_ctrl, match, d_theta = [], [], [], []
        for p in pts:
            d_kahler.append(np.abs(cc.exterior_derivative(omega, p.z, 2)).max())
            dw = cc.exterior_derivative(omega_c, p.z, 2)
            _, drsq, _ = jets.derivatives(rsq, p.z, order=1)
            # d(mu lam) = d(1 + r^2)
            expected = cc.wedge_1_2(np.asarray(drsq), np.asarray(omega0(p.z)))
            d_ctrl.append(np.abs(dw).max())
            match.append(np.abs(dw - expected).max())
            dth = cc.exterior_derivative(theta, p.z, 1)
            d_theta.append(np.abs(dth + np.asarray(omega0(p.z))).max())
        checks = [
            CheckResult.of("d omega (Kahler weights)", d_kahler, tol["symplectic"]),
            CheckResult.of("d omega (mu lam = 1 + r^2, control)", d_ctrl, tol["symplectic"], "above"),
            CheckResult.of("control d omega - d(mu lam) ^ omega0", match, tol["control_match"]),
            CheckResult.of("d theta + omega0", d_theta, tol["symplectic"]),
        ]
        return checks, {}

    return _report("kahler", config, body)


# -- integrability ------------------------------------------------------------------------


def _control_points(config, r0, rng, count):
    """Points with fibre radius in ``[0.9, 1] * min(1, 0.95 r0)``."""
    model = config.model
    top = min(1.0, 0.95 * r0)
    xs = sample_points(model, rng, count, fraction=0.5)
    pts = []
    for x in xs:
        d = rng.normal(size=model.m)
        d /= np.linalg.norm(d)
        r = top * rng.uniform(0.9, 1.0)
        pts.append(tg.tangent_point(model, x, d * r / conformal_factor(model, x)))
    return pts


def run_integrability_scan(config: ExperimentConfig) -> ExperimentReport:
    """Nijenhuis tensor for ``a^2 = c1 + perturb * K r^2`` and two negative controls."""
    tol = config.tolerances
    model, K = config.model, config.K
    subject = tg.weights_ratio(K, config.c1, config.c2, slope=config.perturb * K,
                               name=f"a^2 = c1 + {config.perturb:g} K r^2")

    def nij(weights, pts):
        J = tg.complex_structure_field(model, weights)
        return [cc.nijenhuis_at(J, p.z) for p in pts]

    def body(rng):
        pts = _points(config, subject, rng)
        checks = [CheckResult.of(f"Nijenhuis ({subject.name})", nij(subject, pts),
                                 tol["integrability"])]
        if K != 0:
            perturbed = tg.weights_ratio(K, config.c1, config.c2, slope=1.1 * K)
            constant = tg.weights_ratio(K, config.c1, config.c2, slope=0.0)
            r0 = min(perturbed.r0, config.weights.r0)
            cpts = _control_points(config, r0, rng, config.sample_count)
            checks.append(CheckResult.of("Nijenhuis (a^2 = c1 + 1.1 K r^2, control)",
                                         nij(perturbed, cpts), tol["control_floor"], "above"))
            checks.append(CheckResult.of("Nijenhuis (constant a, control)",
                                         nij(constant, cpts), tol["control_floor"], "above"))
        else:
            # K = 0: any constant ratio is integrable
            other = tg.weights_constant(1.7, 0.6, 0.0)
            checks.append(CheckResult.of("Nijenhuis (K = 0, a = 1.7/0.6)", nij(other, pts),
                                         tol["integrability"]))
        return checks, {"subject_r0": subject.r0}

    return _report("integrability", config, body)


# -- curvature ------------------------------------------------------------------------------


def fiber_scalar_curvature(m: int, K: float, c1: float, r: float, c2: float = 1.0) -> float:
    """Scalar curvature of the fibre metric ``lam^2 g_x`` at fibre radius r."""
    r0 = tg.kahler_radius(K, c1)
    if r < 0 or r >= r0:
        raise DomainError(f"fibre radius {r} outside [0, r0 = {r0})")
    q = c1 + K * r * r
    return (m - 1) * K / (4 * q**1.5) * (3 * (m - 2) * K * r * r + 4 * m * c1) / c2


def fiber_scalar_numeric(m: int, K: float, c1: float, r: float, c2: float = 1.0) -> float:
    """Scalar curvature of ``lam(|u|^2)^2 delta`` on the fibre over the chart origin."""
    W = tg.weights_kahler(K, c1, c2)

    def metric(u):
        lam = W.lam((u * u).sum())
        return (lam * lam) * np.eye(m)

    return cc.scalar_curvature(metric, np.r_[r, np.zeros(m - 1)])


def _zero_section_blocks(config, rng, n_points):
    """Residuals of the numeric zero-section curvature against the closed-form blocks."""
    model, W = config.model, config.weights
    m = model.m
    blocks = cc.CurvatureBlocks(model, config.c1, config.c2)
    metric = tg.metric_field(model, W)
    xs = np.vstack([np.zeros(m), sample_points(model, rng, n_points - 1, fraction=0.5)])
    res = {"hh": [], "vv": [], "hv": [], "e_f": [], "sectional": []}
    for k, x in enumerate(xs):
        z = np.concatenate([x, np.zeros(m)])
        R = cc.riemann(metric, z)
        a, b = rng.normal(size=m), rng.normal(size=m)
        O = np.zeros(m)
        h = lambda v: np.concatenate([v, O])  # noqa: E731
        v = lambda v: np.concatenate([O, v])  # noqa: E731
        res["hh"].append(np.abs(cc.curvature_endomorphism(R, h(a), h(b)) - blocks.hh(x, a, b)).max())
        res["vv"].append(np.abs(cc.curvature_endomorphism(R, v(a), v(b)) - blocks.vv(x, a, b)).max())
        res["hv"].append(np.abs(cc.curvature_endomorphism(R, h(a), v(b)) - blocks.hv(x, a, b)).max())
        g = np.asarray(metric(z))
        for i, j in itertools.combinations(range(m), 2):
            E = np.eye(m)
            for X, Y in ((h(E[i]), h(E[j])), (v(E[i]), v(E[j]))):
                res["sectional"].append(abs(sectional_curvature(R, g, X, Y) - blocks.sectional()))
        if k == 0:
            E = np.eye(m)
            for i in range(m):
                for j in range(m):
                    Rij = cc.curvature_endomorphism(R, h(E[i]), v(E[j]))
                    res["e_f"].append(np.abs(Rij[m:, :m] - blocks.e_f_operator(i, j)[m:, :m]).max())
    return res


def run_curvature_identity_check(config: ExperimentConfig) -> ExperimentReport:
    """Ricci or Riemann of g_TM, zero-section blocks and fibre scalar curvature."""
    tol = config.tolerances
    model, W = config.model, config.weights
    K, m, c1, c2 = config.K, config.m, config.c1, config.c2
    n = config.curvature_points

    def body(rng):
        checks, details = [], {}
        pts = _points(config, W, rng, n)
        if K == 0:
            Rmax = [np.abs(cc.riemann_gTM(model, W, p)).max() for p in pts]
            checks.append(CheckResult.of("Riemann (K = 0)", Rmax, tol["flat"]))
        elif m == 2:
            ric = [np.abs(cc.ricci_gTM(model, W, p)).max() for p in pts]
            checks.append(CheckResult.of("Ricci (m = 2)", ric, tol["ricci"]))
        else:
            ric = [np.abs(cc.ricci_gTM(model, W, p)).max() for p in pts]
            checks.append(CheckResult.of(f"Ricci (m = {m}, nonzero)", ric, tol["ricci_control"],
                                         "above"))

        blocks = _zero_section_blocks(config, rng, min(n, 10))
        for key, label in (("hh", "R(h, h) block"), ("vv", "R(v, v) block"),
                           ("hv", "R(h, v) block"), ("e_f", "R(e_i, f_j) operators")):
            checks.append(CheckResult.of(f"zero section {label}", blocks[key], tol["blocks"]))
        checks.append(CheckResult.of("zero section sectional curvature", blocks["sectional"],
                                     tol["sectional"]))
        details["zero_section_sectional"] = K / (c2 * math.sqrt(c1))

        # fibre scalar curvature at n radii
        rtop = config.radius_cap * W.r0 if math.isfinite(W.r0) else 2.0
        radii = np.linspace(0.0, rtop, n)
        diffs = [abs(fiber_scalar_numeric(m, K, c1, r, c2) - fiber_scalar_curvature(m, K, c1, r, c2))
                 for r in radii]
        checks.append(CheckResult.of("fibre scalar curvature closed form", diffs,
                                     tol["fiber_scalar"]))
        if m == 2 and K > 0:
            far = np.array([10.0, 100.0, 1000.0])
            vals = np.array([fiber_scalar_numeric(m, K, c1, r, c2) for r in far])
            checks.append(CheckResult.of("fibre scalar curvature at r = 1000", abs(vals[-1]),
                                         tol["fiber_scalar"]))
            checks.append(CheckResult.of("fibre scalar curvature decreasing in r", -np.diff(vals),
                                         0.0, "above"))
            details["fiber_scalar_far"] = dict(zip(far.tolist(), vals.tolist()))
        if m == 2 and K < 0:
            near = W.r0 * (1.0 - np.logspace(-1, -3, 12))
            vals = np.array([fiber_scalar_numeric(m, K, c1, r, c2) for r in near])
            checks.append(CheckResult.of("fibre scalar curvature decreasing toward r0",
                                         -np.diff(vals), 0.0, "above"))
            checks.append(CheckResult.of("fibre scalar curvature near r0 below -1e3",
                                         -vals[-1], 1e3, "above"))
            details["fiber_scalar_near_r0"] = dict(zip(near.tolist(), vals.tolist()))

        # Einstein candidate at the zero section: recorded only
        p0 = tg.tangent_point(model, np.zeros(m), np.zeros(m))
        lam_E = cc.CurvatureBlocks(model, c1, c2).einstein_candidate()
        Ric = cc.ricci_gTM(model, W, p0)
        g0 = np.asarray(tg.metric_field(model, W)(p0.z))
        defect = float(np.abs(Ric - lam_E * g0).max())
        checks.append(CheckResult.of("Einstein candidate defect at zero section", defect,
                                     None, "info"))
        off = []
        for p in pts[:10]:
            g = np.asarray(tg.metric_field(model, W)(p.z))
            off.append(np.abs(cc.ricci_gTM(model, W, p) - lam_E * g).max())
        checks.append(CheckResult.of("Einstein candidate defect off the zero section", off,
                                     None, "info"))
        details["einstein_candidate"] = lam_E
        details["ricci_zero_section"] = Ric
        return checks, details

    return _report("curvature", config, body)


# -- holonomy -----------------------------------------------------------------------------------


def expected_holonomy_rank(K: float, m: int) -> int:
    if K == 0:
        return 0
    return 3 if m == 2 else m * m


def _holonomy_span(model, W, rng, loop_count, eps_list):
    """Singular values of the transported loop logarithms for each loop size."""
    m = model.m
    n = 2 * m
    gamma = cc.christoffel_function(model, W)
    u_base = 0.25 * min(W.r0, 1.0)
    base = tg.tangent_point(model, np.zeros(m), np.r_[u_base, np.zeros(m - 1)])
    G0 = np.asarray(tg.metric_field(model, W)(base.z))
    F = np.linalg.inv(np.linalg.cholesky(G0).T)  # columns: G0-orthonormal frame
    Finv = np.linalg.inv(F)
    planes = list(itertools.combinations(range(n), 2))
    n_centres = math.ceil(loop_count / len(planes))
    raw = tg.sample_tangent_points(model, W, rng, n_centres, radius_cap=0.5, r_max=1.0)
    centres = [tg.tangent_point(model, q.x * 0.5, q.u * 0.5) for q in raw]
    paths = []
    for c in centres:
        P = cc.transport_adaptive(gamma, cc.segment(base.z, c.z), np.eye(n), rtol=1e-10)
        paths.append((P, np.linalg.inv(P)))
    iu = np.triu_indices(n, 1)
    out = {}
    for eps in eps_list:
        rows = []
        for (c, (P, Pinv)), (a, b) in itertools.islice(
            itertools.product(zip(centres, paths), planes), loop_count
        ):
            H = cc.transport(gamma, cc.square_loop(c.z, a, b, eps), np.eye(n), 2)
            L = np.real(scipy.linalg.logm(H)) / eps**2
            S = Finv @ Pinv @ L @ P @ F
            rows.append(S[iu])
        out[eps] = np.linalg.svd(np.asarray(rows), compute_uv=False)
    return out


def numerical_rank(sv: np.ndarray, rel: float, n_rows: int) -> tuple[int, float, bool]:
    """Rank, threshold and whether any singular value sits within a factor 100 of it."""
    thr = rel * max(float(sv[0]) if sv.size else 0.0, math.sqrt(n_rows))
    rank = int(np.sum(sv > thr))
    ambiguous = bool(np.any((sv > thr / 100) & (sv < thr * 100)))
    return rank, thr, ambiguous


def run_holonomy_rank(config: ExperimentConfig) -> ExperimentReport:
    """Dimension of the span of transported small-loop holonomy logarithms."""
    model, W = config.model, config.weights
    rel = config.tolerances["holonomy_threshold"]
    eps_list = (config.loop_eps, config.loop_eps / 2)
    expected = expected_holonomy_rank(config.K, config.m)

    def body(rng):
        svs = _holonomy_span(model, W, rng, config.loop_count, eps_list)
        ranks, details = [], {"expected_rank": expected, "loops": config.loop_count}
        ambiguous = False
        for eps, sv in svs.items():
            rank, thr, amb = numerical_rank(sv, rel, config.loop_count)
            ranks.append(rank)
            ambiguous |= amb
            details[f"eps={eps:g}"] = {"rank": rank, "threshold": thr, "ambiguous": amb,
                                        "singular_values": sv}
        stable = len(set(ranks)) == 1 and not ambiguous
        status = "" if stable else "inconclusive"
        checks = [
            CheckResult.of("estimated holonomy rank", ranks, None, "info"),
            CheckResult.of("holonomy rank - expected", [abs(r - expected) for r in ranks], 0.0,
                           "below", status),
            CheckResult.of("holonomy rank change under loop halving", abs(ranks[0] - ranks[-1]),
                           0.0, "below", status),
        ]
        details["rank"] = ranks[-1]
        details["stable"] = stable
        return checks, details

    return _report("holonomy", config, body)


# -- completeness -----------------------------------------------------------------------------


def ray_length_quadrature(K: float, c1: float, R: float, c2: float = 1.0) -> float:
    """Length of the fibre ray ``t -> t u`` (|u| = 1) from 0 to radius R, by adaptive quadrature."""
    val, _ = integrate.quad(lambda t: (c1 + K * t * t) ** -0.25, 0.0, R, limit=200)
    return math.sqrt(c2) * val


def ray_length_closed_form(K: float, c1: float, c2: float = 1.0) -> float:
    """Full ray length to the edge for K < 0: ``c1^(-1/4) r0 B(1/2, 3/4) / 2``."""
    if K >= 0:
        return math.inf
    r0 = tg.kahler_radius(K, c1)
    return math.sqrt(c2) * c1**-0.25 * r0 * 0.5 * special.beta(0.5, 0.75)


def _unit(G, v):
    return v / math.sqrt(v @ G @ v)


def run_completeness_probe(config: ExperimentConfig) -> ExperimentReport:
    """Fibre-ray lengths by quadrature, closed form and geodesic integration."""
    tol = config.tolerances
    model, W = config.model, config.weights
    K, m, c1, c2 = config.K, config.m, config.c1, config.c2

    def body(rng):
        checks, details = [], {}
        p0 = tg.tangent_point(model, np.zeros(m), np.zeros(m))
        G0 = np.asarray(tg.metric_field(model, W)(p0.z))
        direction = rng.normal(size=m)
        direction /= np.linalg.norm(direction)
        v_fib = _unit(G0, np.concatenate([np.zeros(m), direction]))
        if K < 0:
            r_stop = (1.0 - 1e-9) * W.r0
            full_q = ray_length_quadrature(K, c1, W.r0, c2)
            full_c = ray_length_closed_form(K, c1, c2)
            geo = cc.geodesic_integrate(model, W, p0, v_fib, 1.5 * full_c,
                                        boundary_fraction=1.0 - 1e-9)
            checks += [
                CheckResult.of("edge length: quadrature - closed form", abs(full_q - full_c),
                               tol["completeness"]),
                CheckResult.of("edge length: geodesic - quadrature", abs(geo.arclength - full_q),
                               tol["completeness"]),
                CheckResult.of("geodesic reaches the edge in finite length",
                               0.0 if geo.escaped else 1.0, 0.5),
            ]
            details.update(edge_length_quadrature=full_q, edge_length_closed_form=full_c,
                           geodesic_length=geo.arclength, r_stop=r_stop,
                           energy_drift=geo.energy_drift)
        else:
            R = 100.0 if K > 0 else 5.0
            target = ray_length_quadrature(K, c1, R, c2)
            geo = cc.geodesic_integrate(model, W, p0, v_fib, 1.5 * target, stop_radius=R)
            checks.append(CheckResult.of(f"length to r = {R:g}: geodesic - quadrature",
                                         abs(geo.arclength - target), tol["completeness"]))
            if K > 0:
                grid = np.array([1.0, 10.0, 30.0, 100.0])
                lengths = np.array([ray_length_quadrature(K, c1, r, c2) for r in grid])
                checks.append(CheckResult.of("length to r = 100 exceeds 15", lengths[-1], 15.0,
                                             "above"))
                checks.append(CheckResult.of("length increasing in r", np.diff(lengths), 0.0,
                                             "above"))
                details["lengths"] = dict(zip(grid.tolist(), lengths.tolist()))
            else:
                exact = R * math.sqrt(c2) * c1**-0.25
                checks.append(CheckResult.of(f"flat length to r = {R:g} - exact",
                                             abs(geo.arclength - exact), tol["completeness"]))
            details.update(length_quadrature=target, geodesic_length=geo.arclength,
                           energy_drift=geo.energy_drift)

        # fibres and the zero section are totally geodesic
        ray = cc.geodesic_integrate(model, W, p0, v_fib, 0.5 * min(W.r0, 1.0) / W.lam(0.0))
        checks.append(CheckResult.of("fibre geodesic stays in the fibre",
                                     np.abs(ray.zs[:, :m]).max(), tol["totally_geodesic"]))
        v_hor = _unit(G0, np.concatenate([direction, np.zeros(m)]))
        base = cc.geodesic_integrate(model, W, p0, v_hor, 0.5)
        checks.append(CheckResult.of("zero-section geodesic stays in the zero section",
                                     np.abs(base.zs[:, m:]).max(), tol["totally_geodesic"]))
        return checks, details

    return _report("completeness", config, body)


# -- volume -------------------------------------------------------------------------------------


def _sphere_rule(m: int, n: int):
    """Quadrature nodes and weights on the unit sphere S^(m-1) for m in {2, 3}."""
    if m == 2:
        th = 2 * np.pi * np.arange(n) / n
        return np.stack([np.cos(th), np.sin(th)], axis=1), np.full(n, 2 * np.pi / n)
    if m == 3:
        ct, wt = np.polynomial.legendre.leggauss(n)
        ph = 2 * np.pi * np.arange(n) / n
        nodes, weights = [], []
        for c, w in zip(ct, wt):
            s = math.sqrt(1 - c * c)
            for p in ph:
                nodes.append([s * math.cos(p), s * math.sin(p), c])
                weights.append(w * 2 * np.pi / n)
        return np.asarray(nodes), np.asarray(weights)
    raise ValueError("sphere rule implemented for m in {2, 3}")


def _ball_rule(m: int, radius: float, n_r: int, n_s: int):
    t, w = np.polynomial.legendre.leggauss(n_r)
    rr = 0.5 * radius * (t + 1)
    wr = 0.5 * radius * w * rr ** (m - 1)
    dirs, ws = _sphere_rule(m, n_s)
    nodes = (rr[:, None, None] * dirs[None, :, :]).reshape(-1, m)
    weights = (wr[:, None] * ws[None, :]).ravel()
    return nodes, weights


def run_volume_check(config: ExperimentConfig) -> ExperimentReport:
    """Volume density against base times Euclidean fibre density, and a region volume."""
    tol = config.tolerances
    model, W = config.model, config.weights
    m, c2 = config.m, config.c2
    metric = tg.metric_field(model, W)

    def density(z):
        return math.sqrt(np.linalg.det(np.asarray(metric(z))))

    def body(rng):
        checks, details = [], {}
        ratios = []
        for p in _points(config, W, rng):
            e = float(conformal_factor(model, p.x))
            ratios.append(density(p.z) / (c2**m * e ** (2 * m)))
        checks.append(CheckResult.of("density / (c2^m base density fibre density) - 1",
                                     np.abs(np.asarray(ratios) - 1.0), tol["density"]))
        if m in (2, 3):
            rho_x = 0.5 * min(model.sample_radius(), 2.0)
            rho = 0.5 * min(1.0, W.r0)
            xn, xw = _ball_rule(m, rho_x, 8, 8 if m == 2 else 6)
            un, uw = _ball_rule(m, 1.0, 6, 8 if m == 2 else 4)
            total = 0.0
            for x, wx in zip(xn, xw):
                scale = rho / float(conformal_factor(model, x))  # fibre ball |u|_g < rho
                for u, wu in zip(un, uw):
                    total += wx * wu * scale**m * density(np.concatenate([x, scale * u]))
            area_integrand = lambda t: float(conformal_factor(model, np.r_[t, np.zeros(m - 1)])) ** m * t ** (m - 1)  # noqa: E731
            sphere_area = 2 * math.pi ** (m / 2) / special.gamma(m / 2)
            vol_region = sphere_area * integrate.quad(area_integrand, 0.0, rho_x)[0]
            ball = math.pi ** (m / 2) * rho**m / special.gamma(m / 2 + 1)
            expected = c2**m * vol_region * ball
            checks.append(CheckResult.of("region x fibre ball volume, relative error",
                                         abs(total / expected - 1.0), tol["volume_rel"]))
            details.update(region_radius=rho_x, fibre_radius=rho, region_volume=vol_region,
                           quadrature_volume=total, expected_volume=expected)
        else:
            details["quadrature"] = "skipped for m > 3"
        return checks, details

    return _report("volume", config, body)


# -- isometry invariance ----------------------------------------------------------------------


def _isometry_residuals(model, W, isom, p):
    q = tg.lift_isometry(model, isom, p)
    D = tg.lifted_differential(model, isom, p)
    G, J = tg.metric_field(model, W), tg.complex_structure_field(model, W)
    Gp, Gq = np.asarray(G(p.z)), np.asarray(G(q.z))
    Jp, Jq = np.asarray(J(p.z)), np.asarray(J(q.z))
    pull = float(np.abs(D.T @ Gq @ D - Gp).max())
    comm = float(np.abs(D @ Jp - Jq @ D).max())
    return pull, comm, abs(q.r - p.r)


def run_invariance_check(config: ExperimentConfig) -> ExperimentReport:
    """Lifted isometries preserve g and J; the map ``x -> 2x`` is the negative control."""
    tol = config.tolerances
    model, W = config.model, config.weights
    m = model.m

    def draw_isometry(rng, k):
        if model.K < 0 and k % 2 == 1:
            a = sample_points(model, rng, 1, fraction=0.5)[0]
            return mobius(a)
        return random_rotation(rng, m)

    def body(rng):
        pull, comm, dr, kinds = [], [], [], {}
        pts = _points(config, W, rng)
        resampled = 0
        for k, p in enumerate(pts):
            for _ in range(20):
                isom = draw_isometry(rng, k)
                try:
                    a, b, c = _isometry_residuals(model, W, isom, p)
                    break
                except DomainError:
                    resampled += 1
            else:
                raise DomainError("could not find an isometry keeping the point in the chart")
            kinds[isom.kind] = kinds.get(isom.kind, 0) + 1
            pull.append(a)
            comm.append(b)
            dr.append(c)
        scale = tg.BaseIsometry("scaling", (2.0,))
        ctrl = []
        for p in _points(config, W, rng, min(config.sample_count, 50)):
            p_small = tg.tangent_point(model, 0.4 * p.x, 0.4 * p.u)
            ctrl.append(_isometry_residuals(model, W, scale, p_small)[0])
        checks = [
            CheckResult.of("metric pullback residual", pull, tol["invariance"]),
            CheckResult.of("J commutation residual", comm, tol["invariance"]),
            CheckResult.of("fibre radius change", dr, tol["invariance"]),
            CheckResult.of("metric pullback of x -> 2x (control)", ctrl,
                           tol["invariance_control"], "above"),
        ]
        return checks, {"isometries": kinds, "resampled": resampled}

    return _report("invariance", config, body)


# -- Lagrangian planes -------------------------------------------------------------------------


def run_lagrangian_check(config: ExperimentConfig) -> ExperimentReport:
    """omega restricted to the planes P(f1, f2) and J P(f1, f2)."""
    tol = config.tolerances
    model, W = config.model, config.weights

    def body(rng):
        pairs = [(1.0, 0.0), (0.0, 1.0)]
        while len(pairs) < config.lagrangian_pairs:
            pairs.append(tuple(rng.normal(size=2)))
        pairs = pairs[: config.lagrangian_pairs]
        pts = _points(config, W, rng, config.lagrangian_points)
        on_p, on_jp = [], []
        for p in pts:
            split = tg.frame_split_at(model, W, p)
            scale = np.abs(split.omega).max()
            for f1, f2 in pairs:
                P = tg.lagrangian_plane_at(p, split, f1, f2)
                on_p.append(np.abs(P.restriction(split.omega)).max() / scale)
                on_jp.append(np.abs(P.rotated(split.J).restriction(split.omega)).max() / scale)
        checks = [
            CheckResult.of("omega on P(f1, f2), relative", on_p, tol["lagrangian"]),
            CheckResult.of("omega on J P(f1, f2), relative", on_jp, tol["lagrangian"]),
        ]
        return checks, {"pairs": pairs}

    return _report("lagrangian", config, body)


# -- surface frames -----------------------------------------------------------------------------


def run_surface_check(config: ExperimentConfig) -> ExperimentReport:
    """Complex-coordinate frame identities over surfaces of curvature +1 and -1."""
    tol = config.tolerances
    c1, c2 = config.c1, config.c2

    def body(rng):
        table: dict[str, list] = {}
        pde, ctrl, eig, hor, conn, a_vs_r = [], [], [], [], [], []
        for sign in (1, -1):
            a_true = cf.a_field(c1, sign)
            a_const = lambda s: math.sqrt(c1) + 0.0 * s[0]  # noqa: E731
            for p in cf.sample_surface_points(sign, c1, rng, config.sample_count,
                                              config.radius_cap):
                pde.append(max(abs(v) for v in cf.pde_residual(p, a_true)))
                if abs(p.w) > 0.05:
                    ctrl.append(abs(cf.pde_residual(p, a_const)[1]))
                for k, v in cf.commutator_table(p, c1).items():
                    table.setdefault(k, []).append(v)
                eig.append(cf.xi_eigen_defect(p, c1, c2))
                hor.append(cf.horizontal_defect(p))
                tp = cf.to_chart_point(p)
                v = cf.surface_connection_from_chart(p)
                conn.append(abs(cf.surface_connection(p) - v[0]) + abs(v[1]))
                a_vs_r.append(abs(cf.a_function(p, c1) - math.sqrt(c1 + sign * tp.r**2)))
        checks = [CheckResult.of("PDE residuals of a", pde, tol["surface_pde"]),
                  CheckResult.of("PDE residual of constant a (control)", ctrl,
                                 tol["control_floor"], "above")]
        checks += [CheckResult.of(f"commutator {k}", v, tol["commutator"]) for k, v in table.items()]
        checks += [
            CheckResult.of("Xi eigenvectors of J", eig, tol["xi_eigen"]),
            CheckResult.of("X1, X2 horizontal", hor, tol["surface_pde"]),
            CheckResult.of("connection coefficient vs chart Christoffels", conn, tol["surface_pde"]),
            CheckResult.of("a vs sqrt(c1 + K r^2)", a_vs_r, tol["xi_eigen"]),
        ]
        return checks, {}

    return _report("surface", config, body)


# -- Beltrami example ---------------------------------------------------------------------------


def run_beltrami_check(config: ExperimentConfig) -> ExperimentReport:
    """Beltrami example on the unit disk: phi, the multiplier f and the bracket identities."""
    tol = config.tolerances

    def body(rng):
        rows: dict[str, list] = {}
        alt = []
        for _ in range(config.disk_points):
            zc = complex(0.95 * math.sqrt(rng.uniform()) * np.exp(2j * math.pi * rng.uniform()))
            for k, v in cf.beltrami_check(zc).items():
                if k != "f":
                    rows.setdefault(k, []).append(v)
            alt.append(abs(cf.commuting_multiplier_residual(
                lambda s: 1.0 / (1.0 - (s[0] * s[0] + s[1] * s[1])) + 0j, zc)))
        checks = [CheckResult.of(k, v, tol["beltrami"]) for k, v in rows.items()]
        checks.append(CheckResult.of("multiplier equation at f = 1/(1 - |z|^2)", alt, None, "info"))
        return checks, {}

    return _report("beltrami", config, body)


EXPERIMENTS: dict[str, Callable[[ExperimentConfig], ExperimentReport]] = {
    "kahler": run_symplectic_check,
    "integrability": run_integrability_scan,
    "curvature": run_curvature_identity_check,
    "holonomy": run_holonomy_rank,
    "completeness": run_completeness_probe,
    "volume": run_volume_check,
    "invariance": run_invariance_check,
    "lagrangian": run_lagrangian_check,
    "surface": run_surface_check,
    "beltrami": run_beltrami_check,
}


def run_all(config: ExperimentConfig) -> list[ExperimentReport]:
    return [fn(config) for fn in EXPERIMENTS.values()]
