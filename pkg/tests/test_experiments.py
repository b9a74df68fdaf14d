"""Experiment plumbing, closed-form references and small-sample experiment runs."""

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate

from tangentkahler import experiments as ex
from tangentkahler import spaceform as sf


def small(**kw):
    base = dict(sample_count=20, curvature_points=10, loop_count=60, lagrangian_pairs=5,
                lagrangian_points=5, disk_points=10)
    base.update(kw)
    return ex.ExperimentConfig(**base)


# -- config and results -------------------------------------------------------------------


@pytest.mark.parametrize(
    "kw",
    [dict(c1=0.0), dict(c2=-1.0), dict(m=1), dict(m=2.5), dict(sample_count=0),
     dict(radius_cap=0.99), dict(radius_cap=0.0), dict(loop_eps=0.0), dict(K=math.inf),
     dict(tolerances={"nope": 1.0}), dict(tolerances={"ricci": -1.0})],
)
def test_config_rejects_invalid(kw):
    with pytest.raises(ex.ConfigError):
        ex.ExperimentConfig(**kw)


def test_config_round_trip_and_partial_tolerances():
    cfg = ex.ExperimentConfig(K=1.0, m=3, tolerances={"ricci": 1e-4})
    assert cfg.tolerances["ricci"] == 1e-4
    assert cfg.tolerances["symplectic"] == ex.DEFAULT_TOLERANCES["symplectic"]
    assert ex.ExperimentConfig.from_dict(cfg.to_dict()) == cfg
    with pytest.raises(ex.ConfigError):
        ex.ExperimentConfig.from_dict({"bogus": 1})


def test_check_result_judgement():
    assert ex.CheckResult.of("a", [1e-9, 2e-9], 1e-8).status == "pass"
    assert ex.CheckResult.of("a", [1e-9, 2e-7], 1e-8).status == "fail"
    assert ex.CheckResult.of("a", [1.0, 2e-3], 1e-3, "above").status == "pass"
    assert ex.CheckResult.of("a", [1.0, 1e-4], 1e-3, "above").status == "fail"
    assert ex.CheckResult.of("a", [np.nan], 1.0).status == "fail"
    assert ex.CheckResult.of("a", [3.0], None, "info").status == "info"
    c = ex.CheckResult.of("a", [1.0, 3.0], 5.0)
    assert (c.max, c.mean, c.min, c.count) == (3.0, 2.0, 1.0, 2)


@given(st.lists(st.floats(0, 1), min_size=1, max_size=20), st.floats(1e-6, 1), st.floats(1, 10))
def test_pass_verdict_monotone_in_tolerance(values, tol, factor):
    if ex.CheckResult.of("a", values, tol).status == "pass":
        assert ex.CheckResult.of("a", values, tol * factor).status == "pass"


def test_report_verdict_precedence():
    ok = ex.CheckResult.of("a", [0.0], 1.0)
    bad = ex.CheckResult.of("b", [2.0], 1.0)
    inc = ex.CheckResult.of("c", [0.0], 1.0, status="inconclusive")
    assert ex.ExperimentReport("x", {}, [ok]).verdict == "pass"
    assert ex.ExperimentReport("x", {}, [ok, inc]).verdict == "inconclusive"
    assert ex.ExperimentReport("x", {}, [bad, inc]).verdict == "fail"
    d = ex.ExperimentReport("x", {}, [ok], 1.5, {"v": np.array([1.0, math.inf])}).to_dict(False)
    assert "runtime" not in d and d["details"]["v"] == [1.0, "inf"]


def test_rng_streams_are_independent_per_experiment():
    cfg = ex.ExperimentConfig(seed=3)
    a = ex.experiment_rng(cfg, "kahler").normal()
    b = ex.experiment_rng(cfg, "volume").normal()
    assert a != b
    assert a == ex.experiment_rng(cfg, "kahler").normal()


# -- closed forms ---------------------------------------------------------------------------


def test_fiber_scalar_curvature_examples():
    assert ex.fiber_scalar_curvature(2, 1.0, 1.0, 0.0) == pytest.approx(2.0)
    assert ex.fiber_scalar_curvature(2, 1.0, 1.0, 1e4) == pytest.approx(0.0, abs=1e-10)
    assert ex.fiber_scalar_curvature(4, 0.0, 3.0, 1.7) == 0.0
    with pytest.raises(sf.DomainError):
        ex.fiber_scalar_curvature(2, -1.0, 1.0, 1.0)


@given(st.integers(2, 4), st.sampled_from([-1.0, 1.0, 0.5]), st.sampled_from([1.0, 4.0]),
       st.floats(0.0, 0.9))
def test_fiber_scalar_curvature_numeric(m, K, c1, frac):
    r = frac * (math.sqrt(c1 / -K) if K < 0 else 2.0)
    assert ex.fiber_scalar_numeric(m, K, c1, r) == pytest.approx(
        ex.fiber_scalar_curvature(m, K, c1, r), abs=1e-9)


def test_ray_length_references():
    exact = math.sqrt(math.pi) / 2 * math.gamma(0.75) / math.gamma(1.25)
    assert ex.ray_length_closed_form(-1.0, 1.0) == pytest.approx(exact, rel=1e-14)
    assert ex.ray_length_quadrature(-1.0, 1.0, 1.0) == pytest.approx(exact, abs=1e-9)
    assert exact == pytest.approx(1.19814, abs=1e-5)
    # general c1: c1^(-1/4) r0 times the unit value
    assert ex.ray_length_closed_form(-2.0, 4.0) == pytest.approx(4**-0.25 * math.sqrt(2) * exact)
    assert math.isinf(ex.ray_length_closed_form(1.0, 1.0))
    assert ex.ray_length_quadrature(0.0, 16.0, 3.0) == pytest.approx(1.5)
    ref = integrate.quad(lambda t: (1 + t * t) ** -0.25, 0, 100, limit=200)[0]
    assert ex.ray_length_quadrature(1.0, 1.0, 100.0) == pytest.approx(ref)
    assert ref > 15


def test_expected_holonomy_rank():
    assert ex.expected_holonomy_rank(0.0, 3) == 0
    assert ex.expected_holonomy_rank(-1.0, 2) == 3
    assert ex.expected_holonomy_rank(1.0, 3) == 9


def test_numerical_rank():
    sv = np.array([5.0, 2.0, 1e-10, 1e-11])
    rank, thr, amb = ex.numerical_rank(sv, 1e-6, 4)
    assert rank == 2 and thr == pytest.approx(5e-6) and not amb
    rank, _, amb = ex.numerical_rank(np.array([1.0, 3e-6]), 1e-6, 1)
    assert rank == 2 and amb
    assert ex.numerical_rank(np.zeros(3), 1e-6, 100)[0] == 0


# -- experiments on small samples --------------------------------------------------------------


@pytest.mark.parametrize("K,m", [(-1.0, 2), (0.0, 2), (1.0, 3)])
@pytest.mark.parametrize("name", ["kahler", "integrability", "curvature", "completeness", "volume",
                                  "invariance", "lagrangian"])
def test_experiments_pass(name, K, m):
    r = ex.EXPERIMENTS[name](small(K=K, m=m))
    assert r.verdict == "pass", [c for c in r.checks if c.status != "pass"]


def test_surface_and_beltrami_pass():
    assert ex.run_surface_check(small(c1=2.0)).verdict == "pass"
    assert ex.run_beltrami_check(small()).verdict == "pass"


def test_symplectic_example_with_large_c2():
    assert ex.run_symplectic_check(small(K=-1.0, m=3, c2=5.0)).verdict == "pass"


def test_perturbed_integrability_fails():
    r = ex.run_integrability_scan(small(K=1.0, perturb=1.1))
    assert r.verdict == "fail"
    subject = r.checks[0]
    assert subject.status == "fail" and subject.min > 1e-3


def test_negative_control_that_passes_turns_report_red():
    # a loose control floor above the real residuals makes the control "pass" the identity
    r = ex.run_integrability_scan(small(K=1.0, tolerances={"control_floor": 10.0}))
    assert r.verdict == "fail"


def test_curvature_records_einstein_defect():
    r = ex.run_curvature_identity_check(small(K=1.0, m=3))
    info = [c for c in r.checks if c.expect == "info"]
    assert info and r.details["einstein_candidate"] == pytest.approx(0.5)
    assert r.verdict == "pass"


def test_zero_section_sectional_detail():
    r = ex.run_curvature_identity_check(small(K=-1.0, m=2, c1=4.0))
    assert r.details["zero_section_sectional"] == pytest.approx(-0.5)


def test_volume_density_scaling_with_c2():
    r = ex.run_volume_check(small(m=2, c2=4.0))
    assert r.verdict == "pass"


def test_holonomy_small_run():
    r = ex.run_holonomy_rank(small(K=1.0, m=2, loop_count=30))
    assert r.details["rank"] == 3
    assert r.verdict == "pass"


def test_holonomy_inconclusive_when_threshold_ambiguous():
    # a threshold at the size of the genuine singular values cannot separate them
    r = ex.run_holonomy_rank(small(K=1.0, m=2, loop_count=30, tolerances={"holonomy_threshold": 0.5}))
    assert r.verdict in ("inconclusive", "fail")
    assert any(v.get("ambiguous") for k, v in r.details.items() if k.startswith("eps="))


def test_reports_reproducible():
    cfg = small(K=-1.0, seed=11)
    a = ex.run_invariance_check(cfg).to_dict(include_runtime=False)
    b = ex.run_invariance_check(cfg).to_dict(include_runtime=False)
    assert a == b
