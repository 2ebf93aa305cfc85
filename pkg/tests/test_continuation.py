import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hollingbif.continuation import (
    DEFAULT_RANGES, ScenarioNotFound, antisaddles, audit_draw, audit_max_cycles,
    continue_branch, cycles_around, draw_params, hopf_beta, left_ray, reproduce_two_cycle_scenario,
    surrounds,
)
from hollingbif.cycles import build_cycle
from hollingbif.fixtures import SCENARIO_BASE, HopfFixture
from hollingbif.flow import Section

RAY = Section((0.0, 0.0), (1.0, 0.0), 1, (0.0, 10.0), "x+")


def _fixture_cycle(**kw):
    f = HopfFixture(**kw)
    return f, build_cycle(f, RAY, math.sqrt(f.rho - f.gamma))


@pytest.mark.parametrize("start,stop", [(0.25, 4.0), (4.0, 0.25)])
def test_radius_branch(start, stop):
    f, c = _fixture_cycle(rho=start)
    b = continue_branch(f, c, "rho", stop)
    assert b.termination == "parameter-bound"
    assert b.values[-1] == pytest.approx(stop)
    assert np.max(np.abs(b.s_values - np.sqrt(b.values))) < 1e-6
    assert b.monotone()


def test_rotation_branch_shrinks():
    # rotating the fixture by gamma moves the cycle to radius sqrt(rho - gamma)
    f, c = _fixture_cycle()
    b = continue_branch(f, c, "gamma", 1.5)
    assert b.termination == "shrank-to-point"
    assert b.monotone()
    assert np.max(np.abs(b.s_values - np.sqrt(1.0 - b.values))) < 1e-6


def test_model_parameter_names_checked():
    p = SCENARIO_BASE.with_(alpha=1.2505625, beta=-1.1339144168133268)
    a = antisaddles(p)[0]
    c = cycles_around(p, a.location)[0]
    with pytest.raises(ValueError):
        continue_branch(p, c, "delta", 1.0)


def test_scenario_stages(scenario):
    assert [s.name for s in scenario.stages] == ["i", "ii", "iii", "iv"]
    assert scenario.stage("i").cycles == []
    assert scenario.stage("i").params.alpha == 0.0 == scenario.stage("i").params.beta
    assert scenario.stage("ii").signature == "u"
    assert scenario.stage("ii").params.beta < 0
    assert scenario.stage("iii").signature == "us"
    assert scenario.stage("iv").signature == "h"
    assert scenario.fold.multiplicity == 2
    assert scenario.fold.counts == (2, 0)


def test_scenario_nesting(scenario):
    st3 = scenario.stage("iii")
    inner, outer = st3.cycles
    assert inner.amplitude < outer.amplitude
    inner_pts = inner.orbit_samples[::50]
    assert all(surrounds(outer, pt) for pt in inner_pts)
    for c in (inner, outer):
        enclosed = [a for a in antisaddles(st3.params) if surrounds(c, a.location)]
        assert len(enclosed) == 1


def test_scenario_reference_values(scenario):
    # frozen from a reference run; guards against silent drift
    assert scenario.alpha_direction == -1
    assert scenario.hopf_beta == pytest.approx(-1.132914416813327, abs=1e-9)
    assert scenario.stage("ii").params.alpha == pytest.approx(1.2515625, abs=1e-9)
    assert scenario.fold.value == pytest.approx(1.2239795813925727, abs=1e-7)
    assert scenario.fold.s_star == pytest.approx(0.44346, abs=1e-4)


def test_hopf_beta_zero_trace():
    bh = hopf_beta(SCENARIO_BASE, 1.25)
    a = antisaddles(SCENARIO_BASE.with_(alpha=1.25, beta=bh))[0]
    assert abs(a.trace) < 1e-10


def test_scenario_budget():
    with pytest.raises(ScenarioNotFound) as exc:
        reproduce_two_cycle_scenario(SCENARIO_BASE, budget=0.0)
    assert exc.value.trace


@pytest.fixture(scope="module")
def gamma_branches(scenario):
    out = {}
    for st_ in (scenario.stage("ii"), scenario.stage("iii")):
        for k, c in enumerate(st_.cycles):
            for sign in (1, -1):
                out[st_.name, k, sign] = continue_branch(st_.params, c, "gamma", sign * 0.3)
    return out


def test_gamma_branches_monotone(gamma_branches):
    for b in gamma_branches.values():
        assert len(b.points) >= 3
        assert b.monotone()
        for f in b.folds:
            assert f.multiplicity == 2
            assert f.counts == (2, 0)
            assert f.closure < 1e-7


def test_gamma_fold_shared_by_pair(gamma_branches):
    inner, outer = gamma_branches["iii", 0, 1], gamma_branches["iii", 1, 1]
    assert inner.termination == outer.termination == "fold"
    assert inner.folds[0].value == pytest.approx(outer.folds[0].value, abs=1e-9)
    assert inner.folds[0].s_star == pytest.approx(outer.folds[0].s_star, abs=1e-6)
    # the inner cycle grows and the outer one shrinks towards the fold
    assert np.all(np.diff(inner.s_values) > 0) and np.all(np.diff(outer.s_values) < 0)


def test_gamma_shrinks_other_way(gamma_branches):
    assert gamma_branches["iii", 0, -1].termination == "shrank-to-point"
    assert gamma_branches["ii", 0, -1].termination == "shrank-to-point"


def test_pinned_two_cycle_draw(scenario):
    rec = audit_draw(scenario.stage("iii").params)
    assert rec.max_nested == 2
    assert rec.alternation_ok


@given(st.integers(0, 2**31), st.integers(0, 10_000))
@settings(max_examples=50)
def test_draws_independent_of_schedule(seed, index):
    a = draw_params(seed, index)
    assert a == draw_params(seed, index)
    for k, (lo, hi) in DEFAULT_RANGES.items():
        assert lo <= a.to_dict()[k] <= hi


def test_audit_repeatable_and_worker_independent():
    r1 = audit_max_cycles(8, seed=5)
    r2 = audit_max_cycles(8, seed=5)
    r3 = audit_max_cycles(8, seed=5, workers=2)
    for r in (r2, r3):
        assert [x.__dict__ for x in r.records] == [x.__dict__ for x in r1.records]
    assert r1.max_nested_cycles_observed <= 2 and r1.violations == []


def test_left_ray_reaches_axis():
    sec = left_ray((2.0, 1.0))
    assert sec.point(sec.extent[1]) == (0.0, 1.0)


def test_audit_near_two_cycle_region():
    # a box around the constructed two-cycle parameters, where nested pairs are common
    box = {"alpha": (1.22, 1.27), "beta": (-1.16, -1.12), "delta": (0.82, 0.85),
           "lambda": (0.12, 0.14), "mu": (0.05, 0.06)}
    rep = audit_max_cycles(40, seed=1, ranges=box)
    assert rep.max_nested_cycles_observed == 2
    assert rep.violations == []
    assert sum(r.max_nested == 2 for r in rep.records) >= 5
    assert all(r.alternation_ok for r in rep.records)
