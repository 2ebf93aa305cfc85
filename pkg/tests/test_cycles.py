import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hollingbif.continuation import antisaddles, cycles_around
from hollingbif.cycles import (
    NoiseDominated, _find_zeros, build_cycle, d_mu_via_wedge, d_s_via_divergence, displacement,
    estimate_multiplicity, locate_cycles, multiplicity_from_terms, normal_section, reanchor,
)
from hollingbif.fixtures import SCENARIO_BASE, HopfFixture
from hollingbif.flow import Section, integrate

FIX = HopfFixture()
AXIS = Section((1.0, 0.0), (1.0, 0.0), 1, (-0.99, 5.0), "x+")
TWO = SCENARIO_BASE.with_(alpha=1.2505625, beta=-1.1339144168133268)


@pytest.fixture(scope="module")
def fixture_cycle():
    found = locate_cycles(FIX, AXIS, (-0.8, 1.0), 40)
    assert len(found) == 1
    return found[0]


@pytest.fixture(scope="module")
def model_cycles():
    a = antisaddles(TWO)[0]
    return a, cycles_around(TWO, a.location, multiplicity=True)


def _fd(f, x, h):
    return (f(x + h) - f(x - h)) / (2 * h)


def test_fixture_cycle(fixture_cycle):
    c = fixture_cycle
    assert abs(c.s_star) < 1e-8
    assert c.stability == "stable" and c.multiplicity_estimate == 1
    assert c.period == pytest.approx(2 * math.pi, rel=1e-9)
    assert abs(displacement(FIX, AXIS, 0.0)) < 1e-8


def test_fixture_slope(fixture_cycle, frozen):
    d_s = d_s_via_divergence(FIX, fixture_cycle)
    assert abs(d_s - math.expm1(-4 * math.pi)) < 1e-6
    assert d_s == pytest.approx(frozen["fixture"]["d_s"], abs=1e-9)
    slope = _fd(lambda s: displacement(FIX, AXIS, s), 0.0, 1e-4)
    assert d_s == pytest.approx(slope, rel=1e-3)


def test_slope_invariant_under_time_rescaling(fixture_cycle):
    fast = FIX.with_(scale=2.0)
    c2 = build_cycle(fast, AXIS, 0.0)
    assert c2.period == pytest.approx(math.pi, rel=1e-9)
    assert d_s_via_divergence(fast, c2) == pytest.approx(d_s_via_divergence(FIX, fixture_cycle), abs=1e-9)


def test_fixture_parameter_derivatives(fixture_cycle, frozen):
    for name, key in (("rho", "d_rho"), ("gamma", "d_gamma")):
        w = d_mu_via_wedge(FIX, fixture_cycle, name)
        fd = _fd(lambda v: displacement(FIX.with_(**{name: v}), AXIS, 0.0),
                 getattr(FIX, name), 1e-5)
        assert w == pytest.approx(fd, rel=1e-2)
        assert w == pytest.approx(frozen["fixture"][key], rel=1e-6)


def test_displacement_sign_around_cycles(model_cycles):
    _, cs = model_cycles
    for c in cs:
        lo = displacement(TWO, c.section, c.s_star - 1e-3)
        hi = displacement(TWO, c.section, c.s_star + 1e-3)
        # s grows leftwards from the anchor, i.e. outwards
        if c.stability == "stable":
            assert lo > 0 > hi
        else:
            assert lo < 0 < hi


def test_two_nested_cycles(model_cycles):
    a, cs = model_cycles
    assert [c.stability for c in cs] == ["unstable", "stable"]
    assert cs[0].amplitude < cs[1].amplitude
    assert all(c.closure < 1e-7 for c in cs)


@pytest.mark.parametrize("which", ["alpha", "beta", "gamma", "delta", "lambda", "mu"])
def test_model_wedge_against_differences(model_cycles, which):
    key = "lam" if which == "lambda" else which
    for c in model_cycles[1]:
        v = getattr(TWO, key)
        h = 1e-5 * max(1.0, abs(v))
        fd = _fd(lambda u: displacement(TWO.with_(**{key: u}), c.section, c.s_star), v, h)
        assert d_mu_via_wedge(TWO, c, which) == pytest.approx(fd, rel=1e-2)


def test_three_stability_verdicts_agree(model_cycles):
    a, cs = model_cycles
    for c in cs:
        d_s = d_s_via_divergence(TWO, c)
        slope = _fd(lambda s: displacement(TWO, c.section, s), c.s_star, 1e-6)
        # orbits started just off the cycle on either side
        moves = []
        for side in (-1, 1):
            s0 = c.s_star + side * 1e-3
            orb = integrate(TWO, c.section.point(s0), 3 * c.period, record=0)
            gap0 = abs(s0 - c.s_star)
            moves.append(abs(c.section.coordinate(orb.end) - c.s_star) < gap0
                         if orb.outcome == "max-time" else False)
        assert np.sign(d_s) == np.sign(slope)
        if d_s < 0:
            assert any(moves)
        assert (d_s < 0) == (c.stability == "stable")


def test_gamma_derivative_sign_by_orientation(model_cycles):
    _, cs = model_cycles
    signs = {np.sign(d_mu_via_wedge(TWO, c, "gamma")) for c in cs}
    assert len({c.orientation for c in cs}) == 1
    assert len(signs) == 1


def test_normal_section_reanchor(model_cycles):
    _, cs = model_cycles
    c = cs[0]
    r = reanchor(TWO, c, normal_section(TWO, c))
    assert abs(r.s_star) < 1e-6 * r.amplitude
    assert r.period == pytest.approx(c.period, rel=1e-6)
    assert r.d_s_value == pytest.approx(c.d_s_value, rel=1e-5)


def test_no_cycles_without_response_terms():
    p = SCENARIO_BASE
    a = antisaddles(p)[0]
    assert cycles_around(p, a.location, 60) == []


def test_fixture_multiplicity(fixture_cycle):
    assert estimate_multiplicity(FIX, fixture_cycle)[0] == 1


@pytest.mark.parametrize("power", [1, 2, 3])
def test_synthetic_multiplicity(power):
    m, _ = estimate_multiplicity(None, displacement_fn=lambda s: s ** power, s_star=0.0)
    assert m == power


def test_flat_displacement_is_noise():
    with pytest.raises(NoiseDominated):
        multiplicity_from_terms(np.array([0.0, 1e-15, 1e-15, 0.0]), noise=1e-12)


@given(st.floats(0.1, 0.9), st.floats(-1.0, 1.0).filter(lambda v: abs(v) > 0.05))
def test_sign_flip_across_gap_is_not_a_root(cut, scale):
    def f(s):
        if abs(s - cut) < 0.06:
            return math.nan
        return scale if s < cut else -scale

    ss = list(np.linspace(0.0, 1.0, 21))
    assert _find_zeros(f, ss, [f(s) for s in ss]) == []


@given(st.floats(-0.9, 0.9))
def test_simple_root_found(r):
    f = lambda s: (s - r) * (1 + s * s)  # noqa: E731
    ss = list(np.linspace(-1.0, 1.0, 13))
    roots = _find_zeros(f, ss, [f(s) for s in ss])
    assert len(roots) == 1 and abs(roots[0][0] - r) < 1e-9
