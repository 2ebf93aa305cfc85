import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hollingbif.equilibria import (
    DegenerateAtInfinity, InconclusiveAudit, audit_index_theorems, chart_equator_polynomial,
    companion_roots, find_finite, find_infinite, interior_points, poincare_index,
)
from hollingbif.vectorfield import SystemParams, eval_field

params_st = st.builds(SystemParams, alpha=st.floats(0.0, 3.0), beta=st.floats(-4.0, 2.0),
                      delta=st.floats(0.05, 2.0), lam=st.floats(0.05, 1.5), mu=st.floats(0.01, 0.5))


def _near(eqs, pt, tol=1e-9):
    return [e for e in eqs if math.hypot(e.location.x - pt[0], e.location.y - pt[1]) < tol]


@settings(max_examples=60, deadline=None)
@given(params_st)
def test_origin_saddle_and_prey_point(p):
    eqs = find_finite(p)
    origin = _near(eqs, (0.0, 0.0))
    assert len(origin) == 1 and origin[0].kind == "saddle" and origin[0].index == -1
    assert _near(eqs, (1.0 / p.lam, 0.0), 1e-9 / p.lam)


@settings(max_examples=60, deadline=None)
@given(params_st)
def test_residuals_small(p):
    for e in find_finite(p):
        x, y = e.location
        r = math.hypot(*eval_field(p, (x, y)))
        assert r <= 1e-10 * (1 + math.hypot(x, y) ** 4)


def test_closed_form_interior_point():
    p = SystemParams(alpha=0.0, beta=0.0, delta=0.25, lam=1.0, mu=0.0)
    inner = interior_points(p)
    assert len(inner) == 1
    assert inner[0].location == pytest.approx((0.5, 1.0), abs=1e-12)
    assert inner[0].index == 1


def test_response_poles_on_axis():
    p = SystemParams(alpha=1.0, beta=-3.0, delta=1.0, lam=1.0, mu=1.0)
    xs = sorted(e.location.x for e in find_finite(p) if e.location.y == 0.0)
    for r in ((3 - math.sqrt(5)) / 2, (3 + math.sqrt(5)) / 2):
        assert min(abs(x - r) for x in xs) < 1e-12


def test_interior_points_against_resultant(frozen):
    for case in frozen["interior"]:
        p = SystemParams(**case["params"])
        got = sorted(tuple(e.location) for e in interior_points(p))
        assert len(got) == len(case["points"])
        for g, want in zip(got, case["points"]):
            assert g == pytest.approx(tuple(want), rel=1e-10)


def test_companion_roots():
    np.testing.assert_allclose(sorted(companion_roots([1.0, -6.0, 11.0, -6.0]).real), [1, 2, 3])
    r = companion_roots([2.0, 0.0, 0.0])
    assert len(r) == 2 and np.all(r == 0)
    assert len(companion_roots([0.0, 0.0, 3.0])) == 0


def test_indices_by_winding():
    p = SystemParams(alpha=0.7, beta=-1.3, delta=0.6, lam=0.4, mu=0.2)
    assert poincare_index(p, (0.0, 0.0), 0.05) == -1
    a = interior_points(p)[0]
    assert poincare_index(p, a.location, 0.05) == 1
    # a contour around the prey point (saddle) and the interior anti-saddle together
    prey = _near(find_finite(p), (2.5, 0.0))[0]
    assert prey.index == -1
    c = ((a.location.x + 2.5) / 2, 0.3)
    assert poincare_index(p, c, 1.2, auto=True) == 0


def test_infinity_unit_case():
    got = {e.direction: (e.kind, e.multiplicity) for e in
           find_infinite(SystemParams(alpha=1, beta=1, delta=1, lam=1, mu=1))}
    assert got[0.0] == ("node", 1)
    assert got[1.0] == ("saddle", 1)
    assert got["y-axis ends"] == ("node", 3)


def test_saddle_direction_follows_ratio():
    got = [e for e in find_infinite(SystemParams(alpha=1, beta=1, delta=1, lam=2, mu=1))
           if e.kind == "saddle"]
    assert len(got) == 1 and got[0].direction == pytest.approx(2.0)


def test_equator_against_homogeneous_parts(frozen):
    for case in frozen["equator"]:
        p = SystemParams(**case["params"])
        roots = sorted(r.real for r in companion_roots(chart_equator_polynomial(p, "u")))
        np.testing.assert_allclose(roots, case["u_roots"], atol=1e-12)
        dirs = [e.direction for e in find_infinite(p)]
        assert ("y-axis ends" in dirs) == case["y_axis_singular"]


def test_mu_zero_rejected_at_infinity():
    with pytest.raises(DegenerateAtInfinity):
        find_infinite(SystemParams(alpha=1, beta=1, delta=1, lam=1, mu=0))


def test_small_example_identity():
    rep = audit_index_theorems(SystemParams(alpha=0, beta=0, delta=0.25, lam=1, mu=0.3))
    assert rep.passed and rep.lhs == rep.rhs


def test_dropping_a_point_breaks_identity():
    p = SystemParams(alpha=0.7, beta=-1.3, delta=0.6, lam=0.4, mu=0.2)
    finite = find_finite(p)
    assert audit_index_theorems(p, finite=finite).passed
    for k in range(len(finite)):
        assert not audit_index_theorems(p, finite=finite[:k] + finite[k + 1:]).passed


def test_degenerate_point_makes_audit_inconclusive():
    p = SystemParams(alpha=0.7, beta=-1.3, delta=0.6, lam=0.4, mu=0.2)
    finite = find_finite(p)
    finite[0].degenerate = True
    with pytest.raises(InconclusiveAudit):
        audit_index_theorems(p, finite=finite)


@settings(max_examples=40, deadline=None)
@given(params_st, st.floats(-0.5, 0.5))
def test_equilibria_unchanged_by_rotation(p, g):
    a = sorted(tuple(e.location) for e in find_finite(p))
    b = sorted(tuple(e.location) for e in find_finite(p.with_(gamma=g)))
    np.testing.assert_allclose(a, b, atol=1e-9)
