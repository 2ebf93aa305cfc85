import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hollingbif.fixtures import HopfFixture
from hollingbif.flow import NoReturn, Section, first_return, integrate, ray_section, return_map
from hollingbif.vectorfield import SystemParams

FIX = HopfFixture()
AXIS = Section((1.0, 0.0), (1.0, 0.0), 1, (-0.99, 5.0), "x+")
HOLL = SystemParams(alpha=1.25, beta=-1.13, delta=0.83524, lam=0.13094, mu=0.05553)


def test_invariant_axis():
    orb = integrate(HOLL, (0.0, 2.0), 20.0, record=500)
    assert np.all(orb.z[:, 0] == 0.0)
    assert orb.z[-1, 1] < 2.0


def test_equilibrium_start_converges():
    orb = integrate(HOLL, (0.0, 0.0), 10.0)
    assert orb.outcome == "converged-to-point"
    assert orb.end == (0.0, 0.0)


def test_fixture_radius_at_crossings():
    sec = Section((0.0, 0.0), (1.0, 0.0), 1, (0.0, 5.0), "x+")
    orb = integrate(FIX, (0.5, 0.0), 60.0, section=sec)
    radii = [math.hypot(*pt) for _, pt, _ in orb.events]
    assert len(radii) >= 8
    assert abs(radii[-1] - 1.0) < 1e-8
    # increasing until the integrator noise floor is reached
    assert radii[1] > radii[0] > 0.5
    assert all(b > a - 1e-10 for a, b in zip(radii, radii[1:]))


def test_fixture_cycle_fixed_point():
    assert abs(return_map(FIX, AXIS, 0.0)) < 1e-8
    assert first_return(FIX, AXIS, 0.0, 20.0).t_end == pytest.approx(2 * math.pi, rel=1e-9)


def test_inside_points_move_out(frozen):
    h = return_map(FIX, AXIS, -0.3)
    assert h > -0.3
    assert 1.0 + h == pytest.approx(frozen["fixture"]["h_inside"], rel=1e-8)


def test_return_map_monotone():
    ss = np.linspace(-0.8, 2.0, 15)
    hs = [return_map(FIX, AXIS, s) for s in ss]
    assert np.all(np.diff(hs) > 0)


def test_return_map_monotone_on_model():
    sec = Section((0.9948657192420581, 0.9730068394112862), (-1.0, 0.0), 0, (0.0, 0.99), "left")
    ss = np.linspace(0.02, 0.6, 8)
    hs = [return_map(HOLL, sec, s) for s in ss]
    # the outer cycle attracts so strongly that h is flat to rounding beyond it
    assert np.all(np.diff(hs) > -1e-12)
    assert np.all(np.diff(hs[:5]) > 0)


def _flow_end(p, z, t):
    return np.array(integrate(p, z, t, record=0).end)


def _smallest_singular_value(p, z, t, h=1e-6):
    cols = [(_flow_end(p, np.add(z, e), t) - _flow_end(p, np.subtract(z, e), t)) / (2 * h)
            for e in ((h, 0.0), (0.0, h))]
    return np.linalg.svd(np.column_stack(cols), compute_uv=False)[-1]


@settings(max_examples=20, deadline=None)
@given(st.floats(0.05, 4.0), st.floats(0.2, 3.0), st.floats(0.5, 10.0))
def test_forward_backward_round_trip(x0, y0, t):
    fwd = integrate(HOLL, (x0, y0), t, record=0)
    if fwd.outcome != "max-time":
        return
    back = integrate(HOLL, fwd.end, t, record=0, backward=True)
    if back.outcome != "max-time":
        return
    # backward integration magnifies the forward error by 1/sigma_min of the flow map
    amplification = max(1.0, 1.0 / _smallest_singular_value(HOLL, (x0, y0), t))
    err = math.hypot(back.end[0] - x0, back.end[1] - y0)
    assert err < 1e-6 * (1 + math.hypot(x0, y0)) * amplification


def test_escape_reported():
    orb = integrate(FIX.with_(rho=-1.0), (0.1, 0.0), 5.0, backward=True)
    assert orb.outcome == "escaped-box"
    with pytest.raises(NoReturn) as exc:
        first_return(FIX, Section((0.0, 0.0), (1.0, 0.0), 1, (0.0, 1e-3)), 0.5, 20.0)
    assert exc.value.outcome == "max-time"


def test_ray_orientation_follows_flow():
    sec = ray_section(FIX, (0.0, 0.0))
    assert sec.orientation == 1
    assert ray_section(FIX.with_(scale=-1.0), (0.0, 0.0)).orientation == -1


def test_start_outside_box():
    with pytest.raises(ValueError):
        integrate(HOLL, (-1.0, 1.0), 1.0)
