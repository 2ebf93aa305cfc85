"""Limit cycles as zeros of the displacement function d(s) = h(s) - s."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from . import kernels
from .flow import ATOL, RTOL, NoReturn, Section, first_return

ROOT_TOL = 1e-9
TANGENT_TOL = 1e-7
CLOSURE_TOL = 1e-8
MAX_PERIOD = 500.0


class QuadratureFailure(RuntimeError):
    pass


class NoiseDominated(RuntimeError):
    pass


@dataclass
class LimitCycle:
    section: Section
    s_star: float
    period: float
    orbit_samples: np.ndarray
    stability: str
    d_s_value: float
    multiplicity_estimate: int
    orientation: int
    multiplicity_flag: str = ""
    closure: float = 0.0
    params: object = None
    taylor: tuple = ()

    @property
    def point(self):
        return self.section.point(self.s_star)

    @property
    def amplitude(self) -> float:
        """Largest distance of the orbit from the section anchor."""
        a = np.asarray(self.section.anchor)
        return float(np.max(np.hypot(*(self.orbit_samples - a).T)))


@dataclass
class DisplacementProfile:
    section: Section
    samples: list  # (s, d(s)), d = nan where no return
    derivative_samples: list = field(default_factory=list)


def displacement(params, section: Section, s: float, max_period: float = MAX_PERIOD,
                 box=None, tol=(RTOL, ATOL)) -> float:
    orbit = first_return(params, section, s, max_period, box, rtol=tol[0], atol=tol[1])
    return section.coordinate(orbit.end) - s


def _safe_d(params, section, s, max_period, box, tol=(RTOL, ATOL)):
    try:
        return displacement(params, section, s, max_period, box, tol)
    except NoReturn:
        return math.nan


def displacement_profile(params, section: Section, ss, max_period: float = MAX_PERIOD,
                         box=None) -> DisplacementProfile:
    ss = np.asarray(ss, dtype=float)
    ds = np.array([_safe_d(params, section, s, max_period, box) for s in ss])
    deriv = []
    for i in range(1, len(ss) - 1):
        if np.all(np.isfinite(ds[i - 1:i + 2])):
            deriv.append((float(ss[i]), float((ds[i + 1] - ds[i - 1]) / (ss[i + 1] - ss[i - 1]))))
    return DisplacementProfile(section, list(zip(ss.tolist(), ds.tolist())), deriv)


def _orientation(xy: np.ndarray) -> int:
    x, y = xy[:, 0], xy[:, 1]
    area = 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))
    return 1 if area > 0 else -1


def _return_error(section: Section, s: float) -> float:
    pt = section.point(s)
    return RTOL * (1.0 + math.hypot(*pt)) + ATOL


# ---------------------------------------------------------------- root search

def _find_zeros(f, ss, ds, tangent_tol=TANGENT_TOL):
    """Sign-change brackets plus refined local minima of |d|."""
    roots = []
    n = len(ss)
    for i in range(n - 1):
        a, b = ds[i], ds[i + 1]
        if not (math.isfinite(a) and math.isfinite(b)):
            continue
        if a == 0.0:
            roots.append((ss[i], False))
        elif _opposite(a, b):
            try:
                roots.append((_refine(f, ss[i], ss[i + 1]), False))
            except _Gap:
                # sign flips across orbits that never return: a separatrix, not a cycle
                continue
    if n and ds[-1] == 0.0:
        roots.append((ss[-1], False))
    # near-tangential zeros: interior local minima of |d| without a sign change
    for i in range(1, n - 1):
        a, m, b = ds[i - 1], ds[i], ds[i + 1]
        if not all(math.isfinite(v) for v in (a, m, b)):
            continue
        if not (abs(m) <= abs(a) and abs(m) <= abs(b)):
            continue
        if m == 0.0 or _opposite(a, m) or _opposite(m, b) or 0.0 in (a, b):
            continue
        sgn = 1.0 if m > 0 else -1.0
        try:
            res = minimize_scalar(lambda s: sgn * _nan_big(f(s)), bounds=(ss[i - 1], ss[i + 1]),
                                  method="bounded", options={"xatol": 1e-12})
        except NoReturn:
            continue
        s_ext = float(res.x)
        v = f(s_ext)
        if not math.isfinite(v):
            continue
        if _opposite(v, m):
            # two close zeros hidden between scan points
            for lo, hi in ((ss[i - 1], s_ext), (s_ext, ss[i + 1])):
                try:
                    roots.append((_refine(f, lo, hi), False))
                except _Gap:
                    pass
        elif abs(v) < tangent_tol:
            roots.append((s_ext, True))
    roots.sort()
    out = []
    for r, tangential in roots:
        if out and abs(r - out[-1][0]) < 1e-9 * (1 + abs(r)):
            continue
        out.append((r, tangential))
    return out


def _opposite(a, b) -> bool:
    """Strict sign change; products of tiny values would underflow to zero."""
    return (a < 0.0 < b) or (b < 0.0 < a)


def _nan_big(v):
    return v if math.isfinite(v) else 1e300


class _Gap(Exception):
    pass


def _refine(f, a, b):
    """brentq on a sign-change bracket; _Gap if the bracket hides a no-return gap."""

    def g(s):
        v = f(s)
        if not math.isfinite(v):
            raise _Gap(s)
        return v

    return float(brentq(g, a, b, xtol=1e-14, rtol=1e-15, maxiter=200))


# ---------------------------------------------------------------- cycle data

def build_cycle(params, section: Section, s_star: float, max_period: float = MAX_PERIOD,
                box=None, multiplicity: bool = True, tangential: bool = False,
                tol=(RTOL, ATOL)) -> LimitCycle:
    """Trace the closed orbit through section.point(s_star) and classify it."""
    orbit = first_return(params, section, s_star, max_period, box, record=200000,
                         augmented_error=True, rtol=tol[0], atol=tol[1])
    xy = orbit.z
    closure = math.hypot(orbit.end[0] - xy[0, 0], orbit.end[1] - xy[0, 1])
    d_s = math.expm1(orbit.div_integral)
    cyc = LimitCycle(section, float(s_star), orbit.t_end, xy, "undetermined", d_s, 1,
                     _orientation(xy), closure=closure, params=params)
    m = 1
    if multiplicity:
        try:
            m, flag = estimate_multiplicity(params, cyc, max_period=max_period, box=box)
            cyc.multiplicity_flag = flag
        except NoiseDominated:
            m = 2 if tangential else 1
            cyc.multiplicity_flag = "noise"
    elif tangential:
        m = 2
    cyc.multiplicity_estimate = m
    cyc.stability = _stability(d_s, m, cyc)
    return cyc


def _stability(d_s: float, m: int, cyc: LimitCycle) -> str:
    if m == 1:
        return "stable" if d_s < 0 else "unstable"
    if m == 2:
        return "semistable"
    c3 = cyc.taylor[3] if len(cyc.taylor) > 3 else 0.0
    if c3 < 0:
        return "stable"
    if c3 > 0:
        return "unstable"
    return "undetermined"


def locate_cycles(params, section: Section, s_range, n_scan: int = 60,
                  max_period: float = MAX_PERIOD, box=None, multiplicity: bool = True,
                  profile_out: list | None = None, tol=(RTOL, ATOL)) -> list[LimitCycle]:
    """Scan d on n_scan points of s_range and refine every zero to a cycle."""
    ss = np.linspace(float(s_range[0]), float(s_range[1]), int(n_scan))
    f = lambda s: _safe_d(params, section, s, max_period, box, tol)  # noqa: E731
    ds = [f(s) for s in ss]
    if profile_out is not None:
        profile_out.extend(zip(ss.tolist(), ds))
    cycles = []
    for s_star, tangential in _find_zeros(f, ss.tolist(), ds):
        if abs(f(s_star)) > (TANGENT_TOL if tangential else ROOT_TOL):
            continue
        try:
            cycles.append(build_cycle(params, section, s_star, max_period, box,
                                      multiplicity, tangential, tol))
        except NoReturn:
            continue
    return cycles


def d_s_via_divergence(params, cycle: LimitCycle, max_period: float | None = None) -> float:
    """exp(integral of div f over one period) - 1."""
    T = max_period or 2.0 * cycle.period + 1.0
    try:
        orbit = first_return(params, cycle.section, cycle.s_star, T, augmented_error=True)
    except NoReturn as exc:
        raise QuadratureFailure(str(exc)) from exc
    return math.expm1(orbit.div_integral)


def normal_section(params, cycle: LimitCycle, section_id: str = "normal") -> Section:
    """Normal line through the cycle point of largest speed, s > 0 outside."""
    xy = cycle.orbit_samples
    arr = params.as_array()
    speeds = [math.hypot(*kernels.field(params.sys_id, arr, x, y)) for x, y in xy]
    k = int(np.argmax(speeds))
    x0, y0 = xy[k]
    fx, fy = kernels.field(params.sys_id, arr, x0, y0)
    n = math.hypot(fx, fy)
    # outward normal: right of travel for counterclockwise orbits
    if cycle.orientation > 0:
        direction = (fy / n, -fx / n)
    else:
        direction = (-fy / n, fx / n)
    probe = Section((x0, y0), direction, 0)
    nrm = probe.normal
    sign = 1 if fx * nrm[0] + fy * nrm[1] >= 0 else -1
    w = 0.25 * cycle.amplitude
    return Section((x0, y0), direction, sign, (-w, w), section_id)


def reanchor(params, cycle: LimitCycle, section: Section | None = None,
             max_period: float = MAX_PERIOD, box=None) -> LimitCycle:
    """The same cycle described on another section (default: the normal line)."""
    section = section or normal_section(params, cycle)
    s0 = section.coordinate(cycle.point)
    if not section.extent[0] <= s0 <= section.extent[1]:
        # the section meets the cycle elsewhere; start from its anchor
        s0 = 0.0
    f = lambda s: _safe_d(params, section, s, max_period, box)  # noqa: E731
    s_star = _polish_root(f, s0, 1e-6 * (1 + abs(s0)))
    return build_cycle(params, section, s_star, max_period, box, multiplicity=False)


def _polish_root(f, s0, h):
    """Root of f near s0 by expanding a bracket, then Brent."""
    f0 = f(s0)
    if f0 == 0.0:
        return s0
    for _ in range(40):
        a, b = s0 - h, s0 + h
        fa, fb = f(a), f(b)
        if math.isfinite(fa) and _opposite(fa, f0):
            return _refine(f, a, s0)
        if math.isfinite(fb) and _opposite(fb, f0):
            return _refine(f, s0, b)
        h *= 2.0
    raise NoReturn(s0, "root not bracketed")


def d_mu_via_wedge(params, cycle: LimitCycle, which: str | int) -> float:
    """Parameter derivative of the displacement at the cycle.

    With w(t) = f ^ delta_x for the parameter variation delta_x,
    w' = (div f) w + f ^ f_mu, so after one period

        d_mu = exp(int_0^T div) / (f(p0) ^ e) * int_0^T exp(-int_0^t div) f ^ f_mu dt

    for a transversal with unit direction e. On the outward normal line,
    f(p0) ^ e = -omega |f(p0)|. The leading exp(int_0^T div) = 1 + d_s is
    exactly 1 on multiple cycles, where the classical formula without it
    is usually quoted; on hyperbolic cycles it is required.
    """
    j = which if isinstance(which, int) else list(params.names).index(
        "lam" if which == "lambda" else which)
    try:
        orbit = first_return(params, cycle.section, cycle.s_star, 2.0 * cycle.period + 1.0,
                             wedge_param=j, augmented_error=True)
    except NoReturn as exc:
        raise QuadratureFailure(str(exc)) from exc
    p0 = cycle.point
    fx, fy = kernels.field(params.sys_id, params.as_array(), p0[0], p0[1])
    ex, ey = cycle.section.direction
    cross = fx * ey - fy * ex
    if cross == 0.0:
        raise QuadratureFailure("section tangent to the flow")
    return math.exp(orbit.div_integral) * orbit.wedge_integral / cross


# ---------------------------------------------------------------- multiplicity

STENCIL = np.arange(-3, 4, dtype=float)
DOMINANCE = 1e-2


def _taylor_terms(dvals: np.ndarray) -> np.ndarray:
    """Scaled Taylor coefficients c_k (d^(k) h^k / k!) from 7 equispaced values."""
    V = np.vander(STENCIL, 7, increasing=True)
    return np.linalg.solve(V, dvals)


def multiplicity_from_terms(c: np.ndarray, noise: float, max_m: int = 3):
    """Smallest k >= 1 whose term clears both the noise floor and a fraction
    of the dominant low-order term."""
    terms = np.abs(c[1:max_m + 1])
    top = float(np.max(terms))
    if top <= noise:
        raise NoiseDominated(f"largest Taylor term {top:.3g} below noise {noise:.3g}")
    for k, t in enumerate(terms, start=1):
        if t > noise and t >= DOMINANCE * top:
            return k
    return max_m


def estimate_multiplicity(params, cycle: LimitCycle | None = None, *, displacement_fn=None,
                          s_star: float | None = None, spacing: float | None = None,
                          noise: float | None = None, max_period: float = MAX_PERIOD,
                          box=None, check_halving: bool = False):
    """Multiplicity from divided differences of d on a 7-point stencil.

    Returns (m, flag) where flag is ">=3" when the cap is reached. Pass
    ``displacement_fn`` and ``s_star`` to probe an arbitrary displacement
    function (params and cycle are then ignored).
    """
    if displacement_fn is None:
        section = cycle.section
        s_star = cycle.s_star

        def displacement_fn(s):
            return displacement(params, section, s, max_period, box)

        noise = noise if noise is not None else 1e2 * _return_error(section, s_star)
        scale = max(1e-3 * cycle.amplitude, 1e-6)
    else:
        noise = noise if noise is not None else 1e-12
        scale = 1e-2
    h = spacing or scale
    c = None
    for _ in range(12):
        try:
            vals = np.array([displacement_fn(s_star + k * h) for k in STENCIL])
        except NoReturn:
            h *= 0.5
            continue
        c = _taylor_terms(vals)
        if np.max(np.abs(c[1:4])) > 1e4 * noise or spacing is not None:
            break
        h *= 2.0
    if c is None:
        raise NoiseDominated("no stencil with returns on all points")
    m = multiplicity_from_terms(c, noise)
    if cycle is not None:
        cycle.taylor = tuple(float(v) for v in c[:4])
    if check_halving:
        vals = np.array([displacement_fn(s_star + k * h / 2) for k in STENCIL])
        m2 = multiplicity_from_terms(_taylor_terms(vals), noise)
        if m2 != m:
            raise NoiseDominated(f"multiplicity changes under halving: {m} vs {m2}")
    return m, (">=3" if m >= 3 else "")
