"""Continuation of limit cycles in one parameter, folds, the two-cycle
construction and the randomized nested-cycle audit."""
from __future__ import annotations

import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .cycles import (MAX_PERIOD, NoiseDominated, LimitCycle, _opposite, _safe_d, _taylor_terms,
                     build_cycle, displacement, locate_cycles, multiplicity_from_terms, STENCIL,
                     _return_error)
from . import kernels
from .equilibria import interior_antisaddles
from .flow import ATOL, RTOL, NoReturn, Section
from .vectorfield import SystemParams

TERMINATIONS = ("fold", "cycle-vanished", "escaped-box", "shrank-to-point", "parameter-bound")
CONTINUABLE = ("alpha", "beta", "gamma")

N_SCAN = 40
TIGHT_TOL = (1e-12, 1e-14)
CLOSURE_OK = 1e-7
SHRINK_TOL = 1e-4


class ScenarioNotFound(RuntimeError):
    """The constructive search did not complete; ``trace`` says how far it got."""

    def __init__(self, msg: str, trace: list):
        super().__init__(msg)
        self.trace = trace


# ---------------------------------------------------------------- sections

def antisaddles(params: SystemParams):
    """Interior anti-saddles, left to right."""
    return interior_antisaddles(params)


def nearest_antisaddle(params: SystemParams, pt):
    cands = antisaddles(params)
    if not cands:
        return None
    return min(cands, key=lambda e: math.hypot(e.location[0] - pt[0], e.location[1] - pt[1]))


def left_ray(anchor) -> Section:
    """Horizontal ray from ``anchor`` to the invariant y-axis."""
    x, y = float(anchor[0]), float(anchor[1])
    return Section((x, y), (-1.0, 0.0), 0, (0.0, x), "left")


def scan_range(section: Section):
    hi = section.extent[1]
    return (1e-3 * hi, 0.999 * hi)


def surrounds(cycle: LimitCycle, pt) -> bool:
    """Even-odd test of pt against the closed orbit polygon."""
    xy = cycle.orbit_samples
    x, y = xy[:, 0], xy[:, 1]
    xn, yn = np.roll(x, -1), np.roll(y, -1)
    px, py = pt
    cond = (y > py) != (yn > py)
    with np.errstate(divide="ignore", invalid="ignore"):
        xc = x + (py - y) * (xn - x) / (yn - y)
    return bool(np.count_nonzero(cond & (px < xc)) % 2)


def cycles_around(params: SystemParams, anchor, n_scan: int = N_SCAN, *,
                  multiplicity: bool = False, tol=(RTOL, ATOL),
                  max_period: float = MAX_PERIOD) -> list[LimitCycle]:
    """Cycles surrounding ``anchor`` found on its left ray, innermost first."""
    sec = left_ray(anchor)
    found = locate_cycles(params, sec, scan_range(sec), n_scan, max_period,
                          multiplicity=multiplicity, tol=tol)
    return [c for c in found if surrounds(c, anchor) and c.closure < CLOSURE_OK]


def _signature(params, anchor, n_scan=N_SCAN) -> str:
    """'u'/'s' string of the cycles around anchor, '' if none."""
    return "".join(LETTERS.get(c.stability, "?") for c in cycles_around(params, anchor, n_scan))


# ---------------------------------------------------------------- branches

class FoldPoint(NamedTuple):
    value: float
    s_star: float
    multiplicity: int
    flag: str
    counts: tuple  # cycles in the local window (before, after) the fold
    closure: float


@dataclass
class Branch:
    parameter: str
    points: list  # (value, s_star, period, d_s)
    folds: list = field(default_factory=list)
    termination: str = "parameter-bound"
    base: SystemParams | None = None
    anchors: list = field(default_factory=list)
    last_cycle: LimitCycle | None = None

    @property
    def values(self) -> np.ndarray:
        return np.array([p[0] for p in self.points])

    @property
    def s_values(self) -> np.ndarray:
        return np.array([p[1] for p in self.points])

    def monotone(self) -> bool:
        """s_star strictly monotone along the stored points."""
        ds = np.diff(self.s_values)
        return bool(np.all(ds > 0) or np.all(ds < 0))


def _section_for(params, parameter, section, moving):
    if not moving:
        return section
    a = nearest_antisaddle(params, section.anchor)
    if a is None:
        return None
    return left_ray(a.location)


def _relocate(params, section, s_pred, sign, s_ref):
    """Zero of d near s_pred whose slope has the given sign, or the reason it failed."""
    outcome = []

    def f(s):
        try:
            return displacement(params, section, s)
        except NoReturn as exc:
            outcome.append(exc.outcome)
            return math.nan

    def lost():
        return "escaped" if outcome and outcome[-1] == "escaped-box" else "no-return"

    lo, hi = section.extent
    s_pred = min(max(s_pred, lo + 1e-12), hi - 1e-12)
    f0 = f(s_pred)
    if not math.isfinite(f0):
        return None, lost()
    if f0 == 0.0:
        return s_pred, ""
    # d crosses zero with slope `sign`, so the root lies below s_pred when f0*sign > 0
    step = -1.0 if f0 * sign > 0 else 1.0
    h = max(1e-7, 1e-3 * s_ref)
    a, fa = s_pred, f0
    while h < 0.5 * s_ref:
        b = min(max(s_pred + step * h, lo), hi)
        fb = f(b)
        if not math.isfinite(fb):
            return None, lost()
        if _opposite(fa, fb):
            lo_, hi_ = (a, b) if a < b else (b, a)
            return float(brentq(f, lo_, hi_, xtol=1e-14, rtol=1e-15, maxiter=200)), ""
        if b in (lo, hi):
            break
        a, fa = b, fb
        h *= 2.0
    return None, ("shrank" if step < 0 and s_pred < 10 * SHRINK_TOL * (1 + s_ref) else "lost")


def _window_extremum(params, section, interval, sigma, n=15):
    """max over interval of sigma*d, and where it is attained."""
    f = lambda s: sigma * _safe_d(params, section, s, MAX_PERIOD, None)  # noqa: E731
    ss = np.linspace(interval[0], interval[1], n)
    vals = np.array([f(s) for s in ss])
    if not np.all(np.isfinite(vals)):
        return math.nan, math.nan
    k = int(np.argmax(vals))
    a, b = ss[max(k - 1, 0)], ss[min(k + 1, n - 1)]
    res = minimize_scalar(lambda s: -f(s), bounds=(a, b), method="bounded",
                          options={"xatol": 1e-13})
    if -res.fun >= vals[k]:
        return float(-res.fun), float(res.x)
    return float(vals[k]), float(ss[k])


def _partner(params, section, s_star, sign, width):
    """Neighbouring zero of d with the opposite slope, within +-width of s_star."""
    lo, hi = section.extent
    f = lambda s: _safe_d(params, section, s, MAX_PERIOD, None)  # noqa: E731
    for side in (1.0, -1.0):
        ss = s_star + side * np.linspace(1e-4 * width, width, 25)
        ss = ss[(ss > lo) & (ss < hi)]
        prev = None
        for s in ss:
            v = f(s)
            if not math.isfinite(v):
                break
            if prev is not None and _opposite(prev, v):
                return float(s)
            prev = v
    return None


def _fold_multiplicity(params, section, s_f):
    """Recentre on the extremum with the stencil fit, then estimate m."""
    noise = 1e2 * _return_error(section, s_f)
    h = max(1e-3 * s_f, 1e-6)
    f = lambda s: _safe_d(params, section, s, MAX_PERIOD, None)  # noqa: E731
    c = None
    for _ in range(3):
        vals = np.array([f(s_f + k * h) for k in STENCIL])
        if not np.all(np.isfinite(vals)):
            break
        c = _taylor_terms(vals)
        if c[2] == 0.0:
            break
        shift = -c[1] / (2.0 * c[2])
        if abs(shift) > 2.0:
            break
        s_f += shift * h
    if c is None:
        raise NoiseDominated("no stencil around the fold")
    m = multiplicity_from_terms(c, noise)
    return m, (">=3" if m >= 3 else ""), s_f


def _count_in(params, section, interval, n=60):
    cs = locate_cycles(params, section, interval, n, multiplicity=False)
    return len(cs)


def locate_fold(base, parameter, v_good, v_bad, section_good, s_good, sign, moving=True,
                width=None):
    """Fold between v_good (cycle exists) and v_bad (relocation failed).

    The partner cycle at v_good must be inside the search window; the fold is
    the zero of the extremum of d between the two cycles.
    """
    width = width or 0.5 * s_good
    p_good = base.with_(**{parameter: v_good})
    s_p = _partner(p_good, section_good, s_good, sign, width)
    if s_p is None:
        return None
    lo, hi = sorted((s_good, s_p))
    pad = 0.25 * (hi - lo)
    interval = (max(lo - pad, section_good.extent[0] + 1e-12), min(hi + pad, section_good.extent[1]))
    mid = 0.5 * (lo + hi)
    sigma = 1.0 if _safe_d(p_good, section_good, mid, MAX_PERIOD, None) > 0 else -1.0

    def g(v):
        p = base.with_(**{parameter: v})
        sec = _section_for(p, parameter, section_good, moving)
        if sec is None:
            return math.nan
        e, _ = _window_extremum(p, sec, interval, sigma)
        return e

    g_good, g_bad = g(v_good), g(v_bad)
    if not (math.isfinite(g_good) and math.isfinite(g_bad)) or g_good <= 0 or g_bad >= 0:
        return None
    v_f = float(brentq(g, v_good, v_bad, xtol=1e-14, rtol=1e-15, maxiter=200))
    p_f = base.with_(**{parameter: v_f})
    sec_f = _section_for(p_f, parameter, section_good, moving)
    _, s_f = _window_extremum(p_f, sec_f, interval, sigma)
    try:
        m, flag, s_f = _fold_multiplicity(p_f, sec_f, s_f)
    except NoiseDominated:
        m, flag = 2, "noise"
    closure = build_cycle(p_f, sec_f, s_f, multiplicity=False).closure
    # local split: two cycles before the fold, none after
    eps = max(1e-4 * abs(v_bad - v_good), 1e-9 * (1 + abs(v_f)))
    eps = min(eps, 0.5 * abs(v_bad - v_f), 0.5 * abs(v_f - v_good)) if v_bad != v_good else eps
    direction = 1.0 if v_bad > v_good else -1.0
    window = (interval[0], interval[1])
    counts = []
    for v in (v_f - direction * eps, v_f + direction * eps):
        p = base.with_(**{parameter: v})
        sec = _section_for(p, parameter, section_good, moving)
        counts.append(_count_in(p, sec, window) if sec is not None else 0)
    return FoldPoint(v_f, s_f, m, flag, tuple(counts), closure), p_f, sec_f


def continue_branch(params: SystemParams, cycle: LimitCycle, parameter: str, stop: float,
                    step: float | None = None, *, max_points: int = 400,
                    min_step: float | None = None, max_step: float | None = None,
                    locate_folds: bool = True) -> Branch:
    """Natural-parameter continuation of ``cycle`` in ``parameter`` towards ``stop``.

    The step is halved when the cycle cannot be re-located and grown by 1.5
    after each success. For alpha and beta the ray is re-anchored at the
    moving anti-saddle; gamma leaves equilibria fixed. Test systems other
    than the model accept any of their own parameters on a fixed section.
    """
    model = params.sys_id == kernels.SYS_HOLLING
    if model and parameter not in CONTINUABLE:
        raise ValueError(f"continuation parameter must be one of {CONTINUABLE}, got {parameter!r}")
    if not model and parameter not in params.names:
        raise ValueError(f"unknown parameter {parameter!r}")
    v = float(getattr(params, parameter))
    span = float(stop) - v
    direction = 1.0 if span > 0 else -1.0
    step = step or max(abs(span) / 50.0, 1e-6)
    max_step = max_step or max(abs(span) / 10.0, step)
    min_step = min_step or 1e-9 * max(1.0, abs(v))
    moving = model and parameter != "gamma"
    section, s = cycle.section, cycle.s_star
    sign = 1.0 if cycle.d_s_value > 0 else -1.0
    # section coordinates below this count as a point-sized cycle
    shrunk = SHRINK_TOL * (1.0 + abs(section.extent[1]))
    branch = Branch(parameter, [(v, s, cycle.period, cycle.d_s_value)], base=params,
                    anchors=[tuple(section.anchor)], last_cycle=cycle)
    h = step
    failure = ""
    while len(branch.points) < max_points:
        remaining = direction * (float(stop) - v)
        if remaining <= 1e-12 * max(1.0, abs(v)):
            branch.termination = "parameter-bound"
            return branch
        h = min(h, remaining, max_step)
        v_new = v + direction * h
        p_new = params.with_(**{parameter: v_new})
        sec_new = _section_for(p_new, parameter, section, moving)
        s_new, cyc = None, None
        if sec_new is None:
            failure = "lost"
        else:
            if len(branch.points) >= 2:
                (v0, s0, *_), (v1, s1, *_) = branch.points[-2], branch.points[-1]
                s_pred = s1 + (s1 - s0) / (v1 - v0) * (v_new - v1)
            else:
                s_pred = s
            s_new, failure = _relocate(p_new, sec_new, s_pred, sign, max(s, 1e-6))
            if s_new is not None and s_new < shrunk:
                # the cycle has collapsed onto its anchor equilibrium
                branch.termination = "shrank-to-point"
                return branch
            if s_new is not None:
                try:
                    cyc = build_cycle(p_new, sec_new, s_new, multiplicity=False)
                except NoReturn:
                    cyc, failure = None, "no-return"
                if cyc is not None and (cyc.d_s_value * sign <= 0 or cyc.closure > CLOSURE_OK):
                    cyc, failure = None, "jumped"
        if cyc is not None:
            v, section, s = v_new, sec_new, s_new
            branch.points.append((v, s, cyc.period, cyc.d_s_value))
            branch.anchors.append(tuple(section.anchor))
            branch.last_cycle = cyc
            h *= 1.5
            continue
        if (locate_folds and sec_new is not None and failure in ("lost", "jumped", "no-return")
                and s >= shrunk):
            res = locate_fold(params.with_(**{parameter: v}), parameter, v, v_new, section, s,
                              sign, moving)
            if res is not None:
                branch.folds.append(res[0])
                branch.termination = "fold"
                return branch
        h *= 0.5
        if h < min_step:
            break
    if failure == "shrank" or s < shrunk:
        branch.termination = "shrank-to-point"
    elif failure == "escaped":
        branch.termination = "escaped-box"
    elif len(branch.points) >= max_points:
        branch.termination = "parameter-bound"
    else:
        branch.termination = "cycle-vanished"
    return branch


# ---------------------------------------------------------------- the two-cycle construction

LETTERS = {"unstable": "u", "stable": "s", "semistable": "h"}


@dataclass
class ScenarioStage:
    name: str
    params: SystemParams
    anchor: tuple | None
    cycles: list  # LimitCycle, innermost first
    note: str = ""

    @property
    def signature(self) -> str:
        """One letter per cycle: u(nstable), s(table), h(alf-stable)."""
        return "".join(LETTERS.get(c.stability, "?") for c in self.cycles)


@dataclass
class ScenarioRecord:
    base: SystemParams
    stages: list
    fold: FoldPoint | None
    alpha_direction: int
    hopf_beta: float
    outer_birth: dict
    branch: Branch | None
    trace: list
    elapsed: float = 0.0

    def stage(self, name) -> ScenarioStage:
        return next(s for s in self.stages if s.name == name)


def hopf_beta(params: SystemParams, alpha: float, beta_range=(-4.0, 0.0), n: int = 80):
    """Largest beta below beta_range[1] where the leftmost anti-saddle loses stability
    as beta decreases (trace + -> -), or None."""

    def tr(b):
        cs = antisaddles(params.with_(alpha=alpha, beta=b))
        return cs[0].trace if cs else math.nan

    bs = np.linspace(beta_range[1], beta_range[0], n + 1)[1:]
    prev_b, prev_t = None, None
    for b in bs:
        t = tr(b)
        if prev_t is not None and math.isfinite(t) and math.isfinite(prev_t) and prev_t > 0 > t:
            return float(brentq(tr, b, prev_b, xtol=1e-13))
        prev_b, prev_t = b, t
    return None


def _classify(params):
    cs = antisaddles(params)
    if not cs:
        return "none", None
    a = cs[0]
    if a.trace >= 0:
        return "unstable-focus", a
    return (_signature(params, a.location) or "-"), a


def reproduce_two_cycle_scenario(base: SystemParams, *, alpha_grid=None, beta_range=(-4.0, 0.0),
                                 hopf_offset: float = 1e-3, alpha_tol: float = 1e-3,
                                 budget: float = 600.0) -> ScenarioRecord:
    """Constructive route to two nested cycles and their fold.

    (i) alpha = beta = 0; (ii) on a coarse alpha grid, step just past the
    Hopf value of beta onto the stable side of A and look for a single
    unstable cycle next to a grid point with two; the boundary between the
    two is refined by bisection in alpha; (iii) move alpha across it at
    fixed beta until a stable cycle appears outside; (iv) continue the inner
    cycle in alpha to the fold.
    """
    t0 = time.monotonic()
    trace = []

    def check_budget(stage):
        if time.monotonic() - t0 > budget:
            raise ScenarioNotFound(f"budget exhausted in stage {stage}", trace)

    stages = []
    p0 = base.with_(alpha=0.0, beta=0.0)
    cyc0 = []
    for a in antisaddles(p0):
        cyc0.extend(cycles_around(p0, a.location, 2 * N_SCAN))
    trace.append(f"i: alpha=beta=0 cycles={len(cyc0)}")
    if cyc0:
        raise ScenarioNotFound("cycles present at alpha = beta = 0", trace)
    a0 = antisaddles(p0)
    stages.append(ScenarioStage("i", p0, tuple(a0[0].location) if a0 else None, []))

    grid = np.arange(0.05, 3.0 + 1e-9, 0.05) if alpha_grid is None else np.asarray(alpha_grid)
    labels = []
    for al in grid:
        check_budget("ii")
        bh = hopf_beta(base, float(al), beta_range)
        if bh is None:
            labels.append((float(al), None, "no-hopf"))
            continue
        lab, _ = _classify(base.with_(alpha=float(al), beta=bh - hopf_offset))
        labels.append((float(al), bh, lab))
        trace.append(f"ii: alpha={al:.4f} hopf_beta={bh:.6f} -> {lab}")
        if len(labels) >= 2 and {labels[-2][2], lab} == {"us", "u"}:
            break
    else:
        raise ScenarioNotFound("no grid cell with a single unstable cycle next to two", trace)

    (al_a, _, lab_a), (al_b, _, lab_b) = labels[-2], labels[-1]
    al_u, al_us = (al_a, al_b) if lab_a == "u" else (al_b, al_a)
    while abs(al_u - al_us) > alpha_tol:
        check_budget("ii")
        mid = 0.5 * (al_u + al_us)
        bh = hopf_beta(base, mid, beta_range)
        lab = _classify(base.with_(alpha=mid, beta=bh - hopf_offset))[0] if bh is not None else "?"
        trace.append(f"ii: bisect alpha={mid:.6f} -> {lab}")
        if lab == "u":
            al_u = mid
        elif lab == "us":
            al_us = mid
        else:
            break
    direction = 1 if al_us > al_u else -1
    beta2 = hopf_beta(base, al_u, beta_range) - hopf_offset
    p2 = base.with_(alpha=al_u, beta=beta2)
    lab2, a2 = _classify(p2)
    if lab2 != "u":
        raise ScenarioNotFound(f"stage ii point classified {lab2!r}", trace)
    stages.append(ScenarioStage("ii", p2, tuple(a2.location),
                                cycles_around(p2, a2.location, multiplicity=True)))

    # (iii) alpha across the boundary at fixed beta
    step = alpha_tol
    al = al_u
    lab3, a3 = lab2, a2
    last_u = al_u
    for _ in range(400):
        check_budget("iii")
        al += direction * step
        lab3, a3 = _classify(base.with_(alpha=al, beta=beta2))
        trace.append(f"iii: alpha={al:.6f} beta={beta2:.6f} -> {lab3}")
        if lab3 == "us":
            break
        if lab3 != "u":
            raise ScenarioNotFound(f"inner cycle lost before a second one appeared ({lab3})", trace)
        last_u = al
        step *= 1.5
    else:
        raise ScenarioNotFound("no second cycle along alpha", trace)
    lo, hi = last_u, al
    while abs(hi - lo) > 1e-6:
        mid = 0.5 * (lo + hi)
        if _classify(base.with_(alpha=mid, beta=beta2))[0] == "us":
            hi = mid
        else:
            lo = mid
    p_birth = base.with_(alpha=hi, beta=beta2)
    birth_cycles = cycles_around(p_birth, nearest_antisaddle(p_birth, a3.location).location)
    outer_birth = {"alpha": hi, "amplitude": birth_cycles[-1].amplitude if len(birth_cycles) == 2 else math.nan}
    p3 = base.with_(alpha=al, beta=beta2)
    stages.append(ScenarioStage("iii", p3, tuple(a3.location),
                                cycles_around(p3, a3.location, multiplicity=True),
                                f"outer cycle first seen at alpha={hi:.6f}"))

    # (iv) inner cycle continued in alpha until it meets the outer one
    check_budget("iv")
    inner = stages[-1].cycles[0]
    stop = al + direction * 1.0
    branch = continue_branch(p3, inner, "alpha", stop, step=0.2 * alpha_tol,
                             max_step=5 * alpha_tol)
    trace.append(f"iv: branch termination={branch.termination} points={len(branch.points)}")
    if branch.termination != "fold" or not branch.folds:
        raise ScenarioNotFound("inner branch ended without a fold", trace)
    fold = branch.folds[0]
    p4 = base.with_(alpha=fold.value, beta=beta2)
    sec4 = left_ray(nearest_antisaddle(p4, a3.location).location)
    fold_cycle = build_cycle(p4, sec4, fold.s_star, multiplicity=False, tangential=True)
    fold_cycle.multiplicity_estimate = fold.multiplicity
    fold_cycle.multiplicity_flag = fold.flag
    fold_cycle.stability = "semistable" if fold.multiplicity == 2 else fold_cycle.stability
    stages.append(ScenarioStage("iv", p4, tuple(sec4.anchor), [fold_cycle],
                                f"fold counts before/after {fold.counts}"))
    return ScenarioRecord(base, stages, fold, direction, beta2 + hopf_offset, outer_birth,
                          branch, trace, time.monotonic() - t0)


# ---------------------------------------------------------------- audit

DEFAULT_RANGES = {
    "alpha": (0.0, 3.0),
    "beta": (-4.0, 2.0),
    "delta": (0.05, 2.0),
    "lambda": (0.05, 1.5),
    "mu": (0.01, 0.5),
}


@dataclass
class DrawRecord:
    index: int
    params: dict
    antisaddles: int
    counts: list  # nested cycles around each anti-saddle
    stabilities: list
    alternation_ok: bool
    verified: bool = False

    @property
    def max_nested(self) -> int:
        return max(self.counts, default=0)


@dataclass
class AuditReport:
    seed: int
    draws: int
    max_nested_cycles_observed: int
    violations: list
    records: list
    ranges: dict


def draw_params(seed: int, index: int, ranges=None) -> SystemParams:
    """Parameters of draw ``index``; independent of how draws are scheduled."""
    ranges = ranges or DEFAULT_RANGES
    rng = np.random.default_rng([int(seed), int(index)])
    vals = {k: float(rng.uniform(*ranges[k])) for k in ("alpha", "beta", "delta", "lambda", "mu")}
    return SystemParams.from_dict(vals)


def _alternates(stabs) -> bool:
    hyper = [s for s in stabs if s in ("stable", "unstable")]
    return all(a != b for a, b in zip(hyper, hyper[1:]))


def audit_draw(params: SystemParams, index: int = 0, n_scan: int = N_SCAN) -> DrawRecord:
    counts, stabs = [], []
    anti = antisaddles(params)
    for a in anti:
        cs = cycles_around(params, a.location, n_scan)
        counts.append(len(cs))
        stabs.append([c.stability for c in cs])
    rec = DrawRecord(index, params.to_dict(), len(anti), counts, stabs,
                     all(_alternates(s) for s in stabs))
    if rec.max_nested >= 3:
        # re-verify at tighter tolerances and a denser scan
        counts2, stabs2 = [], []
        for a in anti:
            cs = cycles_around(params, a.location, 4 * n_scan, tol=TIGHT_TOL)
            counts2.append(len(cs))
            stabs2.append([c.stability for c in cs])
        rec.counts, rec.stabilities, rec.verified = counts2, stabs2, True
        rec.alternation_ok = all(_alternates(s) for s in stabs2)
    return rec


def _audit_one(args):
    seed, index, ranges, n_scan = args
    return audit_draw(draw_params(seed, index, ranges), index, n_scan)


def audit_max_cycles(draws: int = 200, seed: int = 0, ranges=None, workers: int = 1,
                     n_scan: int = N_SCAN) -> AuditReport:
    """Count nested cycles around every interior anti-saddle for seeded draws."""
    ranges = dict(ranges or DEFAULT_RANGES)
    jobs = [(seed, i, ranges, n_scan) for i in range(int(draws))]
    if workers and workers > 1:
        with ProcessPoolExecutor(max_workers=int(workers)) as ex:
            records = list(ex.map(_audit_one, jobs, chunksize=4))
    else:
        records = [_audit_one(j) for j in jobs]
    records.sort(key=lambda r: r.index)
    violations = [r.params for r in records if r.max_nested >= 3]
    return AuditReport(int(seed), int(draws), max((r.max_nested for r in records), default=0),
                       violations, records, ranges)
