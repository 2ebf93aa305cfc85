"""Trajectories, section crossings and the first-return map."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .vectorfield import PhasePoint

RTOL = 1e-10
ATOL = 1e-12
DEFAULT_BOX = (0.0, 50.0, 0.0, 50.0)
FIXTURE_BOX = (-10.0, 10.0, -10.0, 10.0)
CONV_TOL = 1e-13

OUTCOMES = {
    kernels.CONVERGED: "converged-to-point",
    kernels.ESCAPED: "escaped-box",
    kernels.CROSSED: "crossed-section",
    kernels.MAX_TIME: "max-time",
    kernels.MAX_STEPS: "max-time",
}


class StepSizeUnderflow(RuntimeError):
    def __init__(self, orbit: "Orbit"):
        super().__init__(f"step size underflow at t={orbit.t_end:.6g}, state={orbit.end}")
        self.orbit = orbit


class NoReturn(RuntimeError):
    """The orbit did not come back to the section."""

    def __init__(self, s: float, outcome: str):
        super().__init__(f"no return from s={s!r}: {outcome}")
        self.s = s
        self.outcome = outcome


@dataclass(frozen=True)
class Section:
    """The line anchor + s * direction.

    ``orientation`` selects which crossings count: +1 when the offset along
    the left normal (direction rotated by +90 degrees) increases, -1 when it
    decreases, 0 for both. ``extent`` bounds the accepted s values.
    """

    anchor: PhasePoint
    direction: tuple
    orientation: int = 1
    extent: tuple = (-math.inf, math.inf)
    section_id: str = "l"

    def __post_init__(self):
        dx, dy = (float(v) for v in self.direction)
        n = math.hypot(dx, dy)
        if n == 0.0 or not math.isfinite(n):
            raise ValueError("section direction must be a nonzero finite vector")
        object.__setattr__(self, "direction", (dx / n, dy / n))
        object.__setattr__(self, "anchor", PhasePoint(float(self.anchor[0]), float(self.anchor[1])))
        if self.orientation not in (-1, 0, 1):
            raise ValueError("orientation must be -1, 0 or +1")

    @property
    def normal(self) -> tuple:
        return (-self.direction[1], self.direction[0])

    def point(self, s: float) -> PhasePoint:
        return PhasePoint(self.anchor[0] + s * self.direction[0],
                          self.anchor[1] + s * self.direction[1])

    def coordinate(self, pt) -> float:
        return (pt[0] - self.anchor[0]) * self.direction[0] + (pt[1] - self.anchor[1]) * self.direction[1]

    def as_array(self) -> np.ndarray:
        return np.array([self.anchor[0], self.anchor[1], self.direction[0], self.direction[1]])


def ray_section(params, anchor, direction=(1.0, 0.0), s_max=math.inf, section_id="ray") -> Section:
    """Ray from ``anchor`` with orientation taken from the flow just off it."""
    probe = Section(anchor, direction, 0)
    n = probe.normal
    # the anchor is typically an equilibrium, so look slightly along the ray
    scale = 1e-3 * (1.0 + math.hypot(*anchor))
    fx, fy = kernels.field(params.sys_id, params.as_array(), *probe.point(scale))
    sign = 1 if fx * n[0] + fy * n[1] >= 0 else -1
    return Section(anchor, direction, sign, (0.0, s_max), section_id)


@dataclass
class Orbit:
    t: np.ndarray
    z: np.ndarray  # (n, 2) states
    outcome: str
    events: list = field(default_factory=list)  # (time, PhasePoint, section id)
    t_end: float = 0.0
    end: PhasePoint = PhasePoint(0.0, 0.0)
    div_integral: float = 0.0
    wedge_integral: float = 0.0
    steps: int = 0

    @property
    def samples(self):
        return [(float(t), PhasePoint(*z)) for t, z in zip(self.t, self.z)]


def _default_box(params):
    return DEFAULT_BOX if params.sys_id == kernels.SYS_HOLLING else FIXTURE_BOX


def integrate(params, start, t_max: float, box=None, section: Section | None = None, *,
              n_terminal: int = 0, record: int = 20000, backward: bool = False,
              wedge_param: int = -1, rtol: float = RTOL, atol: float = ATOL,
              max_steps: int = 2_000_000, max_events: int = 4096,
              augmented_error: bool = False) -> Orbit:
    """Integrate the (rotated) field from ``start``.

    ``record`` caps the number of stored samples; later steps are still taken.
    With ``wedge_param`` >= 0 the weighted wedge integral for that parameter
    index is accumulated alongside the divergence integral, and both enter
    the step-size control when ``augmented_error`` is set.
    """
    if t_max <= 0:
        raise ValueError("t_max must be positive")
    box = _default_box(params) if box is None else box
    x0, y0 = float(start[0]), float(start[1])
    if not (box[0] <= x0 <= box[1] and box[2] <= y0 <= box[3]):
        raise ValueError(f"start {start} outside box {box}")
    z0 = np.array([x0, y0, 0.0, 0.0])
    if section is None:
        sec, use_sec, orient, smin, smax = np.zeros(4), False, 0, -math.inf, math.inf
    else:
        sec, use_sec = section.as_array(), True
        orient = section.orientation
        smin, smax = section.extent
    ev_t = np.empty(max_events)
    ev_z = np.empty((max_events, 4))
    samp_t = np.empty(record)
    samp_z = np.empty((record, 4))
    out_z = np.empty(4)
    status, t, nev, nsamp, steps = kernels.integrate(
        params.sys_id, params.as_array(), z0, float(t_max), np.asarray(box, dtype=float),
        sec, use_sec, int(orient), float(smin), float(smax), int(n_terminal), int(wedge_param),
        -1.0 if backward else 1.0, rtol, atol, 4 if augmented_error else 2, CONV_TOL,
        int(max_steps), ev_t, ev_z, samp_t, samp_z, out_z)
    sid = section.section_id if section is not None else ""
    events = [(float(ev_t[i]), PhasePoint(ev_z[i, 0], ev_z[i, 1]), sid)
              for i in range(min(nev, max_events))]
    orbit = Orbit(samp_t[:nsamp].copy(), samp_z[:nsamp, :2].copy(),
                  OUTCOMES.get(status, "step-underflow"), events, float(t),
                  PhasePoint(out_z[0], out_z[1]), float(out_z[2]), float(out_z[3]), int(steps))
    if status == kernels.UNDERFLOW:
        raise StepSizeUnderflow(orbit)
    return orbit


def first_return(params, section: Section, s: float, max_period: float, box=None, *,
                 record: int = 0, wedge_param: int = -1, rtol: float = RTOL,
                 atol: float = ATOL, augmented_error: bool = False) -> Orbit:
    """Orbit from section.point(s) up to its first accepted return."""
    if section.orientation == 0:
        # pick the crossing sign of the flow at the start point
        pt = section.point(s)
        fx, fy = kernels.field(params.sys_id, params.as_array(), pt[0], pt[1])
        n = section.normal
        sign = 1 if fx * n[0] + fy * n[1] >= 0 else -1
        section = Section(section.anchor, section.direction, sign, section.extent, section.section_id)
    try:
        orbit = integrate(params, section.point(s), max_period, box, section, n_terminal=1,
                          record=record, wedge_param=wedge_param, rtol=rtol, atol=atol,
                          augmented_error=augmented_error)
    except StepSizeUnderflow:
        raise NoReturn(s, "step-underflow") from None
    except ValueError:
        raise NoReturn(s, "start outside box") from None
    if orbit.outcome != "crossed-section":
        raise NoReturn(s, orbit.outcome)
    return orbit


def return_map(params, section: Section, s: float, max_period: float = 500.0, box=None) -> float:
    """Section coordinate of the first same-orientation return, h(s)."""
    orbit = first_return(params, section, s, max_period, box)
    return float(section.coordinate(orbit.end))
