"""Analytic test systems sharing the integrator with the model field."""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from . import kernels
from .vectorfield import SystemParams


@dataclass(frozen=True)
class HopfFixture:
    """scale * (-y + x(rho - r^2), x + y(rho - r^2)), rotated by gamma.

    For rho > 0 the circle r = sqrt(rho) is a stable limit cycle with
    period 2 pi / scale (gamma = 0).
    """

    rho: float = 1.0
    scale: float = 1.0
    gamma: float = 0.0

    sys_id = kernels.SYS_HOPF
    names = ("rho", "scale", "gamma")

    def as_array(self) -> np.ndarray:
        return np.array([self.rho, self.scale, self.gamma], dtype=float)

    def with_(self, **changes) -> "HopfFixture":
        return replace(self, **changes)

    def to_dict(self) -> dict:
        return {"rho": self.rho, "scale": self.scale, "gamma": self.gamma}


# delta, lambda, mu for which the two-cycle construction succeeds; found by a
# randomized search over cycle counts, then frozen
SCENARIO_BASE = SystemParams(alpha=0.0, beta=0.0, delta=0.83524, lam=0.13094, mu=0.05553)
