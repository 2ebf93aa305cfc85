"""The quartic predator-prey field and its gamma-rotated companion.

    P = x((1 - lam x)(alpha x^2 + beta x + 1) - x y)
    Q = -y((delta + mu y)(alpha x^2 + beta x + 1) - x^2)

The rotated field is (P - gamma Q, Q + gamma P); gamma = 0 gives (P, Q).
"""
from __future__ import annotations

import math
import numbers
from dataclasses import dataclass, replace
from typing import NamedTuple

import numpy as np

from . import kernels

PARAM_NAMES = ("alpha", "beta", "delta", "lam", "mu", "gamma")
# CLI / serialization spelling of the same fields
PUBLIC_NAMES = ("alpha", "beta", "delta", "lambda", "mu", "gamma")


class InvalidParameter(ValueError):
    """A model parameter is outside its admissible range."""

    def __init__(self, name: str, value: float, bound: str):
        super().__init__(f"{name}={value!r} violates {name} {bound}")
        self.name = name
        self.value = value
        self.bound = bound


@dataclass(frozen=True)
class SystemParams:
    alpha: float
    beta: float
    delta: float
    lam: float
    mu: float
    gamma: float = 0.0

    sys_id = kernels.SYS_HOLLING
    names = PARAM_NAMES

    def __post_init__(self):
        for name in PARAM_NAMES:
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, numbers.Real) or not math.isfinite(v):
                raise InvalidParameter(_public(name), v, "must be a finite number")
            object.__setattr__(self, name, float(v))
        if self.alpha < 0:
            raise InvalidParameter("alpha", self.alpha, ">= 0")
        if self.delta <= 0:
            raise InvalidParameter("delta", self.delta, "> 0")
        if self.lam <= 0:
            raise InvalidParameter("lambda", self.lam, "> 0")
        if self.mu < 0:
            raise InvalidParameter("mu", self.mu, ">= 0")

    def as_array(self) -> np.ndarray:
        return np.array([getattr(self, n) for n in PARAM_NAMES], dtype=float)

    def with_(self, **changes) -> "SystemParams":
        if "lambda" in changes:
            changes["lam"] = changes.pop("lambda")
        return replace(self, **changes)

    def unrotated(self) -> "SystemParams":
        return replace(self, gamma=0.0)

    def to_dict(self) -> dict:
        return {pub: getattr(self, n) for n, pub in zip(PARAM_NAMES, PUBLIC_NAMES)}

    @classmethod
    def from_dict(cls, d: dict) -> "SystemParams":
        kw = {}
        for n, pub in zip(PARAM_NAMES, PUBLIC_NAMES):
            if pub in d:
                kw[n] = d[pub]
            elif n in d:
                kw[n] = d[n]
        return cls(**kw)


def _public(name: str) -> str:
    return "lambda" if name == "lam" else name


def param_index(name: str) -> int:
    """Position of a parameter in ``SystemParams.as_array``."""
    if name == "lambda":
        name = "lam"
    try:
        return PARAM_NAMES.index(name)
    except ValueError:
        raise ValueError(f"unknown parameter {name!r}") from None


class PhasePoint(NamedTuple):
    x: float
    y: float


class FieldValue(NamedTuple):
    p: float
    q: float


def eval_field(params: SystemParams, pt) -> FieldValue:
    """Rotated field at a point. Exact zeros on the invariant axes when gamma = 0."""
    x, y = pt
    p, q = kernels.field(kernels.SYS_HOLLING, params.as_array(), float(x), float(y))
    return FieldValue(p, q)


def eval_field_array(params: SystemParams, xs, ys) -> np.ndarray:
    """Vectorized field, shape (n, 2)."""
    xs = np.ascontiguousarray(xs, dtype=float).ravel()
    ys = np.ascontiguousarray(ys, dtype=float).ravel()
    out = np.empty((xs.size, 2))
    kernels.field_grid(kernels.SYS_HOLLING, params.as_array(), xs, ys, out)
    return out


def eval_jacobian(params: SystemParams, pt) -> np.ndarray:
    x, y = pt
    a, b, c, d = kernels.jacobian(kernels.SYS_HOLLING, params.as_array(), float(x), float(y))
    return np.array([[a, b], [c, d]])


def divergence(params: SystemParams, pt) -> float:
    return float(np.trace(eval_jacobian(params, pt)))


def eval_param_derivative(params: SystemParams, pt, which: str) -> FieldValue:
    """Partial derivative of the rotated field with respect to one parameter."""
    x, y = pt
    gx, gy = kernels.param_derivative(
        kernels.SYS_HOLLING, params.as_array(), float(x), float(y), param_index(which))
    return FieldValue(gx, gy)


def rational_field(params: SystemParams, pt) -> FieldValue:
    """Unrotated field in the original rational form, multiplied back by the
    response denominator. Only meant as an independent cross-check."""
    x, y = pt
    D = params.alpha * x * x + params.beta * x + 1.0
    dx = x * (1.0 - params.lam * x - x * y / D)
    dy = -y * (params.delta + params.mu * y - x * x / D)
    return FieldValue(D * dx, D * dy)


def rotation_determinant(params: SystemParams, pt, which: str) -> float:
    """P Q'_w - Q P'_w for w in {alpha, beta}; P^2 + Q^2 for gamma.

    The alpha/beta determinants are taken on the unrotated field.
    """
    if which == "gamma":
        p, q = eval_field(params, pt)
        return p * p + q * q
    if which not in ("alpha", "beta"):
        raise ValueError(f"rotation determinant defined for alpha, beta, gamma; got {which!r}")
    base = params.unrotated()
    p, q = eval_field(base, pt)
    pw, qw = eval_param_derivative(base, pt, which)
    return p * qw - q * pw


def ellipse_residual(params: SystemParams, pt) -> float:
    """y(delta + mu y) - x(1 - lam x). Degenerates to a parabola when mu = 0."""
    x, y = pt
    return y * (params.delta + params.mu * y) - x * (1.0 - params.lam * x)
