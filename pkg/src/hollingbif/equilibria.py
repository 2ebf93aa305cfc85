"""Finite and infinite singular points, Poincare indices and index-theorem audits."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .vectorfield import PhasePoint, SystemParams, eval_field, eval_jacobian

NEWTON_TOL = 1e-12
DEDUP_RADIUS = 1e-8
DEGENERATE_DET = 1e-10
CENTER_REL = 1e-9
# singular points farther out than this are merging with infinity; they are
# left out of the finite list and make the index audit inconclusive
FAR = 1e8


class ContourThroughSingularity(ValueError):
    pass


class NonIntegerWinding(ValueError):
    def __init__(self, winding: float, n: int):
        super().__init__(f"winding {winding:.4f} not near an integer with {n} samples")
        self.winding = winding
        self.n = n


class DegenerateAtInfinity(ValueError):
    pass


class InconclusiveAudit(ValueError):
    pass


@dataclass
class Equilibrium:
    location: PhasePoint
    eigenvalues: tuple
    kind: str
    index: int
    in_open_first_quadrant: bool
    degenerate: bool = False
    det: float = 0.0
    trace: float = 0.0

    @property
    def is_antisaddle(self) -> bool:
        return self.kind in ("node", "focus", "center-candidate")


@dataclass
class InfiniteEquilibrium:
    direction: object  # slope u = y/x, or "y-axis ends"
    multiplicity: int
    kind: str
    index: int = 0
    chart_eigenvalues: tuple = ()


# ---------------------------------------------------------------- polynomials

def companion_roots(coeffs) -> np.ndarray:
    """Roots of c[0] x^n + ... + c[n] from the eigenvalues of the companion matrix."""
    c = np.trim_zeros(np.asarray(coeffs, dtype=float), "f")
    if c.size <= 1:
        return np.empty(0, dtype=complex)
    # strip zero roots (trailing zero coefficients)
    nz = 0
    while c.size > 1 and c[-1] == 0.0:
        c = c[:-1]
        nz += 1
    n = c.size - 1
    roots = np.zeros(nz, dtype=complex)
    if n == 0:
        return roots
    c = c / np.max(np.abs(c))
    if abs(c[0]) < 1e-8:
        # nearly degree-deficient: some roots are huge, so work with 1/x
        z = _companion_eigs(c[::-1])
        with np.errstate(divide="ignore", invalid="ignore"):
            big = np.where(z == 0, complex(np.inf), 1.0 / np.where(z == 0, 1.0, z))
        return np.concatenate([big, roots])
    return np.concatenate([_companion_eigs(c), roots])


def _companion_eigs(c) -> np.ndarray:
    n = c.size - 1
    M = np.zeros((n, n))
    M[0, :] = -c[1:] / c[0]
    M[1:, :-1] = np.eye(n - 1)
    return np.linalg.eigvals(M).astype(complex)


def _interior_polynomial(p: SystemParams) -> np.ndarray:
    """Coefficients (highest first) of D (delta x + mu (1 - lam x) D) - x^3.

    Substituting y = (1 - lam x) D / x into y (delta + mu y) = x (1 - lam x)
    and clearing x^2 leaves (1 - lam x) times this polynomial.
    """
    P = np.polynomial.polynomial
    D = np.array([1.0, p.beta, p.alpha])
    one_minus = np.array([1.0, -p.lam])
    inner = P.polyadd(np.array([0.0, p.delta]), p.mu * P.polymul(one_minus, D))
    r = P.polysub(P.polymul(D, inner), np.array([0.0, 0.0, 0.0, 1.0]))
    return r[::-1]


def _newton(p: SystemParams, x: float, y: float, iters: int = 60):
    base = p.unrotated()
    for _ in range(iters):
        f = np.array(eval_field(base, (x, y)))
        scale = 1.0 + (x * x + y * y) ** 2
        if np.max(np.abs(f)) <= NEWTON_TOL * scale:
            break
        J = eval_jacobian(base, (x, y))
        try:
            step = np.linalg.solve(J, -f)
        except np.linalg.LinAlgError:
            break
        # damping: accept the largest step that does not increase the residual
        t = 1.0
        n0 = np.linalg.norm(f)
        for _ in range(30):
            xn, yn = x + t * step[0], y + t * step[1]
            if np.linalg.norm(eval_field(base, (xn, yn))) <= n0:
                break
            t *= 0.5
        if (xn, yn) == (x, y):
            break
        x, y = xn, yn
    return x, y


def classify(p: SystemParams, pt) -> Equilibrium:
    """Linearization-based type and index of a singular point."""
    J = eval_jacobian(p.unrotated(), pt)
    det = float(np.linalg.det(J))
    tr = float(np.trace(J))
    ev = np.linalg.eigvals(J).astype(complex)
    ev = tuple(sorted(ev, key=lambda z: (z.real, z.imag)))
    x, y = float(pt[0]), float(pt[1])
    quadrant = x > 0 and y > 0
    scale = 1.0 + float(np.sum(J * J))
    if abs(det) < DEGENERATE_DET * scale:
        kind = "saddle-node" if abs(tr) > DEGENERATE_DET * math.sqrt(scale) else "degenerate"
        try:
            idx = poincare_index(p, (x, y), _probe_radius(p, (x, y)), auto=True)
        except (ContourThroughSingularity, NonIntegerWinding):
            idx = 0
        return Equilibrium(PhasePoint(x, y), ev, kind, idx, quadrant, True, det, tr)
    if det < 0:
        return Equilibrium(PhasePoint(x, y), ev, "saddle", -1, quadrant, False, det, tr)
    if tr * tr - 4.0 * det >= 0:
        kind = "node"
    elif abs(ev[0].real) < CENTER_REL * abs(ev[0]):
        kind = "center-candidate"
    else:
        kind = "focus"
    return Equilibrium(PhasePoint(x, y), ev, kind, 1, quadrant, False, det, tr)


def _probe_radius(p, pt) -> float:
    return 1e-4 * (1.0 + math.hypot(pt[0], pt[1]))


def _candidates(p: SystemParams):
    pts = [(0.0, 0.0)]
    if p.mu > 0:
        pts.append((0.0, -p.delta / p.mu))
    if p.alpha != 0.0:
        for r in companion_roots([p.alpha, p.beta, 1.0]):
            if abs(r.imag) <= 1e-10 * (1 + abs(r)):
                pts.append((r.real, 0.0))
    elif p.beta != 0.0:
        pts.append((-1.0 / p.beta, 0.0))
    pts.append((1.0 / p.lam, 0.0))
    for r in companion_roots(_interior_polynomial(p)):
        if abs(r.imag) > 1e-7 * (1 + abs(r)):
            continue
        x = r.real
        if abs(x) < 1e-14:
            continue
        if not abs(x) < FAR:
            pts.append((x, math.inf))
            continue
        D = p.alpha * x * x + p.beta * x + 1.0
        pts.append((x, (1.0 - p.lam * x) * D / x))
    return pts


def find_finite(p: SystemParams) -> list[Equilibrium]:
    """All real finite singular points of the unrotated field, classified.

    Rotation by gamma does not move singular points, so gamma is ignored.
    Points are sorted by (x, y).
    """
    found: list[tuple[float, float]] = []
    for x, y in _candidates(p):
        if not math.hypot(x, y) < FAR:
            continue
        # axis points come from closed forms; only polish the generic ones
        if x != 0.0 and y != 0.0:
            x, y = _newton(p, x, y)
        scale = 1.0 + math.hypot(x, y)
        if any(math.hypot(x - a, y - b) <= DEDUP_RADIUS * scale for a, b in found):
            continue
        found.append((x, y))
    found.sort()
    return [classify(p, pt) for pt in found]


def far_candidates(p: SystemParams) -> int:
    """Number of singular points beyond FAR (or not finite)."""
    return sum(not math.hypot(x, y) < FAR for x, y in _candidates(p))


def interior_points(p: SystemParams) -> list[Equilibrium]:
    return [e for e in find_finite(p) if e.in_open_first_quadrant]


def interior_antisaddles(p: SystemParams) -> list[Equilibrium]:
    return [e for e in interior_points(p) if not e.degenerate and e.is_antisaddle]


# ---------------------------------------------------------------- winding

def _winding(fx: np.ndarray, fy: np.ndarray) -> float:
    ang = np.arctan2(fy, fx)
    d = np.diff(np.concatenate([ang, ang[:1]]))
    d = (d + np.pi) % (2 * np.pi) - np.pi
    return float(d.sum() / (2 * np.pi))


def winding_number(fn, center, radius: float, n: int = 512, tol: float = 1e-14) -> float:
    th = np.linspace(0.0, 2 * np.pi, n, endpoint=False)
    xs = center[0] + radius * np.cos(th)
    ys = center[1] + radius * np.sin(th)
    fx, fy = fn(xs, ys)
    mag = np.hypot(fx, fy)
    if np.any(mag <= tol * (1.0 + np.max(mag))):
        raise ContourThroughSingularity(f"field vanishes on the circle of radius {radius}")
    return _winding(fx, fy)


def poincare_index(p, center, radius: float, n: int = 256, auto: bool = False,
                   max_n: int = 1 << 16) -> int:
    """Winding number of the field around a circle, rounded to an integer."""
    from .vectorfield import eval_field_array

    def fn(xs, ys):
        out = eval_field_array(p, xs, ys)
        return out[:, 0], out[:, 1]

    while True:
        w = winding_number(fn, center, radius, n)
        if abs(w - round(w)) < 0.1:
            return int(round(w))
        if not auto or n >= max_n:
            raise NonIntegerWinding(w, n)
        n *= 4


# ---------------------------------------------------------------- infinity

def _monomials(p: SystemParams):
    """Coefficient dicts {(i, j): c} of x^i y^j for P and Q (gamma = 0)."""
    a, b, d, lam, mu = p.alpha, p.beta, p.delta, p.lam, p.mu
    P = {(1, 0): 1.0, (2, 0): b - lam, (3, 0): a - lam * b, (4, 0): -lam * a, (2, 1): -1.0}
    Q = {(0, 1): -d, (1, 1): -d * b, (2, 1): 1.0 - d * a, (0, 2): -mu,
         (1, 2): -mu * b, (2, 2): -mu * a}
    return P, Q


def _degree(*polys) -> int:
    return max(i + j for poly in polys for (i, j), c in poly.items() if c != 0.0)


def _chart_polys(p: SystemParams, chart: str):
    """Compactified field in chart 'u' (x = 1/z, y = u/z) or 'v' (x = v/z, y = 1/z).

    Returns dicts {(k, m): c} meaning c w^k z^m for the two components, where
    w is u or v.
    """
    P, Q = _monomials(p)
    n = _degree(P, Q)
    A: dict = {}
    B: dict = {}

    def add(dst, key, c):
        if c != 0.0:
            dst[key] = dst.get(key, 0.0) + c

    if chart == "u":
        # z^n P(1/z, u/z) = sum c u^j z^(n-i-j)
        for (i, j), c in Q.items():
            add(A, (j, n - i - j), c)
        for (i, j), c in P.items():
            add(A, (j + 1, n - i - j), -c)
            add(B, (j, n - i - j + 1), -c)
    else:
        for (i, j), c in P.items():
            add(A, (i, n - i - j), c)
        for (i, j), c in Q.items():
            add(A, (i + 1, n - i - j), -c)
            add(B, (i, n - i - j + 1), -c)
    return A, B, n


def _eval2(poly, w, z):
    out = 0.0
    for (k, m), c in poly.items():
        out = out + c * w ** k * z ** m
    return out


def _d2(poly, w, z, var):
    out = 0.0
    for (k, m), c in poly.items():
        if var == 0 and k > 0:
            out += c * k * w ** (k - 1) * z ** m
        elif var == 1 and m > 0:
            out += c * m * w ** k * z ** (m - 1)
    return out


def chart_equator_polynomial(p: SystemParams, chart: str) -> np.ndarray:
    """Coefficients (highest first) of the chart field's first component on z = 0."""
    A, _, _ = _chart_polys(p, chart)
    deg = max((k for (k, m) in A if m == 0), default=0)
    c = np.zeros(deg + 1)
    for (k, m), v in A.items():
        if m == 0:
            c[deg - k] += v
    return c


def _root_multiplicities(coeffs, tol=1e-7):
    roots = companion_roots(coeffs)
    real = sorted(r.real for r in roots if abs(r.imag) <= 1e-6 * (1 + abs(r)))
    groups: list[list[float]] = []
    for r in real:
        if groups and abs(r - np.mean(groups[-1])) <= tol * (1 + abs(r)) ** 1 * 1e3:
            groups[-1].append(r)
        else:
            groups.append([r])
    return [(float(np.mean(g)), len(g)) for g in groups]


def _chart_index(A, B, w0, others, radius=None) -> int:
    gaps = [abs(w0 - o) for o in others if abs(w0 - o) > 0]
    r = radius or min([1e-2] + [0.25 * g for g in gaps])

    def fn(ws, zs):
        return _eval2(A, ws, zs), _eval2(B, ws, zs)

    n = 512
    while True:
        w = winding_number(fn, (w0, 0.0), r, n)
        if abs(w - round(w)) < 0.1 or n > 1 << 16:
            return int(round(w))
        n *= 4


def _kind_from(index: int, eig) -> str:
    if index == 1:
        return "node"
    if index == -1:
        return "saddle"
    return "degenerate"


def find_infinite(p: SystemParams) -> list[InfiniteEquilibrium]:
    """Singular points on the equator of the Poincare sphere, one per direction.

    Types come from the index of the compactified field in the relevant
    chart plus its linearization; nothing is assumed from closed forms.
    """
    if p.mu == 0.0:
        raise DegenerateAtInfinity(
            "mu = 0: the saddle direction lam/mu escapes to the y-axis ends and merges with them")
    out: list[InfiniteEquilibrium] = []
    Au, Bu, _ = _chart_polys(p, "u")
    roots_u = _root_multiplicities(chart_equator_polynomial(p, "u"))
    for u0, mult in roots_u:
        idx = _chart_index(Au, Bu, u0, [r for r, _ in roots_u])
        J = np.array([[_d2(Au, u0, 0.0, 0), _d2(Au, u0, 0.0, 1)],
                      [_d2(Bu, u0, 0.0, 0), _d2(Bu, u0, 0.0, 1)]])
        eig = tuple(np.linalg.eigvals(J).astype(complex))
        out.append(InfiniteEquilibrium(float(u0) + 0.0, mult, _kind_from(idx, eig), idx, eig))
    Av, Bv, _ = _chart_polys(p, "v")
    cv = chart_equator_polynomial(p, "v")
    if abs(cv[-1]) <= 1e-14 * (1 + np.max(np.abs(cv))):
        roots_v = _root_multiplicities(cv)
        mult = sum(m for r, m in roots_v if abs(r) < 1e-6)
        idx = _chart_index(Av, Bv, 0.0, [r for r, _ in roots_v])
        J = np.array([[_d2(Av, 0.0, 0.0, 0), _d2(Av, 0.0, 0.0, 1)],
                      [_d2(Bv, 0.0, 0.0, 0), _d2(Bv, 0.0, 0.0, 1)]])
        eig = tuple(np.linalg.eigvals(J).astype(complex))
        out.append(InfiniteEquilibrium("y-axis ends", max(mult, 1), _kind_from(idx, eig), idx, eig))
    return out


# ---------------------------------------------------------------- audits

@dataclass
class IndexAudit:
    lhs: int  # N + N_f + N_c + N'
    rhs: int  # C + C' + 1
    passed: bool
    counts: dict
    alternation: dict = field(default_factory=dict)
    alternation_passed: bool = True


def _axis_alternation(p: SystemParams, finite: list[Equilibrium]) -> tuple[dict, bool]:
    """Saddle / anti-saddle alternation along the invariant axes.

    The x-axis is a component of Q = 0; it has multiple points where the
    other component (delta + mu y) D = x^2 meets it, i.e. at roots of
    delta D(x) - x^2. The alternation is checked between consecutive
    multiple points only. The y-axis (component of P = 0) has none.
    """
    report = {}
    ok = True
    cuts = sorted(r.real for r in companion_roots(
        [p.delta * p.alpha - 1.0, p.delta * p.beta, p.delta])
        if abs(r.imag) < 1e-12)
    on_x = sorted((e for e in finite if e.location.y == 0.0), key=lambda e: e.location.x)
    segments: list[list[Equilibrium]] = [[]]
    ci = 0
    for e in on_x:
        while ci < len(cuts) and cuts[ci] < e.location.x:
            segments.append([])
            ci += 1
        segments[-1].append(e)
    x_ok = all(_alternates(seg) for seg in segments)
    report["x-axis"] = [[(e.location.x, e.kind) for e in seg] for seg in segments if seg]
    on_y = sorted((e for e in finite if e.location.x == 0.0), key=lambda e: e.location.y)
    y_ok = _alternates(on_y)
    report["y-axis"] = [(e.location.y, e.kind) for e in on_y]
    ok = x_ok and y_ok
    return report, ok


def _alternates(seg: list[Equilibrium]) -> bool:
    signs = [e.index for e in seg]
    return all(a * b < 0 for a, b in zip(signs, signs[1:]))


def audit_index_theorems(p: SystemParams, finite=None, infinite=None) -> IndexAudit:
    """Check N + N_f + N_c + N' = C + C' + 1 and axis alternation.

    ``finite`` / ``infinite`` may be passed to audit a modified inventory.
    """
    finite = find_finite(p) if finite is None else finite
    infinite = find_infinite(p) if infinite is None else infinite
    if any(e.degenerate for e in finite):
        raise InconclusiveAudit("degenerate finite singular point present")
    if far_candidates(p):
        raise InconclusiveAudit(f"singular point beyond {FAR:g}: bifurcating from infinity")
    counts = {
        "N": sum(e.kind == "node" for e in finite),
        "N_f": sum(e.kind == "focus" for e in finite),
        "N_c": sum(e.kind == "center-candidate" for e in finite),
        "C": sum(e.kind == "saddle" for e in finite),
        "N_inf": sum(max(e.index, 0) for e in infinite),
        "C_inf": sum(max(-e.index, 0) for e in infinite),
    }
    lhs = counts["N"] + counts["N_f"] + counts["N_c"] + counts["N_inf"]
    rhs = counts["C"] + counts["C_inf"] + 1
    alt, alt_ok = _axis_alternation(p, finite)
    return IndexAudit(lhs, rhs, lhs == rhs, counts, alt, alt_ok)
