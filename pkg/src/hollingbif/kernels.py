"""Scalar hot loops: field evaluation and the Dormand-Prince integrator.

Everything here works on plain floats and flat float64 arrays so that the
same source runs under ``numba.njit`` or as ordinary Python (see ``_jit``).

Two vector fields are wired in, selected by an integer system id:

* ``SYS_HOLLING``: p = [alpha, beta, delta, lambda, mu, gamma]
* ``SYS_HOPF``:    p = [rho, scale, gamma], the Hopf normal form
  scale * (-y + x(rho - r^2), x + y(rho - r^2)) used as a test fixture.

Both are rotated by gamma as (P - gamma Q, Q + gamma P).
"""
import math

import numpy as np

from ._jit import jit

SYS_HOLLING = 0
SYS_HOPF = 1

# integrate() status codes
CONVERGED = 0
ESCAPED = 1
CROSSED = 2
MAX_TIME = 3
UNDERFLOW = 4
MAX_STEPS = 5

# Dormand-Prince 5(4) tableau
_C2, _C3, _C4, _C5 = 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0
_A21 = 1.0 / 5.0
_A31, _A32 = 3.0 / 40.0, 9.0 / 40.0
_A41, _A42, _A43 = 44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0
_A51, _A52, _A53, _A54 = 19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0
_A61, _A62, _A63, _A64, _A65 = (
    9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0)
_B1, _B3, _B4, _B5, _B6 = (
    35.0 / 384.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0)
_E1, _E3, _E4, _E5, _E6, _E7 = (
    71.0 / 57600.0, -71.0 / 16695.0, 71.0 / 1920.0, -17253.0 / 339200.0,
    22.0 / 525.0, -1.0 / 40.0)


@jit
def raw_field(sys_id, p, x, y):
    """Unrotated field (P, Q)."""
    if sys_id == SYS_HOLLING:
        a, b, d, lam, mu = p[0], p[1], p[2], p[3], p[4]
        D = a * x * x + b * x + 1.0
        P = x * ((1.0 - lam * x) * D - x * y)
        Q = -y * ((d + mu * y) * D - x * x)
    else:
        rho, sc = p[0], p[1]
        w = rho - x * x - y * y
        P = sc * (-y + x * w)
        Q = sc * (x + y * w)
    return P, Q


@jit
def gamma_of(sys_id, p):
    if sys_id == SYS_HOLLING:
        return p[5]
    return p[2]


@jit
def field(sys_id, p, x, y):
    P, Q = raw_field(sys_id, p, x, y)
    g = gamma_of(sys_id, p)
    if g == 0.0:
        return P, Q
    return P - g * Q, Q + g * P


@jit
def raw_jacobian(sys_id, p, x, y):
    if sys_id == SYS_HOLLING:
        a, b, d, lam, mu = p[0], p[1], p[2], p[3], p[4]
        D = a * x * x + b * x + 1.0
        Dx = 2.0 * a * x + b
        Px = (1.0 - lam * x) * D - x * y + x * (-lam * D + (1.0 - lam * x) * Dx - y)
        Py = -x * x
        Qx = -y * ((d + mu * y) * Dx - 2.0 * x)
        Qy = -((d + mu * y) * D - x * x) - y * mu * D
    else:
        rho, sc = p[0], p[1]
        w = rho - x * x - y * y
        Px = sc * (w - 2.0 * x * x)
        Py = sc * (-1.0 - 2.0 * x * y)
        Qx = sc * (1.0 - 2.0 * x * y)
        Qy = sc * (w - 2.0 * y * y)
    return Px, Py, Qx, Qy


@jit
def jacobian(sys_id, p, x, y):
    Px, Py, Qx, Qy = raw_jacobian(sys_id, p, x, y)
    g = gamma_of(sys_id, p)
    return Px - g * Qx, Py - g * Qy, Qx + g * Px, Qy + g * Py


@jit
def divergence(sys_id, p, x, y):
    fxx, fxy, fyx, fyy = jacobian(sys_id, p, x, y)
    return fxx + fyy


@jit
def param_derivative(sys_id, p, x, y, j):
    """d f / d p[j] for the rotated field."""
    g = gamma_of(sys_id, p)
    if sys_id == SYS_HOLLING:
        if j == 5:
            P, Q = raw_field(sys_id, p, x, y)
            return -Q, P
        a, b, d, lam, mu = p[0], p[1], p[2], p[3], p[4]
        D = a * x * x + b * x + 1.0
        if j == 0:
            Pj = x * (1.0 - lam * x) * x * x
            Qj = -y * (d + mu * y) * x * x
        elif j == 1:
            Pj = x * (1.0 - lam * x) * x
            Qj = -y * (d + mu * y) * x
        elif j == 2:
            Pj = 0.0
            Qj = -y * D
        elif j == 3:
            Pj = -x * x * D
            Qj = 0.0
        else:
            Pj = 0.0
            Qj = -y * y * D
    else:
        if j == 2:
            P, Q = raw_field(sys_id, p, x, y)
            return -Q, P
        rho, sc = p[0], p[1]
        w = rho - x * x - y * y
        if j == 0:
            Pj = sc * x
            Qj = sc * y
        else:
            Pj = -y + x * w
            Qj = x + y * w
    return Pj - g * Qj, Qj + g * Pj


@jit
def _rhs(sys_id, p, z, j, tdir, out):
    x = z[0]
    y = z[1]
    fx, fy = field(sys_id, p, x, y)
    out[0] = tdir * fx
    out[1] = tdir * fy
    out[2] = tdir * divergence(sys_id, p, x, y)
    if j >= 0:
        gx, gy = param_derivative(sys_id, p, x, y, j)
        out[3] = tdir * math.exp(-z[2]) * (fx * gy - fy * gx)
    else:
        out[3] = 0.0


@jit
def dp_step(sys_id, p, z, h, j, tdir, k, tmp, znew, rtol, atol, nerr):
    """One Dormand-Prince step of size h from z.

    k is a (7, 4) work array; k[0] must already hold f(z). On return
    znew holds the 5th-order solution and k[6] holds f(znew). Returns the
    scaled RMS error estimate over the first ``nerr`` components.
    """
    for i in range(4):
        tmp[i] = z[i] + h * _A21 * k[0, i]
    _rhs(sys_id, p, tmp, j, tdir, k[1])
    for i in range(4):
        tmp[i] = z[i] + h * (_A31 * k[0, i] + _A32 * k[1, i])
    _rhs(sys_id, p, tmp, j, tdir, k[2])
    for i in range(4):
        tmp[i] = z[i] + h * (_A41 * k[0, i] + _A42 * k[1, i] + _A43 * k[2, i])
    _rhs(sys_id, p, tmp, j, tdir, k[3])
    for i in range(4):
        tmp[i] = z[i] + h * (_A51 * k[0, i] + _A52 * k[1, i] + _A53 * k[2, i]
                             + _A54 * k[3, i])
    _rhs(sys_id, p, tmp, j, tdir, k[4])
    for i in range(4):
        tmp[i] = z[i] + h * (_A61 * k[0, i] + _A62 * k[1, i] + _A63 * k[2, i]
                             + _A64 * k[3, i] + _A65 * k[4, i])
    _rhs(sys_id, p, tmp, j, tdir, k[5])
    for i in range(4):
        znew[i] = z[i] + h * (_B1 * k[0, i] + _B3 * k[2, i] + _B4 * k[3, i]
                              + _B5 * k[4, i] + _B6 * k[5, i])
    _rhs(sys_id, p, znew, j, tdir, k[6])
    acc = 0.0
    for i in range(nerr):
        e = h * (_E1 * k[0, i] + _E3 * k[2, i] + _E4 * k[3, i] + _E5 * k[4, i]
                 + _E6 * k[5, i] + _E7 * k[6, i])
        sc = atol + rtol * max(abs(z[i]), abs(znew[i]))
        acc += (e / sc) ** 2
    return math.sqrt(acc / nerr)


@jit
def _gval(z, sec):
    # sec = [ax, ay, dx, dy]; normal is direction rotated by +90 degrees
    return -(z[0] - sec[0]) * sec[3] + (z[1] - sec[1]) * sec[2]


@jit
def _locate(sys_id, p, z0, g0, h, j, tdir, k0, k, tmp, zc, sec, rtol, atol, nerr, gtol):
    """Illinois iteration for the section crossing inside a step of size h.

    Each trial point is produced by a single fresh DP step from z0, so the
    crossing inherits the step's local accuracy. Returns the crossing time
    offset; the state is left in zc.
    """
    lo = 0.0
    glo = g0
    hi = h
    for i in range(4):
        k[0, i] = k0[i]
    dp_step(sys_id, p, z0, hi, j, tdir, k, tmp, zc, rtol, atol, nerr)
    ghi = _gval(zc, sec)
    side = 0
    tau = hi
    for _ in range(100):
        if ghi == glo:
            break
        tau = (lo * ghi - hi * glo) / (ghi - glo)
        if not (lo < tau < hi):
            tau = 0.5 * (lo + hi)
        for i in range(4):
            k[0, i] = k0[i]
        dp_step(sys_id, p, z0, tau, j, tdir, k, tmp, zc, rtol, atol, nerr)
        gm = _gval(zc, sec)
        if abs(gm) < gtol or (hi - lo) < 1e-15 * (1.0 + abs(h)):
            break
        if gm * glo > 0.0:
            lo = tau
            glo = gm
            if side == -1:
                ghi *= 0.5
            side = -1
        else:
            hi = tau
            ghi = gm
            if side == 1:
                glo *= 0.5
            side = 1
    return tau


@jit
def integrate(sys_id, p, z_init, t_max, box, sec, use_sec, orient, smin, smax,
              n_terminal, j, tdir, rtol, atol, nerr, conv_tol, max_steps,
              ev_t, ev_z, samp_t, samp_z, out_z):
    """Adaptive integration with section events.

    box = [xlo, xhi, ylo, yhi]. sec = [ax, ay, dx, dy] (unit direction).
    Crossings are accepted when the signed normal offset changes sign in the
    requested orientation (+1, -1, or 0 for both) and the section coordinate
    lies in [smin, smax]. Integration stops after ``n_terminal`` accepted
    crossings (0 = never). Samples are recorded while ``samp_t`` has room.

    Returns (status, t, n_events, n_samples, n_steps). Final state in out_z.
    """
    z = np.empty(4)
    znew = np.empty(4)
    tmp = np.empty(4)
    zc = np.empty(4)
    k = np.empty((7, 4))
    k0 = np.empty(4)
    for i in range(4):
        z[i] = z_init[i]
    t = 0.0
    nev = 0
    nsamp = 0
    cap_ev = ev_t.shape[0]
    cap_samp = samp_t.shape[0]
    if cap_samp > 0:
        samp_t[0] = 0.0
        for i in range(4):
            samp_z[0, i] = z[i]
        nsamp = 1

    _rhs(sys_id, p, z, j, tdir, k[0])
    fn = math.hypot(k[0, 0], k[0, 1])
    zn = math.hypot(z[0], z[1])
    if fn <= conv_tol * (1.0 + zn ** 4):
        for i in range(4):
            out_z[i] = z[i]
        return CONVERGED, t, nev, nsamp, 0

    g_prev = 0.0
    if use_sec:
        g_prev = _gval(z, sec)
        if abs(g_prev) < 1e-13 * (1.0 + zn):
            g_prev = 0.0

    h = min(t_max, 1e-2 * (1.0 + zn) / max(fn, 1e-300))
    h = max(h, 1e-8 * t_max)
    err_prev = 1e-4
    steps = 0
    status = MAX_TIME
    while t < t_max:
        if steps >= max_steps:
            status = MAX_STEPS
            break
        hmin = 1e-14 * max(1.0, abs(t))
        if h < hmin:
            status = UNDERFLOW
            break
        if t + h > t_max:
            h = t_max - t
        for i in range(4):
            k0[i] = k[0, i]
        err = dp_step(sys_id, p, z, h, j, tdir, k, tmp, znew, rtol, atol, nerr)
        if not (err <= 1.0):
            if err != err:
                fac = 0.1
            else:
                fac = max(0.2, 0.9 * err ** (-0.2))
            h *= fac
            for i in range(4):
                k[0, i] = k0[i]
            continue
        steps += 1
        hstep = h
        t_new = t + hstep
        # PI step-size controller
        fac = 0.9 * max(err, 1e-10) ** (-0.7 / 5.0) * err_prev ** (0.4 / 5.0)
        fac = min(5.0, max(0.2, fac))
        err_prev = max(err, 1e-4)
        h = hstep * fac

        crossed = False
        if use_sec:
            g_new = _gval(znew, sec)
            if g_prev != 0.0 and g_prev * g_new <= 0.0 and g_new != g_prev:
                direction = 1 if g_new > g_prev else -1
                if orient == 0 or direction == orient:
                    tau = _locate(sys_id, p, z, g_prev, hstep, j, tdir, k0, k, tmp,
                                  zc, sec, rtol, atol, nerr, 1e-12)
                    s = (zc[0] - sec[0]) * sec[2] + (zc[1] - sec[1]) * sec[3]
                    if smin <= s <= smax:
                        if nev < cap_ev:
                            ev_t[nev] = t + tau
                            for i in range(4):
                                ev_z[nev, i] = zc[i]
                        nev += 1
                        if n_terminal > 0 and nev >= n_terminal:
                            crossed = True
                            t = t + tau
                            for i in range(4):
                                z[i] = zc[i]
                    # restore k[0] = f(znew) clobbered by _locate
                    _rhs(sys_id, p, znew, j, tdir, k[6])
            g_prev = g_new
        if crossed:
            status = CROSSED
            if nsamp < cap_samp:
                samp_t[nsamp] = t
                for i in range(4):
                    samp_z[nsamp, i] = z[i]
                nsamp += 1
            break

        t = t_new
        for i in range(4):
            z[i] = znew[i]
            k[0, i] = k[6, i]
        if nsamp < cap_samp:
            samp_t[nsamp] = t
            for i in range(4):
                samp_z[nsamp, i] = z[i]
            nsamp += 1

        if z[0] < box[0] or z[0] > box[1] or z[1] < box[2] or z[1] > box[3]:
            status = ESCAPED
            break
        fn = math.hypot(k[0, 0], k[0, 1])
        if fn <= conv_tol * (1.0 + math.hypot(z[0], z[1]) ** 4):
            status = CONVERGED
            break
        if not (z[0] == z[0] and z[1] == z[1]):
            status = UNDERFLOW
            break

    for i in range(4):
        out_z[i] = z[i]
    return status, t, nev, nsamp, steps


@jit
def field_grid(sys_id, p, xs, ys, out):
    """Evaluate the field on paired coordinate arrays; out has shape (n, 2)."""
    for i in range(xs.shape[0]):
        fx, fy = field(sys_id, p, xs[i], ys[i])
        out[i, 0] = fx
        out[i, 1] = fy
