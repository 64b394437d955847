"""Compiled inner loops: Weierstrass p, Magnus transfer integration, Farey search.

Everything here is a pure function of its arguments so it can run from many
threads at once (``nogil=True``).  Status codes are returned instead of raising,
the Python layer translates them into exceptions.
"""

import math

import numpy as np
from numba import njit

# integrator status codes
OK = 0
TOO_CLOSE = 1
STEP_UNDERFLOW = 2
MAX_STEPS = 3

# search verdict codes
V_QUASIFUCHSIAN = 0
V_NOT_DISCRETE = 1
V_INCONCLUSIVE = 2

_S15 = math.sqrt(15.0)
_GAUSS = (0.5 - _S15 / 10.0, 0.5, 0.5 + _S15 / 10.0)


@njit(cache=True, nogil=True)
def reduce_to_cell(z, tau):
    """Subtract the lattice point of Z + tau Z closest to ``z``."""
    v = z.imag / tau.imag
    u = z.real - v * tau.real
    w = z - (np.floor(u + 0.5) + np.floor(v + 0.5) * tau)
    best = w
    best_abs = abs(w)
    for m in range(-1, 2):
        for n in range(-1, 2):
            cand = w - (m + n * tau)
            a = abs(cand)
            if a < best_abs - 1e-15:
                best = cand
                best_abs = a
    return best


@njit(cache=True, nogil=True)
def wp_laurent(z, coef):
    """p(z) and p'(z) from the Laurent series; ``z`` must be inside the disc of convergence."""
    z2 = z * z
    s = 0j
    ds = 0j
    # p(z) = 1/z^2 + sum_{k>=2} c_k z^(2k-2)
    for i in range(coef.shape[0] - 1, -1, -1):
        k = i + 2
        s = s * z2 + coef[i]
        ds = ds * z2 + (2 * k - 2) * coef[i]
    p = 1.0 / z2 + s * z2
    dp = -2.0 / (z2 * z) + ds * z
    return p, dp


@njit(cache=True, nogil=True)
def wp_eval(z, tau, coef, g2, g3, r_series):
    """Return (p, p', status) for the lattice Z + tau Z.

    Points outside the series disc are halved until they fit and the duplication
    formula is applied on the way back.
    """
    w = reduce_to_cell(z, tau)
    halvings = 0
    while abs(w) > r_series:
        w = w * 0.5
        halvings += 1
    p, dp = wp_laurent(w, coef)
    for _ in range(halvings):
        # p(2w) = -2p + p''^2 / (4 p'^2) with p'' = 6p^2 - g2/2, p''' = 12 p p'
        ddp = 6.0 * p * p - 0.5 * g2
        dddp = 12.0 * p * dp
        p2 = -2.0 * p + ddp * ddp / (4.0 * dp * dp)
        dp2 = -dp + ddp * dddp / (4.0 * dp * dp) - ddp ** 3 / (4.0 * dp ** 3)
        p = p2
        dp = dp2
    return p, dp


@njit(cache=True, nogil=True)
def _q_at(z, c, theta, tau, coef, g2, g3, r_series, eps_z):
    w = reduce_to_cell(z, tau)
    if abs(w) < eps_z:
        return 0j, False
    p, _ = wp_eval(z, tau, coef, g2, g3, r_series)
    return theta * p + c, True


@njit(cache=True, nogil=True)
def _expm_traceless(w00, w01, w10):
    # exp of [[w00, w01], [w10, -w00]] = cosh(mu) I + sinh(mu)/mu W, mu^2 = -det W
    mu2 = w00 * w00 + w01 * w10
    if abs(mu2) < 1e-6:
        ch = 1.0 + mu2 / 2.0 + mu2 * mu2 / 24.0 + mu2 * mu2 * mu2 / 720.0
        sh = 1.0 + mu2 / 6.0 + mu2 * mu2 / 120.0 + mu2 * mu2 * mu2 / 5040.0
    else:
        mu = np.sqrt(mu2)
        ch = np.cosh(mu)
        sh = np.sinh(mu) / mu
    return ch + sh * w00, sh * w01, sh * w10, ch - sh * w00


@njit(cache=True, nogil=True)
def _comm(a00, a01, a10, b00, b01, b10):
    # commutator of traceless matrices [[a00,a01],[a10,-a00]] and [[b00,..]]
    c00 = a01 * b10 - a10 * b01
    c01 = 2.0 * (a00 * b01 - a01 * b00)
    c10 = 2.0 * (a10 * b00 - a00 * b10)
    return c00, c01, c10


@njit(cache=True, nogil=True)
def magnus6_step(z, dz, c, theta, tau, coef, g2, g3, r_series, eps_z):
    """One sixth-order Magnus step of u'' = -(q/2) u from z to z + dz.

    Returns the 2x2 propagator entries (e00, e01, e10, e11) and a flag that is
    False when a node came within ``eps_z`` of the lattice.
    """
    ok = True
    q1, f1 = _q_at(z + _GAUSS[0] * dz, c, theta, tau, coef, g2, g3, r_series, eps_z)
    q2, f2 = _q_at(z + _GAUSS[1] * dz, c, theta, tau, coef, g2, g3, r_series, eps_z)
    q3, f3 = _q_at(z + _GAUSS[2] * dz, c, theta, tau, coef, g2, g3, r_series, eps_z)
    if not (f1 and f2 and f3):
        ok = False
    # A(z) = [[0, 1], [-q/2, 0]] scaled by dz; all traceless with zero diagonal
    b1 = -0.5 * q1
    b2 = -0.5 * q2
    b3 = -0.5 * q3
    # alpha1 = dz A2, alpha2 = sqrt15/3 dz (A3 - A1), alpha3 = 10/3 dz (A3 - 2A2 + A1)
    a1_00, a1_01, a1_10 = 0j, dz, dz * b2
    a2_00, a2_01, a2_10 = 0j, 0j, _S15 / 3.0 * dz * (b3 - b1)
    a3_00, a3_01, a3_10 = 0j, 0j, 10.0 / 3.0 * dz * (b3 - 2.0 * b2 + b1)
    c1_00, c1_01, c1_10 = _comm(a1_00, a1_01, a1_10, a2_00, a2_01, a2_10)
    t00 = 2.0 * a3_00 + c1_00
    t01 = 2.0 * a3_01 + c1_01
    t10 = 2.0 * a3_10 + c1_10
    c2_00, c2_01, c2_10 = _comm(a1_00, a1_01, a1_10, t00, t01, t10)
    c2_00 *= -1.0 / 60.0
    c2_01 *= -1.0 / 60.0
    c2_10 *= -1.0 / 60.0
    l00 = -20.0 * a1_00 - a3_00 + c1_00
    l01 = -20.0 * a1_01 - a3_01 + c1_01
    l10 = -20.0 * a1_10 - a3_10 + c1_10
    r00 = a2_00 + c2_00
    r01 = a2_01 + c2_01
    r10 = a2_10 + c2_10
    k00, k01, k10 = _comm(l00, l01, l10, r00, r01, r10)
    w00 = a1_00 + a3_00 / 12.0 + k00 / 240.0
    w01 = a1_01 + a3_01 / 12.0 + k01 / 240.0
    w10 = a1_10 + a3_10 / 12.0 + k10 / 240.0
    e00, e01, e10, e11 = _expm_traceless(w00, w01, w10)
    return e00, e01, e10, e11, ok


@njit(cache=True, nogil=True)
def _mul(a00, a01, a10, a11, b00, b01, b10, b11):
    return (a00 * b00 + a01 * b10, a00 * b01 + a01 * b11,
            a10 * b00 + a11 * b10, a10 * b01 + a11 * b11)


@njit(cache=True, nogil=True)
def transfer_adaptive(vertices, c, theta, tau, coef, g2, g3, r_series, eps_z,
                      tol, h_min, max_steps, plan):
    """Adaptive transfer matrix along a polyline.

    Step control by step doubling on each local propagator.  Accepted step sizes,
    as fractions of their segment, are written to ``plan`` (with the segment
    index) so the exact same nodes can be replayed.

    Returns (m00, m01, m10, m11, status, n_steps, err_sum).
    """
    m00, m01, m10, m11 = 1.0 + 0j, 0j, 0j, 1.0 + 0j
    n_steps = 0
    err_sum = 0.0
    for seg in range(vertices.shape[0] - 1):
        a = vertices[seg]
        d = vertices[seg + 1] - a
        length = abs(d)
        if length == 0.0:
            continue
        s = 0.0
        h = min(1.0, 0.05 / length)
        while s < 1.0:
            if s + h > 1.0:
                h = 1.0 - s
            z = a + s * d
            f00, f01, f10, f11, ok1 = magnus6_step(z, h * d, c, theta, tau, coef, g2, g3, r_series, eps_z)
            h00, h01, h10, h11, ok2 = magnus6_step(z, 0.5 * h * d, c, theta, tau, coef, g2, g3, r_series, eps_z)
            k00, k01, k10, k11, ok3 = magnus6_step(z + 0.5 * h * d, 0.5 * h * d, c, theta, tau, coef, g2, g3,
                                                  r_series, eps_z)
            if not (ok1 and ok2 and ok3):
                return m00, m01, m10, m11, TOO_CLOSE, n_steps, err_sum
            e00, e01, e10, e11 = _mul(k00, k01, k10, k11, h00, h01, h10, h11)
            scale = max(1.0, max(max(abs(e00), abs(e01)), max(abs(e10), abs(e11))))
            err = max(max(abs(e00 - f00), abs(e01 - f01)), max(abs(e10 - f10), abs(e11 - f11))) / scale
            if err <= tol or h * length <= h_min:
                if err > tol:
                    return m00, m01, m10, m11, STEP_UNDERFLOW, n_steps, err_sum
                m00, m01, m10, m11 = _mul(e00, e01, e10, e11, m00, m01, m10, m11)
                if n_steps < plan.shape[0]:
                    plan[n_steps, 0] = seg
                    plan[n_steps, 1] = s
                    plan[n_steps, 2] = h
                n_steps += 1
                if n_steps >= max_steps:
                    return m00, m01, m10, m11, MAX_STEPS, n_steps, err_sum
                err_sum += err
                s += h
                if err == 0.0:
                    fac = 4.0
                else:
                    fac = min(4.0, max(0.2, 0.9 * (tol / err) ** (1.0 / 7.0)))
                h = h * fac
            else:
                h = h * max(0.2, 0.9 * (tol / err) ** (1.0 / 7.0))
    return m00, m01, m10, m11, OK, n_steps, err_sum


@njit(cache=True, nogil=True)
def transfer_planned(vertices, c, theta, tau, coef, g2, g3, r_series, eps_z, plan, n_steps, subdivide):
    """Replay a recorded step plan, each step split into ``subdivide`` equal pieces.

    Returns (m00, m01, m10, m11, status).
    """
    m00, m01, m10, m11 = 1.0 + 0j, 0j, 0j, 1.0 + 0j
    for i in range(n_steps):
        seg = int(plan[i, 0])
        a = vertices[seg]
        d = vertices[seg + 1] - a
        s = plan[i, 1]
        h = plan[i, 2] / subdivide
        for j in range(subdivide):
            z = a + (s + j * h) * d
            e00, e01, e10, e11, ok = magnus6_step(z, h * d, c, theta, tau, coef, g2, g3, r_series, eps_z)
            if not ok:
                return m00, m01, m10, m11, TOO_CLOSE
            m00, m01, m10, m11 = _mul(e00, e01, e10, e11, m00, m01, m10, m11)
    return m00, m01, m10, m11, OK


@njit(cache=True, nogil=True)
def loop_traces(path_a, path_b, c, theta, tau, coef, g2, g3, r_series, eps_z, tol, h_min, max_steps):
    """Traces (x, y, z) of the monodromies along two loops, plus status and error sum."""
    plan = np.empty((0, 3))
    a00, a01, a10, a11, st, na, ea = transfer_adaptive(path_a, c, theta, tau, coef, g2, g3, r_series, eps_z,
                                                      tol, h_min, max_steps, plan)
    if st != OK:
        return 0j, 0j, 0j, st, ea
    b00, b01, b10, b11, st, nb, eb = transfer_adaptive(path_b, c, theta, tau, coef, g2, g3, r_series, eps_z,
                                                      tol, h_min, max_steps, plan)
    if st != OK:
        return 0j, 0j, 0j, st, ea + eb
    x = a00 + a11
    y = b00 + b11
    z = a00 * b00 + a01 * b10 + a10 * b01 + a11 * b11
    return x, y, z, OK, ea + eb


@njit(cache=True, nogil=True)
def grid_traces(cs, out, status, errs, path_a, path_b, theta, tau, coef, g2, g3, r_series, eps_z, tol, h_min,
                max_steps):
    for i in range(cs.shape[0]):
        x, y, z, st, e = loop_traces(path_a, path_b, cs[i], theta, tau, coef, g2, g3, r_series, eps_z, tol,
                                     h_min, max_steps)
        out[i, 0] = x
        out[i, 1] = y
        out[i, 2] = z
        status[i] = st
        errs[i] = e


# ----------------------------------------------------------------------------
# Farey tree search


@njit(cache=True, nogil=True)
def _in_bad_region(t, fatten):
    return abs(t.imag) <= fatten and abs(t.real) <= 2.0 + fatten


@njit(cache=True, nogil=True)
def _new_slope(p1, q1, p2, q2, p3, q3):
    # the neighbour of slopes 1,2 other than slope 3: s1 + s2 or s1 - s2
    pa, qa = p1 + p2, q1 + q2
    if (pa == p3 and qa == q3) or (pa == -p3 and qa == -q3):
        pa, qa = p1 - p2, q1 - q2
    if qa < 0 or (qa == 0 and pa < 0):
        pa, qa = -pa, -qa
    return pa, qa


@njit(cache=True, nogil=True)
def bowditch_search(x, y, z, max_depth, growth_bound, fatten, node_budget):
    """Depth-first search of the Farey tree of simple-curve traces.

    A branch is closed once its newest trace dominates the two older ones, the
    older two have modulus above 2 and the newest exceeds ``growth_bound``; from
    then on every descendant trace strictly grows, so none can reach [-2, 2].

    Returns (verdict, max depth reached, nodes visited, witness p, witness q).
    """
    # root superbase slopes: x <-> 0/1, y <-> 1/0, z <-> 1/1
    if _in_bad_region(x, fatten):
        return V_NOT_DISCRETE, 0, 1, 0, 1
    if _in_bad_region(y, fatten):
        return V_NOT_DISCRETE, 0, 1, 1, 0
    if _in_bad_region(z, fatten):
        return V_NOT_DISCRETE, 0, 1, 1, 1
    cap = 3 * (max_depth + 2) + 8
    # stack entries: older pair (u, v), newest w, their slopes, depth
    su = np.empty(cap, dtype=np.complex128)
    sv = np.empty(cap, dtype=np.complex128)
    sw = np.empty(cap, dtype=np.complex128)
    sl = np.empty((cap, 6), dtype=np.int64)
    sd = np.empty(cap, dtype=np.int64)
    top = 0
    # the three directed edges out of the root; each flips one entry
    w = x * y - z
    pn, qn = _new_slope(0, 1, 1, 0, 1, 1)
    su[top] = x; sv[top] = y; sw[top] = w
    sl[top, 0] = 0; sl[top, 1] = 1; sl[top, 2] = 1; sl[top, 3] = 0; sl[top, 4] = pn; sl[top, 5] = qn
    sd[top] = 1
    top += 1
    w = y * z - x
    pn, qn = _new_slope(1, 0, 1, 1, 0, 1)
    su[top] = y; sv[top] = z; sw[top] = w
    sl[top, 0] = 1; sl[top, 1] = 0; sl[top, 2] = 1; sl[top, 3] = 1; sl[top, 4] = pn; sl[top, 5] = qn
    sd[top] = 1
    top += 1
    w = x * z - y
    pn, qn = _new_slope(0, 1, 1, 1, 1, 0)
    su[top] = x; sv[top] = z; sw[top] = w
    sl[top, 0] = 0; sl[top, 1] = 1; sl[top, 2] = 1; sl[top, 3] = 1; sl[top, 4] = pn; sl[top, 5] = qn
    sd[top] = 1
    top += 1
    nodes = 1
    deepest = 0
    open_branch = False
    while top > 0:
        top -= 1
        u = su[top]; v = sv[top]; w = sw[top]
        pu = sl[top, 0]; qu = sl[top, 1]; pv = sl[top, 2]; qv = sl[top, 3]; pw = sl[top, 4]; qw = sl[top, 5]
        depth = sd[top]
        nodes += 1
        if depth > deepest:
            deepest = depth
        if _in_bad_region(w, fatten):
            return V_NOT_DISCRETE, deepest, nodes, pw, qw
        aw = abs(w)
        if aw >= abs(u) and aw >= abs(v) and abs(u) > 2.0 + fatten and abs(v) > 2.0 + fatten \
                and aw >= growth_bound:
            continue
        if depth >= max_depth or nodes >= node_budget:
            open_branch = True
            if nodes >= node_budget:
                break
            continue
        # children: flip u (keep v, w) and flip v (keep u, w); push larger first so smaller is explored first
        cu = v * w - u
        cv = u * w - v
        p1, q1 = _new_slope(pv, qv, pw, qw, pu, qu)
        p2, q2 = _new_slope(pu, qu, pw, qw, pv, qv)
        if abs(cu) <= abs(cv):
            first = 1
        else:
            first = 0
        for k in range(2):
            pick_u = (k == 0 and first == 0) or (k == 1 and first == 1)
            if pick_u:
                su[top] = v; sv[top] = w; sw[top] = cu
                sl[top, 0] = pv; sl[top, 1] = qv; sl[top, 2] = pw; sl[top, 3] = qw; sl[top, 4] = p1
                sl[top, 5] = q1
            else:
                su[top] = u; sv[top] = w; sw[top] = cv
                sl[top, 0] = pu; sl[top, 1] = qu; sl[top, 2] = pw; sl[top, 3] = qw; sl[top, 4] = p2
                sl[top, 5] = q2
            sd[top] = depth + 1
            top += 1
    if open_branch or top > 0:
        return V_INCONCLUSIVE, deepest, nodes, 0, 0
    return V_QUASIFUCHSIAN, deepest, nodes, 0, 0


@njit(cache=True, nogil=True)
def grid_search(traces, verdicts, depths, max_depth, growth_bound, fatten, node_budget):
    for i in range(traces.shape[0]):
        v, d, _, _, _ = bowditch_search(traces[i, 0], traces[i, 1], traces[i, 2], max_depth, growth_bound,
                                        fatten, node_budget)
        verdicts[i] = v
        depths[i] = d
