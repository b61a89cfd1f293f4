"""Hot numeric kernels.

Everything here is scalar-loop code over float64 arrays so it compiles under
numba and still runs (slowly) as plain Python when numba is disabled. The
public modules wrap these with validation and exceptions; kernels report
failures through integer status codes.
"""
import math

import numpy as np

from ._accel import jit

# delay kernel families
KIND_CONSTANT = 0
KIND_PLATEAU = 1
KIND_QUADRATIC = 2

# integrator status codes
OK = 0
HISTORY_UNDERRUN = 1
NONFINITE = 2
DELAY_OVERRUN = 3

# sentinels for sampled Lyapunov values
V_NEAR_ORIGIN = -1
V_INDETERMINATE = -2

_GL_X = np.array([0.5 - 0.5 * math.sqrt(0.6), 0.5, 0.5 + 0.5 * math.sqrt(0.6)])
_GL_W = np.array([5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0])


# ---------------------------------------------------------------- hermite

@jit
def hermite(y0, y1, d0, d1, h, th):
    th2 = th * th
    th3 = th2 * th
    return ((2.0 * th3 - 3.0 * th2 + 1.0) * y0 + (th3 - 2.0 * th2 + th) * h * d0
            + (-2.0 * th3 + 3.0 * th2) * y1 + (th3 - th2) * h * d1)


@jit
def hermite_deriv(y0, y1, d0, d1, h, th):
    th2 = th * th
    return ((6.0 * th2 - 6.0 * th) * y0 / h + (3.0 * th2 - 4.0 * th + 1.0) * d0
            + (-6.0 * th2 + 6.0 * th) * y1 / h + (3.0 * th2 - 2.0 * th) * d1)


@jit
def grid_locate(s, s0, h, n):
    """Cell index and local coordinate of ``s`` on the grid ``s0 + k*h``."""
    u = (s - s0) / h
    j = int(math.floor(u))
    if j < 0:
        j = 0
    if j > n - 2:
        j = n - 2
    th = u - j
    return j, th


@jit
def hermite_eval_grid(values, slopes, s0, h, s):
    n = values.shape[0]
    j, th = grid_locate(s, s0, h, n)
    if abs(th) <= 1e-12:
        return values[j]
    if abs(th - 1.0) <= 1e-12:
        return values[j + 1]
    return hermite(values[j], values[j + 1], slopes[j], slopes[j + 1], h, th)


@jit
def hermite_eval_many(values, slopes, s0, h, pts, out_v, out_d):
    n = values.shape[0]
    for q in range(pts.shape[0]):
        j, th = grid_locate(pts[q], s0, h, n)
        if abs(th) <= 1e-12:
            out_v[q] = values[j]
            out_d[q] = slopes[j]
        elif abs(th - 1.0) <= 1e-12:
            out_v[q] = values[j + 1]
            out_d[q] = slopes[j + 1]
        else:
            out_v[q] = hermite(values[j], values[j + 1], slopes[j], slopes[j + 1], h, th)
            out_d[q] = hermite_deriv(values[j], values[j + 1], slopes[j], slopes[j + 1], h, th)


# ---------------------------------------------------------------- alpha, f

@jit
def alpha_eval(x, kind, kpar):
    # kpar = (alpha0, alpha1, alpha2, eps, width, c0, c2)
    a1 = kpar[1]
    a2 = kpar[2]
    if kind == KIND_CONSTANT:
        v = kpar[0]
    elif kind == KIND_PLATEAU:
        ax = abs(x)
        if ax < kpar[3]:
            v = kpar[0]
        else:
            z = (ax - kpar[3]) / kpar[4]
            v = kpar[0] + (a2 - kpar[0]) * (1.0 - math.exp(-z * z))
    else:
        v = kpar[5] + kpar[6] * x * x
    if v < a1:
        v = a1
    if v > a2:
        v = a2
    return v


@jit
def f_eval(fpar, i, u, v):
    # f(u, v) = a u + e u^3 + b v + g tanh(c v)
    return (fpar[i, 0] * u + fpar[i, 1] * u * u * u + fpar[i, 2] * v
            + fpar[i, 3] * math.tanh(fpar[i, 4] * v))


# ---------------------------------------------------------------- quadrature

@jit
def cell_integrals(values, slopes, h, kind, kpar, gx, gw):
    """Three-point Gauss-Legendre integral of alpha(phi) on every grid cell."""
    n = values.shape[0]
    out = np.empty(n - 1)
    for j in range(n - 1):
        acc = 0.0
        for q in range(3):
            x = hermite(values[j], values[j + 1], slopes[j], slopes[j + 1], h, gx[q])
            acc += gw[q] * alpha_eval(x, kind, kpar)
        out[j] = h * acc
    return out


@jit
def partial_cell_integral(y0, y1, d0, d1, h, th0, kind, kpar, gx, gw):
    """Integral of alpha(phi) from local coordinate ``th0`` to the right end of a cell."""
    span = 1.0 - th0
    if span <= 0.0:
        return 0.0
    acc = 0.0
    for q in range(3):
        x = hermite(y0, y1, d0, d1, h, th0 + span * gx[q])
        acc += gw[q] * alpha_eval(x, kind, kpar)
    return h * span * acc


@jit
def solve_in_cell(y0, y1, d0, d1, h, target, kind, kpar, gx, gw, tol):
    """Local coordinate ``th`` with partial_cell_integral(th) == target.

    The partial integral decreases in ``th`` from its full-cell value to 0.
    Bisection keeps the bracket, secant steps accelerate.
    """
    lo = 0.0
    hi = 1.0
    flo = partial_cell_integral(y0, y1, d0, d1, h, lo, kind, kpar, gx, gw) - target
    fhi = -target
    # root on a node: rounding can leave no sign change inside the cell
    if flo <= 0.0:
        return 0.0
    if fhi >= 0.0:
        return 1.0
    th = 0.5
    for it in range(200):
        if fhi != flo:
            th = lo - flo * (hi - lo) / (fhi - flo)
        if not (lo < th < hi) or it % 3 == 2:
            th = 0.5 * (lo + hi)
        fm = partial_cell_integral(y0, y1, d0, d1, h, th, kind, kpar, gx, gw) - target
        if fm == 0.0:
            return th
        if (fm > 0.0) == (flo > 0.0):
            lo = th
            flo = fm
        else:
            hi = th
            fhi = fm
        if (hi - lo) * h <= tol:
            break
    return 0.5 * (lo + hi)


@jit
def threshold_delay(values, slopes, h, kind, kpar, gx, gw, tol):
    """Root of  int_{-tau}^0 alpha(phi) = 1  on a uniform segment grid.

    Returns (tau, status); status 1 when the integral over the whole
    segment stays below one.
    """
    n = values.shape[0]
    cells = cell_integrals(values, slopes, h, kind, kpar, gx, gw)
    acc = 0.0
    for j in range(n - 2, -1, -1):
        c = cells[j]
        if acc + c >= 1.0:
            th = solve_in_cell(values[j], values[j + 1], slopes[j], slopes[j + 1],
                               h, 1.0 - acc, kind, kpar, gx, gw, tol)
            tau = (n - 1 - j - th) * h
            return tau, 0
        acc += c
    # round-off slack at the far end
    if acc >= 1.0 - 1e-12:
        return (n - 1) * h, 0
    return (n - 1) * h, 1


# ---------------------------------------------------------------- sign changes

@jit
def count_alternations(seq, zeta):
    """Strict sign alternations of ``seq``, entries with |v| <= zeta skipped.

    Returns (count, number of entries carrying a sign).
    """
    count = 0
    signed = 0
    last = 0
    for k in range(seq.shape[0]):
        v = seq[k]
        if v > zeta:
            s = 1
        elif v < -zeta:
            s = -1
        else:
            continue
        signed += 1
        if last != 0 and s != last:
            count += 1
        last = s
    return count, signed


@jit
def parity_value(sc, delta):
    """V+ (delta = 1, even) or V- (delta = -1, odd) from a sign-change count."""
    if delta == 1:
        return sc if sc % 2 == 0 else sc + 1
    return sc if sc % 2 == 1 else sc + 1


# ---------------------------------------------------------------- integrator

@jit
def _history_eval(xh, dLh, dRh, j, th, dt):
    if th <= 0.0:
        return xh[j]
    return hermite(xh[j], xh[j + 1], dRh[j], dLh[j + 1], dt, th)


@jit
def _locate_delay(Ah, dAh, target, jhint, kmax, dt):
    """Cell j and coordinate th with A(t_j + th*dt) == target.

    Returns (j, th, status).
    """
    j = jhint
    if j > kmax - 1:
        j = kmax - 1
    if j < 0:
        j = 0
    while j > 0 and Ah[j] > target:
        j -= 1
    if Ah[j] > target:
        # tau == r up to the rounding of the summed cell integrals
        if j == 0 and Ah[0] - target <= 1e-12 * (1.0 + abs(target)):
            return 0, 0.0, OK
        return j, 0.0, HISTORY_UNDERRUN
    while j + 1 <= kmax and Ah[j + 1] < target:
        j += 1
    if j + 1 > kmax:
        return j, 0.0, DELAY_OVERRUN
    a0 = Ah[j]
    a1 = Ah[j + 1]
    g0 = dAh[j]
    g1 = dAh[j + 1]
    if a1 == a0:
        return j, 0.0, OK
    lo = 0.0
    hi = 1.0
    th = (target - a0) / (a1 - a0)
    scale = 1e-15 * (1.0 + abs(target))
    for it in range(60):
        val = hermite(a0, a1, g0, g1, dt, th) - target
        if abs(val) <= scale:
            break
        if val > 0.0:
            hi = th
        else:
            lo = th
        der = hermite_deriv(a0, a1, g0, g1, dt, th) * dt
        nxt = th - val / der if der > 0.0 else 0.5 * (lo + hi)
        if not (lo < nxt < hi):
            nxt = 0.5 * (lo + hi)
        if hi - lo < 1e-16:
            break
        th = nxt
    return j, th, OK


@jit
def _rhs(y, out, fpar, N, kind, kpar, xh, dLh, dRh, Ah, dAh, jhint, kmax, dt):
    """Right-hand side at state ``y`` = (x^0..x^N, A); returns (j, th, status)."""
    target = y[N + 1] - 1.0
    j, th, status = _locate_delay(Ah, dAh, target, jhint, kmax, dt)
    if status != OK:
        return j, th, status
    xd = _history_eval(xh, dLh, dRh, j, th, dt)
    for i in range(N):
        out[i] = f_eval(fpar, i, y[i], y[i + 1])
    out[N] = f_eval(fpar, N, y[N], xd)
    out[N + 1] = alpha_eval(y[0], kind, kpar)
    return j, th, OK


@jit
def integrate_kernel(xh, dLh, dRh, Ah, dAh, states, derivs, eta, k0, nsteps, dt,
                     fpar, N, kind, kpar):
    """Classical RK4 with Hermite dense history.

    The cumulative kernel integral A(t) = int alpha(x^0) is carried as an
    extra state; the delayed argument at any stage is the point where the
    stored A equals A_stage - 1, which is the threshold condition.

    History arrays are indexed from t = -r (index 0); index k0 is t = 0 and
    must be filled on entry. Returns (status, completed_steps).
    """
    dim = N + 2
    y = np.empty(dim)
    ys = np.empty(dim)
    k1 = np.empty(dim)
    k2 = np.empty(dim)
    k3 = np.empty(dim)
    k4 = np.empty(dim)
    for i in range(N + 1):
        y[i] = states[0, i]
    y[N + 1] = Ah[k0]
    j, th, status = _rhs(y, k1, fpar, N, kind, kpar, xh, dLh, dRh, Ah, dAh, k0 - 1, k0, dt)
    if status != OK:
        return status, 0
    jhint = j
    for i in range(N + 1):
        derivs[0, i] = k1[i]
    dRh[k0] = k1[0]
    eta[0] = (j - k0 + th) * dt
    for m in range(nsteps):
        kk = k0 + m
        for i in range(N + 1):
            y[i] = states[m, i]
            k1[i] = derivs[m, i]
        y[N + 1] = Ah[kk]
        k1[N + 1] = dAh[kk]
        for i in range(dim):
            ys[i] = y[i] + 0.5 * dt * k1[i]
        j, th, status = _rhs(ys, k2, fpar, N, kind, kpar, xh, dLh, dRh, Ah, dAh, jhint, kk, dt)
        if status != OK:
            return status, m
        for i in range(dim):
            ys[i] = y[i] + 0.5 * dt * k2[i]
        j, th, status = _rhs(ys, k3, fpar, N, kind, kpar, xh, dLh, dRh, Ah, dAh, j, kk, dt)
        if status != OK:
            return status, m
        for i in range(dim):
            ys[i] = y[i] + dt * k3[i]
        j, th, status = _rhs(ys, k4, fpar, N, kind, kpar, xh, dLh, dRh, Ah, dAh, j, kk, dt)
        if status != OK:
            return status, m
        for i in range(dim):
            ys[i] = y[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
            if not math.isfinite(ys[i]):
                return NONFINITE, m
        xh[kk + 1] = ys[0]
        Ah[kk + 1] = ys[N + 1]
        dAh[kk + 1] = alpha_eval(ys[0], kind, kpar)
        for i in range(N + 1):
            states[m + 1, i] = ys[i]
        j, th, status = _rhs(ys, k1, fpar, N, kind, kpar, xh, dLh, dRh, Ah, dAh, j, kk, dt)
        if status != OK:
            return status, m
        jhint = j
        for i in range(N + 1):
            derivs[m + 1, i] = k1[i]
        dLh[kk + 1] = k1[0]
        dRh[kk + 1] = k1[0]
        eta[m + 1] = (j - k0 + th) * dt
    return OK, nsteps


@jit
def sample_lyapunov(xh, dLh, dRh, states, eta, k0, dt, window_nodes, delta,
                    sample_idx, zeta_rel, zeta_origin, out_v, out_sc):
    """Lyapunov value of x_t at the step indices in ``sample_idx``.

    The window is [eta(t), t]: the Hermite value at eta(t), then every
    stored node after it, then the discrete coordinates x^1..x^N.
    """
    N1 = states.shape[1]
    buf = np.empty(window_nodes + N1 + 2)
    for q in range(sample_idx.shape[0]):
        m = sample_idx[q]
        kk = k0 + m
        nrm = 0.0
        for k in range(kk - window_nodes + 1, kk + 1):
            a = abs(xh[k])
            if a > nrm:
                nrm = a
        for i in range(1, N1):
            a = abs(states[m, i])
            if a > nrm:
                nrm = a
        if nrm <= zeta_origin:
            out_v[q] = V_NEAR_ORIGIN
            out_sc[q] = V_NEAR_ORIGIN
            continue
        zeta = zeta_rel * max(1.0, nrm)
        u = eta[m] / dt + k0
        j = int(math.floor(u))
        th = u - j
        if th < 1e-12:
            th = 0.0
        n = 0
        buf[n] = _history_eval(xh, dLh, dRh, j, th, dt)
        n += 1
        for k in range(j + 1, kk + 1):
            buf[n] = xh[k]
            n += 1
        for i in range(1, N1):
            buf[n] = states[m, i]
            n += 1
        sc, signed = count_alternations(buf[:n], zeta)
        if signed == 0:
            out_v[q] = V_INDETERMINATE
            out_sc[q] = V_INDETERMINATE
            continue
        out_sc[q] = sc
        out_v[q] = parity_value(sc, delta)


# ---------------------------------------------------------------- difference equation

@jit
def difference_orbits(seeds, steps, fpar, out):
    """Iterate x_{k+1} = f(x_k, x_{k-n}) for many seeds at once.

    ``seeds`` has shape (S, n+1) ordered (x_0, x_{-1}, ..., x_{-n});
    ``out`` has shape (S, steps+1, n+1) and receives the state vectors.
    Returns the index of the first seed that produced a non-finite iterate,
    or -1.
    """
    S = seeds.shape[0]
    n1 = seeds.shape[1]
    for s in range(S):
        for i in range(n1):
            out[s, 0, i] = seeds[s, i]
        for k in range(steps):
            new = f_eval(fpar, 0, out[s, k, 0], out[s, k, n1 - 1])
            if not math.isfinite(new):
                return s
            out[s, k + 1, 0] = new
            for i in range(1, n1):
                out[s, k + 1, i] = out[s, k, i - 1]
    return -1


@jit
def difference_lyapunov(orbits, delta, zeta, out_v):
    """Parity-adjusted sign-change count of every state vector."""
    S = orbits.shape[0]
    K = orbits.shape[1]
    for s in range(S):
        for k in range(K):
            sc, signed = count_alternations(orbits[s, k], zeta)
            if signed == 0:
                out_v[s, k] = V_NEAR_ORIGIN
            else:
                out_v[s, k] = parity_value(sc, delta)


GL_X = _GL_X
GL_W = _GL_W
