"""Hot loops, each with a numba kernel and a vectorized numpy twin.

Every kernel works on one *block* of at most ``ANCHOR_INTERVAL`` steps that
starts from an exactly computed anchor; callers re-anchor between blocks.
Phases are carried in double-double and reduced mod 1.  The numba kernels
advance complex exponentials by multiplication (second-difference rotation
scheme) and re-derive them from the double-double phase every
``sub`` steps; the numpy twins evaluate every phase in closed form.
"""
import math

import numpy as np

from . import _backend
from ._backend import njit
from ._dd import dd_add, dd_frac, dd_mul_d, two_sum

TWO_PI = 2.0 * math.pi


# ---------------------------------------------------------------- orbits

@njit
def _orbit_numba(xh, xl, yh, yl, ah, al, bh, bl, count):
    xs = np.empty(count)
    ys = np.empty(count)
    for k in range(count):
        xs[k] = xh + xl
        ys[k] = yh + yl
        # y' = y + x + beta uses the old x
        sh, sl = dd_add(yh, yl, xh, xl)
        sh, sl = dd_add(sh, sl, bh, bl)
        yh, yl = dd_frac(sh, sl)
        sh, sl = dd_add(xh, xl, ah, al)
        xh, xl = dd_frac(sh, sl)
    return xs, ys


def _orbit_dd_numpy(xh, xl, yh, yl, ah, al, bh, bl, count, k0=0):
    k = np.arange(k0, k0 + count, dtype=np.float64)
    c = k * (k - 1.0) * 0.5
    px, pl = dd_mul_d(ah, al, k)
    X = dd_frac(*dd_add(xh, xl, px, pl))
    t = dd_add(yh, yl, *dd_mul_d(xh, xl, k))
    t = dd_add(t[0], t[1], *dd_mul_d(bh, bl, k))
    t = dd_add(t[0], t[1], *dd_mul_d(ah, al, c))
    Y = dd_frac(*t)
    return X, Y


def _orbit_numpy(xh, xl, yh, yl, ah, al, bh, bl, count):
    (x1, x2), (y1, y2) = _orbit_dd_numpy(xh, xl, yh, yl, ah, al, bh, bl, count)
    return x1 + x2, y1 + y2


def orbit_block(xh, xl, yh, yl, ah, al, bh, bl, count):
    if _backend.active() == "numba":
        return _orbit_numba(xh, xl, yh, yl, ah, al, bh, bl, count)
    return _orbit_numpy(xh, xl, yh, yl, ah, al, bh, bl, count)


# ------------------------------------------------- observable along orbit

@njit
def _eval_point(x, y, amodes, bmodes, coefs, c0, radius, px, py):
    ex = complex(math.cos(TWO_PI * x), math.sin(TWO_PI * x))
    ey = complex(math.cos(TWO_PI * y), math.sin(TWO_PI * y))
    px[radius] = 1.0
    for j in range(1, radius + 1):
        px[radius + j] = px[radius + j - 1] * ex
        px[radius - j] = px[radius - j + 1] * ex.conjugate()
    py[0] = 1.0
    for j in range(1, radius + 1):
        py[j] = py[j - 1] * ey
    acc = 0.0
    for i in range(amodes.shape[0]):
        acc += (coefs[i] * px[amodes[i] + radius] * py[bmodes[i]]).real
    return c0 + 2.0 * acc


@njit
def _orbit_values_numba(xh, xl, yh, yl, ah, al, bh, bl, count, amodes, bmodes, coefs, c0, radius):
    out = np.empty(count)
    px = np.empty(2 * radius + 1, dtype=np.complex128)
    py = np.empty(radius + 1, dtype=np.complex128)
    for k in range(count):
        out[k] = _eval_point(xh + xl, yh + yl, amodes, bmodes, coefs, c0, radius, px, py)
        sh, sl = dd_add(yh, yl, xh, xl)
        sh, sl = dd_add(sh, sl, bh, bl)
        yh, yl = dd_frac(sh, sl)
        sh, sl = dd_add(xh, xl, ah, al)
        xh, xl = dd_frac(sh, sl)
    return out


def eval_half_numpy(xs, ys, amodes, bmodes, coefs, c0, chunk=1 << 16):
    """c0 + 2 Re sum c e(a x + b y) over the half-spectrum, vectorized."""
    xs = np.asarray(xs, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    out = np.full(xs.shape, c0, dtype=np.float64)
    if amodes.size == 0:
        return out
    a = amodes.astype(np.float64)[:, None]
    b = bmodes.astype(np.float64)[:, None]
    for s in range(0, xs.size, chunk):
        x = xs.ravel()[s:s + chunk][None, :]
        y = ys.ravel()[s:s + chunk][None, :]
        ph = a * x + b * y
        ph -= np.floor(ph)
        z = np.exp(1j * TWO_PI * ph)
        out.ravel()[s:s + chunk] += 2.0 * (coefs[:, None] * z).real.sum(axis=0)
    return out


def orbit_values(xh, xl, yh, yl, ah, al, bh, bl, count, amodes, bmodes, coefs, c0, radius):
    if _backend.active() == "numba":
        return _orbit_values_numba(xh, xl, yh, yl, ah, al, bh, bl, count,
                                   amodes, bmodes, coefs, c0, radius)
    xs, ys = _orbit_numpy(xh, xl, yh, yl, ah, al, bh, bl, count)
    return eval_half_numpy(xs, ys, amodes, bmodes, coefs, c0)


# ---------------------------------------------------------- phase series
# A trajectory is theta(k) = theta0 + k*delta0 + C(k,2)*curv mod 1, given as
# double-double arrays (one entry per trajectory) plus a complex weight.

@njit
def _cis(t):
    return complex(math.cos(TWO_PI * t), math.sin(TWO_PI * t))


@njit
def _phase_at(th, tl, dh, dl, ch, cl, k):
    kf = float(k)
    c = kf * (kf - 1.0) * 0.5
    s1, s2 = dd_mul_d(dh, dl, kf)
    u1, u2 = dd_add(th, tl, s1, s2)
    s1, s2 = dd_mul_d(ch, cl, c)
    u1, u2 = dd_add(u1, u2, s1, s2)
    u1, u2 = dd_frac(u1, u2)
    v1, v2 = dd_mul_d(ch, cl, kf)
    v1, v2 = dd_add(dh, dl, v1, v2)
    v1, v2 = dd_frac(v1, v2)
    return u1 + u2, v1 + v2


@njit
def _series_numba(th, tl, dh, dl, ch, cl, weights, count, sub):
    out = np.zeros(count, dtype=np.complex128)
    ntraj = th.shape[0]
    rho = np.empty(ntraj, dtype=np.complex128)
    for i in range(ntraj):
        rho[i] = _cis(ch[i] + cl[i])
    start = 0
    while start < count:
        stop = min(start + sub, count)
        for i in range(ntraj):
            theta, delta = _phase_at(th[i], tl[i], dh[i], dl[i], ch[i], cl[i], start)
            z = weights[i] * _cis(theta)
            r = _cis(delta)
            p = rho[i]
            for k in range(start, stop):
                out[k] += z
                z = z * r
                r = r * p
        start = stop
    return out


def _phases_numpy(th, tl, dh, dl, ch, cl, k0, count):
    k = np.arange(k0, k0 + count, dtype=np.float64)[None, :]
    c = k * (k - 1.0) * 0.5
    col = lambda v: np.asarray(v, dtype=np.float64)[:, None]
    u = dd_add(col(th), col(tl), *dd_mul_d(col(dh), col(dl), k))
    u = dd_add(u[0], u[1], *dd_mul_d(col(ch), col(cl), c))
    u1, u2 = dd_frac(*u)
    return u1 + u2


def _series_numpy(th, tl, dh, dl, ch, cl, weights, count, chunk=1 << 16):
    out = np.zeros(count, dtype=np.complex128)
    for s in range(0, count, chunk):
        n = min(chunk, count - s)
        ph = _phases_numpy(th, tl, dh, dl, ch, cl, s, n)
        out[s:s + n] = (weights[:, None] * np.exp(1j * TWO_PI * ph)).sum(axis=0)
    return out


def phase_series(th, tl, dh, dl, ch, cl, weights, count, sub=None):
    """sum_i w_i exp(2 pi i theta_i(k)) for k in [0, count)."""
    if sub is None:
        sub = _backend.subanchor_interval()
    if _backend.active() == "numba":
        return _series_numba(th, tl, dh, dl, ch, cl, weights, count, sub)
    return _series_numpy(th, tl, dh, dl, ch, cl, weights, count)


@njit
def _sum_numba(th, tl, dh, dl, ch, cl, count, sub):
    rho = _cis(ch + cl)
    acc = 0j
    start = 0
    while start < count:
        stop = min(start + sub, count)
        theta, delta = _phase_at(th, tl, dh, dl, ch, cl, start)
        z = _cis(theta)
        r = _cis(delta)
        part = 0j
        for _ in range(start, stop):
            part += z
            z = z * r
            r = r * rho
        acc += part
        start = stop
    return acc


def phase_sum(th, tl, dh, dl, ch, cl, count, sub=None):
    """sum_{k<count} exp(2 pi i theta(k)) for a single trajectory."""
    if sub is None:
        sub = _backend.subanchor_interval()
    if _backend.active() == "numba":
        return _sum_numba(th, tl, dh, dl, ch, cl, count, sub)
    one = np.ones(1, dtype=np.complex128)
    arr = lambda v: np.array([v])
    return complex(_series_numpy(arr(th), arr(tl), arr(dh), arr(dl), arr(ch), arr(cl), one,
                                 count).sum())


@njit
def _fold_numba(th, tl, dh, dl, ch, cl, count, sub, a, b, k0, M, bins):
    rho = _cis(ch + cl)
    idx = (a + (k0 % M) * b) % M
    step = b % M
    start = 0
    while start < count:
        stop = min(start + sub, count)
        theta, delta = _phase_at(th, tl, dh, dl, ch, cl, start)
        z = _cis(theta)
        r = _cis(delta)
        for _ in range(start, stop):
            bins[idx] += z
            idx += step
            if idx >= M:
                idx -= M
            z = z * r
            r = r * rho
        start = stop
    return bins


def phase_fold(th, tl, dh, dl, ch, cl, count, a, b, k0, M, bins, sub=None):
    """Accumulate exp(2 pi i theta(k)) into bins[(a + (k0 + k) b) mod M]."""
    if sub is None:
        sub = _backend.subanchor_interval()
    if _backend.active() == "numba":
        return _fold_numba(th, tl, dh, dl, ch, cl, count, sub, a, b, k0, M, bins)
    chunk = 1 << 16
    arr = lambda v: np.array([v])
    for s in range(0, count, chunk):
        n = min(chunk, count - s)
        z = np.exp(1j * TWO_PI * _phases_numpy(arr(th), arr(tl), arr(dh), arr(dl), arr(ch),
                                               arr(cl), s, n)[0])
        k = np.arange(k0 + s, k0 + s + n, dtype=np.int64)
        idx = (a + k * b) % M
        bins += np.bincount(idx, weights=z.real, minlength=M)
        bins += 1j * np.bincount(idx, weights=z.imag, minlength=M)
    return bins


# ----------------------------------------------------------- drift series

@njit
def _drift_numba(th, tl, dh, dl, ch, cl, weights, count, sub, carry, out, level, near):
    """out[k] = carry + sum_{j<=k} Re(sum_i w_i z_i(j)); also first-crossing indices."""
    inc = np.zeros(count)
    for i in range(th.shape[0]):
        rho = _cis(ch[i] + cl[i])
        start = 0
        while start < count:
            stop = min(start + sub, count)
            theta, delta = _phase_at(th[i], tl[i], dh[i], dl[i], ch[i], cl[i], start)
            z = weights[i] * _cis(theta)
            r = _cis(delta)
            for k in range(start, stop):
                inc[k] += z.real
                z = z * r
                r = r * rho
            start = stop
    acc = carry
    first_cross = -1
    first_near = -1
    for k in range(count):
        acc += inc[k]
        out[k] = acc
        if first_near < 0 and min(abs(acc - level), abs(acc + level)) <= near:
            first_near = k
        if first_cross < 0 and abs(acc) > level:
            first_cross = k
    return first_cross, first_near


def drift_series(th, tl, dh, dl, ch, cl, weights, count, carry, level=1.0, near=-1.0, sub=None):
    """Running sums of real increments, as a float array, plus detection indices.

    Index k of the output is the running total after adding increment k; the
    detection indices refer to the same positions (``-1`` when absent).
    """
    if sub is None:
        sub = _backend.subanchor_interval()
    out = np.empty(count)
    if _backend.active() == "numba":
        fc, fn = _drift_numba(th, tl, dh, dl, ch, cl, weights, count, sub, float(carry), out,
                              float(level), float(near))
        return out, int(fc), int(fn)
    inc = _series_numpy(th, tl, dh, dl, ch, cl, weights, count).real
    np.cumsum(inc, out=out)
    out += carry
    cross = np.flatnonzero(np.abs(out) > level)
    close = np.flatnonzero(np.minimum(np.abs(out - level), np.abs(out + level)) <= near)
    return out, int(cross[0]) if cross.size else -1, int(close[0]) if close.size else -1


# ------------------------------------------------------------ special flow

@njit
def _walk_numba(xh, xl, yh, yl, ah, al, bh, bl, amodes, bmodes, coefs, c0, radius,
                base_sum, targets, max_steps, out_n, out_x, out_y, out_s, out_f, start_out):
    """Advance the base orbit, emitting the state at each target time.

    ``base_sum`` is S_k(f) at the block start.  Target j is emitted once
    S_k <= targets[j] < S_{k+1}.  Returns (j, steps, final partial sum).
    """
    px = np.empty(2 * radius + 1, dtype=np.complex128)
    py = np.empty(radius + 1, dtype=np.complex128)
    j = start_out
    ntarget = targets.shape[0]
    s_hi = base_sum
    s_lo = 0.0
    k = 0
    while j < ntarget and k < max_steps:
        x = xh + xl
        y = yh + yl
        fk = _eval_point(x, y, amodes, bmodes, coefs, c0, radius, px, py)
        nxt_hi, nxt_lo = two_sum(s_hi, fk)
        nxt_lo += s_lo
        nxt = nxt_hi + nxt_lo
        cur = s_hi + s_lo
        while j < ntarget and targets[j] < nxt:
            out_n[j] = k
            out_x[j] = x
            out_y[j] = y
            out_s[j] = targets[j] - cur
            out_f[j] = fk
            j += 1
        s_hi, s_lo = nxt_hi, nxt_lo
        sh, sl = dd_add(yh, yl, xh, xl)
        sh, sl = dd_add(sh, sl, bh, bl)
        yh, yl = dd_frac(sh, sl)
        sh, sl = dd_add(xh, xl, ah, al)
        xh, xl = dd_frac(sh, sl)
        k += 1
    return j, k, s_hi + s_lo


def _walk_numpy(xh, xl, yh, yl, ah, al, bh, bl, amodes, bmodes, coefs, c0, radius,
                base_sum, targets, max_steps, out_n, out_x, out_y, out_s, out_f, start_out):
    j = start_out
    remaining = targets[j:]
    # enough steps to pass the last pending target, capped by the block size
    xs, ys = _orbit_numpy(xh, xl, yh, yl, ah, al, bh, bl, max_steps)
    fv = eval_half_numpy(xs, ys, amodes, bmodes, coefs, c0)
    sums = np.empty(max_steps + 1)
    sums[0] = base_sum
    np.cumsum(fv, out=sums[1:])
    sums[1:] += base_sum
    # k with sums[k] <= target < sums[k+1]
    idx = np.searchsorted(sums, remaining, side="right") - 1
    done = idx < max_steps
    m = int(np.count_nonzero(done))
    if m:
        ks = idx[:m]
        out_n[j:j + m] = ks
        out_x[j:j + m] = xs[ks]
        out_y[j:j + m] = ys[ks]
        out_s[j:j + m] = remaining[:m] - sums[ks]
        out_f[j:j + m] = fv[ks]
    steps = max_steps if j + m < targets.shape[0] else int(idx[m - 1]) + 1
    return j + m, steps, float(sums[steps])


def special_walk(*args):
    if _backend.active() == "numba":
        return _walk_numba(*args)
    return _walk_numpy(*args)


@njit
def _flow_many_numba(xh, xl, yh, yl, s, t, ah, al, bh, bl, amodes, bmodes, coefs, c0, radius,
                     out_n):
    """Forward flow of many states by t >= 0: returns hitting indices."""
    px = np.empty(2 * radius + 1, dtype=np.complex128)
    py = np.empty(radius + 1, dtype=np.complex128)
    for i in range(xh.shape[0]):
        xa, xb, ya, yb = xh[i], xl[i], yh[i], yl[i]
        target = s[i] + t
        acc = 0.0
        n = 0
        while True:
            fk = _eval_point(xa + xb, ya + yb, amodes, bmodes, coefs, c0, radius, px, py)
            if acc + fk > target:
                break
            acc += fk
            n += 1
            sh, sl = dd_add(ya, yb, xa, xb)
            sh, sl = dd_add(sh, sl, bh, bl)
            ya, yb = dd_frac(sh, sl)
            sh, sl = dd_add(xa, xb, ah, al)
            xa, xb = dd_frac(sh, sl)
        out_n[i] = n
    return out_n


def _flow_many_numpy(xh, xl, yh, yl, s, t, ah, al, bh, bl, amodes, bmodes, coefs, c0, radius,
                     out_n):
    xa, xb, ya, yb = xh.copy(), xl.copy(), yh.copy(), yl.copy()
    acc = np.zeros_like(s)
    target = s + t
    active = np.ones(s.shape, dtype=bool)
    out_n[:] = 0
    while active.any():
        idx = np.flatnonzero(active)
        fk = eval_half_numpy(xa[idx] + xb[idx], ya[idx] + yb[idx], amodes, bmodes, coefs, c0)
        stop = acc[idx] + fk > target[idx]
        go = idx[~stop]
        active[idx[stop]] = False
        acc[go] += fk[~stop]
        out_n[go] += 1
        sh, sl = dd_add(ya[go], yb[go], xa[go], xb[go])
        ya[go], yb[go] = dd_frac(*dd_add(sh, sl, bh, bl))
        xa[go], xb[go] = dd_frac(*dd_add(xa[go], xb[go], ah, al))
    return out_n


def flow_many(*args):
    if _backend.active() == "numba":
        return _flow_many_numba(*args)
    return _flow_many_numpy(*args)


# ------------------------------------------------------------------ Mobius

@njit
def _mobius_numba(N):
    mu = np.zeros(N + 1, dtype=np.int8)
    if N >= 1:
        mu[1] = 1
    composite = np.zeros(N + 1, dtype=np.bool_)
    primes = np.empty(int(1.3 * N / math.log(max(N, 3))) + 32, dtype=np.int64)
    np_ = 0
    for i in range(2, N + 1):
        if not composite[i]:
            primes[np_] = i
            np_ += 1
            mu[i] = -1
        for j in range(np_):
            p = primes[j]
            m = i * p
            if m > N:
                break
            composite[m] = True
            if i % p == 0:
                mu[m] = 0
                break
            mu[m] = -mu[i]
    return mu


def _mobius_numpy(N):
    mu = np.ones(N + 1, dtype=np.int8)
    mu[0] = 0
    itype = np.int32 if N < 2 ** 31 - 1 else np.int64
    rad = np.ones(N + 1, dtype=itype)
    r = math.isqrt(N)
    small = np.ones(r + 1, dtype=bool)
    small[:2] = False
    for i in range(2, math.isqrt(r) + 1):
        if small[i]:
            small[i * i::i] = False
    for p in np.flatnonzero(small):
        p = int(p)
        mu[p::p] *= -1
        rad[p::p] *= p
        mu[p * p::p * p] = 0
    # one prime factor above sqrt(N) remains wherever rad < n
    big = (rad < np.arange(N + 1, dtype=itype)) & (mu != 0)
    mu[big] *= -1
    return mu


def mobius_table(N):
    if _backend.active() == "numba":
        return _mobius_numba(N)
    return _mobius_numpy(N)
