"""Compiled inner loops (numba).

Hot paths only: prime-by-prime point counting, smallest-prime-factor and
multiplicative coefficient fills, quadratic-character periods, and the bulk
smoothed central-value sums.  Everything is deterministic: per-discriminant
sums are sequential (Kahan-compensated), parallelism is only across
independent array slots.
"""

import math

import numpy as np
from numba import njit, prange

TWO_PI = 2.0 * math.pi


@njit(cache=True)
def kronecker64(d, n):
    """Kronecker symbol (d|n) for int64 arguments; mirrors arith.kronecker."""
    if n == 0:
        if d == 1 or d == -1:
            return 1
        return 0
    if d % 2 == 0 and n % 2 == 0:
        return 0
    k = 1
    v = 0
    while n % 2 == 0:
        v += 1
        n //= 2
    if v % 2 == 1:
        m = d % 8
        if m < 0:
            m += 8
        if m == 3 or m == 5:
            k = -k
    if n < 0:
        n = -n
        if d < 0:
            k = -k
    d = d % n
    if d < 0:
        d += n
    while d != 0:
        v = 0
        while d % 2 == 0:
            v += 1
            d //= 2
        if v % 2 == 1:
            m = n % 8
            if m == 3 or m == 5:
                k = -k
        if d % 4 == 3 and n % 4 == 3:
            k = -k
        t = n % d
        n = d
        d = t
    if n == 1:
        return k
    return 0


@njit(cache=True)
def spf_sieve(n):
    """Smallest-prime-factor table; spf[0]=0, spf[1]=1, spf[p]=p."""
    spf = np.zeros(n + 1, dtype=np.int32)
    if n >= 1:
        spf[1] = 1
    for i in range(2, n + 1):
        if spf[i] == 0:
            spf[i] = i
            if i * i <= n:
                for j in range(i * i, n + 1, i):
                    if spf[j] == 0:
                        spf[j] = i
    return spf


# ---------------------------------------------------------------------------
# Point counting, O(p) route: a_p = -sum_x chi_p(f(x)) with
# f(x) = 4x^3 + b2 x^2 + 2 b4 x + b6 (the 2-division polynomial form),
# valid for every odd p, including primes of bad reduction.
# ---------------------------------------------------------------------------


@njit(cache=True)
def ap_chi_table(p, b2, b4, b6):
    chi = np.full(p, -1, dtype=np.int8)
    chi[0] = 0
    for x in range(1, (p - 1) // 2 + 1):
        chi[(x * x) % p] = 1
    b2m = b2 % p
    if b2m < 0:
        b2m += p
    b4m = (2 * b4) % p
    if b4m < 0:
        b4m += p
    b6m = b6 % p
    if b6m < 0:
        b6m += p
    f = b6m  # f(0)
    d1 = (4 + b2m + b4m) % p  # f(1) - f(0)
    d2 = (24 + 2 * b2m) % p  # second difference at x=0
    d3 = 24 % p
    s = 0
    for _ in range(p):
        s += chi[f]
        f += d1
        if f >= p:
            f -= p
        d1 += d2
        if d1 >= p:
            d1 -= p
        d2 += d3
        if d2 >= p:
            d2 -= p
    return -s


@njit(cache=True, parallel=True)
def ap_chi_table_bulk(primes, b2, b4, b6):
    out = np.empty(len(primes), dtype=np.int64)
    for i in prange(len(primes)):
        out[i] = ap_chi_table(primes[i], b2, b4, b6)
    return out


# ---------------------------------------------------------------------------
# Point counting, O(p^{1/4}) route: baby-step/giant-step order finding on
# the short Weierstrass model y^2 = x^3 + Ax + B (valid for good p >= 5).
# ---------------------------------------------------------------------------


@njit(cache=True)
def _powmod(a, e, p):
    r = 1
    a %= p
    while e > 0:
        if e & 1:
            r = (r * a) % p
        a = (a * a) % p
        e >>= 1
    return r


@njit(cache=True)
def _invmod(a, p):
    # extended Euclid; a in (0, p), p prime
    t, new_t = 0, 1
    r, new_r = p, a
    while new_r != 0:
        q = r // new_r
        t, new_t = new_t, t - q * new_t
        r, new_r = new_r, r - q * new_r
    if t < 0:
        t += p
    return t


@njit(cache=True)
def _sqrt_mod(a, p):
    """Square root of a QR a mod odd prime p (Tonelli-Shanks)."""
    if p % 4 == 3:
        return _powmod(a, (p + 1) // 4, p)
    # write p-1 = q * 2^s
    q = p - 1
    s = 0
    while q % 2 == 0:
        q //= 2
        s += 1
    # find a non-residue
    z = 2
    while _powmod(z, (p - 1) // 2, p) != p - 1:
        z += 1
    m = s
    c = _powmod(z, q, p)
    t = _powmod(a, q, p)
    r = _powmod(a, (q + 1) // 2, p)
    while t != 1:
        # least i with t^(2^i) == 1
        i = 0
        t2 = t
        while t2 != 1:
            t2 = (t2 * t2) % p
            i += 1
        b = c
        for _ in range(m - i - 1):
            b = (b * b) % p
        m = i
        c = (b * b) % p
        t = (t * c) % p
        r = (r * b) % p
    return r


@njit(cache=True)
def _ec_add(x1, y1, i1, x2, y2, i2, A, p):
    # affine addition; third slot is the infinity flag
    if i1 == 1:
        return x2, y2, i2
    if i2 == 1:
        return x1, y1, i1
    if x1 == x2:
        if (y1 + y2) % p == 0:
            return 0, 0, 1
        num = (3 * ((x1 * x1) % p) + A) % p
        lam = (num * _invmod((2 * y1) % p, p)) % p
    else:
        dx = (x2 - x1) % p
        if dx < 0:
            dx += p
        dy = (y2 - y1) % p
        if dy < 0:
            dy += p
        lam = (dy * _invmod(dx, p)) % p
    x3 = (lam * lam - x1 - x2) % p
    if x3 < 0:
        x3 += p
    y3 = (lam * ((x1 - x3) % p) - y1) % p
    if y3 < 0:
        y3 += p
    return x3, y3, 0


@njit(cache=True)
def _ec_mul(k, x, y, A, p):
    rx, ry, ri = 0, 0, 1
    qx, qy, qi = x, y, 0
    while k > 0:
        if k & 1:
            rx, ry, ri = _ec_add(rx, ry, ri, qx, qy, qi, A, p)
        qx, qy, qi = _ec_add(qx, qy, qi, qx, qy, qi, A, p)
        k >>= 1
    return rx, ry, ri


@njit(cache=True)
def _gcd64(a, b):
    while b:
        a, b = b, a % b
    return a


@njit(cache=True)
def group_order_bsgs(A, B, p):
    """#E(F_p) for y^2 = x^3 + Ax + B, good reduction, p >= 5.

    Returns -1 when the order stays ambiguous after several random points
    (caller falls back to the O(p) count).
    """
    sq = int(math.sqrt(p))
    while (sq + 1) * (sq + 1) <= p:
        sq += 1
    while sq * sq > p:
        sq -= 1
    half = 2 * sq + 2
    lo = p + 1 - half
    if lo < 1:
        lo = 1
    hi = p + 1 + half
    width = hi - lo + 1
    s = int(math.sqrt(width)) + 1

    bx = np.empty(s, dtype=np.int64)
    by = np.empty(s, dtype=np.int64)
    cand = np.empty(64, dtype=np.int64)

    e = 1  # lcm of point orders seen so far
    state = np.uint64(p) * np.uint64(2862933555777941757) + np.uint64(3037000493)

    for _attempt in range(12):
        # --- pick a random point on the curve ---
        px = -1
        py = -1
        for _ in range(128):
            state = state * np.uint64(6364136223846793005) + np.uint64(1442695040888963407)
            x = int(state >> np.uint64(11)) % p
            t = (((x * x) % p) * x + A * x + B) % p
            if t < 0:
                t += p
            if t == 0:
                e = _lcm_small(e, 2)
                continue
            if _powmod(t, (p - 1) // 2, p) != 1:
                continue
            px = x
            py = _sqrt_mod(t, p)
            break
        if px < 0:
            continue

        # --- baby steps: i*P for i = 1..s-1 ---
        cx, cy, ci = px, py, 0
        nb = 0
        small_order = 0
        for i in range(1, s):
            bx[nb] = cx
            by[nb] = cy
            nb += 1
            cx, cy, ci = _ec_add(cx, cy, ci, px, py, 0, A, p)
            if ci == 1:
                small_order = i + 1  # (i+1)P = O
                break
        if small_order > 0:
            e = _lcm_small(e, small_order)
            k1 = (lo + e - 1) // e
            k2 = hi // e
            if k1 == k2:
                return k1 * e
            continue
        order = np.argsort(bx[:nb])
        sx = bx[:nb][order]

        # --- giant steps ---
        gx, gy, gi = _ec_mul(s, px, py, A, p)
        rx, ry, ri = _ec_mul(lo, px, py, A, p)
        ncand = 0
        jmax = width // s + 1
        for j in range(jmax + 1):
            m0 = lo + j * s
            if ri == 1:
                if m0 <= hi and ncand < 64:
                    cand[ncand] = m0
                    ncand += 1
            else:
                # binary search rx among baby x-coords
                a_idx = np.searchsorted(sx, rx)
                k = a_idx
                while k < nb and sx[k] == rx:
                    i = order[k] + 1  # baby index is i (1-based)
                    yb = by[order[k]]
                    if ry == yb:  # R == iP  =>  (m0 - i) P = O
                        m = m0 - i
                        if lo <= m <= hi and ncand < 64:
                            cand[ncand] = m
                            ncand += 1
                    if ry == (p - yb) % p:  # R == -iP  =>  (m0 + i) P = O
                        m = m0 + i
                        if lo <= m <= hi and ncand < 64:
                            cand[ncand] = m
                            ncand += 1
                    k += 1
            rx, ry, ri = _ec_add(rx, ry, ri, gx, gy, gi, A, p)

        if ncand == 0:
            continue  # should not happen; try another point
        # sort + dedupe the tiny candidate list
        cs = np.sort(cand[:ncand])
        uniq = np.empty(ncand, dtype=np.int64)
        nu = 0
        for k in range(ncand):
            if nu == 0 or cs[k] != uniq[nu - 1]:
                uniq[nu] = cs[k]
                nu += 1
        if nu == 1:
            return uniq[0]
        # multiples of ord(P) in the window form an AP with step ord(P)
        step = uniq[1] - uniq[0]
        e = _lcm_small(e, step)
        k1 = (lo + e - 1) // e
        k2 = hi // e
        if k1 == k2:
            return k1 * e
    return -1


@njit(cache=True)
def _lcm_small(a, b):
    return a // _gcd64(a, b) * b


@njit(cache=True, parallel=True)
def ap_bsgs_bulk(primes, c4, c6):
    """Traces via BSGS on y^2 = x^3 - 27c4 x - 54c6; sentinel 2^60 on
    ambiguity."""
    out = np.empty(len(primes), dtype=np.int64)
    for i in prange(len(primes)):
        p = primes[i]
        A = (-27 * c4) % p
        if A < 0:
            A += p
        B = (-54 * c6) % p
        if B < 0:
            B += p
        n = group_order_bsgs(A, B, p)
        if n < 0:
            out[i] = 1 << 60
        else:
            out[i] = p + 1 - n
    return out


# ---------------------------------------------------------------------------
# Coefficient table fill
# ---------------------------------------------------------------------------


@njit(cache=True)
def fill_multiplicative(nmax, spf, primes, apn, conductor):
    """Normalized a(n) from prime data via a(p)a(m) = a(pm) + [p|m, p∤N] a(m/p)."""
    a = np.zeros(nmax + 1)
    if nmax >= 1:
        a[1] = 1.0
    for i in range(len(primes)):
        p = primes[i]
        if p <= nmax:
            a[p] = apn[i]
    for n in range(2, nmax + 1):
        p = spf[n]
        if p == n:
            continue
        m = n // p
        t = a[p] * a[m]
        if m % p == 0 and conductor % p != 0:
            t -= a[m // p]
        a[n] = t
    return a


@njit(cache=True)
def chi_period(d, spf, out):
    """chi_d(n) for n = 0..|d|-1 into ``out`` (int8); d odd fundamental, so
    the character has period |d|."""
    ad = out.shape[0]
    if ad == 1:
        out[0] = 1
        return
    out[0] = 0
    out[1] = 1
    for n in range(2, ad):
        p = spf[n]
        if p == n:
            out[n] = kronecker64(d, n)
        else:
            out[n] = out[p] * out[n // p]


# ---------------------------------------------------------------------------
# Smoothed central-value sums
# ---------------------------------------------------------------------------


@njit(cache=True)
def _smoothed_sum(d, Q, T, w, spf):
    """2 * sum_{n<=T} (a(n)/sqrt n) chi_d(n) e^{-n/Q}, Kahan-compensated."""
    ad = abs(d)
    chi = np.empty(ad, dtype=np.int8)
    chi_period(d, spf, chi)
    r = math.exp(-1.0 / Q)
    wgt = r
    acc = 0.0
    comp = 0.0
    idx = 1 % ad
    for n in range(1, T + 1):
        c = chi[idx]
        if c != 0:
            term = w[n] * wgt
            if c < 0:
                term = -term
            y = term - comp
            t2 = acc + y
            comp = (t2 - acc) - y
            acc = t2
        idx += 1
        if idx == ad:
            idx = 0
        if n & 65535 == 0:
            wgt = math.exp(-(n + 1.0) / Q)
        else:
            wgt *= r
    return 2.0 * acc


@njit(cache=True, parallel=True)
def central_values_bulk(ds, w, spf, conductor, tol):
    """Exact-identity central values for root-number +1 discriminants.

    Returns (values, tail bounds, truncation lengths); value = NaN when the
    coefficient table is too short (Ts then carries the required length).
    """
    nv = len(ds)
    vals = np.empty(nv)
    tails = np.empty(nv)
    Ts = np.empty(nv, dtype=np.int64)
    nmax = len(w) - 1
    sqn = math.sqrt(conductor)
    for i in prange(nv):
        d = ds[i]
        Q = sqn * abs(d) / TWO_PI
        T = int(math.ceil(Q * (math.log(1.0 / tol) + math.log(Q + 2.0) + 4.0)))
        Ts[i] = T
        if T > nmax:
            vals[i] = np.nan
            tails[i] = np.nan
            continue
        vals[i] = _smoothed_sum(d, Q, T, w, spf)
        r = math.exp(-1.0 / Q)
        # tau(n) <= 2 sqrt(n) makes the tail of the *doubled* sum at most
        # 4 sum_{n>T} e^{-n/Q}
        tails[i] = 4.0 * math.exp(-(T + 1.0) / Q) / (1.0 - r)
    return vals, tails, Ts
