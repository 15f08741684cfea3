"""Hot integer loops, compiled with numba when available.

Every kernel has a pure-numpy twin.  Set ``SUPERSPECIAL_NO_NUMBA=1`` to
force the numpy path (both paths must return identical results; the test
suite and ``benchmarks/bench_kernels.py`` run them side by side).
"""

from __future__ import annotations

import math
import os

import numpy as np

DISABLE_ENV = "SUPERSPECIAL_NO_NUMBA"

try:
    import numba
except ImportError:  # pragma: no cover
    numba = None


def numba_enabled() -> bool:
    return numba is not None and os.environ.get(DISABLE_ENV, "") not in ("1", "true", "yes")


def _njit(func):
    if numba is None:  # pragma: no cover
        return func
    return numba.njit(cache=True, nogil=True)(func)


# --------------------------------------------------------------------------
# Embedding search: integer points c of a box with a fixed trace and norm.
# --------------------------------------------------------------------------

def _quadratic_coeffs(tr, q, T, n):
    """Coefficients of 4*nrd - 4n as a quadratic in c3 (see embedding_search)."""
    t1, t2, t3 = tr[1], tr[2], tr[3]
    return (t1, t2, t3, q[0][0], q[0][1], q[0][2], q[0][3], q[1][1], q[2][2], q[3][3],
            q[1][2], q[1][3], q[2][3], T, n)


@_njit
def _isqrt64(v):
    if v < 0:
        return -1
    r = np.int64(math.sqrt(float(v)))
    while r * r > v:
        r -= 1
    while (r + 1) * (r + 1) <= v:
        r += 1
    return r


@_njit
def _embedding_search_nb(t1, t2, t3, q00, q01, q02, q03, q11, q22, q33, q12, q13, q23, T, n, H):
    out = np.zeros((0, 4), dtype=np.int64)
    buf = np.zeros((1024, 4), dtype=np.int64)
    cnt = 0
    A = q00 * t3 * t3 - 2 * t3 * q03 + 4 * q33
    for c1 in range(-H, H + 1):
        for c2 in range(-H, H + 1):
            u = T - t1 * c1 - t2 * c2
            M = q01 * c1 + q02 * c2
            B = -2 * q00 * u * t3 + 2 * u * q03 - 2 * t3 * M + 4 * (q13 * c1 + q23 * c2)
            C = q00 * u * u + 2 * u * M + 4 * (q11 * c1 * c1 + q22 * c2 * c2 + q12 * c1 * c2) - 4 * n
            disc = B * B - 4 * A * C
            s = _isqrt64(disc)
            if s < 0 or s * s != disc:
                continue
            for sgn in range(2):
                num = -B + s if sgn == 0 else -B - s
                if sgn == 1 and s == 0:
                    break
                if num % (2 * A) != 0:
                    continue
                c3 = num // (2 * A)
                if c3 < -H or c3 > H:
                    continue
                rem = u - t3 * c3
                if rem % 2 != 0:
                    continue
                if cnt == buf.shape[0]:
                    nb = np.zeros((2 * cnt, 4), dtype=np.int64)
                    nb[:cnt] = buf
                    buf = nb
                buf[cnt, 0] = rem // 2
                buf[cnt, 1] = c1
                buf[cnt, 2] = c2
                buf[cnt, 3] = c3
                cnt += 1
    out = buf[:cnt].copy()
    return out


def _embedding_search_np(t1, t2, t3, q00, q01, q02, q03, q11, q22, q33, q12, q13, q23, T, n, H):
    r = np.arange(-H, H + 1, dtype=np.int64)
    c1, c2 = np.meshgrid(r, r, indexing="ij")
    c1 = c1.ravel()
    c2 = c2.ravel()
    A = q00 * t3 * t3 - 2 * t3 * q03 + 4 * q33
    u = T - t1 * c1 - t2 * c2
    M = q01 * c1 + q02 * c2
    B = -2 * q00 * u * t3 + 2 * u * q03 - 2 * t3 * M + 4 * (q13 * c1 + q23 * c2)
    C = q00 * u * u + 2 * u * M + 4 * (q11 * c1 * c1 + q22 * c2 * c2 + q12 * c1 * c2) - 4 * n
    disc = B * B - 4 * A * C
    ok = disc >= 0
    s = np.zeros_like(disc)
    s[ok] = np.floor(np.sqrt(disc[ok].astype(np.float64))).astype(np.int64)
    # float sqrt can be off by one for large arguments
    for _ in range(2):
        s = np.where(s * s > disc, s - 1, s)
        s = np.where((s + 1) * (s + 1) <= disc, s + 1, s)
    ok &= s * s == disc
    rows = []
    for sgn in (1, -1):
        sel = ok & ((sgn == 1) | (s != 0))
        num = -B + sgn * s
        sel &= num % (2 * A) == 0
        c3 = np.where(sel, num // (2 * A), 0)
        sel &= (c3 >= -H) & (c3 <= H)
        rem = u - t3 * c3
        sel &= rem % 2 == 0
        rows.append(np.stack([rem[sel] // 2, c1[sel], c2[sel], c3[sel]], axis=1))
    out = np.concatenate(rows, axis=0)
    # match the loop order of the compiled kernel
    order = np.lexsort((out[:, 3], out[:, 2], out[:, 1]))
    return out[order]


def embedding_search(tr, q, T, n, H, use_numba=None):
    """All (c0, c1, c2, c3) with max|c1..c3| <= H, trace T and reduced norm n.

    ``tr`` is the trace vector and ``q`` the upper-triangular norm form of
    the order basis (first basis element 1).
    """
    args = _quadratic_coeffs(tr, q, T, n) + (H,)
    args = tuple(int(a) for a in args)
    if use_numba is None:
        use_numba = numba_enabled()
    if use_numba:
        res = _embedding_search_nb(*args)
        order = np.lexsort((res[:, 3], res[:, 2], res[:, 1]))
        res = res[order]
    else:
        res = _embedding_search_np(*args)
    return [tuple(int(v) for v in row) for row in res]


# --------------------------------------------------------------------------
# Class numbers by counting reduced primitive forms, for all |D| <= Dmax.
# --------------------------------------------------------------------------

@_njit
def _gcd_nb(a, b):
    a = abs(a)
    b = abs(b)
    while b:
        a, b = b, a % b
    return a


@_njit
def _class_numbers_nb(Dmax):
    h = np.zeros(Dmax + 1, dtype=np.int64)
    amax = int(math.sqrt(Dmax / 3.0)) + 1
    for a in range(1, amax + 1):
        for b in range(-a + 1, a + 1):
            # c >= a and b^2 - 4ac >= -Dmax
            c = a
            while True:
                D = b * b - 4 * a * c
                if -D > Dmax:
                    break
                if not (c == a and b < 0):
                    if _gcd_nb(_gcd_nb(a, b), c) == 1:
                        h[-D] += 1
                c += 1
    return h


def _class_numbers_np(Dmax):
    h = np.zeros(Dmax + 1, dtype=np.int64)
    amax = int(math.sqrt(Dmax / 3.0)) + 1
    for a in range(1, amax + 1):
        b = np.arange(-a + 1, a + 1, dtype=np.int64)
        cmax = (Dmax + b * b) // (4 * a)
        for bi, cm in zip(b, cmax):
            if cm < a:
                continue
            c = np.arange(a, cm + 1, dtype=np.int64)
            if bi < 0:
                c = c[c != a]
            g = np.gcd(np.gcd(a, abs(int(bi))), c)
            D = bi * bi - 4 * a * c[g == 1]
            np.add.at(h, -D, 1)
    return h


def class_number_table(Dmax, use_numba=None):
    """Array h with h[|D|] = number of reduced primitive forms of discriminant D."""
    if use_numba is None:
        use_numba = numba_enabled()
    return _class_numbers_nb(int(Dmax)) if use_numba else _class_numbers_np(int(Dmax))


# --------------------------------------------------------------------------
# Norm equation |a^2 - m b^2| = l by search over b.
# --------------------------------------------------------------------------

@_njit
def _norm_search_nb(ls, m, bmax):
    out = np.zeros((ls.shape[0], 2), dtype=np.int64)
    for k in range(ls.shape[0]):
        l = ls[k]
        out[k, 0] = -1
        for b in range(0, bmax + 1):
            found = False
            for sgn in (1, -1):
                v = sgn * l + m * b * b
                if v < 0:
                    continue
                a = _isqrt64(v)
                if a * a == v:
                    out[k, 0] = a
                    out[k, 1] = b
                    found = True
                    break
            if found:
                break
    return out


def _norm_search_np(ls, m, bmax):
    out = np.full((ls.shape[0], 2), -1, dtype=np.int64)
    b = np.arange(0, bmax + 1, dtype=np.int64)
    for k, l in enumerate(ls):
        best = None
        for sgn in (1, -1):
            v = sgn * int(l) + m * b * b
            a = np.floor(np.sqrt(np.maximum(v, 0).astype(np.float64))).astype(np.int64)
            a = np.where(a * a > v, a - 1, a)
            a = np.where((a + 1) * (a + 1) <= v, a + 1, a)
            hit = np.nonzero((v >= 0) & (a * a == v))[0]
            # ties at equal b go to the +l sign, as in the compiled loop
            if hit.size and (best is None or b[hit[0]] < best[1]):
                best = (a[hit[0]], b[hit[0]])
        if best is not None:
            out[k] = best
    return out


def norm_equation_search(ls, m, bmax, use_numba=None):
    """For each l, the first (a, b) with b <= bmax and a^2 - m b^2 = +-l, else (-1, ?)."""
    ls = np.asarray(ls, dtype=np.int64)
    if use_numba is None:
        use_numba = numba_enabled()
    return _norm_search_nb(ls, int(m), int(bmax)) if use_numba else _norm_search_np(ls, int(m), int(bmax))


# --------------------------------------------------------------------------
# Star discrepancy on a regular grid of anchored boxes.
# --------------------------------------------------------------------------

@_njit
def _star_discrepancy_nb(pts, grid):
    n = pts.shape[0]
    counts = np.zeros((grid + 1, grid + 1), dtype=np.int64)
    for k in range(n):
        # a point strictly inside [0,u)x[0,v) for grid u > x, v > y
        gx = int(math.floor(pts[k, 0] * grid)) + 1
        gy = int(math.floor(pts[k, 1] * grid)) + 1
        if gx <= grid and gy <= grid:
            counts[gx, gy] += 1
    # 2-D prefix sums
    for i in range(1, grid + 1):
        for j in range(grid + 1):
            counts[i, j] += counts[i - 1, j]
    for i in range(grid + 1):
        for j in range(1, grid + 1):
            counts[i, j] += counts[i, j - 1]
    best = 0.0
    for i in range(1, grid + 1):
        for j in range(1, grid + 1):
            d = abs(counts[i, j] / n - (i / grid) * (j / grid))
            if d > best:
                best = d
    return best


def _star_discrepancy_np(pts, grid):
    n = pts.shape[0]
    gx = np.floor(pts[:, 0] * grid).astype(np.int64) + 1
    gy = np.floor(pts[:, 1] * grid).astype(np.int64) + 1
    keep = (gx <= grid) & (gy <= grid)
    counts = np.zeros((grid + 1, grid + 1), dtype=np.int64)
    np.add.at(counts, (gx[keep], gy[keep]), 1)
    counts = counts.cumsum(axis=0).cumsum(axis=1)
    u = np.arange(grid + 1) / grid
    d = np.abs(counts[1:, 1:] / n - np.outer(u[1:], u[1:]))
    return float(d.max())


def star_discrepancy(points, grid=64, use_numba=None):
    """max over grid boxes [0,u)x[0,v) of |fraction of points inside - u v|."""
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 2)
    if pts.shape[0] == 0:
        return 1.0
    if use_numba is None:
        use_numba = numba_enabled()
    return float(_star_discrepancy_nb(pts, int(grid))) if use_numba else _star_discrepancy_np(pts, int(grid))
