"""CM points on E_6 through the (2,4,6) triangle-group hauptmodul t.

The normalizer of the maximal order acts on the upper half plane as the
triangle group with elliptic points tau2, tau4, tau6 of orders 2, 4, 6.
The hauptmodul t sends them to 0, 1 and infinity; its inverse is the
Schwarz map of the hypergeometric equation with parameters

    a = 5/24,  b = 1/24,  c = 1/2

(exponent differences 1/2 at t = 0, 1/4 at t = 1, 1/6 at t = infinity).
Near each vertex v of order n the disk coordinate
zeta_v = (tau - v) / (tau - conj v) satisfies zeta_v^n = A_v^n * phi_v(w)
with w the local parameter (t, 1 - t or 1/t) and phi_v an analytic
quotient of hypergeometric series; t is found by inverting phi_v.
"""

from __future__ import annotations

import functools
import json
import math
import os
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import mpmath

from . import quaternion_core as qc
from .quadratic_arith import quad_order_data

HG_PARAMS = (Fraction(5, 24), Fraction(1, 24), Fraction(1, 2))


def _params():
    # evaluated at the working precision of the caller
    return tuple(mpmath.mpf(p.numerator) / p.denominator for p in HG_PARAMS)

HEIGHT_START = 8
HEIGHT_CAP = 1024
TABLE_ENV = "SUPERSPECIAL_TABLE"
BUNDLED_TABLE = Path(__file__).with_name("data") / "heegner_table.jsonl"


class UniformizationError(RuntimeError):
    pass


class Infinity:
    """The point at infinity of P^1 (t or j)."""

    _inst = None

    def __new__(cls):
        if cls._inst is None:
            cls._inst = super().__new__(cls)
        return cls._inst

    def __repr__(self):
        return "INFINITY"


INFINITY = Infinity()


def is_infinity(v) -> bool:
    return v is INFINITY


# --------------------------------------------------------------------------
# Moebius helpers.
# --------------------------------------------------------------------------

def _mat(alpha, dps):
    """iota_inf(alpha) scaled to determinant 1."""
    m = qc.iota_inf(alpha, dps)
    s = mpmath.sqrt(mpmath.mpf(alpha.nrd().numerator) / alpha.nrd().denominator)
    return m / s


def moebius(m, z):
    return (m[0, 0] * z + m[0, 1]) / (m[1, 0] * z + m[1, 1])


def cosh_dist(z, w):
    return 1 + abs(z - w) ** 2 / (2 * mpmath.im(z) * mpmath.im(w))


def disk(z, v):
    return (z - v) / (z - mpmath.conj(v))


def fixed_point(beta: qc.QuaternionElement, dps: int = 50):
    """Upper-half-plane fixed point of iota_inf(beta)."""
    if beta.disc() >= 0:
        raise ValueError("beta is not an imaginary quadratic generator")
    with mpmath.workdps(dps + 10):
        tau = qc.fixed_point_of_matrix(qc.iota_inf(beta, dps + 10))
    with mpmath.workdps(dps):
        return +tau


# --------------------------------------------------------------------------
# The triangle: vertices, rotations, chart constants.
# --------------------------------------------------------------------------

@dataclass
class Triangle:
    dps: int
    tau2: object
    tau4: object
    tau6: object
    mu: object                      # rotation by pi about tau2
    gens: list = field(repr=False)  # rotations about the vertices of the Dirichlet domain
    A2: object = None
    A4: object = None
    A6: object = None


def _gauss(a, b, c):
    # 2F1(a, b; c; 1)
    return mpmath.gamma(c) * mpmath.gamma(c - a - b) / (mpmath.gamma(c - a) * mpmath.gamma(c - b))


def _vertex_candidates(D, order, dps, height=4):
    pts = []
    for beta in qc.embeddings_with_disc(D, height, order):
        pts.append((fixed_point(beta, dps), beta))
    return pts


@functools.lru_cache(maxsize=8)
def triangle(dps: int = 50) -> Triangle:
    order = qc.build_maximal_order()
    w = dps + 15
    with mpmath.workdps(w):
        mu = order.mu
        tau2 = fixed_point(mu, w)
        c4 = mpmath.sqrt(mpmath.mpf(3) / 2)
        c6 = mpmath.sqrt(2)
        c46 = mpmath.sqrt(3)
        tol = mpmath.mpf(10) ** (-(w // 2))
        fours = [(z, b) for z, b in _vertex_candidates(-4, order, w) if abs(cosh_dist(z, tau2) - c4) < tol]
        sixes = [(z, b) for z, b in _vertex_candidates(-3, order, w) if abs(cosh_dist(z, tau2) - c6) < tol]
        if not fours or not sixes:
            raise UniformizationError("triangle vertices not found; raise the search height")
        fours.sort(key=lambda p: (mpmath.re(p[0]), mpmath.im(p[0])))
        tau4, beta4 = fours[0]
        z4 = disk(tau4, tau2)
        chosen = None
        for z, b in sixes:
            if abs(cosh_dist(z, tau4) - c46) > tol:
                continue
            # tau6 sits a quarter turn counterclockwise from tau4 around tau2
            rot = disk(z, tau2) / z4
            if abs(mpmath.re(rot)) < tol and mpmath.im(rot) > 0:
                chosen = (z, b)
        if chosen is None:
            raise UniformizationError("no order-6 vertex adjacent to tau2 and tau4")
        tau6, beta6 = chosen
        M = _mat(mu, w)
        R4 = _mat(qc.ONE + beta4, w)          # rotation by pi/2 about tau4
        omega = beta6 if beta6.trd() == 1 else -beta6
        R6 = _mat(qc.ONE + omega, w)          # rotation by pi/3 about tau6
        gens = []
        for R, n in ((R4, 4), (R6, 6)):
            P = mpmath.eye(2)
            for _ in range(1, n):
                P = P * R
                gens.append(P)
                gens.append(M * P * M**-1)
        tri = Triangle(dps=dps, tau2=tau2, tau4=tau4, tau6=tau6, mu=M, gens=gens)
        tri.A2 = disk(tau4, tau2) / _ratio_at_one(2)
        tri.A4 = disk(tau2, tau4) / _ratio_at_one(4)
        tri.A6 = disk(tau4, tau6) / _ratio_at_one(6)
    return tri


def _chart_params(chart):
    """(alpha, beta, gamma) of the local hypergeometric equation at a vertex.

    In the local parameter w (t, 1 - t, 1/t) the ratio of the two local
    solutions is r(w) = w^(1-gamma) F(alpha-gamma+1, beta-gamma+1; 2-gamma; w)
    / F(alpha, beta; gamma; w), with 1 - gamma = 1/n for a vertex of order n.
    """
    a, b, c = _params()
    if chart == 2:
        return a, b, c
    if chart == 4:
        return a, b, a + b - c + 1
    return b, b - c + 1, b - a + 1


def _ratio_at_one(chart):
    al, be, ga = _chart_params(chart)
    return _gauss(al - ga + 1, be - ga + 1, 2 - ga) / _gauss(al, be, ga)


def _phi(chart, w):
    """phi(w) = r(w)^n and its derivative.

    The Wronskian of the two local solutions gives
    phi'(w) = F2^(n-1) (1 - w)^(gamma - alpha - beta - 1) / F1^(n+1).
    """
    al, be, ga = _chart_params(chart)
    n = {2: 2, 4: 4, 6: 6}[chart]
    f1 = mpmath.hyp2f1(al, be, ga, w)
    f2 = mpmath.hyp2f1(al - ga + 1, be - ga + 1, 2 - ga, w)
    val = w * (f2 / f1) ** n
    der = f2 ** (n - 1) * (1 - w) ** (ga - al - be - 1) / f1 ** (n + 1)
    return val, der


def _newton(chart, Z, w, tol, maxsteps=60):
    for _ in range(maxsteps):
        val, der = _phi(chart, w)
        step = (val - Z) / der
        w = w - step
        if abs(step) < tol:
            return w
    raise UniformizationError(f"Newton iteration did not converge (chart {chart}, residual {abs(val - Z)})")


# --------------------------------------------------------------------------
# Reduction to the Dirichlet domain around tau2 and the inversion.
# --------------------------------------------------------------------------

def reduce_tau(tau, tri: Triangle, max_steps: int = 100000):
    """Move tau into the quadrilateral tau4, tau6, mu tau4, mu tau6 by greedy distance descent."""
    z = mpmath.mpc(tau)
    d = cosh_dist(z, tri.tau2)
    for _ in range(max_steps):
        best, bz = d, None
        for g in tri.gens:
            cand = moebius(g, z)
            dc = cosh_dist(cand, tri.tau2)
            if dc < best * (1 - mpmath.mpf(10) ** (-(tri.dps // 2))):
                best, bz = dc, cand
        if bz is None:
            return z
        z, d = bz, best
    raise UniformizationError(f"reduction did not terminate; last tau {z}")


def _track(chart, Z, steps=8):
    """Low-precision root of phi_chart(w) = Z, followed from w = 0 along the segment [0, Z]."""
    w = mpmath.mpc(0)
    try:
        with mpmath.workdps(20):
            for k in range(1, steps + 1):
                w = _newton(chart, Z * k / steps, w if k > 1 else Z / steps, mpmath.mpf(10) ** -15)
    except (UniformizationError, ZeroDivisionError):
        return None
    return w


def _refine(chart, Z, w, dps):
    with mpmath.workdps(dps):
        return _newton(chart, Z, mpmath.mpc(w), mpmath.mpf(10) ** (-(dps - 5)))


# A vertex chart is trusted for |w| < CHART_RADIUS; the centre chart is
# trusted away from its cut [1, oo), which the other two charts cover.
CHART_RADIUS = 0.8


def _chart_t(chart, Z, dps):
    if abs(Z) > 3:
        return None
    w = _track(chart, Z)
    if w is None:
        return None
    if chart == 2:
        if abs(1 - w) < 1 - CHART_RADIUS + 0.5 or abs(w) > 1 / CHART_RADIUS - 0.1:
            return None
        return _refine(2, Z, w, dps)
    if abs(w) > CHART_RADIUS:
        return None
    w = _refine(chart, Z, w, dps)
    return 1 - w if chart == 4 else (INFINITY if w == 0 else 1 / w)


def uniformizer_t(tau, precision: int = 50):
    """Hauptmodul value t(tau); INFINITY at the order-6 elliptic points."""
    if mpmath.im(tau) <= 0:
        raise ValueError("tau must lie in the upper half plane")
    tri = triangle(precision)
    w = precision + 15
    with mpmath.workdps(w):
        z = reduce_tau(mpmath.mpc(tau), tri)
        # z and mu z are the same point of the quotient; each vertex chart
        # uses whichever of the two lies nearer to its vertex
        zs = (z, moebius(tri.mu, z))
        near = {v: min(zs, key=lambda p: cosh_dist(p, vert)) for v, vert in ((4, tri.tau4), (6, tri.tau6))}
        dists = sorted([(cosh_dist(z, tri.tau2), 2), (cosh_dist(near[4], tri.tau4), 4),
                        (cosh_dist(near[6], tri.tau6), 6)], key=lambda p: p[0])
        eps = mpmath.mpf(10) ** (-(precision - 5))
        Z = {2: (disk(z, tri.tau2) / tri.A2) ** 2,
             4: (disk(near[4], tri.tau4) / tri.A4) ** 4,
             6: (disk(near[6], tri.tau6) / tri.A6) ** 6}
        if abs(Z[2]) < eps**2:
            return mpmath.mpc(0)
        if abs(Z[4]) < eps**4:
            return mpmath.mpc(1)
        if abs(Z[6]) < eps**6:
            return INFINITY
        for _, chart in dists:
            t = _chart_t(chart, Z[chart], w)
            if t is not None:
                break
        else:
            raise UniformizationError(f"no chart converged for reduced tau {mpmath.nstr(z, 20)}")
    if is_infinity(t):
        return t
    with mpmath.workdps(precision):
        return +mpmath.mpc(t)


def j_from_t(t):
    """j = 16 (t - 1) / 27."""
    if is_infinity(t):
        return INFINITY
    if isinstance(t, (int, Fraction)):
        return Fraction(16) * (Fraction(t) - 1) / 27
    return 16 * (t - 1) / 27


@dataclass(frozen=True)
class CMPoint:
    beta: qc.QuaternionElement
    tau: object
    t: object
    j: object


def cm_point(beta: qc.QuaternionElement, precision: int = 50) -> CMPoint:
    tau = fixed_point(beta, precision + 10)
    t = uniformizer_t(tau, precision)
    return CMPoint(beta=beta, tau=tau, t=t, j=j_from_t(t))


# --------------------------------------------------------------------------
# Heegner polynomials.
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class HeegnerPolynomial:
    D: int
    b: int
    coeffs: tuple          # integers, leading coefficient first
    roots: tuple = ()      # the j(a_i), high-precision complex
    h_prime: int = 0
    precision: int = 0
    height: int = 0

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def monic(self) -> list[Fraction]:
        return [Fraction(c, self.b) for c in self.coeffs]


def _to_fraction(x) -> Fraction:
    sign, man, exp, _ = mpmath.mpf(x)._mpf_
    v = Fraction(int(man)) * (Fraction(2) ** exp if exp >= 0 else Fraction(1, 2 ** (-exp)))
    return -v if sign else v


def _distinct_points(D, precision, height_cap):
    """Distinct j-values of E_6(D), searching embeddings by increasing height."""
    qd = quad_order_data(D)
    if qd.s == 0:
        raise ValueError(f"s(O_D) = 0 for D = {D}: no CM points on E_6")
    if not qd.h_prime_integral:
        raise ValueError(f"h' = {qd.h_prime} is not an integer for D = {D}")
    target = int(qd.h_prime)
    tri = triangle(precision)
    tol = mpmath.mpf(10) ** (-(precision // 3))
    seen_tau = []
    points = []
    H = HEIGHT_START
    done = set()
    while True:
        for beta in qc.embeddings_with_disc(D, H):
            if beta in done:
                continue
            done.add(beta)
            with mpmath.workdps(precision + 15):
                tau = fixed_point(beta, precision + 15)
                z = reduce_tau(tau, tri)
                # identify z and mu z (the rotation about tau2)
                zs = (z, moebius(tri.mu, z))
                if any(abs(zz - s) < tol for s in seen_tau for zz in zs):
                    continue
                seen_tau.extend(zs)
            t = uniformizer_t(tau, precision)
            if is_infinity(t):
                raise UniformizationError(f"D = {D} produced the order-6 elliptic point")
            if any(abs(t - p[1]) < tol * max(1, abs(t)) for p in points):
                continue
            points.append((beta, t))
        if len(points) == target:
            return points, H
        if len(points) > target:
            raise UniformizationError(f"found {len(points)} distinct points for D = {D}, expected {target}")
        if H >= height_cap:
            raise UniformizationError(
                f"only {len(points)} of {target} points for D = {D} at height cap {height_cap}")
        H *= 2


def _poly_from_roots(roots):
    coeffs = [mpmath.mpc(1)]
    for r in roots:
        nxt = coeffs + [mpmath.mpc(0)]
        for k in range(1, len(nxt)):
            nxt[k] -= r * coeffs[k - 1]
        coeffs = nxt
    return coeffs


def _reconstruct(roots, precision):
    """Rational coefficients of prod (x - r) by continued fractions, or None if unstable."""
    with mpmath.workdps(precision):
        cs = _poly_from_roots(roots)
        bound = 10 ** (precision // 3)
        tol = mpmath.mpf(10) ** (-(3 * precision // 4))
        out = []
        for c in cs:
            scale = max(1, abs(c))
            if abs(mpmath.im(c)) > tol * scale:
                return None
            fr = _to_fraction(mpmath.re(c)).limit_denominator(bound)
            if abs(mpmath.re(c) - mpmath.mpf(fr.numerator) / fr.denominator) > tol * scale:
                return None
            out.append(fr)
        return out


def _monic_at(D, precision, height_cap):
    pts, H = _distinct_points(D, precision, height_cap)
    with mpmath.workdps(precision):
        roots = [j_from_t(t) for _, t in pts]
    return _reconstruct(roots, precision), roots, H


def heegner_poly(D: int, precision: int = 60, height_cap: int = HEIGHT_CAP,
                 max_doublings: int = 2) -> HeegnerPolynomial:
    """P_D = b * prod (x - j(a_i)) with b the least positive integer making it integral.

    The rational coefficients must come out identical at the working
    precision and at twice that; otherwise the precision is doubled (at most
    ``max_doublings`` times) before giving up.
    """
    if precision < 30:
        raise ValueError("precision must be at least 30 digits")
    prec = precision
    lo = _monic_at(D, prec, height_cap)
    for _ in range(max_doublings + 1):
        hi = _monic_at(D, 2 * prec, height_cap)
        if lo[0] is not None and lo[0] == hi[0]:
            break
        prec *= 2
        lo = hi
    else:
        raise UniformizationError(f"rational reconstruction of P_{D} unstable up to {2 * prec} digits")
    monic, roots, H = lo
    b = 1
    for c in monic:
        b = b * c.denominator // math.gcd(b, c.denominator)
    coeffs = tuple(int(c * b) for c in monic)
    with mpmath.workdps(prec):
        for r in roots:
            val = mpmath.polyval([mpmath.mpf(c) for c in coeffs], r)
            scale = sum(abs(mpmath.mpf(c)) * max(1, abs(r)) ** k for k, c in enumerate(reversed(coeffs)))
            if abs(val) > scale * mpmath.mpf(10) ** (-(prec // 2)):
                raise UniformizationError(f"reconstructed P_{D} does not vanish at a computed root")
        roots = tuple(+r for r in roots)
    return HeegnerPolynomial(D=D, b=b, coeffs=coeffs, roots=roots, h_prime=len(roots),
                             precision=prec, height=H)


# --------------------------------------------------------------------------
# Table cache: one JSON object per line.
#   {"D": -52, "b": ..., "coeffs": ["..", ..], "h_prime": 1, "precision": 60,
#    "height": 8, "iota_fingerprint": "...", "status": "ok"}
# Coefficients are decimal strings, leading coefficient first.
# --------------------------------------------------------------------------

def _record(P: HeegnerPolynomial) -> dict:
    return {"D": P.D, "b": str(P.b), "coeffs": [str(c) for c in P.coeffs], "h_prime": P.h_prime,
            "precision": P.precision, "height": P.height,
            "iota_fingerprint": qc.iota_fingerprint(), "status": "ok"}


def record_to_poly(rec: dict) -> HeegnerPolynomial:
    return HeegnerPolynomial(D=int(rec["D"]), b=int(rec["b"]), coeffs=tuple(int(c) for c in rec["coeffs"]),
                             h_prime=int(rec["h_prime"]), precision=int(rec["precision"]),
                             height=int(rec.get("height", 0)))


def regenerate_table(D_list, precision: int, out_path, height_cap: int = HEIGHT_CAP,
                     max_doublings: int = 5) -> list[dict]:
    """Compute P_D for each D and write the cache file; failures are kept as status records."""
    recs = []
    for D in D_list:
        try:
            recs.append(_record(heegner_poly(D, precision, height_cap, max_doublings)))
        except (ValueError, UniformizationError) as exc:
            recs.append({"D": D, "status": f"error: {exc}"})
    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    with open(out_path, "w") as fh:
        for r in recs:
            fh.write(json.dumps(r, sort_keys=True) + "\n")
    return recs


def table_path() -> Path:
    env = os.environ.get(TABLE_ENV)
    return Path(env) if env else BUNDLED_TABLE


def load_table(path=None) -> dict:
    path = Path(path) if path else table_path()
    out = {}
    if not path.exists():
        return out
    fp = qc.iota_fingerprint()
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            rec = json.loads(line)
            if rec.get("status") != "ok" or rec.get("iota_fingerprint") != fp:
                continue
            out[int(rec["D"])] = record_to_poly(rec)
    return out


_TABLE_CACHE: dict = {}


def get_heegner_poly(D: int, precision: int = 60, use_table: bool = True,
                     max_doublings: int = 2) -> HeegnerPolynomial:
    """P_D from the table cache when present, else computed (and memoized in process)."""
    if use_table:
        key = str(table_path())
        if key not in _TABLE_CACHE:
            _TABLE_CACHE[key] = load_table()
        if D in _TABLE_CACHE[key]:
            return _TABLE_CACHE[key][D]
    return _heegner_memo(D, precision, max_doublings)


@functools.lru_cache(maxsize=256)
def _heegner_memo(D, precision, max_doublings):
    return heegner_poly(D, precision, max_doublings=max_doublings)
