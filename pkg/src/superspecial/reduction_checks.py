"""Structural constraints on Heegner polynomials P_D.

Shapes modulo 2 and 3, unpaired roots modulo l, the intersection-avoidance
square test at 2 and 3, local intersection numbers on P^1 over Z_(p), and
the real-root counts in I1 = (-oo, -16/27), I2 = (-16/27, 0), I3 = (0, oo).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from sympy import GF, Poly, isprime
from sympy.polys.galoistools import gf_gcd, gf_pow_mod, gf_sub

from . import polys
from .cm_uniformization import INFINITY, HeegnerPolynomial, is_infinity
from .quadratic_arith import family_of, is_square_mod

ELLIPTIC_J = Fraction(-16, 27)

# Expected data per family: (mod 2 shape, mod 3 shape, unpaired divisor, interval stars)
FAMILY_TABLE = {
    "4l13": ("x^h'", "±x^h'", "(-16/27)", (0, 1, 0)),
    "l19": ("1", "±x^h'", "(-16/27)", (0, 0, 1)),
    "3l1": ("1", "±1", "empty", (1, 0, 1)),
}


class EndpointRootError(ValueError):
    """A root sits exactly on -16/27 or 0."""


# --------------------------------------------------------------------------
# Shapes modulo 2 and 3.
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class ModShape:
    p: int
    tag: str             # "x^h'", "±x^h'", "1", "±1" or "other"
    sign: int            # observed sign mod 3 (+1/-1), 0 when not applicable
    residue: tuple       # the reduced coefficients, leading first (trimmed)


def mod_shape(P: HeegnerPolynomial, p: int) -> ModShape:
    if p not in (2, 3):
        raise ValueError("mod_shape is defined for p = 2, 3")
    red = [c % p for c in P.coeffs]
    while red and red[0] == 0:
        red.pop(0)
    red = tuple(red)
    h = P.degree
    sign = 0
    if len(red) == h + 1 and all(c == 0 for c in red[1:]):
        tag = "x^h'" if p == 2 else "±x^h'"
        sign = 1 if red[0] == 1 else -1
    elif len(red) == 1:
        tag = "1" if p == 2 else "±1"
        sign = 1 if red[0] == 1 else -1
    else:
        tag = "other"
    if p == 2:
        sign = 0
    # a constant polynomial (h' = 0) never occurs for the supported families
    return ModShape(p=p, tag=tag, sign=sign, residue=red)


# --------------------------------------------------------------------------
# Unpaired roots modulo l.
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class UnpairedDivisor:
    l: int
    residues: tuple      # F_l residues (ints) and possibly INFINITY, sorted with INFINITY last

    @property
    def is_empty(self) -> bool:
        return not self.residues


def unpaired_divisor(P: HeegnerPolynomial, l: int) -> UnpairedDivisor:
    """F_l-rational roots of odd multiplicity of P mod l (degree drop counts at infinity)."""
    if l < 5 or not isprime(l):
        raise ValueError("unpaired_divisor needs a prime l >= 5")
    f = Poly([c % l for c in P.coeffs], polys.X, domain=GF(l))
    drop = P.degree - f.degree() if not f.is_zero else P.degree
    odd_part = Poly(1, polys.X, domain=GF(l))
    if f.degree() > 0:
        _, factors = f.sqf_list()
        for g, m in factors:
            if m % 2 == 1:
                odd_part = odd_part * g
    residues = []
    if odd_part.degree() > 0:
        dom = GF(l).dom
        g = [int(c) % l for c in odd_part.all_coeffs()]
        # gcd with x^l - x extracts the F_l-rational roots
        xl = gf_pow_mod([1, 0], l, g, l, dom)
        split = gf_gcd(g, gf_sub(xl, [1, 0], l, dom), l, dom)
        if len(split) > 1:
            sp = Poly(split, polys.X, domain=GF(l))
            residues = sorted(r for r in range(l) if sp.eval(r) % l == 0)
    out = tuple(int(r) for r in residues)
    if drop % 2 == 1:
        out = out + (INFINITY,)
    return UnpairedDivisor(l=l, residues=out)


def elliptic_residue(l: int) -> int:
    """-16/27 reduced modulo l."""
    return (-16 * pow(27, -1, l)) % l


# --------------------------------------------------------------------------
# Intersection avoidance and local intersection numbers.
# --------------------------------------------------------------------------

def avoid_intersection(D: int, p: int, anchor: int) -> str:
    """'avoids' when -3D (anchor -3) or -4D (anchor -4) is not a square modulo 24p."""
    if anchor == -3:
        if D % 3 == 0:
            raise ValueError("anchor -3 needs 3 not dividing D")
        a = -3 * D
    elif anchor == -4:
        if D % 2 == 0:
            raise ValueError("anchor -4 needs D odd")
        a = -4 * D
    else:
        raise ValueError("anchor must be -3 or -4")
    if not isprime(p):
        raise ValueError(f"{p} is not prime")
    return "may_meet" if is_square_mod(a, 24 * p) else "avoids"


def local_intersection(x, y, p: int) -> int:
    """Intersection number at p of the sections x, y of P^1 (rationals or INFINITY)."""
    if (is_infinity(x) and is_infinity(y)) or (not is_infinity(x) and not is_infinity(y) and Fraction(x) == Fraction(y)):
        raise ValueError("points must be distinct")

    def at_infinity(v):
        # a point reduces to infinity mod p when it has a pole there
        return is_infinity(v) or (Fraction(v) != 0 and polys.vp(v, p) < 0)

    xi, yi = at_infinity(x), at_infinity(y)
    if not xi and not yi:
        return polys.vp(Fraction(x) - Fraction(y), p)
    if xi and yi:
        inv = lambda v: Fraction(0) if is_infinity(v) else 1 / Fraction(v)
        return polys.vp(inv(x) - inv(y), p)
    return 0


# --------------------------------------------------------------------------
# Real-root interval profile.
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class IntervalProfile:
    counts: tuple        # (n1, n2, n3)
    total_real: int

    @property
    def stars(self) -> tuple:
        return tuple(1 if c else 0 for c in self.counts)


def interval_profile(P: HeegnerPolynomial) -> IntervalProfile:
    coeffs = P.coeffs
    if polys.evaluate(coeffs, ELLIPTIC_J) == 0 or polys.evaluate(coeffs, Fraction(0)) == 0:
        raise EndpointRootError("P_D has a root at -16/27 or 0")
    n1 = polys.count_roots_between(coeffs, None, ELLIPTIC_J)
    n2 = polys.count_roots_between(coeffs, ELLIPTIC_J, 0)
    n3 = polys.count_roots_between(coeffs, 0, None)
    return IntervalProfile(counts=(n1, n2, n3), total_real=n1 + n2 + n3)


def roots_in(P: HeegnerPolynomial, lo, hi) -> int:
    """Sturm count of real roots of P in the closed rational interval [lo, hi]."""
    return polys.count_roots_between(P.coeffs, lo, hi)


# --------------------------------------------------------------------------
# All checks for one discriminant.
# --------------------------------------------------------------------------

@dataclass
class CheckRow:
    name: str
    expected: str
    observed: str
    ok: bool
    row: str = ""        # the table row the check validates

    def as_dict(self) -> dict:
        return {"check": self.name, "expected": self.expected, "observed": self.observed,
                "ok": self.ok, "row": self.row}


@dataclass
class CheckReport:
    D: int
    family: str | None
    l: int | None
    rows: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(r.ok for r in self.rows)


def _fmt_divisor(div: UnpairedDivisor, l: int) -> str:
    if div.is_empty:
        return "empty"
    e = elliptic_residue(l)
    return ", ".join("(-16/27)" if r == e else ("inf" if is_infinity(r) else str(r)) for r in div.residues)


def run_checks(P: HeegnerPolynomial) -> CheckReport:
    """Degree, mod-2/mod-3 shapes, unpaired divisor mod l and interval profile of P_D."""
    fam = family_of(P.D)
    if fam is None:
        raise ValueError(f"D = {P.D} is not in one of the families -4l (l = 13), -l (l = 19), -3l (l = 1 mod 24)")
    name, l = fam
    m2, m3, div_exp, stars = FAMILY_TABLE[name]
    rep = CheckReport(D=P.D, family=name, l=l)
    from .quadratic_arith import FAMILY_ROWS, quad_order_data
    row = FAMILY_ROWS[name]
    hp = quad_order_data(P.D).h_prime
    rep.rows.append(CheckRow("degree = h'", str(hp), str(P.degree), P.degree == hp, row))
    s2, s3 = mod_shape(P, 2), mod_shape(P, 3)
    rep.rows.append(CheckRow("P_D mod 2", m2, s2.tag, s2.tag == m2, row))
    obs3 = s3.tag + (f" (sign {'+' if s3.sign > 0 else '-'})" if s3.sign else "")
    rep.rows.append(CheckRow("P_D mod 3", m3, obs3, s3.tag == m3, row))
    div = unpaired_divisor(P, l)
    obs = _fmt_divisor(div, l)
    rep.rows.append(CheckRow(f"unpaired roots mod {l}", div_exp, obs, obs == div_exp, row))
    try:
        prof = interval_profile(P)
        ok = bool(prof.stars == stars and max(prof.counts) <= 1)
        obs = f"{prof.counts}"
    except EndpointRootError as exc:
        ok, obs = False, str(exc)
    rep.rows.append(CheckRow("real roots in (I1, I2, I3)", str(stars), obs, ok, row))
    return rep
