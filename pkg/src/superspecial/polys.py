"""Exact univariate polynomial helpers over Q.

Polynomials are tuples of Fractions, leading coefficient first.  Root
isolation, resultants and factorization are delegated to sympy.
"""

from __future__ import annotations

from fractions import Fraction
from functools import reduce
from math import gcd

import sympy
from sympy import Poly, QQ, ZZ, symbols

X = symbols("x")


class PolyParseError(ValueError):
    pass


# --------------------------------------------------------------------------
# A small recursive-descent parser for sums of c*x^k terms.
#
#   poly   := term (('+' | '-') term)*
#   term   := ['+' | '-'] factor ('*' factor)*
#   factor := number ['/' number] | 'x' ['^' integer] | '(' poly ')'
#
# Parenthesized sub-expressions may be multiplied, so "(x-1)*(x+2)" works.
# --------------------------------------------------------------------------

class _Parser:
    def __init__(self, text: str):
        self.s = text.replace(" ", "").replace("**", "^")
        self.i = 0

    def peek(self):
        return self.s[self.i] if self.i < len(self.s) else ""

    def take(self, ch):
        if self.peek() != ch:
            raise PolyParseError(f"expected {ch!r} at position {self.i} in {self.s!r}")
        self.i += 1

    def parse(self) -> dict:
        if not self.s:
            raise PolyParseError("empty polynomial")
        p = self.poly()
        if self.i != len(self.s):
            raise PolyParseError(f"unexpected {self.peek()!r} at position {self.i}")
        return p

    def poly(self) -> dict:
        acc = self.term()
        while self.peek() in ("+", "-"):
            sign = 1 if self.peek() == "+" else -1
            self.i += 1
            acc = _add(acc, _scale(self.term(), sign))
        return acc

    def term(self) -> dict:
        sign = 1
        while self.peek() in ("+", "-"):
            if self.peek() == "-":
                sign = -sign
            self.i += 1
        acc = self.factor()
        while self.peek() == "*":
            self.i += 1
            acc = _mul(acc, self.factor())
        return _scale(acc, sign)

    def integer(self) -> int:
        start = self.i
        while self.peek().isdigit():
            self.i += 1
        if start == self.i:
            raise PolyParseError(f"expected a number at position {start}")
        return int(self.s[start:self.i])

    def factor(self) -> dict:
        ch = self.peek()
        if ch == "(":
            self.i += 1
            p = self.poly()
            self.take(")")
            if self.peek() == "^":
                self.i += 1
                e = self.integer()
                out = {0: Fraction(1)}
                for _ in range(e):
                    out = _mul(out, p)
                return out
            return p
        if ch == "x":
            self.i += 1
            e = 1
            if self.peek() == "^":
                self.i += 1
                e = self.integer()
            return {e: Fraction(1)}
        if ch.isdigit():
            start = self.i
            self.integer()
            if self.peek() == ".":
                self.i += 1
                self.integer()
            val = Fraction(self.s[start:self.i])
            if self.peek() == "/":
                self.i += 1
                den = self.integer()
                if den == 0:
                    raise PolyParseError("division by zero")
                val /= den
            return {0: val}
        raise PolyParseError(f"unexpected {ch!r} at position {self.i}")


def _add(p, q):
    out = dict(p)
    for k, v in q.items():
        out[k] = out.get(k, 0) + v
    return out


def _scale(p, c):
    return {k: v * c for k, v in p.items()}


def _mul(p, q):
    out = {}
    for a, u in p.items():
        for b, v in q.items():
            out[a + b] = out.get(a + b, 0) + u * v
    return out


def parse_poly(text: str) -> tuple[Fraction, ...]:
    """Coefficients (leading first) of an expression such as "x^2 - 3/4*x + 1"."""
    terms = _Parser(text).parse()
    terms = {k: Fraction(v) for k, v in terms.items() if v != 0}
    if not terms:
        raise PolyParseError("polynomial is zero")
    deg = max(terms)
    return tuple(terms.get(k, Fraction(0)) for k in range(deg, -1, -1))


def format_poly(coeffs) -> str:
    """Inverse of parse_poly (canonical ASCII form)."""
    deg = len(coeffs) - 1
    parts = []
    for i, c in enumerate(coeffs):
        c = Fraction(c)
        if c == 0:
            continue
        k = deg - i
        mon = "" if k == 0 else ("x" if k == 1 else f"x^{k}")
        mag = abs(c)
        if mon and mag == 1:
            body = mon
        elif mon:
            body = f"{mag}*{mon}"
        else:
            body = str(mag)
        parts.append(("-" if c < 0 else "+") + body)
    if not parts:
        return "0"
    s = "".join(parts)
    return s[1:] if s[0] == "+" else s


# --------------------------------------------------------------------------
# Conversions and basic arithmetic.
# --------------------------------------------------------------------------

def to_sympy(coeffs, domain=QQ) -> Poly:
    return Poly([sympy.Rational(c.numerator, c.denominator) if isinstance(c, Fraction) else sympy.Integer(c)
                 for c in coeffs], X, domain=domain)


def from_sympy(p: Poly) -> tuple[Fraction, ...]:
    return tuple(Fraction(int(c.p), int(c.q)) for c in p.all_coeffs())


def evaluate(coeffs, x):
    acc = 0
    for c in coeffs:
        acc = acc * x + c
    return acc


def resultant(f, g) -> Fraction:
    r = sympy.resultant(to_sympy(f).as_expr(), to_sympy(g).as_expr(), X)
    r = sympy.Rational(r)
    return Fraction(int(r.p), int(r.q))


def norm_value(f, g) -> Fraction:
    """prod g(alpha) over the roots alpha of f (with multiplicity).

    Computed as the determinant of multiplication by g on Q[x]/(f), in exact
    rationals.  sympy's resultant is not used here: its sign on rational
    inputs does not follow a single convention.
    """
    f = [Fraction(c) for c in f]
    m = len(f) - 1
    if m == 0:
        return Fraction(1)
    mon = [c / f[0] for c in f]

    def reduce_mod(p):
        p = list(p)
        while len(p) > m:
            c = p.pop(0)
            if c:
                for k in range(1, m + 1):
                    p[k - 1] -= c * mon[k]
        return [Fraction(0)] * (m - len(p)) + p

    row = reduce_mod([Fraction(c) for c in g])
    cols = []
    for _ in range(m):
        cols.append(row[::-1])
        row = reduce_mod(row + [Fraction(0)])
    d = sympy.Matrix([[sympy.Rational(c.numerator, c.denominator) for c in col] for col in cols]).det()
    return Fraction(int(d.p), int(d.q))


def is_irreducible(coeffs) -> bool:
    return to_sympy(coeffs).is_irreducible


def is_squarefree(coeffs) -> bool:
    return to_sympy(coeffs).is_sqf


def compose_affine(coeffs, a, b):
    """Coefficients of f(a*y + b) in y."""
    p = to_sympy(coeffs).as_expr().subs(X, a * X + b)
    return from_sympy(Poly(sympy.expand(p), X, domain=QQ))


# --------------------------------------------------------------------------
# p-adic valuations and Newton polygons.
# --------------------------------------------------------------------------

def vp(x, p: int):
    """p-adic valuation of a nonzero rational (None for 0, meaning +infinity)."""
    x = Fraction(x)
    if x == 0:
        return None
    v = 0
    n, d = x.numerator, x.denominator
    while n % p == 0:
        n //= p
        v += 1
    while d % p == 0:
        d //= p
        v -= 1
    return v


def newton_polygon(coeffs, p: int) -> list[tuple[Fraction, int]]:
    """Root valuations of a polynomial at p as (valuation, multiplicity) pairs.

    Points (k, v_p(a_k)) for the coefficient a_k of x^k; a segment of the
    lower convex hull of slope m spanning r units carries r roots of
    valuation -m.  Zero roots (a_0 = 0) are reported with valuation None.
    """
    deg = len(coeffs) - 1
    pts = []
    for i, c in enumerate(coeffs):
        v = vp(c, p)
        if v is not None:
            pts.append((deg - i, v))
    pts.sort()
    out: list = []
    k0 = pts[0][0]
    if k0 > 0:
        out.append((None, k0))
    hull = []
    for pt in pts:
        while len(hull) >= 2:
            (x1, y1), (x2, y2) = hull[-2], hull[-1]
            # drop hull[-1] if it lies on or above the segment hull[-2] -> pt
            if (y2 - y1) * (pt[0] - x1) >= (pt[1] - y1) * (x2 - x1):
                hull.pop()
            else:
                break
        hull.append(pt)
    for (x1, y1), (x2, y2) in zip(hull, hull[1:]):
        slope = Fraction(y2 - y1, x2 - x1)
        out.append((-slope, x2 - x1))
    return out


def root_valuations(coeffs, p: int) -> list:
    """Multiset of valuations of the roots (one entry per root)."""
    out = []
    for v, m in newton_polygon(coeffs, p):
        out.extend([v] * m)
    return out


# --------------------------------------------------------------------------
# Real roots.
# --------------------------------------------------------------------------

def real_root_intervals(coeffs) -> list[tuple[Fraction, Fraction]]:
    """Disjoint rational isolating intervals of the distinct real roots, ascending."""
    p = to_sympy(coeffs).sqf_part()
    out = []
    for (a, b), _ in p.intervals():
        out.append((Fraction(int(a.p), int(a.q)), Fraction(int(b.p), int(b.q))))
    return out


def merged_real_roots(polys: dict) -> list[tuple[str, tuple[Fraction, Fraction]]]:
    """Real roots of several polynomials in ascending order, tagged by key.

    Roots shared by two polynomials raise ValueError (positions would be
    ambiguous).  Each polynomial is replaced by its squarefree part.
    """
    keys = list(polys)
    exprs = [to_sympy(polys[k]).sqf_part() for k in keys]
    ivs = sympy.intervals(exprs)
    out = []
    for (a, b), idx in ivs:
        if len(idx) != 1:
            raise ValueError("polynomials share a real root")
        (k,) = idx.keys()
        out.append((keys[k], (Fraction(int(a.p), int(a.q)), Fraction(int(b.p), int(b.q)))))
    return out


def count_roots_between(coeffs, lo, hi) -> int:
    """Sturm count of real roots in [lo, hi] (None for an infinite end)."""
    p = to_sympy(coeffs)
    conv = lambda v: None if v is None else sympy.Rational(Fraction(v).numerator, Fraction(v).denominator)
    return int(p.count_roots(conv(lo), conv(hi)))


def lcm_denominator(coeffs) -> int:
    return reduce(lambda a, b: a * b // gcd(a, b), (Fraction(c).denominator for c in coeffs), 1)


__all__ = ["parse_poly", "format_poly", "to_sympy", "from_sympy", "evaluate", "resultant", "norm_value",
           "is_irreducible", "is_squarefree", "compose_affine", "vp", "newton_polygon",
           "root_valuations", "real_root_intervals", "merged_real_roots", "count_roots_between",
           "lcm_denominator", "PolyParseError", "ZZ"]
