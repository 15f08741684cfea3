"""Imaginary quadratic orders and the symbol calculus used throughout.

Class numbers come from reduced primitive binary quadratic forms; the
Eichler symbols, the embedding count s(O_D) and the Heegner-point count
h' = h / #W'' follow from them for the discriminant-6 quaternion order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from math import gcd, isqrt

import numpy as np
from sympy import factorint, isprime, primerange

from . import _kernels

DELTA_PRIMES = (2, 3)


class FamilyError(ValueError):
    """A prime l is not in the congruence class its discriminant family needs."""


# --------------------------------------------------------------------------
# Kronecker / Jacobi symbols.
# --------------------------------------------------------------------------

_TAB2 = (0, 1, 0, -1, 0, -1, 0, 1)


def kronecker(a: int, n: int) -> int:
    """Kronecker symbol (a/n) for arbitrary integers a, n."""
    a, n = int(a), int(n)
    if n == 0:
        return 1 if abs(a) == 1 else 0
    if a % 2 == 0 and n % 2 == 0:
        return 0
    v = 0
    while n % 2 == 0:
        n //= 2
        v += 1
    k = 1 if v % 2 == 0 else _TAB2[a & 7]
    if n < 0:
        n = -n
        if a < 0:
            k = -k
    # n odd positive: Jacobi symbol
    a %= n
    while a:
        v = 0
        while a % 2 == 0:
            a //= 2
            v += 1
        if v % 2 and _TAB2[n & 7] == -1:
            k = -k
        if a & n & 2:
            k = -k
        a, n = n % a, a
    return k if n == 1 else 0


@dataclass(frozen=True)
class SymbolStep:
    """One evaluated symbol of a reciprocity chain: (top / bottom) = value."""

    symbol: str
    top: int
    bottom: int
    value: int

    def as_dict(self) -> dict:
        return {"symbol": self.symbol, "top": str(self.top), "bottom": str(self.bottom),
                "value": self.value}


def jacobi_steps(a: int, n: int) -> tuple[int, list[SymbolStep]]:
    """Evaluate (a/n) by explicit reciprocity, recording every symbol visited.

    n must be odd and positive.  The chain splits off the sign of a, the power
    of 2, applies the supplementary laws, flips with quadratic reciprocity
    and reduces modulo the new denominator.  Each recorded step is a true
    identity (top/bottom) = value, so a verifier can recheck rows one by one.
    This is deliberately a separate code path from :func:`kronecker`.
    """
    a, n = int(a), int(n)
    if n <= 0 or n % 2 == 0:
        raise ValueError("jacobi_steps needs an odd positive denominator")
    frames = []  # (kind, top, bottom)
    top, bot = a, n
    sign = 1
    while True:
        top_red = top % bot
        frames.append(("reduce", top, bot))
        top = top_red
        if bot == 1:
            break
        if top == 0:
            sign = 0
            break
        v = 0
        while top % 2 == 0:
            top //= 2
            v += 1
        if v % 2:
            s2 = 1 if bot % 8 in (1, 7) else -1
            frames.append(("second supplement", 2, bot))
            sign *= s2
        if top == 1:
            break
        # quadratic reciprocity for odd coprime-or-not top, bot
        if gcd(top, bot) != 1:
            sign = 0
            break
        if top % 4 == 3 and bot % 4 == 3:
            sign = -sign
        frames.append(("reciprocity", top, bot))
        top, bot = bot, top
    value = sign
    steps = [SymbolStep(kind, t, b, _kronecker_by_euler(t, b)) for kind, t, b in frames]
    steps.append(SymbolStep("result", a, n, value))
    return value, steps


def _kronecker_by_euler(a: int, n: int) -> int:
    # value of a recorded row, through the Kronecker routine; used only to
    # annotate the transcript, never to decide the chain's result
    return kronecker(a, n)


def legendre_by_euler(a: int, p: int) -> int:
    """(a/p) for an odd prime p from Euler's criterion."""
    r = pow(a % p, (p - 1) // 2, p)
    return 0 if r == 0 else (1 if r == 1 else -1)


# --------------------------------------------------------------------------
# Square predicate.
# --------------------------------------------------------------------------

def _is_square_mod_prime_power(a: int, p: int, k: int) -> bool:
    m = p**k
    a %= m
    if a == 0:
        return True
    v = 0
    while a % p == 0:
        a //= p
        v += 1
    if v % 2:
        return False
    r = k - v
    if p == 2:
        if r >= 3:
            return a % 8 == 1
        if r == 2:
            return a % 4 == 1
        return True
    return legendre_by_euler(a, p) == 1


def is_square_mod(a: int, m: int) -> bool:
    """True iff x^2 = a (mod m) is solvable."""
    if m < 1:
        raise ValueError("modulus must be positive")
    if m == 1:
        return True
    return all(_is_square_mod_prime_power(a, p, k) for p, k in factorint(m).items())


# --------------------------------------------------------------------------
# Forms and class numbers.
# --------------------------------------------------------------------------

@dataclass(frozen=True, order=True)
class ReducedForm:
    """Positive definite form a x^2 + b x y + c y^2 with |b| <= a <= c, b >= 0 if |b| = a or a = c."""

    a: int
    b: int
    c: int

    @property
    def disc(self) -> int:
        return self.b * self.b - 4 * self.a * self.c


def reduce_form(a: int, b: int, c: int) -> ReducedForm:
    """Reduce a positive definite form to the unique reduced form in its class."""
    if b * b - 4 * a * c >= 0 or a <= 0:
        raise ValueError("form is not positive definite")
    while True:
        if b > a or b <= -a:
            # translate b into (-a, a]
            k = (a - b) // (2 * a)
            c = a * k * k + b * k + c
            b = b + 2 * a * k
        if a > c:
            a, b, c = c, -b, a
            continue
        if a == c and b < 0:
            b = -b
        return ReducedForm(a, b, c)


def class_number(D: int) -> tuple[int, list[ReducedForm]]:
    """Number of reduced primitive forms of discriminant D < 0, and the forms."""
    if D >= 0 or D % 4 not in (0, 1):
        raise ValueError(f"{D} is not a negative discriminant")
    forms = []
    amax = isqrt(-D // 3)
    for a in range(1, amax + 1):
        for b in range(-a + 1, a + 1):
            if (b - D) % 2:
                continue
            num = b * b - D
            if num % (4 * a):
                continue
            c = num // (4 * a)
            if c < a or (c == a and b < 0):
                continue
            if gcd(gcd(a, b), c) != 1:
                continue
            forms.append(ReducedForm(a, b, c))
    return len(forms), forms


def class_number_table(Dmax: int) -> np.ndarray:
    """h(-n) for 0 <= n <= Dmax in one pass (zero where -n is not a discriminant)."""
    return _kernels.class_number_table(Dmax)


def fundamental_part(D: int) -> tuple[int, int]:
    """(d_K, f) with D = d_K f^2 and d_K a fundamental discriminant."""
    if D % 4 not in (0, 1) or D == 0:
        raise ValueError(f"{D} is not a discriminant")
    fac = factorint(abs(D))
    f = 1
    for p, e in fac.items():
        f *= p ** (e // 2)
    d = D // (f * f)
    if d % 4 != 1:
        # d is 2, 3 mod 4 (times a square-free part): move a factor 2 back
        d *= 4
        f //= 2
    return d, f


def is_fundamental(D: int) -> bool:
    try:
        return fundamental_part(D)[1] == 1
    except ValueError:
        return False


def eichler_symbol(D: int, p: int) -> int:
    """1 if p divides the conductor of O_D, else the Kronecker symbol (d_K / p)."""
    dK, f = fundamental_part(D)
    if f % p == 0:
        return 1
    return kronecker(dK, p)


@dataclass(frozen=True)
class QuadOrderData:
    D: int
    h: int
    eichler_2: int
    eichler_3: int
    s: int
    w2_size: int
    h_prime: Fraction
    conductor: int
    fundamental_disc: int

    @property
    def h_prime_integral(self) -> bool:
        return self.h_prime.denominator == 1


def quad_order_data(D: int) -> QuadOrderData:
    h, _ = class_number(D)
    dK, f = fundamental_part(D)
    e2 = eichler_symbol(D, 2)
    e3 = eichler_symbol(D, 3)
    s = h * (1 - e2) * (1 - e3)
    ram = sum(1 for p in DELTA_PRIMES if dK % p == 0 and f % p != 0)
    w2 = 2**ram
    return QuadOrderData(D=D, h=h, eichler_2=e2, eichler_3=e3, s=s, w2_size=w2,
                         h_prime=Fraction(h, w2), conductor=f, fundamental_disc=dK)


# --------------------------------------------------------------------------
# The three discriminant families and their parity table.
# --------------------------------------------------------------------------

FAMILIES = {
    # name: (residue of l mod 24, D as a function of l, h mod 4 or None, parity of h')
    "4l13": (13, lambda l: -4 * l, 2, 1),
    "l19": (19, lambda l: -l, None, 1),
    "3l1": (1, lambda l: -3 * l, 0, 0),
}
FAMILY_ROWS = {
    "4l13": "-4l, l = 13 mod 24",
    "l19": "-l, l = 19 mod 24",
    "3l1": "-3l, l = 1 mod 24",
}


def family_of(D: int):
    """(family name, l) when D is in one of the three families, else None."""
    for name, (res, fn, _, _) in FAMILIES.items():
        mult = {"4l13": 4, "l19": 1, "3l1": 3}[name]
        if D % mult == 0:
            l = -D // mult
            if l > 3 and l % 24 == res and isprime(l):
                return name, l
    return None


def parity_check(family: str, l: int) -> dict:
    """Compare h mod 4 (where tabulated) and the parity of h' with the table row."""
    if family not in FAMILIES:
        raise FamilyError(f"unknown family {family!r}")
    res, fn, hmod4, hp_par = FAMILIES[family]
    if l < 5 or l % 24 != res or not isprime(l):
        raise FamilyError(f"l = {l} is not a prime = {res} mod 24")
    data = quad_order_data(fn(l))
    problems = []
    if not data.h_prime_integral:
        problems.append(f"h' = {data.h_prime} is not an integer")
    elif int(data.h_prime) % 2 != hp_par:
        problems.append(f"h' = {data.h_prime} has the wrong parity")
    if hmod4 is not None and data.h % 4 != hmod4:
        problems.append(f"h = {data.h} is not {hmod4} mod 4")
    if hmod4 is None and data.h % 2 != 1:
        problems.append(f"h = {data.h} is not odd")
    return {
        "family": family, "row": FAMILY_ROWS[family], "l": l, "D": data.D, "h": data.h,
        "h_prime": int(data.h_prime) if data.h_prime_integral else str(data.h_prime),
        "status": "violation" if problems else "consistent", "problems": problems,
    }


# --------------------------------------------------------------------------
# Real quadratic units and the equidistribution diagnostic.
# --------------------------------------------------------------------------

def fundamental_unit(m: int) -> tuple[int, int]:
    """Least unit a + b sqrt(m) > 1 of Z[sqrt(m)] (norm +1 or -1)."""
    if m <= 1 or isqrt(m) ** 2 == m:
        raise ValueError("m must be a non-square integer > 1")
    b = 1
    while True:
        for sgn in (-1, 1):
            v = m * b * b + sgn
            a = isqrt(v)
            if a > 0 and a * a == v:
                return a, b
        b += 1


@dataclass(frozen=True)
class UnitLogPair:
    l: int
    u1: float
    u3: float


def _half_log_ratio(a: int, b: int, m: int) -> float:
    r = math.sqrt(m)
    return 0.5 * math.log(abs((a + b * r) / (a - b * r)))


def split_primes(bound: int) -> list[int]:
    return [l for l in primerange(5, bound) if kronecker(8, l) == 1 and kronecker(24, l) == 1]


def equidist_diagnostic(bound: int, grid: int = 64):
    """Normalized unit-log pairs of primes split in Q(sqrt 2) and Q(sqrt 6), and their star discrepancy.

    Each coordinate is (1/2) ln|pi / pi'| reduced modulo ln(epsilon) and scaled
    to [0, 1).  A rational prime l lies under four primes of the compositum,
    whose images are the four sign variants (+-u1, +-u3); the discrepancy is
    taken over all of them.
    """
    if bound < 10:
        raise ValueError("bound must be at least 10")
    ls = split_primes(bound)
    out = []
    pts = []
    for m, col in ((2, 0), (6, 1)):
        ea, eb = fundamental_unit(m)
        eps = ea + eb * math.sqrt(m)
        bmax = isqrt(int(bound * eps / m)) + 2
        sol = _kernels.norm_equation_search(ls, m, bmax)
        if (sol[:, 0] < 0).any():
            missing = [l for l, s in zip(ls, sol) if s[0] < 0]
            raise RuntimeError(f"norm equation unsolved for {missing[:5]} (m={m})")
        vals = [(_half_log_ratio(int(a), int(b), m) / math.log(eps)) % 1.0 for a, b in sol]
        pts.append(vals)
    for l, u1, u3 in zip(ls, pts[0], pts[1]):
        out.append(UnitLogPair(l=l, u1=u1, u3=u3))
    cloud = []
    for p in out:
        for s1 in (1, -1):
            for s3 in (1, -1):
                cloud.append(((s1 * p.u1) % 1.0, (s3 * p.u3) % 1.0))
    disc = _kernels.star_discrepancy(np.array(cloud), grid) if cloud else 1.0
    return out, disc
