"""Exact arithmetic in the rational quaternion algebra of discriminant 6.

The algebra is presented as B = (-1, 3 / Q): basis 1, i, j, ij with
i^2 = -1, j^2 = 3 and ij = -ji.  It is ramified exactly at 2 and 3.
"""

from __future__ import annotations

import hashlib
import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import isqrt

import mpmath

from . import _kernels

A_PARAM = -1
B_PARAM = 3


def _frac(v) -> Fraction:
    return v if isinstance(v, Fraction) else Fraction(v)


@dataclass(frozen=True)
class QuaternionElement:
    """w + x*i + y*j + z*ij with exact rational coordinates."""

    w: Fraction = Fraction(0)
    x: Fraction = Fraction(0)
    y: Fraction = Fraction(0)
    z: Fraction = Fraction(0)

    def __post_init__(self):
        for name in ("w", "x", "y", "z"):
            object.__setattr__(self, name, _frac(getattr(self, name)))

    @classmethod
    def scalar(cls, c) -> QuaternionElement:
        return cls(c, 0, 0, 0)

    @property
    def coords(self) -> tuple[Fraction, Fraction, Fraction, Fraction]:
        return (self.w, self.x, self.y, self.z)

    def __add__(self, other):
        other = _coerce(other)
        return QuaternionElement(*(a + b for a, b in zip(self.coords, other.coords)))

    __radd__ = __add__

    def __neg__(self):
        return QuaternionElement(-self.w, -self.x, -self.y, -self.z)

    def __sub__(self, other):
        return self + (-_coerce(other))

    def __rsub__(self, other):
        return _coerce(other) - self

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return QuaternionElement(*(c * other for c in self.coords))
        return multiply(self, other)

    def __rmul__(self, other):
        if isinstance(other, (int, Fraction)):
            return QuaternionElement(*(c * other for c in self.coords))
        return multiply(_coerce(other), self)

    def __truediv__(self, c):
        c = _frac(c)
        return QuaternionElement(*(v / c for v in self.coords))

    def conjugate(self) -> QuaternionElement:
        return QuaternionElement(self.w, -self.x, -self.y, -self.z)

    def trd(self) -> Fraction:
        return 2 * self.w

    def nrd(self) -> Fraction:
        return (self.w**2 - A_PARAM * self.x**2 - B_PARAM * self.y**2
                + A_PARAM * B_PARAM * self.z**2)

    def inverse(self) -> QuaternionElement:
        n = self.nrd()
        if n == 0:
            raise ZeroDivisionError("element has zero reduced norm")
        return self.conjugate() / n

    def disc(self) -> Fraction:
        """trd^2 - 4 nrd, the discriminant of the quadratic order Z[self]."""
        return self.trd() ** 2 - 4 * self.nrd()

    def is_integral(self) -> bool:
        return self.trd().denominator == 1 and self.nrd().denominator == 1

    def __repr__(self):
        return "Q({}, {}, {}, {})".format(*(str(c) for c in self.coords))


def _coerce(v) -> QuaternionElement:
    if isinstance(v, QuaternionElement):
        return v
    return QuaternionElement.scalar(v)


ONE = QuaternionElement(1, 0, 0, 0)
I = QuaternionElement(0, 1, 0, 0)
J = QuaternionElement(0, 0, 1, 0)
K = QuaternionElement(0, 0, 0, 1)


def multiply(a: QuaternionElement, b: QuaternionElement) -> QuaternionElement:
    """Product in (a, b / Q) with i^2 = a, j^2 = b, ij = -ji = k, k^2 = -ab."""
    a1, b1, c1, d1 = a.coords
    a2, b2, c2, d2 = b.coords
    A, B = A_PARAM, B_PARAM
    return QuaternionElement(
        a1 * a2 + A * b1 * b2 + B * c1 * c2 - A * B * d1 * d2,
        a1 * b2 + b1 * a2 - B * c1 * d2 + B * d1 * c2,
        a1 * c2 + c1 * a2 + A * b1 * d2 - A * d1 * b2,
        a1 * d2 + d1 * a2 + b1 * c2 - c1 * b2,
    )


# --------------------------------------------------------------------------
# Lattices of B, stored as a Z-basis of four elements in Hermite normal form.
# --------------------------------------------------------------------------

def _hnf_rows(rows: list[list[int]]) -> list[list[int]]:
    """Row Hermite normal form of an integer matrix, zero rows dropped."""
    rows = [list(r) for r in rows]
    ncols = len(rows[0])
    out = []
    r0 = 0
    for col in range(ncols):
        pivot_rows = [k for k in range(r0, len(rows)) if rows[k][col] != 0]
        if not pivot_rows:
            continue
        while True:
            pivot_rows = [k for k in range(r0, len(rows)) if rows[k][col] != 0]
            kmin = min(pivot_rows, key=lambda k: abs(rows[k][col]))
            rows[r0], rows[kmin] = rows[kmin], rows[r0]
            done = True
            for k in range(r0 + 1, len(rows)):
                if rows[k][col]:
                    q = rows[k][col] // rows[r0][col]
                    rows[k] = [u - q * v for u, v in zip(rows[k], rows[r0])]
                    if rows[k][col]:
                        done = False
            if done:
                break
        if rows[r0][col] < 0:
            rows[r0] = [-u for u in rows[r0]]
        for k in range(r0):
            q = rows[k][col] // rows[r0][col]
            rows[k] = [u - q * v for u, v in zip(rows[k], rows[r0])]
        r0 += 1
        if r0 == len(rows):
            break
    out = [r for r in rows[:r0] if any(r)]
    return out


def lattice_basis(gens) -> tuple[QuaternionElement, ...]:
    """Z-basis of the lattice spanned by gens, in HNF on the columns (x, y, z, w).

    Ordering the scalar coordinate last makes the final HNF row the smallest
    positive scalar of the lattice; it is moved to the front.
    """
    gens = list(gens)
    den = 1
    for g in gens:
        for c in g.coords:
            den = den * c.denominator // _gcd(den, c.denominator)
    rows = [[int(c * den) for c in (g.x, g.y, g.z, g.w)] for g in gens]
    hnf = _hnf_rows(rows)
    if len(hnf) != 4:
        raise ValueError("generators do not span a full lattice")
    elems = [QuaternionElement(Fraction(r[3], den), Fraction(r[0], den),
                               Fraction(r[1], den), Fraction(r[2], den)) for r in hnf]
    return (elems[-1],) + tuple(elems[:-1])


def _gcd(a, b):
    while b:
        a, b = b, a % b
    return abs(a)


def _det(m: list[list[Fraction]]) -> Fraction:
    m = [list(r) for r in m]
    n = len(m)
    det = Fraction(1)
    for c in range(n):
        piv = next((r for r in range(c, n) if m[r][c] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != c:
            m[c], m[piv] = m[piv], m[c]
            det = -det
        det *= m[c][c]
        for r in range(c + 1, n):
            f = m[r][c] / m[c][c]
            if f:
                m[r] = [a - f * b for a, b in zip(m[r], m[c])]
    return det


def _inverse(m: list[list[Fraction]]) -> list[list[Fraction]]:
    n = len(m)
    a = [list(r) + [Fraction(int(i == k)) for k in range(n)] for i, r in enumerate(m)]
    for c in range(n):
        piv = next(r for r in range(c, n) if a[r][c] != 0)
        a[c], a[piv] = a[piv], a[c]
        inv = 1 / a[c][c]
        a[c] = [v * inv for v in a[c]]
        for r in range(n):
            if r != c and a[r][c]:
                f = a[r][c]
                a[r] = [u - f * v for u, v in zip(a[r], a[c])]
    return [r[n:] for r in a]


def reduced_discriminant(basis) -> int:
    """sqrt |det trd(e_k e_l)| for an order with Z-basis e."""
    d = abs(_det([[multiply(a, b).trd() for b in basis] for a in basis]))
    r = isqrt(int(d))
    if d.denominator != 1 or r * r != d:
        raise ValueError("discriminant is not a square integer; not an order?")
    return r


def coordinates(alpha: QuaternionElement, basis) -> tuple[Fraction, ...]:
    """Coordinates of alpha with respect to a Q-basis of B."""
    inv = _basis_inverse(tuple(basis))
    v = alpha.coords
    return tuple(sum(inv[r][c] * v[c] for c in range(4)) for r in range(4))


@lru_cache(maxsize=64)
def _basis_inverse(basis):
    # columns of m are the basis coordinate vectors
    m = [[basis[c].coords[r] for c in range(4)] for r in range(4)]
    return _inverse(m)


def _ring_closure(basis, max_rounds=20):
    """Smallest ring containing the lattice; None if an element stops being integral."""
    cur = lattice_basis(basis)
    for _ in range(max_rounds):
        if not all(b.is_integral() for b in cur):
            return None
        gens = list(cur) + [multiply(a, b) for a in cur for b in cur]
        new = lattice_basis(gens)
        if new == cur:
            return cur
        cur = new
    return None


def _contains(basis, alpha) -> bool:
    return all(c.denominator == 1 for c in coordinates(alpha, basis))


# --------------------------------------------------------------------------
# The maximal order.
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class OrderBasis:
    basis: tuple[QuaternionElement, ...]
    mu: QuaternionElement
    chi: dict

    def contains(self, alpha: QuaternionElement) -> bool:
        return _contains(self.basis, alpha)

    def coords(self, alpha: QuaternionElement) -> tuple[Fraction, ...]:
        return coordinates(alpha, self.basis)

    def element(self, c) -> QuaternionElement:
        out = QuaternionElement()
        for ci, b in zip(c, self.basis):
            out = out + b * int(ci)
        return out

    def discriminant(self) -> int:
        return reduced_discriminant(self.basis)


class SaturationError(RuntimeError):
    pass


def _saturate(basis, p, target_exp, max_steps=8):
    cur = lattice_basis(basis)
    for _ in range(max_steps):
        disc = reduced_discriminant(cur)
        e = 0
        while disc % p == 0:
            disc //= p
            e += 1
        if e <= target_exp:
            return cur
        for c in itertools.product(range(p), repeat=4):
            if not any(c):
                continue
            x = QuaternionElement()
            for ci, b in zip(c, cur):
                x = x + b * Fraction(ci, p)
            if not x.is_integral():
                continue
            closed = _ring_closure(list(cur) + [x])
            if closed is not None and closed != cur:
                cur = closed
                break
        else:
            raise SaturationError(f"no integral enlargement at p={p}")
    raise SaturationError(f"saturation at p={p} did not terminate")


def _denominator(basis) -> int:
    den = 1
    for b in basis:
        for c in b.coords:
            den = den * c.denominator // _gcd(den, c.denominator)
    return den


def _search_order(basis, bound, pred):
    """Elements of the order with all standard coordinates in [-bound, bound]."""
    den = _denominator(basis)
    rng = range(-bound * den, bound * den + 1)
    for c in itertools.product(rng, repeat=4):
        x = QuaternionElement(*(Fraction(v, den) for v in c))
        if pred(x) and _contains(basis, x):
            yield x


def _normalizes(chi, basis) -> bool:
    inv = chi.inverse()
    return all(_contains(basis, multiply(multiply(chi, b), inv)) for b in basis)


@lru_cache(maxsize=1)
def build_maximal_order() -> OrderBasis:
    """Maximal order by 2- and 3-saturation of Z<1, i, j, ij>, with mu and chi_2, chi_3, chi_6."""
    basis = (ONE, I, J, K)
    basis = _saturate(basis, 2, 1)
    basis = _saturate(basis, 3, 1)
    if reduced_discriminant(basis) != 6:
        raise SaturationError("saturated order does not have reduced discriminant 6")
    basis = _nice_basis(basis)

    def pure_of_norm(n):
        return lambda x: x.trd() == 0 and x.nrd() == n

    chi = {}
    for d in (2, 3, 6):
        # Q(sqrt(-2)) does not embed in B (3 splits in it), so chi_2 cannot be
        # trace-free; take a positive-norm normalizer of least trace instead.
        pred = pure_of_norm(d) if d != 2 else (lambda x: x.nrd() == 2 and x.trd() == 2)
        found = sorted(_search_order(basis, 3, pred), key=_height_key)
        found = [x for x in found if _normalizes(x, basis)]
        if not found:
            raise SaturationError(f"no normalizing element of norm {d} within bound")
        chi[d] = found[0]
    mu = chi[6]
    mu = _fix_mu_sign(basis, mu)
    chi[6] = mu
    return OrderBasis(basis=basis, mu=mu, chi=chi)


def complex_structure(tau, dps: int = 30):
    """Real matrix J with J (tau, 1)^T = i (tau, 1)^T and J^2 = -1."""
    with mpmath.workdps(dps):
        a, b = mpmath.re(tau), mpmath.im(tau)
        return mpmath.matrix([[a / b, -(a * a + b * b) / b], [1 / b, -a / b]])


def _adj(m):
    return mpmath.matrix([[m[1, 1], -m[0, 1]], [-m[1, 0], m[0, 0]]])


def hermitian_gram(basis, mu, tau, dps: int = 30):
    """Gram matrix of (x, y) -> E(x J_tau, y) on the basis, evaluated through iota_inf."""
    with mpmath.workdps(dps):
        J = complex_structure(tau, dps)
        mats = [iota_inf(b, dps) for b in basis]
        M = iota_inf(mu, dps)
        g = mpmath.matrix(4, 4)
        for r in range(4):
            for c in range(4):
                prod = M * mats[r] * J * _adj(mats[c])
                g[r, c] = (prod[0, 0] + prod[1, 1]) / 6
        return g


def _is_positive_definite(g) -> bool:
    try:
        mpmath.cholesky(g)
    except ValueError:
        return False
    return True


def _fix_mu_sign(basis, mu):
    """Choose the sign of mu for which the Riemann form is positive at the fixed point of mu."""
    tau = fixed_point_of_matrix(iota_inf(mu, 30))
    for cand in (mu, -mu):
        if _is_positive_definite(hermitian_gram(basis, cand, tau)):
            return cand
    raise SaturationError("neither sign of mu gives a positive Riemann form")


def fixed_point_of_matrix(m, dps: int | None = None):
    """Upper-half-plane fixed point of z -> (a z + b)/(c z + d) for an elliptic matrix."""
    a, b, c, d = m[0, 0], m[0, 1], m[1, 0], m[1, 1]
    disc = (d - a) ** 2 + 4 * b * c
    if disc >= 0:
        raise ValueError("matrix is not elliptic")
    if c == 0:
        raise ValueError("matrix is not elliptic")
    # c z^2 + (d - a) z - b = 0
    z = (-(d - a) + mpmath.sqrt(disc)) / (2 * c)
    if mpmath.im(z) < 0:
        z = mpmath.conj(z)
    return z


def _height_key(x: QuaternionElement):
    return (max(abs(c) for c in x.coords), tuple(-c for c in x.coords))


def _majorant(x: QuaternionElement) -> Fraction:
    return x.w**2 + x.x**2 + B_PARAM * x.y**2 + B_PARAM * x.z**2


def _nice_basis(basis):
    """A basis 1, e1, e2, e3 of short elements (majorant w^2 + x^2 + 3y^2 + 3z^2)."""
    short = sorted((x for x in _search_order(basis, 1, lambda x: x.trd() in (0, 1) and x != ONE
                                             and x.w >= 0)),
                   key=lambda x: (_majorant(x), _height_key(x)))
    for trip in itertools.combinations(short, 3):
        cand = (ONE,) + trip
        m = [list(coordinates(e, basis)) for e in cand]
        if abs(_det(m)) == 1:
            return cand
    raise SaturationError("could not find a short basis")


# --------------------------------------------------------------------------
# Involution, Riemann form, real embedding.
# --------------------------------------------------------------------------

def involution_prime(a: QuaternionElement, order: OrderBasis) -> QuaternionElement:
    """alpha' = mu^-1 * conj(alpha) * mu."""
    mu = order.mu
    return multiply(multiply(mu.inverse(), a.conjugate()), mu)


def riemann_form(a: QuaternionElement, b: QuaternionElement, order: OrderBasis) -> Fraction:
    """(1/6) trd(mu a conj(b))."""
    return multiply(multiply(order.mu, a), b.conjugate()).trd() / 6


def gram_matrix(order: OrderBasis) -> list[list[Fraction]]:
    return [[riemann_form(a, b, order) for b in order.basis] for a in order.basis]


SQRT3_NAME = "sqrt(3)"
# iota_inf(i) = [[0, -1], [1, 0]],  iota_inf(j) = [[sqrt3, 0], [0, -sqrt3]]
IOTA_I = ((0, -1), (1, 0))
IOTA_J = (("sqrt3", 0), (0, "-sqrt3"))


def iota_inf_exact(a: QuaternionElement):
    """Entries of iota_inf(a) as pairs (r, s) meaning r + s*sqrt(3)."""
    w, x, y, z = a.coords
    return (((w, y), (-x, z)), ((x, z), (w, -y)))


def iota_inf(a: QuaternionElement, dps: int = 50):
    """Real 2x2 matrix of a under the fixed splitting (an mpmath matrix)."""
    with mpmath.workdps(dps):
        s3 = mpmath.sqrt(3)
        ent = iota_inf_exact(a)
        return mpmath.matrix([[mpmath.mpf(r.numerator) / r.denominator + s3 * (mpmath.mpf(s.numerator) / s.denominator)
                               for (r, s) in row] for row in ent])


def iota_fingerprint() -> str:
    """Short hash pinning the splitting and the order basis (cache provenance)."""
    order = build_maximal_order()
    payload = repr((A_PARAM, B_PARAM, IOTA_I, IOTA_J, order.basis, order.mu))
    return hashlib.sha256(payload.encode()).hexdigest()[:16]


def hilbert_symbol(a: int, b: int, p: int) -> int:
    """Local Hilbert symbol (a, b)_p for nonzero integers, p prime or -1 for infinity."""
    if p == -1:
        return -1 if (a < 0 and b < 0) else 1

    def split(v):
        e = 0
        while v % p == 0:
            v //= p
            e += 1
        return e, v

    al, u = split(a)
    be, v = split(b)
    if p == 2:
        eps = lambda t: ((t - 1) // 2) % 2
        omega = lambda t: ((t * t - 1) // 8) % 2
        e = (eps(u) * eps(v) + al * omega(v) + be * omega(u)) % 2
        return -1 if e else 1
    from .quadratic_arith import kronecker
    sign = (-1) ** (al * be * ((p - 1) // 2) % 2)
    return sign * kronecker(u, p) ** be * kronecker(v, p) ** al


def ramified_primes(bound: int = 50) -> list:
    from sympy import primerange
    out = [p for p in primerange(2, bound) if hilbert_symbol(A_PARAM, B_PARAM, p) == -1]
    if hilbert_symbol(A_PARAM, B_PARAM, -1) == -1:
        out.append(-1)
    return out


# --------------------------------------------------------------------------
# Embeddings of quadratic orders.
# --------------------------------------------------------------------------

def norm_form(order: OrderBasis):
    """Integer coefficients (trace vector, nrd quadratic form) in the order basis."""
    b = order.basis
    tr = [int(e.trd()) for e in b]
    q = [[0] * 4 for _ in range(4)]
    for r in range(4):
        q[r][r] = int(b[r].nrd())
        for c in range(r + 1, 4):
            q[r][c] = int(multiply(b[r], b[c].conjugate()).trd())
    return tr, q


def embeddings_with_disc(D: int, height_bound: int, order: OrderBasis | None = None):
    """Elements beta of the order with trd(beta)^2 - 4 nrd(beta) = D.

    Only trace-normalized generators are listed (trd(beta) in {0, 1});
    the height is the max absolute value of the three non-scalar
    coordinates in the order basis (the scalar one is then forced).
    """
    if D % 4 not in (0, 1):
        raise ValueError(f"{D} is not a discriminant")
    order = order or build_maximal_order()
    tr, q = norm_form(order)
    T = D % 2
    rows = _kernels.embedding_search(tuple(tr), tuple(map(tuple, q)), T, (T * T - D) // 4, height_bound)
    out = []
    for row in rows:
        beta = order.element(row)
        assert beta.trd() == T and beta.disc() == D
        out.append(beta)
    out.sort(key=lambda x: (_coord_height(order, x), order.coords(x)))
    return out


def _coord_height(order, x):
    c = order.coords(x)
    return max(abs(v) for v in c[1:])
