import random
from fractions import Fraction

import mpmath
import pytest
from hypothesis import given
from hypothesis import strategies as st

from superspecial import polys

coeff = st.fractions(min_value=-50, max_value=50, max_denominator=9)


@given(st.lists(coeff, min_size=1, max_size=6).filter(lambda c: c[0] != 0))
def test_format_parse_round_trip(c):
    c = tuple(Fraction(v) for v in c)
    assert polys.parse_poly(polys.format_poly(c)) == c


@pytest.mark.parametrize("text,coeffs", [
    ("x^2 - 2", (1, 0, -2)),
    ("x + 1/2", (1, Fraction(1, 2))),
    ("x-1", (1, -1)),
    ("3/4*x^3 - x", (Fraction(3, 4), 0, -1, 0)),
    ("(x+1)^2", (1, 2, 1)),
])
def test_parse_examples(text, coeffs):
    assert polys.parse_poly(text) == tuple(Fraction(v) for v in coeffs)


@pytest.mark.parametrize("bad", ["", "x^", "2*/x", "x^-1", "0", "y+1"])
def test_parse_errors(bad):
    with pytest.raises(polys.PolyParseError):
        polys.parse_poly(bad)


def _from_roots(roots):
    c = [Fraction(1)]
    for r in roots:
        c = [a - r * b for a, b in zip(c + [Fraction(0)], [Fraction(0)] + c)]
    return tuple(c)


def test_from_roots_helper():
    assert _from_roots([1, 2]) == (1, -3, 2)


def test_newton_polygon_vs_known_roots():
    rng = random.Random(7)
    for _ in range(100):
        p = rng.choice([2, 3, 5, 7])
        roots = []
        for _ in range(rng.randint(1, 5)):
            num = rng.randint(1, 40) * rng.choice([1, -1])
            den = rng.randint(1, 40)
            roots.append(Fraction(num, den) * Fraction(p) ** rng.randint(-3, 3))
        lead = Fraction(rng.randint(1, 30), rng.randint(1, 30))
        f = tuple(lead * c for c in _from_roots(roots))
        want = sorted(polys.vp(r, p) for r in roots)
        assert sorted(polys.root_valuations(f, p)) == want
        # the product of all roots has valuation equal to the sum
        assert sum(polys.root_valuations(f, p)) == polys.vp(f[-1] / f[0], p)


def test_newton_polygon_zero_root():
    assert polys.newton_polygon((1, 0, 0), 2) == [(None, 2)]


def test_vp():
    assert polys.vp(Fraction(24), 2) == 3
    assert polys.vp(Fraction(5, 18), 3) == -2
    assert polys.vp(0, 5) is None


def test_norm_value_examples():
    assert polys.norm_value((1, Fraction(1, 2)), (1, 0, 1, 0)) == Fraction(-5, 8)
    assert polys.norm_value((1, 0, -2), (64, -81)) == -1631


def test_norm_value_numeric():
    rng = random.Random(3)
    for _ in range(30):
        f = [Fraction(rng.randint(1, 5))] + [Fraction(rng.randint(-9, 9)) for _ in range(rng.randint(1, 3))]
        g = [Fraction(rng.randint(-9, 9) or 1)] + [Fraction(rng.randint(-9, 9)) for _ in range(rng.randint(0, 3))]
        with mpmath.workdps(40):
            roots = mpmath.polyroots([float(c) for c in f], maxsteps=200, extraprec=200)
            prod = mpmath.mpf(1)
            for r in roots:
                prod *= mpmath.polyval([float(c) for c in g], r)
            want = polys.norm_value(tuple(f), tuple(g))
            w = mpmath.mpf(want.numerator) / want.denominator
            assert abs(prod - w) < mpmath.mpf(10) ** -25 * max(1, abs(w))


def test_compose_affine():
    assert polys.compose_affine((1, 0, -2), 2, 1) == (4, 4, -1)


def test_real_roots_and_merge():
    f = (1, 0, -2)
    ivs = polys.real_root_intervals(f)
    assert len(ivs) == 2 and ivs[0][1] <= ivs[1][0]
    merged = polys.merged_real_roots({"P": (1, 0, -2), "E": (27, 16), "Z": (1, 0)})
    assert [k for k, _ in merged] == ["P", "E", "Z", "P"]
    with pytest.raises(ValueError):
        polys.merged_real_roots({"A": (1, -1), "B": (1, 0, -1)})


def test_count_roots_between():
    f = (1, 0, -2)
    assert polys.count_roots_between(f, None, None) == 2
    assert polys.count_roots_between(f, 0, None) == 1
    assert polys.count_roots_between(f, Fraction(-1), Fraction(1)) == 0


def test_irreducible_and_squarefree():
    assert polys.is_irreducible((1, 0, -2))
    assert not polys.is_irreducible((1, 0, -1))
    assert not polys.is_squarefree((1, 2, 1))


def test_lcm_denominator():
    assert polys.lcm_denominator((Fraction(1, 4), Fraction(1, 6), 1)) == 12
