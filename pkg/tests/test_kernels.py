import numpy as np
import pytest

from superspecial import _kernels as K
from superspecial import quadratic_arith as qa
from superspecial import quaternion_core as qc


def test_env_flag(monkeypatch):
    monkeypatch.setenv(K.DISABLE_ENV, "1")
    assert not K.numba_enabled()
    monkeypatch.delenv(K.DISABLE_ENV)
    assert K.numba_enabled() == (K.numba is not None)


@pytest.mark.parametrize("D,H", [(-3, 5), (-4, 5), (-19, 6), (-24, 6), (-52, 8)])
def test_embeddings_backends_agree(order, monkeypatch, D, H):
    fast = qc.embeddings_with_disc(D, H, order)
    monkeypatch.setenv(K.DISABLE_ENV, "1")
    slow = qc.embeddings_with_disc(D, H, order)
    assert fast == slow


def test_class_number_backends_agree():
    a = K.class_number_table(3000, use_numba=True)
    b = K.class_number_table(3000, use_numba=False)
    assert np.array_equal(a, b)
    assert a[23] == 3 and a[4] == 1 and a[219] == 4


def test_norm_search_backends_agree():
    ls = qa.split_primes(3000)
    for m in (2, 6):
        a = K.norm_equation_search(ls, m, 200, use_numba=True)
        b = K.norm_equation_search(ls, m, 200, use_numba=False)
        assert np.array_equal(a, b)
        for l, (x, y) in zip(ls, a):
            assert abs(int(x) ** 2 - m * int(y) ** 2) == l


def brute_discrepancy(pts, grid):
    best = 0.0
    for i in range(1, grid + 1):
        for j in range(1, grid + 1):
            u, v = i / grid, j / grid
            inside = sum(1 for x, y in pts if x < u and y < v)
            best = max(best, abs(inside / len(pts) - u * v))
    return best


def test_star_discrepancy_backends_and_oracle():
    rng = np.random.default_rng(5)
    # grid-aligned points avoid floating ties at box edges
    pts = rng.integers(0, 40, size=(300, 2)) / 40 + 1 / 80
    a = K.star_discrepancy(pts, 20, use_numba=True)
    b = K.star_discrepancy(pts, 20, use_numba=False)
    assert a == pytest.approx(b, abs=1e-15)
    assert a == pytest.approx(brute_discrepancy(pts.tolist(), 20), abs=1e-12)
    assert K.star_discrepancy([], 8) == 1.0
