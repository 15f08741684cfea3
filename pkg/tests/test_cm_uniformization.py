import json
import random

import mpmath
import pytest

from superspecial import cm_uniformization as cm
from superspecial import quaternion_core as qc
from superspecial import reduction_checks as rc


def anchor_residual(beta, vertex, dps=50):
    """|local parameter| of the CM point of beta in the chart at the vertex (2, 4 or 6)."""
    tri = cm.triangle(dps)
    with mpmath.workdps(dps + 15):
        z = cm.reduce_tau(cm.fixed_point(beta, dps + 10), tri)
        vert = {2: tri.tau2, 4: tri.tau4, 6: tri.tau6}[vertex]
        A = {2: tri.A2, 4: tri.A4, 6: tri.A6}[vertex]
        zz = min((z, cm.moebius(tri.mu, z)), key=lambda p: cm.cosh_dist(p, vert))
        return abs(cm.disk(zz, vert) / A) ** vertex


@pytest.mark.parametrize("D,t,vertex", [(-24, 0, 2), (-4, 1, 4), (-3, cm.INFINITY, 6)])
def test_elliptic_anchors(order, D, t, vertex):
    betas = qc.embeddings_with_disc(D, 4, order)
    assert betas
    for beta in betas[:6]:
        pt = cm.cm_point(beta, 50)
        if cm.is_infinity(t):
            assert cm.is_infinity(pt.t)
        else:
            assert pt.t == t
        assert anchor_residual(beta, vertex) < mpmath.mpf(10) ** -30


def test_j_from_t():
    from fractions import Fraction
    assert cm.j_from_t(0) == Fraction(-16, 27)
    assert cm.j_from_t(1) == 0
    assert cm.is_infinity(cm.j_from_t(cm.INFINITY))


def test_fixed_point_properties(order):
    beta = qc.embeddings_with_disc(-19, 4, order)[0]
    with mpmath.workdps(50):
        tau = cm.fixed_point(beta)
        assert mpmath.im(tau) > 0
        m = qc.iota_inf(beta, 50)
        assert abs(cm.moebius(m, tau) - tau) < mpmath.mpf(10) ** -40
        # beta and its conjugate trd - beta give the same point
        assert abs(cm.fixed_point(beta.conjugate()) - tau) < mpmath.mpf(10) ** -40
    with pytest.raises(ValueError):
        cm.fixed_point(qc.ONE)


def test_triangle_geometry():
    tri = cm.triangle(50)
    tol = mpmath.mpf(10) ** -40
    with mpmath.workdps(50):
        # cosh of the side lengths of the (pi/2, pi/4, pi/6) triangle
        assert abs(cm.cosh_dist(tri.tau2, tri.tau4) - mpmath.sqrt(mpmath.mpf(3) / 2)) < tol
        assert abs(cm.cosh_dist(tri.tau2, tri.tau6) - mpmath.sqrt(2)) < tol
        assert abs(cm.cosh_dist(tri.tau4, tri.tau6) - mpmath.sqrt(3)) < tol
        for g in tri.gens:
            # each generator is an elliptic rotation: |trace| < 2 sqrt(det)
            assert abs(mpmath.re(g[0, 0] + g[1, 1])) < 2 * mpmath.sqrt(abs(mpmath.det(g)))


def test_uniformizer_invariance():
    tri = cm.triangle(50)
    rng = random.Random(11)
    with mpmath.workdps(50):
        tau = tri.tau2 + mpmath.mpc("0.013", "0.021")
        t0 = cm.uniformizer_t(tau, 50)
        for _ in range(5):
            z = tau
            for _ in range(rng.randint(1, 4)):
                z = cm.moebius(rng.choice(tri.gens + [tri.mu]), z)
            assert abs(cm.uniformizer_t(z, 50) - t0) < mpmath.mpf(10) ** -35


def test_uniformizer_continuity_near_anchors():
    tri = cm.triangle(50)
    with mpmath.workdps(50):
        eps = mpmath.mpc("1e-6", "1e-6")
        assert abs(cm.uniformizer_t(tri.tau2 + eps, 50)) < 1e-5
        assert abs(cm.uniformizer_t(tri.tau4 + eps, 50) - 1) < 1e-5
        assert abs(cm.uniformizer_t(tri.tau6 + eps, 50)) > 1e5


def test_charts_agree_on_overlap():
    # a point between the vertices is reachable through several charts
    tri = cm.triangle(50)
    with mpmath.workdps(65):
        z = tri.tau2 + (tri.tau4 - tri.tau2) / 5
        Z2 = (cm.disk(z, tri.tau2) / tri.A2) ** 2
        Z4 = (cm.disk(z, tri.tau4) / tri.A4) ** 4
        t2 = cm._chart_t(2, Z2, 65)
        t4 = cm._chart_t(4, Z4, 65)
    assert t2 is not None and t4 is not None
    assert abs(t2 - t4) < mpmath.mpf(10) ** -40


def test_uniformizer_rejects_lower_half_plane():
    with pytest.raises(ValueError):
        cm.uniformizer_t(mpmath.mpc(0, -1))


@pytest.mark.parametrize("D,coeffs", [
    (-52, (15625, 5184)),
    (-19, (64, -81)),
    (-43, (1000000, -194481)),
    (-148, (377149515625, 182233364544)),
    (-219, (3761479876608, 215558197323840, -1613227676641)),
])
def test_heegner_known(D, coeffs):
    P = cm.heegner_poly(D, 60, max_doublings=5)
    assert P.coeffs == coeffs
    assert P.b == coeffs[0]
    assert P.degree == P.h_prime
    # roots are the numerically computed j values
    with mpmath.workdps(60):
        for r in P.roots:
            val = mpmath.polyval([mpmath.mpf(c) for c in P.coeffs], r)
            assert abs(val) < mpmath.mpf(10) ** -30 * max(abs(c) for c in P.coeffs)


def test_heegner_precision_stable():
    for D in (-52, -219):
        assert cm.heegner_poly(D, 60, max_doublings=5).coeffs == cm.heegner_poly(D, 120, max_doublings=5).coeffs


def test_heegner_s_zero():
    with pytest.raises(ValueError):
        cm.heegner_poly(-11, 60)


def test_table_round_trip(tmp_path, monkeypatch):
    out = tmp_path / "t.jsonl"
    recs = cm.regenerate_table([-52, -19], 60, out)
    assert all(r["status"] == "ok" for r in recs)
    loaded = cm.load_table(out)
    assert loaded[-52].coeffs == (15625, 5184)
    monkeypatch.setenv(cm.TABLE_ENV, str(out))
    assert cm.table_path() == out
    assert cm.get_heegner_poly(-19).coeffs == (64, -81)


def test_table_skips_bad_records(tmp_path):
    out = tmp_path / "t.jsonl"
    good = json.loads(json.dumps(cm._record(cm.heegner_poly(-19, 60))))
    stale = dict(good, D=-43, iota_fingerprint="0" * 16)
    out.write_text("\n".join(json.dumps(r) for r in (good, stale, {"D": -52, "status": "error: x"})) + "\n")
    assert set(cm.load_table(out)) == {-19}


def test_bundled_table_consistent():
    tab = cm.load_table(cm.BUNDLED_TABLE)
    assert len(tab) >= 20
    for D, P in tab.items():
        assert rc.run_checks(P).ok, D
