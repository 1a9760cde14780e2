import math
from dataclasses import replace
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from hrucb.env import default_params, sample_outcome, sample_unit_ball
from hrucb.hetreg import ConfidenceConfig, GlseState, alpha1, alpha2, alpha3, rho, xi
from hrucb.lifetime import LinkFunction

# mpmath at 50 digits
ALPHA1_99 = 6.256521769756932
ALPHA3 = 5.432406062962478
ALPHA2_DELTA1 = 2.8284271247461901
ALPHA2_01 = 7.100365123275505
RHO_EXAMPLE = 118.22036336888650
XI_99 = 328.91184924115302

LINK = LinkFunction(slope=1.0, big_l=2.0)


@pytest.fixture
def unit_cfg():
    return ConfidenceConfig(sigma2_max=1.0, dim=4, lam=1.0, c1=1.0, c2=1.0, m_f=1.0, big_l=2.0)


def _solve_exact(A, b):
    """Gauss-Jordan elimination over the rationals."""
    n = len(b)
    M = [[Fraction(float(A[i][j])) for j in range(n)] + [Fraction(float(b[i]))] for i in range(n)]
    for col in range(n):
        piv = max(range(col, n), key=lambda i: abs(M[i][col]))
        M[col], M[piv] = M[piv], M[col]
        for i in range(n):
            if i != col and M[i][col] != 0:
                f = M[i][col] / M[col][col]
                M[i] = [a - f * c for a, c in zip(M[i], M[col])]
    return np.array([float(M[i][n] / M[i][i]) for i in range(n)])


def brute_force_glse(X, r, lam, link):
    d = X.shape[1]
    A = [[sum(X[k, i] * X[k, j] for k in range(len(r))) + (lam if i == j else 0.0) for j in range(d)]
         for i in range(d)]
    theta = _solve_exact(A, [sum(X[k, i] * r[k] for k in range(len(r))) for i in range(d)])
    target = [link.inverse((r[k] - X[k] @ theta) ** 2) for k in range(len(r))]
    phi = _solve_exact(A, [sum(X[k, i] * target[k] for k in range(len(r))) for i in range(d)])
    return theta, phi


def random_state(rng, d, n, lam=1.0):
    X = sample_unit_ball(rng, n, d)
    r = rng.normal(0.0, 1.5, n)
    st_ = GlseState(d, lam)
    for x, y in zip(X, r):
        st_.add_sample(x, y)
    return st_, X, r


class TestAddSample:
    def test_single(self):
        s = GlseState(1, 1.0)
        s.add_sample([1.0], 2.0)
        np.testing.assert_array_equal(s.gram, [[2.0]])
        np.testing.assert_array_equal(s.xr_acc, [2.0])
        assert s.n == 1 and len(s.samples) == 1

    def test_twice(self):
        s = GlseState(1, 1.0)
        s.add_sample([1.0], 2.0)
        s.add_sample([1.0], 2.0)
        np.testing.assert_array_equal(s.gram, [[3.0]])
        np.testing.assert_array_equal(s.xr_acc, [4.0])

    def test_wrong_dimension(self):
        with pytest.raises(ValueError):
            GlseState(2).add_sample([1.0], 0.0)

    def test_norm_above_one(self):
        s = GlseState(2)
        s.add_sample([1.0, 1e-10], 0.0)
        with pytest.raises(ValueError):
            s.add_sample([1.0, 0.1], 0.0)

    def test_estimates_untouched(self):
        s = GlseState(1)
        s.add_sample([1.0], 2.0)
        assert s.theta_hat[0] == 0.0 and s.fitted_at == 0

    def test_bulk_matches_one_by_one(self):
        rng = np.random.default_rng(3)
        X, r = sample_unit_ball(rng, 150, 3), rng.standard_normal(150)
        a, b = GlseState(3, capacity=4), GlseState(3, capacity=4)
        for x, y in zip(X, r):
            a.add_sample(x, y)
        b.add_samples(X[:7], r[:7])
        b.add_samples(X[7:], r[7:])
        np.testing.assert_allclose(a.gram, b.gram, atol=1e-12)
        np.testing.assert_array_equal(a.contexts, b.contexts)
        np.testing.assert_allclose(a.fit(LINK)[1], b.fit(LINK)[1], rtol=1e-12)
        with pytest.raises(ValueError):
            b.add_samples(2 * X[:2], r[:2])

    def test_storage_grows(self):
        s = GlseState(2, capacity=1)
        for k in range(10):
            s.add_sample([0.1 * k / 2, 0.0], float(k))
        assert s.n == 10
        np.testing.assert_array_equal(s.outcomes, np.arange(10.0))


class TestFit:
    def test_hand_example(self):
        s = GlseState(1, 1.0)
        s.add_sample([1.0], 2.0)
        theta, phi = s.fit(LINK)
        assert theta[0] == pytest.approx(1.0, abs=1e-15)
        assert phi[0] == pytest.approx(-0.5, abs=1e-15)
        assert s.fitted_at == 1

    def test_empty(self):
        theta, phi = GlseState(1).fit(LINK)
        assert theta.tolist() == [0.0] and phi.tolist() == [0.0]

    def test_matches_exact_elimination(self):
        rng = np.random.default_rng(2024)
        for _ in range(100):
            d, n = int(rng.integers(1, 5)), int(rng.integers(1, 51))
            lam = float(rng.uniform(0.1, 2.0))
            s, X, r = random_state(rng, d, n, lam)
            theta, phi = s.fit(LINK)
            th_ref, ph_ref = brute_force_glse(X, r, lam, LINK)
            np.testing.assert_allclose(theta, th_ref, rtol=1e-8, atol=1e-12)
            np.testing.assert_allclose(phi, ph_ref, rtol=1e-8, atol=1e-12)

    def test_solve_residual(self):
        rng = np.random.default_rng(8)
        s, X, r = random_state(rng, 4, 200)
        theta, _ = s.fit(LINK)
        res = s.gram @ theta - X.T @ r
        assert np.linalg.norm(res) <= 1e-10 * np.linalg.norm(X.T @ r)

    def test_gram_matches_rebuild(self):
        rng = np.random.default_rng(9)
        s, _, _ = random_state(rng, 3, 500)
        np.testing.assert_allclose(s.gram, s.rebuilt_gram(), atol=1e-9, rtol=0)
        assert np.min(np.linalg.eigvalsh(s.gram)) >= s.lam - 1e-12

    def test_idempotent(self):
        rng = np.random.default_rng(10)
        s, _, _ = random_state(rng, 2, 20)
        a = s.fit(LINK)
        b = s.fit(LINK)
        np.testing.assert_array_equal(a[0], b[0])
        np.testing.assert_array_equal(a[1], b[1])


class TestInvGramNorm:
    def test_identity(self):
        s = GlseState(3)
        assert s.inv_gram_norm([0.0, 1.0, 0.0]) == pytest.approx(1.0, abs=1e-15)
        assert s.inv_gram_norm(np.zeros(3)) == 0.0

    def test_one_sample(self):
        s = GlseState(1)
        s.add_sample([1.0], 0.0)
        assert s.inv_gram_norm([1.0]) == pytest.approx(1 / math.sqrt(2), abs=1e-15)

    def test_at_fit_uses_last_fit(self):
        s = GlseState(1)
        s.add_sample([1.0], 0.0)
        assert s.inv_gram_norm([1.0], at_fit=True) == pytest.approx(1.0)
        s.fit(LINK)
        assert s.inv_gram_norm([1.0], at_fit=True) == pytest.approx(1 / math.sqrt(2))

    def test_rows(self):
        rng = np.random.default_rng(1)
        s, X, _ = random_state(rng, 4, 30)
        rows = s.inv_gram_norm(X)
        ref = np.sqrt(np.einsum("ij,jk,ik->i", X, np.linalg.inv(s.gram), X))
        np.testing.assert_allclose(rows, ref, rtol=1e-10)

    def test_wrong_dimension(self):
        with pytest.raises(ValueError):
            GlseState(2).inv_gram_norm([1.0, 0.0, 0.0])

    @given(
        arrays(np.float64, (12, 3), elements=st.floats(-1, 1)),
        arrays(np.float64, 3, elements=st.floats(-10, 10)),
        st.floats(0.05, 5.0),
    )
    @settings(max_examples=100, deadline=None)
    def test_bounded_by_euclidean_over_sqrt_lambda(self, X, x, lam):
        s = GlseState(3, lam)
        for row in X:
            nrm = np.linalg.norm(row)
            s.add_sample(row / max(nrm, 1.0), 0.0)
        assert s.inv_gram_norm(x) <= np.linalg.norm(x) / math.sqrt(lam) * (1 + 1e-9) + 1e-12


class TestRadii:
    def test_alpha1_examples(self, unit_cfg):
        assert alpha1(99, unit_cfg, 0.1) == pytest.approx(ALPHA1_99, rel=1e-13)
        cfg = ConfidenceConfig(sigma2_max=1.0, dim=1, lam=1.0)
        assert alpha1(0, cfg, 1 / math.e) == pytest.approx(2.0, rel=1e-13)

    def test_alpha2_alpha3_examples(self, unit_cfg):
        assert alpha3(unit_cfg, 0.1) == pytest.approx(ALPHA3, rel=1e-13)
        assert alpha2(unit_cfg, 1.0) == pytest.approx(ALPHA2_DELTA1, rel=1e-13)
        assert alpha2(unit_cfg, 0.1) == pytest.approx(ALPHA2_01, rel=1e-13)

    def test_alpha3_needs_delta_below_dim(self):
        cfg = ConfidenceConfig(dim=1)
        with pytest.raises(ValueError):
            alpha3(cfg, 1.0)

    def test_rho_example(self, unit_cfg):
        assert rho(99, unit_cfg, 0.3) == pytest.approx(RHO_EXAMPLE, rel=1e-12)

    def test_rho_without_l_term(self, unit_cfg):
        cfg = ConfidenceConfig(sigma2_max=1.0, dim=4, lam=3.0, c1=1.0, c2=1.0, big_l=0.0)
        a1, a3, a2 = alpha1(10, cfg, 0.1), alpha3(cfg, 0.1), alpha2(cfg, 0.1)
        assert rho(10, cfg, 0.3) == pytest.approx(a1 * (a1 + 2 * a3) + a2, rel=1e-14)

    def test_xi_degenerate_constants(self, unit_cfg):
        only_mean = replace(unit_cfg, c3=1.0, c4=0.0)
        assert xi(37, only_mean) == alpha1(37, only_mean)
        only_var = replace(unit_cfg, c3=0.0, c4=1.0)
        assert xi(1, only_var) == rho(1, only_var, only_var.delta)

    def test_xi_composition(self, unit_cfg):
        assert xi(99, unit_cfg) == pytest.approx(XI_99, rel=1e-12)

    def test_xi_empty_set_is_set_of_one(self, unit_cfg):
        assert xi(0, unit_cfg) == xi(1, unit_cfg)

    @given(st.integers(0, 10**6), st.floats(1e-6, 0.99))
    def test_monotone_in_n(self, n, delta):
        cfg = ConfidenceConfig(delta=delta)
        assert alpha1(n + 1, cfg) > alpha1(n, cfg)
        assert rho(n + 1, cfg) > rho(n, cfg)
        assert xi(n + 2, cfg) >= xi(n + 1, cfg)

    @given(st.integers(0, 10**5), st.floats(1e-6, 0.5), st.floats(1.01, 1.9))
    def test_nonincreasing_in_delta(self, n, delta, factor):
        lo, hi = ConfidenceConfig(delta=delta), ConfidenceConfig(delta=delta * factor)
        assert alpha1(n, hi) <= alpha1(n, lo)
        assert alpha2(hi) <= alpha2(lo)
        assert alpha3(hi) <= alpha3(lo)
        assert rho(n, hi) <= rho(n, lo)
        assert xi(n, hi) <= xi(n, lo)

    @pytest.mark.parametrize("bad", [0.0, 1.0, -0.1])
    def test_config_rejects_delta(self, bad):
        with pytest.raises(ValueError):
            ConfidenceConfig(delta=bad)


def _replicate(rng, params, n):
    s = GlseState(params.dim, 1.0)
    X = sample_unit_ball(rng, n, params.dim)
    for x in X:
        s.add_sample(x, sample_outcome(rng, params, x))
    theta, phi = s.fit(params.link)
    return s, theta, phi


class TestStatistics:
    def test_consistency(self):
        params = default_params()
        rng = np.random.default_rng(77)
        err = {}
        for n in (500, 4000):
            reps = [_replicate(rng, params, n) for _ in range(50)]
            err[n] = (
                np.median([np.linalg.norm(t - params.theta_star) for _, t, _ in reps]),
                np.median([np.linalg.norm(p - params.phi_star) for _, _, p in reps]),
            )
        assert err[4000][0] < err[500][0]
        assert err[4000][1] < err[500][1]

    def test_coverage(self):
        params = default_params()
        cfg = ConfidenceConfig()
        rng = np.random.default_rng(78)
        radius = alpha1(500, cfg)
        hits = 0
        for _ in range(200):
            s, theta, _ = _replicate(rng, params, 500)
            hits += s.gram_norm(theta - params.theta_star) <= radius
        assert hits / 200 >= 0.9
