"""Fast self-checks of the model invariants, used by ``hrucb check``."""

from __future__ import annotations

import math

import numpy as np

from .env import default_params, oracle_best, sample_user
from .harness import ExperimentConfig, run_trial
from .hetreg import ConfidenceConfig, GlseState, alpha1, rho, xi
from .lifetime import LinkFunction, VarianceBounds, expected_lifetime, std_normal_cdf
from .policies import PolicyConfig


def _cdf_matches_erfc(rng):
    z = rng.uniform(-8, 8, 200)
    ref = np.array([0.5 * math.erfc(-v / math.sqrt(2)) for v in z])
    return float(np.max(np.abs(std_normal_cdf(z) - ref))) <= 1e-12


def _lifetime_monotone(rng):
    link = LinkFunction(1.0, 2.0)
    bounds = VarianceBounds.for_link(link)
    u = np.linspace(-1, 1, 41)
    h_u = expected_lifetime(u, 0.3, 0.2, link, bounds)
    beta = np.linspace(-1, 1, 41)
    h_b = expected_lifetime(0.1, 0.3, beta, link, bounds)
    return bool(np.all(h_u >= 1) and np.all(np.diff(h_u) > 0) and np.all(np.diff(h_b) < 0))


def _glse_matches_normal_equations(rng):
    link = LinkFunction(1.0, 2.0)
    for _ in range(20):
        d, n = rng.integers(1, 5), rng.integers(1, 40)
        st = GlseState(d, 1.0)
        X = rng.standard_normal((n, d))
        X /= np.maximum(np.linalg.norm(X, axis=1, keepdims=True), 1.0)
        r = rng.standard_normal(n)
        for x, y in zip(X, r):
            st.add_sample(x, y)
        theta, phi = st.fit(link)
        A = X.T @ X + np.eye(d)
        th = np.linalg.solve(A, X.T @ r)
        ph = np.linalg.solve(A, X.T @ link.inverse((r - X @ th) ** 2))
        if not (np.allclose(theta, th, rtol=1e-8, atol=1e-12) and np.allclose(phi, ph, rtol=1e-8, atol=1e-12)):
            return False
        if not np.allclose(st.gram, st.rebuilt_gram(), atol=1e-9):
            return False
    return True


def _radii_monotone(rng):
    cfg = ConfidenceConfig()
    ns = [1, 2, 5, 10, 100, 1000]
    a = [alpha1(n, cfg) for n in ns]
    p = [rho(n, cfg) for n in ns]
    x = [xi(n, cfg) for n in ns]
    return all(np.all(np.diff(v) > 0) for v in (a, p, x))


def _oracle_zero_regret(rng):
    cfg = ExperimentConfig(policy_names=("oracle",), num_users=50)
    return bool(np.all(run_trial(cfg, "oracle", 1).cum_regret == 0))


def _common_users(rng):
    cfg = ExperimentConfig(policy_names=("hr-ucb", "lin-ucb"), num_users=30,
                           policy_cfg=PolicyConfig(linucb_alpha=0.0))
    return run_trial(cfg, "hr-ucb", 11).user_digest == run_trial(cfg, "lin-ucb", 11).user_digest


def _oracle_tie_break(rng):
    env = default_params()
    user = sample_user(rng, env)
    user.contexts[1] = user.contexts[0]
    a, _ = oracle_best(env, user)
    return a != 1


CHECKS = {
    "normal CDF agrees with erfc": _cdf_matches_erfc,
    "lifetime >= 1, increasing in mean, decreasing in beta": _lifetime_monotone,
    "GLSE equals normal-equation solve": _glse_matches_normal_equations,
    "confidence radii increase with n": _radii_monotone,
    "oracle policy has zero regret": _oracle_zero_regret,
    "policies see identical users": _common_users,
    "oracle ties go to the lowest index": _oracle_tie_break,
}


def run_checks(seed: int = 0) -> bool:
    ok = True
    for name, fn in CHECKS.items():
        passed = bool(fn(np.random.default_rng(seed)))
        ok &= passed
        print(f"{'PASS' if passed else 'FAIL'}  {name}")
    return ok
