"""Generalized least squares for heteroscedastic linear regression.

The mean parameter is a ridge estimate; the variance parameter is a ridge
regression of ``f^-1(residual**2)`` on the same contexts.  Both share the
regularized Gram matrix ``V = X'X + lam*I``, which also defines the
confidence-ellipsoid geometry used by the radii below.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .lifetime import LinkFunction

_NORM_TOL = 1e-9


@dataclass(frozen=True)
class ConfidenceConfig:
    """Constants for the confidence radii.

    ``c1``/``c2`` are the sub-exponential tail constants in ``alpha2``;
    ``c3``/``c4`` scale the mean and variance parts of the exploration
    bonus.  Neither pair has a closed-form value, so all four are knobs.
    """

    delta: float = 0.1
    sigma2_max: float = 4.0
    dim: int = 4
    lam: float = 1.0
    m_f: float = 1.0
    big_l: float = 2.0
    c1: float = 2.0
    c2: float = 0.5
    c3: float = 1.0
    c4: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.delta < 1.0:
            raise ValueError(f"delta must lie in (0, 1), got {self.delta}")
        if self.dim < 1:
            raise ValueError("dim must be positive")
        for name in ("sigma2_max", "lam", "m_f", "c1", "c2"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        for name in ("big_l", "c3", "c4"):
            if not getattr(self, name) >= 0:
                raise ValueError(f"{name} must be nonnegative")


def _check_delta(delta):
    if not 0.0 < delta <= 1.0:
        raise ValueError(f"delta must lie in (0, 1], got {delta}")


def alpha1(n: int, cfg: ConfidenceConfig, delta: float | None = None) -> float:
    """Radius of the mean confidence ellipsoid after ``n`` samples."""
    delta = cfg.delta if delta is None else delta
    _check_delta(delta)
    if n < 0:
        raise ValueError("n must be nonnegative")
    arg = (n + cfg.lam) / (delta * cfg.lam)
    assert arg >= 1.0
    return cfg.sigma2_max * math.sqrt(cfg.dim * math.log(arg)) + math.sqrt(cfg.lam)


def alpha2(cfg: ConfidenceConfig, delta: float | None = None) -> float:
    delta = cfg.delta if delta is None else delta
    _check_delta(delta)
    tail = math.log(cfg.c1 / delta) / cfg.c2
    return math.sqrt(2.0 * cfg.dim * cfg.sigma2_max**2 * (tail**2 + 1.0))


def alpha3(cfg: ConfidenceConfig, delta: float | None = None) -> float:
    delta = cfg.delta if delta is None else delta
    _check_delta(delta)
    if delta >= cfg.dim:
        raise ValueError(f"alpha3 needs delta < dim, got delta={delta}, dim={cfg.dim}")
    return math.sqrt(2.0 * cfg.dim * cfg.sigma2_max * math.log(cfg.dim / delta))


def rho(n: int, cfg: ConfidenceConfig, delta: float | None = None) -> float:
    """Radius of the variance-parameter confidence ellipsoid after ``n`` samples.

    Each of the three sub-radii is evaluated at ``delta / 3``.
    """
    delta = cfg.delta if delta is None else delta
    d3 = delta / 3.0
    a1 = alpha1(n, cfg, d3)
    inner = a1 * (a1 + 2.0 * alpha3(cfg, d3)) + alpha2(cfg, d3)
    return inner / cfg.m_f + cfg.big_l**2 * math.sqrt(cfg.lam)


def xi(sample_count: int, cfg: ConfidenceConfig) -> float:
    """Exploration-bonus scale for a regression set of ``sample_count`` pairs.

    An empty set is treated as a set of one.
    """
    n = max(int(sample_count), 1)
    return cfg.c3 * alpha1(n, cfg) + cfg.c4 * rho(n, cfg, cfg.delta / n**2)


class GlseState:
    """Sample store, incremental Gram matrix and the last GLSE fit.

    ``add_sample`` only accumulates; estimates change on ``fit``.  The Gram
    factor at the time of the last fit is kept so that confidence widths can
    be evaluated against the same matrix the estimates were built from.
    """

    def __init__(self, dim: int, lam: float = 1.0, capacity: int = 64):
        if dim < 1:
            raise ValueError("dim must be positive")
        if not lam > 0:
            raise ValueError("lam must be positive")
        self.dim = int(dim)
        self.lam = float(lam)
        self.gram = self.lam * np.eye(self.dim)
        self.xr_acc = np.zeros(self.dim)
        self._x = np.empty((max(capacity, 1), self.dim))
        self._r = np.empty(max(capacity, 1))
        self.n = 0
        self.theta_hat = np.zeros(self.dim)
        self.phi_hat = np.zeros(self.dim)
        self.fitted_at = 0
        self._fit_factor = cho_factor(self.gram)
        self._cur_factor = (0, self._fit_factor)

    @property
    def contexts(self) -> np.ndarray:
        return self._x[: self.n]

    @property
    def outcomes(self) -> np.ndarray:
        return self._r[: self.n]

    @property
    def samples(self) -> list[tuple[np.ndarray, float]]:
        return [(self._x[i].copy(), float(self._r[i])) for i in range(self.n)]

    def add_sample(self, x, r: float) -> None:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.dim,):
            raise ValueError(f"context has shape {x.shape}, expected ({self.dim},)")
        if np.linalg.norm(x) > 1.0 + _NORM_TOL:
            raise ValueError(f"context norm {np.linalg.norm(x):.6g} exceeds 1")
        if self.n == len(self._r):
            self._x = np.concatenate([self._x, np.empty_like(self._x)])
            self._r = np.concatenate([self._r, np.empty_like(self._r)])
        self._x[self.n] = x
        self._r[self.n] = r
        self.n += 1
        self.gram += np.outer(x, x)
        self.xr_acc += r * x

    def add_samples(self, X, r) -> None:
        """Append many pairs at once; same checks as ``add_sample``."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        r = np.asarray(r, dtype=float).reshape(-1)
        if X.shape[1:] != (self.dim,) or X.shape[0] != r.size:
            raise ValueError(f"got contexts {X.shape} and outcomes {r.shape} for dim {self.dim}")
        if X.size and np.linalg.norm(X, axis=1).max() > 1.0 + _NORM_TOL:
            raise ValueError("a context norm exceeds 1")
        need = self.n + r.size
        if need > len(self._r):
            cap = max(need, 2 * len(self._r))
            self._x = np.concatenate([self._x[: self.n], np.empty((cap - self.n, self.dim))])
            self._r = np.concatenate([self._r[: self.n], np.empty(cap - self.n)])
        self._x[self.n : need] = X
        self._r[self.n : need] = r
        self.n = need
        self.gram += X.T @ X
        self.xr_acc += X.T @ r

    def rebuilt_gram(self) -> np.ndarray:
        """Gram matrix recomputed from the stored contexts."""
        X = self.contexts
        return X.T @ X + self.lam * np.eye(self.dim)

    def fit(self, link: LinkFunction) -> tuple[np.ndarray, np.ndarray]:
        """Refit both estimates from every stored sample."""
        if self.n == 0:
            self.theta_hat = np.zeros(self.dim)
            self.phi_hat = np.zeros(self.dim)
            self.fitted_at = 0
            self._fit_factor = cho_factor(self.lam * np.eye(self.dim))
            return self.theta_hat.copy(), self.phi_hat.copy()
        X, r = self.contexts, self.outcomes
        factor = cho_factor(self.rebuilt_gram())
        theta = cho_solve(factor, X.T @ r)
        resid = r - X @ theta
        phi = cho_solve(factor, X.T @ link.inverse(resid * resid))
        self.theta_hat, self.phi_hat = theta, phi
        self.fitted_at = self.n
        self._fit_factor = factor
        return theta.copy(), phi.copy()

    def _factor(self, at_fit: bool):
        if at_fit:
            return self._fit_factor
        if self._cur_factor[0] != self.n:
            self._cur_factor = (self.n, cho_factor(self.gram))
        return self._cur_factor[1]

    def inv_gram_norm(self, x, *, at_fit: bool = False):
        """``sqrt(x' V^-1 x)`` for one context or each row of a matrix.

        With ``at_fit`` the Gram matrix of the last fit is used instead of
        the current one.
        """
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.dim or x.ndim > 2:
            raise ValueError(f"context has shape {x.shape}, expected (..., {self.dim})")
        sol = cho_solve(self._factor(at_fit), x.T).T
        q = np.maximum(np.sum(x * sol, axis=-1), 0.0)
        return float(np.sqrt(q)) if x.ndim == 1 else np.sqrt(q)

    def gram_norm(self, v, *, at_fit: bool = False) -> float:
        """``sqrt(v' V v)``, the norm used by the confidence ellipsoids."""
        v = np.asarray(v, dtype=float)
        if at_fit:
            c, lower = self._fit_factor
            tri = np.triu(c) if not lower else np.tril(c).T
            return float(np.linalg.norm(tri @ v))
        return float(np.sqrt(v @ self.gram @ v))
