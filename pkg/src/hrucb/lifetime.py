"""Reneging model: normal CDF, reneging probability and expected lifetime.

A user with satisfaction level ``beta`` who is served a fixed action with
mean ``u`` and variance ``f(w)`` reneges in each round with probability
``Phi((beta - u) / sqrt(f(w)))``, so the lifetime is geometric with mean
``h_beta(u, w) = 1 / Phi(...)``.

All functions accept scalars or numpy arrays and broadcast.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.special import ndtr

_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)

#: Variance floor used when the link reaches zero at -L (as f(z) = z + L does).
DEFAULT_SIGMA2_FLOOR = 0.05


@dataclass(frozen=True)
class LinkFunction:
    """Affine link ``f(z) = slope * z + offset`` mapping a score to a variance.

    ``big_l`` is the norm bound on the variance parameter; the link must be
    nonnegative on ``[-big_l, big_l]``.  ``offset`` defaults to
    ``slope * big_l``, i.e. ``f(z) = z + L`` at unit slope.
    """

    slope: float = 1.0
    big_l: float = 2.0
    offset: float | None = None

    def __post_init__(self):
        if not (math.isfinite(self.slope) and self.slope > 0):
            raise ValueError(f"link slope must be positive and finite, got {self.slope}")
        if not (math.isfinite(self.big_l) and self.big_l >= 0):
            raise ValueError(f"big_l must be nonnegative and finite, got {self.big_l}")
        if self.offset is None:
            object.__setattr__(self, "offset", self.slope * self.big_l)
        if not math.isfinite(self.offset):
            raise ValueError("link offset must be finite")
        # affine, so the endpoints decide nonnegativity on [-L, L]
        if min(self(-self.big_l), self(self.big_l)) < -1e-12:
            raise ValueError(
                f"link is negative on [-{self.big_l}, {self.big_l}]: f(-L)={self(-self.big_l)}"
            )

    def __call__(self, z):
        out = self.slope * np.asarray(z, dtype=float) + self.offset
        return float(out) if out.ndim == 0 else out

    def inverse(self, y):
        out = (np.asarray(y, dtype=float) - self.offset) / self.slope
        return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class VarianceBounds:
    """Legal outcome-variance range ``[sigma2_min, sigma2_max]``."""

    sigma2_min: float
    sigma2_max: float

    def __post_init__(self):
        lo, hi = self.sigma2_min, self.sigma2_max
        if not (math.isfinite(lo) and math.isfinite(hi) and 0 < lo <= hi):
            raise ValueError(f"need 0 < sigma2_min <= sigma2_max < inf, got [{lo}, {hi}]")

    @classmethod
    def for_link(cls, link: LinkFunction, floor: float = DEFAULT_SIGMA2_FLOOR) -> "VarianceBounds":
        """Range of ``f`` over ``[-L, L]``, with the lower end floored."""
        lo, hi = sorted((link(-link.big_l), link(link.big_l)))
        return cls(max(lo, floor), max(hi, floor))

    def clamp(self, variance):
        return np.clip(variance, self.sigma2_min, self.sigma2_max)

    def check_truth(self, link: LinkFunction, phi_star, num_samples: int = 4096, seed: int = 0):
        """Raise if ``f(phi_star . x)`` leaves the bounds for some unit-ball ``x``.

        The exact extremes ``+-||phi_star||`` are checked along with a random sample.
        """
        phi_star = np.asarray(phi_star, dtype=float)
        norm = float(np.linalg.norm(phi_star))
        rng = np.random.default_rng(seed)
        xs = rng.standard_normal((num_samples, phi_star.size))
        xs /= np.linalg.norm(xs, axis=1, keepdims=True)
        xs *= rng.random((num_samples, 1)) ** (1.0 / phi_star.size)
        scores = np.concatenate([xs @ phi_star, [-norm, norm]])
        var = link(scores)
        tol = 1e-12
        if var.min() < self.sigma2_min - tol or var.max() > self.sigma2_max + tol:
            raise ValueError(
                f"true variance range [{var.min():.6g}, {var.max():.6g}] "
                f"escapes sigma2_min/sigma2_max bounds [{self.sigma2_min}, {self.sigma2_max}]"
            )


def std_normal_cdf(z):
    """Standard normal CDF, accurate to ~1e-16 absolute (and relative in the tails)."""
    arr = np.asarray(z, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise ValueError("std_normal_cdf requires finite input")
    out = ndtr(arr)
    return float(out) if out.ndim == 0 else out


def _std_normal_pdf(z):
    return _INV_SQRT_2PI * np.exp(-0.5 * np.square(z))


def reneging_probability(u, w, beta, link: LinkFunction, bounds: VarianceBounds):
    """Per-round probability that an outcome with mean ``u`` and variance
    ``f(w)`` falls below ``beta``; the variance is clamped into ``bounds``."""
    variance = bounds.clamp(link(w))
    return std_normal_cdf((np.asarray(beta, dtype=float) - u) / np.sqrt(variance))


def lifetime_from_variance(u, variance, beta, bounds: VarianceBounds):
    """Expected lifetime ``1 / Phi((beta - u) / sigma)`` given the variance directly."""
    sigma = np.sqrt(bounds.clamp(variance))
    p = std_normal_cdf((np.asarray(beta, dtype=float) - u) / sigma)
    if np.any(np.asarray(p) <= 0.0):
        raise FloatingPointError("reneging probability underflowed to zero")
    return 1.0 / p


def expected_lifetime(u, w, beta, link: LinkFunction, bounds: VarianceBounds):
    """``h_beta(u, w)``: mean of the geometric lifetime under a fixed action."""
    return lifetime_from_variance(u, link(w), beta, bounds)


def lifetime_gradient(u, variance, beta):
    """Partial derivatives of the lifetime w.r.t. the mean and the variance.

    Returns ``(dh/du, dh/dvariance)``; no clamping is applied.
    """
    u, s, beta = np.broadcast_arrays(*(np.asarray(a, dtype=float) for a in (u, variance, beta)))
    z = (beta - u) / np.sqrt(s)
    phi, cdf = _std_normal_pdf(z), ndtr(z)
    dg = -phi / cdf**2
    return dg * (-1.0 / np.sqrt(s)), dg * (-z / (2.0 * s))


def lifetime_hessian(u, variance, beta):
    """Second derivatives ``(h_uu, h_us, h_ss)`` in (mean, variance)."""
    u, s, beta = np.broadcast_arrays(*(np.asarray(a, dtype=float) for a in (u, variance, beta)))
    z = (beta - u) / np.sqrt(s)
    phi, cdf = _std_normal_pdf(z), ndtr(z)
    dg = -phi / cdf**2
    d2g = z * phi / cdf**2 + 2.0 * phi**2 / cdf**3
    z_u = -1.0 / np.sqrt(s)
    z_s = -z / (2.0 * s)
    z_us = 0.5 * s**-1.5
    z_ss = 3.0 * z / (4.0 * s**2)
    return d2g * z_u**2, d2g * z_u * z_s + dg * z_us, d2g * z_s**2 + dg * z_ss


class LipschitzConstants(NamedTuple):
    q_u: float
    q_v: float
    m_h: float
    c3: float
    c4: float


def lipschitz_constants(
    link: LinkFunction,
    bounds: VarianceBounds,
    beta_low: float,
    beta_high: float,
    u_range: tuple[float, float] = (-1.0, 1.0),
    grid: int = 81,
) -> LipschitzConstants:
    """Grid estimate of the lifetime's smoothness constants on its domain.

    ``q_u`` and ``q_v`` are the largest absolute partial derivatives in the
    mean and the variance, ``m_h`` the largest Hessian spectral norm.  From
    these ``c3 = q_u + m_h`` and ``c4 = M_f * (q_v + m_h * M_f * L)``.
    The grid includes the box corners, where the derivatives peak.
    """
    u = np.linspace(*u_range, grid)
    s = np.linspace(bounds.sigma2_min, bounds.sigma2_max, grid)
    b = np.linspace(beta_low, beta_high, grid)
    U, S, B = np.meshgrid(u, s, b, indexing="ij")
    du, ds = lifetime_gradient(U, S, B)
    huu, hus, hss = lifetime_hessian(U, S, B)
    # spectral norm of a symmetric 2x2 matrix
    mid = 0.5 * (huu + hss)
    rad = np.sqrt((0.5 * (huu - hss)) ** 2 + hus**2)
    spectral = np.maximum(np.abs(mid + rad), np.abs(mid - rad))
    q_u, q_v, m_h = float(np.abs(du).max()), float(np.abs(ds).max()), float(spectral.max())
    m_f, big_l = link.slope, link.big_l
    return LipschitzConstants(q_u, q_v, m_h, q_u + m_h, m_f * (q_v + m_h * m_f * big_l))
