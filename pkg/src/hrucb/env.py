"""Simulated population of reneging users with heteroscedastic outcomes."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .lifetime import LinkFunction, VarianceBounds, expected_lifetime

_NORM_TOL = 1e-9


@dataclass(frozen=True)
class EnvironmentParams:
    theta_star: np.ndarray
    phi_star: np.ndarray
    link: LinkFunction
    bounds: VarianceBounds
    num_actions: int = 20
    beta_low: float = -1.0
    beta_high: float = 1.0
    big_b: float = 1.0
    max_rounds_cap: int = 1_000_000

    def __post_init__(self):
        theta = np.asarray(self.theta_star, dtype=float)
        phi = np.asarray(self.phi_star, dtype=float)
        object.__setattr__(self, "theta_star", theta)
        object.__setattr__(self, "phi_star", phi)
        if theta.ndim != 1 or theta.shape != phi.shape:
            raise ValueError("theta_star and phi_star must be vectors of equal length")
        if np.linalg.norm(theta) > 1.0 + _NORM_TOL:
            raise ValueError(f"||theta_star|| = {np.linalg.norm(theta):.6g} exceeds 1")
        if np.linalg.norm(phi) > self.link.big_l + _NORM_TOL:
            raise ValueError(f"||phi_star|| = {np.linalg.norm(phi):.6g} exceeds L = {self.link.big_l}")
        if self.num_actions < 1:
            raise ValueError("num_actions must be positive")
        if not self.big_b > 0:
            raise ValueError("big_b must be positive")
        if not (-self.big_b <= self.beta_low <= self.beta_high):
            raise ValueError(
                f"need -big_b <= beta_low <= beta_high, got big_b={self.big_b}, "
                f"[{self.beta_low}, {self.beta_high}]"
            )
        if self.max_rounds_cap < 1:
            raise ValueError("max_rounds_cap must be positive")
        self.bounds.check_truth(self.link, phi)

    @property
    def dim(self) -> int:
        return self.theta_star.size

    def true_lifetimes(self, contexts, beta):
        """Expected lifetime of each context (row) under the true parameters."""
        contexts = np.asarray(contexts, dtype=float)
        return expected_lifetime(
            contexts @ self.theta_star, contexts @ self.phi_star, beta, self.link, self.bounds
        )

    def to_dict(self) -> dict:
        return {
            "theta_star": self.theta_star.tolist(),
            "phi_star": self.phi_star.tolist(),
            "link_slope": self.link.slope,
            "link_offset": self.link.offset,
            "big_l": self.link.big_l,
            "sigma2_min": self.bounds.sigma2_min,
            "sigma2_max": self.bounds.sigma2_max,
            "num_actions": self.num_actions,
            "beta_low": self.beta_low,
            "beta_high": self.beta_high,
            "big_b": self.big_b,
            "max_rounds_cap": self.max_rounds_cap,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "EnvironmentParams":
        link = LinkFunction(slope=d["link_slope"], big_l=d["big_l"], offset=d.get("link_offset"))
        return cls(
            theta_star=np.asarray(d["theta_star"], dtype=float),
            phi_star=np.asarray(d["phi_star"], dtype=float),
            link=link,
            bounds=VarianceBounds(d["sigma2_min"], d["sigma2_max"]),
            num_actions=int(d["num_actions"]),
            beta_low=float(d["beta_low"]),
            beta_high=float(d["beta_high"]),
            big_b=float(d["big_b"]),
            max_rounds_cap=int(d["max_rounds_cap"]),
        )


def default_params(**overrides) -> EnvironmentParams:
    """The standard benchmark world: 20 actions in 4 dimensions, ``f(z) = z + 2``."""
    link = LinkFunction(slope=1.0, big_l=2.0)
    kw = dict(
        theta_star=np.array([0.6, 0.5, 0.5, 0.3]),
        phi_star=np.array([0.5, 0.2, 0.8, 0.9]),
        link=link,
        bounds=VarianceBounds.for_link(link),
        num_actions=20,
        beta_low=-1.0,
        beta_high=1.0,
        big_b=1.0,
    )
    kw.update(overrides)
    return EnvironmentParams(**kw)


@dataclass
class UserInstance:
    contexts: np.ndarray
    beta: float

    @property
    def num_actions(self) -> int:
        return self.contexts.shape[0]


@dataclass
class EpisodeResult:
    action_sequence: list[int] = field(default_factory=list)
    outcomes: list[float] = field(default_factory=list)
    truncated: bool = False

    @property
    def lifetime(self) -> int:
        return len(self.outcomes)


def sample_unit_ball(rng: np.random.Generator, n: int, dim: int) -> np.ndarray:
    """``n`` points uniform in the ``dim``-dimensional unit ball."""
    g = rng.standard_normal((n, dim))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    return g * rng.random((n, 1)) ** (1.0 / dim)


def sample_user(rng: np.random.Generator, params: EnvironmentParams) -> UserInstance:
    # draw order is fixed: directions, radii, then beta
    contexts = sample_unit_ball(rng, params.num_actions, params.dim)
    beta = float(rng.uniform(params.beta_low, params.beta_high))
    return UserInstance(contexts, beta)


def sample_outcome(rng: np.random.Generator, params: EnvironmentParams, x) -> float:
    x = np.asarray(x, dtype=float)
    variance = params.link(float(params.phi_star @ x))
    if variance < 0:
        raise ValueError(f"true variance {variance} is negative; parameters are misconfigured")
    return float(params.theta_star @ x) + rng.standard_normal() * np.sqrt(variance)


def run_user_episode(
    rng: np.random.Generator,
    params: EnvironmentParams,
    user: UserInstance,
    choose: Callable[[int], int],
) -> EpisodeResult:
    """Serve one user until the first outcome below ``beta`` or the round cap.

    ``choose`` receives the 1-based round index and returns an action index.
    """
    result = EpisodeResult()
    for i in range(1, params.max_rounds_cap + 1):
        a = choose(i)
        if not 0 <= a < user.num_actions:
            raise IndexError(f"action {a} out of range for {user.num_actions} actions")
        r = sample_outcome(rng, params, user.contexts[a])
        result.action_sequence.append(int(a))
        result.outcomes.append(r)
        if r < user.beta:
            return result
    result.truncated = True
    return result


def oracle_best(params: EnvironmentParams, user: UserInstance) -> tuple[int, float]:
    """Action maximizing the true expected lifetime (lowest index on ties) and its value."""
    h = np.atleast_1d(params.true_lifetimes(user.contexts, user.beta))
    a = int(np.argmax(h))
    return a, float(h[a])
