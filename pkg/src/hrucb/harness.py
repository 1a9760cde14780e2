"""Seeded multi-trial regret experiments.

Each trial draws its users from a stream that depends only on the trial
seed, so every policy in a comparison faces the same users.  Per-user
regret is the gap between the oracle's and the chosen action's expected
lifetimes under the true parameters; realized lifetimes only drive
learning.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .env import EnvironmentParams, default_params, run_user_episode, sample_user
from .policies import POLICY_NAMES, PolicyConfig, benchmark_policy_config, make_policy

CSV_HEADER = ("policy", "trial", "user_index", "cum_regret")


@dataclass
class ExperimentConfig:
    env: EnvironmentParams = field(default_factory=default_params)
    policy_names: tuple[str, ...] = ("hr-ucb",)
    policy_cfg: PolicyConfig = field(default_factory=benchmark_policy_config)
    num_users: int = 1000
    num_trials: int = 1
    master_seed: int = 0
    output_path: str | None = None
    workers: int = 1

    def __post_init__(self):
        if self.num_users < 1:
            raise ValueError("num_users must be >= 1")
        if self.num_trials < 1:
            raise ValueError("num_trials must be >= 1")
        for name in self.policy_names:
            if name not in POLICY_NAMES:
                raise ValueError(f"unknown policy {name!r}; choose from {', '.join(POLICY_NAMES)}")
        self.policy_names = tuple(self.policy_names)


@dataclass
class RegretTrace:
    policy: str
    trial: int
    cum_regret: np.ndarray
    truncation_count: int = 0
    user_digest: str = ""


def trial_seed(master_seed: int, trial: int) -> int:
    """Stable 64-bit seed for trial ``trial``."""
    state = np.random.SeedSequence([master_seed, trial]).generate_state(2, dtype=np.uint32)
    return int(state[0]) << 32 | int(state[1])


def trial_streams(seed: int) -> tuple[np.random.Generator, np.random.Generator]:
    """Independent (user, outcome) generators derived from a trial seed."""
    users, outcomes = np.random.SeedSequence(seed).spawn(2)
    return np.random.default_rng(users), np.random.default_rng(outcomes)


def run_trial(cfg: ExperimentConfig, policy_name: str, seed: int, trial: int = 0) -> RegretTrace:
    env = cfg.env
    user_rng, outcome_rng = trial_streams(seed)
    policy = make_policy(policy_name, cfg.policy_cfg, env)
    digest = hashlib.sha256()
    regret = np.empty(cfg.num_users)
    total, truncated = 0.0, 0
    for t in range(1, cfg.num_users + 1):
        user = sample_user(user_rng, env)
        digest.update(user.contexts.tobytes())
        digest.update(np.float64(user.beta).tobytes())
        a = policy.choose_action(user)
        episode = run_user_episode(outcome_rng, env, user, lambda i: a)
        truncated += episode.truncated
        x = user.contexts[a]
        for r in episode.outcomes:
            policy.observe(x, r, t)
        policy.end_user(t)
        h = np.atleast_1d(env.true_lifetimes(user.contexts, user.beta))
        total += float(h.max() - h[a])
        regret[t - 1] = total
    return RegretTrace(policy_name, trial, regret, truncated, digest.hexdigest())


@dataclass
class AggregateResult:
    num_users: int
    traces: list[RegretTrace]
    mean: dict[str, np.ndarray]
    stderr: dict[str, np.ndarray]

    def final_regret(self, policy: str) -> tuple[float, float]:
        return float(self.mean[policy][-1]), float(self.stderr[policy][-1])

    def slope(self, policy: str, start_frac: float = 0.5) -> float:
        return loglog_slope(self.mean[policy], start_frac)


def _run_one(args):
    cfg, name, trial = args
    return run_trial(cfg, name, trial_seed(cfg.master_seed, trial), trial)


def aggregate(traces: list[RegretTrace], num_users: int) -> AggregateResult:
    traces = sorted(traces, key=lambda tr: (tr.policy, tr.trial))
    mean, stderr = {}, {}
    for name in dict.fromkeys(tr.policy for tr in traces):
        stack = np.stack([tr.cum_regret for tr in traces if tr.policy == name])
        mean[name] = stack.mean(axis=0)
        if stack.shape[0] > 1:
            stderr[name] = stack.std(axis=0, ddof=1) / math.sqrt(stack.shape[0])
        else:
            stderr[name] = np.zeros(num_users)
    return AggregateResult(num_users, traces, mean, stderr)


def run_experiment(cfg: ExperimentConfig, trial_order=None) -> AggregateResult:
    """Run every (policy, trial) pair and aggregate pointwise mean and stderr.

    ``trial_order`` permutes execution order; results do not depend on it.
    """
    trials = list(range(cfg.num_trials)) if trial_order is None else list(trial_order)
    jobs = [(cfg, name, k) for k in trials for name in cfg.policy_names]
    if cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            traces = list(pool.map(_run_one, jobs))
    else:
        traces = [_run_one(job) for job in jobs]
    return aggregate(traces, cfg.num_users)


def loglog_slope(cum_regret, start_frac: float = 0.5) -> float:
    """Least-squares slope of log(cum_regret) against log(user index) over the tail.

    Uses user indices ``ceil(start_frac * T)`` through ``T``; NaN if any of
    those values is not positive.
    """
    y = np.asarray(cum_regret, dtype=float)
    T = y.size
    t = np.arange(max(math.ceil(start_frac * T), 1), T + 1)
    tail = y[t - 1]
    if t.size < 2 or np.any(tail <= 0):
        return float("nan")
    return float(np.polyfit(np.log(t), np.log(tail), 1)[0])


def _num(v: float):
    return None if not math.isfinite(v) else v


def summarize(results: AggregateResult) -> dict:
    out = {}
    for name in results.mean:
        mean, err = results.final_regret(name)
        out[name] = {
            "final_regret_mean": mean,
            "final_regret_stderr": err,
            "loglog_slope": _num(results.slope(name)),
            "truncation_count": sum(tr.truncation_count for tr in results.traces if tr.policy == name),
        }
    return out


def write_results(results: AggregateResult, path) -> tuple[Path, Path]:
    """Write ``regret.csv`` and ``summary.json`` into directory ``path``."""
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    csv_path, summary_path = out / "regret.csv", out / "summary.json"
    with open(csv_path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for tr in results.traces:
            for i, v in enumerate(tr.cum_regret, start=1):
                w.writerow((tr.policy, tr.trial, i, repr(float(v))))
    with open(summary_path, "w") as fh:
        json.dump(summarize(results), fh, indent=2, sort_keys=True)
        fh.write("\n")
    return csv_path, summary_path


def default_output_dir() -> str:
    return os.environ.get("HRUCB_OUTPUT_DIR", "hrucb-results")
