"""Flat, JSON-backed experiment configuration.

Every tunable lives under one key so that it can be set from a file or
overridden with ``key=value`` on the command line.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .env import EnvironmentParams, default_params
from .hetreg import ConfidenceConfig
from .policies import BENCHMARK_EXPLORATION, PolicyConfig


class ConfigError(ValueError):
    """A configuration key is unknown or its value is invalid."""

    def __init__(self, key: str, message: str):
        super().__init__(f"{key}: {message}")
        self.key = key


def default_config() -> dict:
    cfg = default_params().to_dict()
    cfg.update(
        delta=0.1,
        lam=1.0,
        c1=2.0,
        c2=0.5,
        c3=BENCHMARK_EXPLORATION,
        c4=BENCHMARK_EXPLORATION,
        gamma_rate=5.0,
        linucb_alpha=1.0,
        users=3000,
        trials=5,
        seed=0,
        workers=1,
    )
    return cfg


_ENV_KEYS = tuple(default_params().to_dict())


def load_config(path=None, overrides: dict | None = None) -> dict:
    cfg = default_config()
    if path is not None:
        try:
            loaded = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(str(path), f"cannot read config: {exc}") from exc
        if not isinstance(loaded, dict):
            raise ConfigError(str(path), "config file must hold a JSON object")
        _merge(cfg, loaded)
    _merge(cfg, overrides or {})
    return cfg


def _merge(cfg: dict, new: dict) -> None:
    for key, value in new.items():
        if key not in cfg:
            raise ConfigError(key, "unknown config key")
        cfg[key] = value


def parse_override(text: str) -> tuple[str, object]:
    key, sep, raw = text.partition("=")
    if not sep or not key:
        raise ConfigError(text, "override must look like key=value")
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    return key.strip(), value


def build_env(cfg: dict) -> EnvironmentParams:
    try:
        return EnvironmentParams.from_dict({k: cfg[k] for k in _ENV_KEYS})
    except (TypeError, ValueError) as exc:
        raise ConfigError(_guess_key(exc, _ENV_KEYS), str(exc)) from exc


def build_policy_config(cfg: dict, env: EnvironmentParams) -> PolicyConfig:
    keys = ("delta", "lam", "c1", "c2", "c3", "c4")
    try:
        conf = ConfidenceConfig(
            delta=float(cfg["delta"]),
            sigma2_max=env.bounds.sigma2_max,
            dim=env.dim,
            lam=float(cfg["lam"]),
            m_f=env.link.slope,
            big_l=env.link.big_l,
            c1=float(cfg["c1"]),
            c2=float(cfg["c2"]),
            c3=float(cfg["c3"]),
            c4=float(cfg["c4"]),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(_guess_key(exc, keys), str(exc)) from exc
    try:
        return PolicyConfig(
            conf=conf, gamma_rate=float(cfg["gamma_rate"]), linucb_alpha=float(cfg["linucb_alpha"])
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(_guess_key(exc, ("gamma_rate", "linucb_alpha")), str(exc)) from exc


def _guess_key(exc: Exception, keys) -> str:
    msg = str(exc)
    for key in sorted(keys, key=len, reverse=True):
        if key in msg:
            return key
    return "/".join(keys)


def to_jsonable(cfg: dict) -> dict:
    return {k: (v.tolist() if isinstance(v, np.ndarray) else v) for k, v in cfg.items()}
