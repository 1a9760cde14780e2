"""Command-line driver: ``hrucb {run,compare,sweep-k,check}``.

Exit codes: 0 success, 1 usage error, 2 config error, 3 runtime error.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

from .config import ConfigError, build_env, build_policy_config, load_config, parse_override, to_jsonable
from .harness import ExperimentConfig, aggregate, default_output_dir, run_experiment, write_results
from .policies import POLICY_NAMES

EXIT_OK, EXIT_USAGE, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2, 3
COMPARE_POLICIES = ("hr-ucb", "lin-ucb", "sigmamax-ucb", "oracle")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _common(p: argparse.ArgumentParser, k_many: bool = False) -> None:
    p.add_argument("--config", help="JSON config file")
    p.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                   help="override any config key (repeatable)")
    p.add_argument("--users", type=int, help="number of users T")
    p.add_argument("--trials", type=int, help="number of independent trials")
    p.add_argument("--seed", type=int, help="master seed")
    if k_many:
        p.add_argument("--k", type=float, nargs="+", default=[1.0, 5.0, 10.0],
                       help="sample-set growth rates to sweep")
    else:
        p.add_argument("--k", type=float, help="sample-set growth rate K")
    p.add_argument("--delta", type=float)
    p.add_argument("--lambda", dest="lam", type=float)
    p.add_argument("--c3", type=float)
    p.add_argument("--c4", type=float)
    p.add_argument("--greedy", action="store_true", help="LinUCB picks the largest predicted mean")
    p.add_argument("--workers", type=int, help="parallel worker processes")
    p.add_argument("--out", help="output directory (default $HRUCB_OUTPUT_DIR or ./hrucb-results)")
    p.add_argument("--emit-svg", action="store_true", help="also write regret.svg")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="hrucb", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", parser_class=_Parser, required=True)
    run = sub.add_parser("run", help="run one policy")
    run.add_argument("--policy", required=True, help=" | ".join(POLICY_NAMES))
    _common(run)
    _common(sub.add_parser("compare", help="run all policies on common user streams"))
    _common(sub.add_parser("sweep-k", help="run HR-UCB for several K"), k_many=True)
    check = sub.add_parser("check", help="run the built-in invariant checks")
    check.add_argument("--seed", type=int, default=0)
    return parser


def _effective_config(args, command: str) -> dict:
    overrides = dict(parse_override(s) for s in args.overrides)
    flag_map = {"users": "users", "trials": "trials", "seed": "seed", "delta": "delta",
                "lam": "lam", "c3": "c3", "c4": "c4", "workers": "workers"}
    for attr, key in flag_map.items():
        if getattr(args, attr) is not None:
            overrides[key] = getattr(args, attr)
    if command != "sweep-k" and args.k is not None:
        overrides["gamma_rate"] = args.k
    if args.greedy:
        overrides["linucb_alpha"] = 0.0
    cfg = load_config(args.config, overrides)
    if command == "run" and "trials" not in overrides and "trials" not in _file_keys(args.config):
        cfg["trials"] = 1
    return cfg


def _file_keys(path) -> set:
    return set(json.loads(Path(path).read_text())) if path else set()


def _experiment(cfg: dict, names) -> ExperimentConfig:
    env = build_env(cfg)
    pcfg = build_policy_config(cfg, env)
    try:
        return ExperimentConfig(
            env=env, policy_names=tuple(names), policy_cfg=pcfg, num_users=int(cfg["users"]),
            num_trials=int(cfg["trials"]), master_seed=int(cfg["seed"]), workers=int(cfg["workers"]),
        )
    except ValueError as exc:
        key = "users" if "num_users" in str(exc) else "trials" if "num_trials" in str(exc) else "policy"
        raise ConfigError(key, str(exc)) from exc


def _emit_svg(results, path: Path) -> None:
    import matplotlib

    matplotlib.use("Agg")
    matplotlib.rcParams["svg.hashsalt"] = "hrucb"
    import matplotlib.pyplot as plt
    import numpy as np

    fig, ax = plt.subplots(figsize=(6, 4))
    t = np.arange(1, results.num_users + 1)
    for name, mean in results.mean.items():
        ax.plot(t, mean, label=name)
        ax.fill_between(t, mean - results.stderr[name], mean + results.stderr[name], alpha=0.2)
    ax.set_xlabel("user")
    ax.set_ylabel("cumulative pseudo-regret")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def _run(args) -> int:
    cfg = _effective_config(args, args.command)
    if args.command == "run":
        if args.policy not in POLICY_NAMES:
            raise UsageError(f"unknown policy {args.policy!r}; choose from {', '.join(POLICY_NAMES)}")
        results = run_experiment(_experiment(cfg, [args.policy]))
    elif args.command == "compare":
        results = run_experiment(_experiment(cfg, COMPARE_POLICIES))
    else:
        traces = []
        for k in args.k:
            exp = _experiment(dict(cfg, gamma_rate=k), ["hr-ucb"])
            label = f"hr-ucb_K{k:g}"
            traces += [replace(tr, policy=label) for tr in run_experiment(exp).traces]
        results = aggregate(traces, int(cfg["users"]))
    out = Path(args.out or default_output_dir())
    csv_path, summary_path = write_results(results, out)
    echo = to_jsonable(cfg)
    if args.command == "sweep-k":
        echo["k_values"] = list(args.k)
    (out / "config.json").write_text(json.dumps(echo, indent=2, sort_keys=True) + "\n")
    if args.emit_svg:
        _emit_svg(results, out / "regret.svg")
    print(summary_path.read_text(), end="")
    print(f"wrote {csv_path}")
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "check":
            from .checks import run_checks

            return EXIT_OK if run_checks(seed=args.seed) else EXIT_RUNTIME
        return _run(args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SystemExit as exc:  # --help
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    except Exception as exc:  # noqa: BLE001
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
