"""
Size of the regression set
==========================

HR-UCB stores a pair only while the regression set holds fewer than
``floor(K t)`` samples.  A small ``K`` discards much of what long-lived
users reveal; past a few samples per user the cap rarely binds.
"""

from dataclasses import replace

import matplotlib.pyplot as plt
import numpy as np

from hrucb import ExperimentConfig, benchmark_policy_config, run_experiment

fig, ax = plt.subplots()
base = ExperimentConfig(num_users=1500, num_trials=3, master_seed=2)
for k in (1, 2, 5, 10):
    cfg = replace(base, policy_cfg=benchmark_policy_config(gamma_rate=float(k)))
    mean = run_experiment(cfg).mean["hr-ucb"]
    print(f"K={k:>2}: final regret {mean[-1]:.1f}")
    ax.plot(np.arange(1, cfg.num_users + 1), mean, label=f"K = {k}")
ax.set_xlabel("user")
ax.set_ylabel("cumulative pseudo-regret")
ax.legend()
plt.show()
