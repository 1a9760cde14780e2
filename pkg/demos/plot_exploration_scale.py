"""
How large is the exploration bonus?
===================================

The bonus multiplies ``||x||_{V^-1}`` by ``xi = c3 * alpha1 + c4 * rho``.
Bounding the lifetime's derivatives gives valid ``c3`` and ``c4``, but over
the benchmark's variance range the lifetime is extremely steep, so the
resulting bonus swamps every lifetime difference for a very long time.
In practice ``c3 = c4`` is an exploration knob.
"""

from dataclasses import replace

import matplotlib.pyplot as plt
import numpy as np

from hrucb import (
    BENCHMARK_EXPLORATION,
    ConfidenceConfig,
    ExperimentConfig,
    LinkFunction,
    PolicyConfig,
    VarianceBounds,
    lipschitz_constants,
    run_experiment,
    xi,
)

link = LinkFunction(1.0, 2.0)
for bounds in (VarianceBounds(0.05, 4.0), VarianceBounds(0.5, 4.0)):
    lc = lipschitz_constants(link, bounds, -1.0, 1.0)
    print(f"variance in [{bounds.sigma2_min}, {bounds.sigma2_max}]: c3 = {lc.c3:.3g}, c4 = {lc.c4:.3g}")

n = np.unique(np.logspace(0, 5, 60).astype(int))
fig, ax = plt.subplots()
for c in (1.0, 1e-2, BENCHMARK_EXPLORATION):
    cfg = ConfidenceConfig(c3=c, c4=c)
    ax.loglog(n, [xi(k, cfg) for k in n], label=f"c3 = c4 = {c:g}")
ax.axhline(1.0, color="k", ls=":")
ax.set_xlabel("regression-set size")
ax.set_ylabel("xi")
ax.legend()

###############################################################################
# Final regret after 1500 users for a few exploration scales.

base = ExperimentConfig(num_users=1500, num_trials=2, master_seed=3)
for c in (1.0, 1e-2, 1e-3, BENCHMARK_EXPLORATION):
    pcfg = PolicyConfig(conf=ConfidenceConfig(c3=c, c4=c))
    res = run_experiment(replace(base, policy_cfg=pcfg))
    print(f"c3 = c4 = {c:g}: final regret {res.final_regret('hr-ucb')[0]:.1f}")
plt.show()
