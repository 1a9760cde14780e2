"""
Expected lifetime of a reneging user
====================================

A user keeps interacting until the first outcome below their satisfaction
level ``beta``.  With a fixed action the number of rounds is geometric, so
its mean is ``1 / P(outcome < beta)``.  Here we plot that mean against the
outcome mean and check it against simulated episodes.
"""

import matplotlib.pyplot as plt
import numpy as np

from hrucb import LinkFunction, VarianceBounds, expected_lifetime
from hrucb.env import UserInstance, default_params, run_user_episode

link = LinkFunction(slope=1.0, big_l=2.0)  # f(z) = z + 2
bounds = VarianceBounds.for_link(link)

###############################################################################
# Larger mean outcomes keep users longer; a larger variance pushes the
# lifetime back towards 2 because outcomes fall below beta more often.

u = np.linspace(-1, 1, 201)
fig, ax = plt.subplots()
for variance in (0.25, 1.0, 4.0):
    w = link.inverse(variance)
    ax.plot(u, expected_lifetime(u, w, 0.0, link, bounds), label=f"variance {variance:g}")
ax.set_xlabel("mean outcome")
ax.set_ylabel("expected lifetime (rounds)")
ax.set_yscale("log")
ax.legend()

###############################################################################
# Simulate 20000 episodes of one fixed action in the benchmark world.

params = default_params()
x = np.array([0.4, 0.1, -0.2, 0.3])
user = UserInstance(x[None, :], beta=0.2)
rng = np.random.default_rng(0)
life = np.array([run_user_episode(rng, params, user, lambda i: 0).lifetime for _ in range(20_000)])
h = float(params.true_lifetimes(x, user.beta))
print(f"analytic mean {h:.3f}, simulated {life.mean():.3f} +/- {life.std(ddof=1) / np.sqrt(life.size):.3f}")

fig, ax = plt.subplots()
k = np.arange(1, 16)
ax.bar(k, np.bincount(life, minlength=16)[1:16] / life.size, label="simulated")
ax.plot(k, (1 / h) * (1 - 1 / h) ** (k - 1), "k.-", label="geometric")
ax.set_xlabel("lifetime")
ax.legend()
plt.show()
