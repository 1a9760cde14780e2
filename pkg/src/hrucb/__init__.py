"""Heteroscedastic linear bandits with reneging users.

Lifetime model, generalized least squares estimation with confidence radii,
a reneging-user simulator, decision policies and a seeded experiment harness.
"""

from .lifetime import (
    LinkFunction,
    VarianceBounds,
    expected_lifetime,
    lifetime_from_variance,
    lipschitz_constants,
    reneging_probability,
    std_normal_cdf,
)
from .hetreg import (
    ConfidenceConfig,
    GlseState,
    alpha1,
    alpha2,
    alpha3,
    rho,
    xi,
)
from .env import (
    EnvironmentParams,
    EpisodeResult,
    UserInstance,
    default_params,
    oracle_best,
    run_user_episode,
    sample_outcome,
    sample_user,
)
from .policies import (
    BENCHMARK_EXPLORATION,
    POLICY_NAMES,
    PolicyConfig,
    PolicyState,
    benchmark_policy_config,
    hr_ucb_index,
    make_policy,
)
from .harness import (
    AggregateResult,
    ExperimentConfig,
    RegretTrace,
    loglog_slope,
    run_experiment,
    run_trial,
    write_results,
)

__version__ = "0.1.0"
