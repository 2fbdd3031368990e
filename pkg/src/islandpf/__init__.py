"""Island particle approximations of Feynman-Kac flows.

The library has three layers:

- :mod:`islandpf.fk` -- model abstractions, exact finite-state flows,
  semigroup kernels and the Kalman predictive oracle;
- :mod:`islandpf.engine` / :mod:`islandpf.island` -- single-island and
  two-level particle samplers under bootstrap, epsilon-bootstrap and
  adaptive-ESS selection;
- :mod:`islandpf.asymptotics` / :mod:`islandpf.harness` -- closed-form
  bias/variance constants on finite models and the configuration-driven
  experiment runner behind the ``ipf`` command line tool.
"""

from .asymptotics import (
    AsymptoticConstants,
    constants,
    crossover_n1,
    epsilon_local_variance,
    island_constants,
    mse_predict,
    single_constants,
)
from .engine import (
    AdaptiveESS,
    Bootstrap,
    EmpiricalEssSup,
    EpsilonBootstrap,
    FixedSchedule,
    Population,
    SupNormInverse,
    ess_criterion,
    eta_hat,
    gamma_hat_update,
    local_error,
    multinomial_select,
    step_bootstrap,
    step_epsilon,
    step_ess,
)
from .errors import (
    EpsilonOutOfRange,
    Extinction,
    IndexOrder,
    InvalidTables,
    IslandPfError,
    MissingCell,
    Unsupported,
    ZeroMass,
)
from .fk import (
    Distribution,
    FiniteModel,
    FlowResult,
    KernelMatrix,
    TimeIndexedModel,
    boltzmann_gibbs,
    exact_flow,
    kalman_predictive,
    q_kernel,
    qbar_kernel,
)
from .island import (
    Independent,
    IslandSystem,
    RunConfig,
    RunResult,
    double_estimator,
    island_potential,
    island_select_bootstrap,
    island_select_epsilon,
    island_select_ess,
    run,
)
from .models import (
    LgmParams,
    SvParams,
    make_finite_hmm,
    make_lgm,
    make_sv,
    simulate,
    standard_instance,
)

__all__ = [
    "AdaptiveESS",
    "AsymptoticConstants",
    "Bootstrap",
    "Distribution",
    "EmpiricalEssSup",
    "EpsilonBootstrap",
    "EpsilonOutOfRange",
    "Extinction",
    "FiniteModel",
    "FixedSchedule",
    "FlowResult",
    "Independent",
    "IndexOrder",
    "InvalidTables",
    "IslandPfError",
    "IslandSystem",
    "KernelMatrix",
    "LgmParams",
    "MissingCell",
    "Population",
    "RunConfig",
    "RunResult",
    "SupNormInverse",
    "SvParams",
    "TimeIndexedModel",
    "Unsupported",
    "ZeroMass",
    "boltzmann_gibbs",
    "constants",
    "crossover_n1",
    "double_estimator",
    "epsilon_local_variance",
    "ess_criterion",
    "eta_hat",
    "exact_flow",
    "gamma_hat_update",
    "island_constants",
    "island_potential",
    "island_select_bootstrap",
    "island_select_epsilon",
    "island_select_ess",
    "kalman_predictive",
    "local_error",
    "make_finite_hmm",
    "make_lgm",
    "make_sv",
    "mse_predict",
    "multinomial_select",
    "q_kernel",
    "qbar_kernel",
    "run",
    "simulate",
    "single_constants",
    "standard_instance",
    "step_bootstrap",
    "step_epsilon",
    "step_ess",
]
