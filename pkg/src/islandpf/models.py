"""Concrete model builders: linear Gaussian, stochastic volatility, finite HMMs.

The linear Gaussian model doubles as the continuous-state benchmark (its
predictive law is exactly computable by the Kalman recursion); small finite
HMMs carry the exact-oracle load for everything else.

Note on the stochastic volatility potential: the observation density is the
standard Normal(0, beta^2 * exp(x)) likelihood.  A published variant of the
weight formula with the exponent -(x/2 - y^2 e^{-x}) / (2 beta^2) diverges
as x -> -inf and does not integrate to 1 over y, so it is treated as a
misprint and not implemented.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _rng
from .errors import InvalidTables
from .fk import FiniteModel, TimeIndexedModel

_SQRT_2PI = math.sqrt(2.0 * math.pi)


@dataclass(frozen=True)
class LgmParams:
    """AR(1) state with additive Gaussian observation noise.

    X_{p+1} = phi X_p + sigma_u U_p,  Y_p = X_p + sigma_v V_p,
    X_0 ~ Normal(0, sigma_u^2 / (1 - phi^2)).
    """

    phi: float
    sigma_u: float
    sigma_v: float
    observations: tuple[float, ...]

    def __post_init__(self):
        if not abs(self.phi) < 1:
            raise ValueError("LGM requires |phi| < 1")
        if self.sigma_u <= 0 or self.sigma_v <= 0:
            raise ValueError("LGM requires positive noise scales")
        object.__setattr__(self, "observations", tuple(float(y) for y in self.observations))


@dataclass(frozen=True)
class SvParams:
    """Log-volatility AR(1): X_{p+1} = alpha X_p + sigma U, Y_p = beta e^{X_p/2} V_p."""

    alpha: float
    sigma: float
    beta: float
    observations: tuple[float, ...]

    def __post_init__(self):
        if not abs(self.alpha) < 1:
            raise ValueError("SV requires |alpha| < 1")
        if self.sigma <= 0 or self.beta <= 0:
            raise ValueError("SV requires positive sigma and beta")
        object.__setattr__(self, "observations", tuple(float(y) for y in self.observations))


def make_lgm(params: LgmParams) -> TimeIndexedModel:
    """Feynman-Kac view of the LGM prediction problem.

    Mutation is the AR(1) kernel, the potential at step p is the Gaussian
    observation density of y_p centered at the state, and eta_n is the
    predictive law of X_n given Y_0..Y_{n-1}.
    """
    obs = np.asarray(params.observations, dtype=float)
    if obs.size < 1:
        raise ValueError("LGM model needs at least one observation")
    phi, su, sv = params.phi, params.sigma_u, params.sigma_v
    sd0 = su / math.sqrt(1.0 - phi * phi)
    peak = 1.0 / (_SQRT_2PI * sv)

    def initial(rng: np.random.Generator, size: int) -> np.ndarray:
        return rng.normal(0.0, sd0, size)

    def mutate(p: int, states: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        return phi * states + su * rng.standard_normal(states.shape[0])

    def potential(p: int, states: np.ndarray) -> np.ndarray:
        z = (obs[p] - states) / sv
        return np.exp(-0.5 * z * z) * peak

    return TimeIndexedModel(
        horizon=obs.size,
        initial=initial,
        mutate=mutate,
        potential=potential,
        sup_bound=lambda p: peak,
    )


def make_sv(params: SvParams) -> TimeIndexedModel:
    """Feynman-Kac view of the stochastic volatility prediction problem.

    The potential is the Normal(0, beta^2 e^x) density at y_p.  Its sup
    over x is attained where the variance matches y_p^2 and is unbounded
    when y_p = 0 (declared as no bound for that step).
    """
    obs = np.asarray(params.observations, dtype=float)
    if obs.size < 1:
        raise ValueError("SV model needs at least one observation")
    alpha, sigma, beta = params.alpha, params.sigma, params.beta
    sd0 = sigma / math.sqrt(1.0 - alpha * alpha)

    def initial(rng: np.random.Generator, size: int) -> np.ndarray:
        return rng.normal(0.0, sd0, size)

    def mutate(p: int, states: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        return alpha * states + sigma * rng.standard_normal(states.shape[0])

    def potential(p: int, states: np.ndarray) -> np.ndarray:
        # log density kept inside one exp; e^{-x} may overflow for very
        # negative states, which correctly drives the density to zero
        with np.errstate(over="ignore"):
            arg = -0.5 * states - (obs[p] ** 2) * np.exp(-states) / (2.0 * beta * beta)
            return np.exp(arg) / (_SQRT_2PI * beta)

    def sup_bound(p: int):
        y = obs[p]
        if y == 0.0:
            return None
        return 1.0 / (_SQRT_2PI * abs(y)) * math.exp(-0.5)

    return TimeIndexedModel(
        horizon=obs.size,
        initial=initial,
        mutate=mutate,
        potential=potential,
        sup_bound=sup_bound,
    )


def simulate(kind: str, params, n: int, rng: np.random.Generator):
    """Forward-simulate latent states (length n+1) and observations (length n).

    ``params`` is an LgmParams or SvParams whose observations field is
    ignored; the returned observations are freshly generated.
    """
    if n < 1:
        raise ValueError("need at least one step")
    if kind == "lgm":
        phi, su, sv = params.phi, params.sigma_u, params.sigma_v
        sd0 = su / math.sqrt(1.0 - phi * phi) if su > 0 else 0.0
        states = np.empty(n + 1)
        states[0] = rng.normal(0.0, sd0) if sd0 > 0 else 0.0
        for p in range(n):
            states[p + 1] = phi * states[p] + su * rng.standard_normal()
        observations = states[:n] + sv * rng.standard_normal(n)
        return states, observations
    if kind == "sv":
        alpha, sigma, beta = params.alpha, params.sigma, params.beta
        sd0 = sigma / math.sqrt(1.0 - alpha * alpha)
        states = np.empty(n + 1)
        states[0] = rng.normal(0.0, sd0)
        for p in range(n):
            states[p + 1] = alpha * states[p] + sigma * rng.standard_normal()
        observations = beta * np.exp(states[:n] / 2.0) * rng.standard_normal(n)
        return states, observations
    raise ValueError(f"unknown model kind {kind!r}")


def make_finite_hmm(
    d: int,
    horizon: int,
    seed: int | None = None,
    eta0=None,
    transitions=None,
    potentials=None,
    mixing: float = 1.0,
) -> FiniteModel:
    """A finite model from explicit tables or a seeded random draw.

    Random draws keep every table entry strictly positive so the exact flow
    never hits extinction; potentials are log-uniform over [0.25, 3] so
    selection is non-trivial.  ``mixing`` in (0, 1] blends random rows with
    the identity: values below 1 give slowly mixing chains, which inflate
    the island-level variance constants and make the interaction trade-off
    visible at practical population sizes.
    """
    if d < 2:
        raise InvalidTables("need at least two states")
    explicit = [x is not None for x in (eta0, transitions, potentials)]
    if any(explicit):
        if not all(explicit):
            raise InvalidTables("explicit tables need eta0, transitions and potentials")
        return FiniteModel(
            eta0=np.asarray(eta0, dtype=float),
            transitions=np.asarray(transitions, dtype=float),
            potentials=np.asarray(potentials, dtype=float),
        )
    if seed is None:
        raise InvalidTables("either a seed or explicit tables are required")
    if not 0.0 < mixing <= 1.0:
        raise InvalidTables("mixing must lie in (0, 1]")
    rng = _rng.derive_rng(seed, _rng.DATA)
    eta = rng.uniform(0.3, 1.0, d)
    eta /= eta.sum()
    rows = rng.uniform(0.05, 1.0, (horizon, d, d))
    rows /= rows.sum(axis=2, keepdims=True)
    trans = (1.0 - mixing) * np.eye(d)[None, :, :] + mixing * rows
    pots = np.exp(rng.uniform(np.log(0.25), np.log(3.0), (horizon + 1, d)))
    return FiniteModel(eta0=eta, transitions=trans, potentials=pots)


# The d=3, n=10 instance used throughout the statistical test suites: a
# slowly mixing chain with contrasty potentials, picked so the island
# variance excess is comparable to the single-island variance and the
# MSE crossover threshold sits at a practical island size.
STANDARD_SEED = 33
STANDARD_D = 3
STANDARD_HORIZON = 10
STANDARD_MIXING = 0.1


def standard_instance() -> FiniteModel:
    """The suite's pinned finite test model."""
    return make_finite_hmm(
        STANDARD_D, STANDARD_HORIZON, seed=STANDARD_SEED, mixing=STANDARD_MIXING
    )
