"""Two-level island particle system: N2 islands of N1 particles.

Each island runs one of the particle-level selection schemes from
:mod:`islandpf.engine`; across the islands the same menu applies again
(plus keeping them independent), with the island-level potential being the
within-island weighted mean of the particle potentials.  Any within/across
pairing is a valid configuration.

Per step the system first selects island ancestors (across scheme), then
runs the within-island selection and mutation on each selected island's
particles.  Island-level weights Omega appear only with the adaptive-ESS
across scheme; everywhere else they stay equal to 1.

Randomness: the stream of island slot i at step p is derived from
(seed, island, i, p), the across-selection stream from (seed, across, p),
so a run is bit-reproducible under any scheduling of the island work.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional, Union

import numpy as np

from . import _rng
from .engine import (
    AdaptiveESS,
    Bootstrap,
    EpsilonBootstrap,
    Population,
    WithinScheme,
    _epsilon_row,
    _ess_row,
    _bootstrap_rows,
    ancestor_rows,
    multinomial_select,
    potentials_rows,
    resolve_epsilon,
)
from .errors import EpsilonOutOfRange, Extinction, ZeroMass
from .fk import TimeIndexedModel


@dataclass(frozen=True)
class Independent:
    """No interaction across islands."""


AcrossScheme = Union[Independent, Bootstrap, EpsilonBootstrap, AdaptiveESS]


@dataclass
class IslandSystem:
    """N2 equally sized islands with island-level weights Omega.

    ``states`` and ``weights`` are (N2, N1) matrices (row = island);
    ``islands`` exposes the rows as Population views.  Counters:

    - ``interaction_count``: island units redrawn across islands --
      bootstrap adds N2 per step, epsilon adds the replaced islands only,
      adaptive ESS adds N2 when triggered;
    - ``island_resample_events``: steps at which any across-island
      resampling happened;
    - ``particle_resample_events``: (island, step) pairs at which the
      within-island scheme resampled (bootstrap: every island every step).
    """

    states: np.ndarray
    weights: np.ndarray
    island_weights: np.ndarray
    step: int = 0
    interaction_count: int = 0
    island_resample_events: int = 0
    particle_resample_events: int = 0

    def __post_init__(self):
        if self.states.ndim != 2 or self.weights.shape != self.states.shape:
            raise ValueError("states and weights must be (N2, N1) matrices")
        if self.island_weights.shape != (self.states.shape[0],):
            raise ValueError("island_weights must have one entry per island")
        if np.any(self.island_weights < 0) or self.island_weights.sum() <= 0:
            raise ZeroMass("island weights must be nonnegative with positive mass")

    @property
    def n2(self) -> int:
        return self.states.shape[0]

    @property
    def n1(self) -> int:
        return self.states.shape[1]

    @property
    def islands(self) -> list[Population]:
        return [
            Population(self.states[i], self.weights[i], self.step)
            for i in range(self.n2)
        ]


@dataclass(frozen=True)
class RunConfig:
    """One island run: sizes, scheme pairing, seed and test functions."""

    n1: int
    n2: int
    within: WithinScheme
    across: AcrossScheme
    seed: int
    test_functions: dict[str, Callable[[np.ndarray], np.ndarray]] = field(
        default_factory=dict
    )

    def __post_init__(self):
        if self.n1 < 1 or self.n2 < 1:
            raise ValueError("n1 and n2 must be positive")


@dataclass(frozen=True)
class RunResult:
    """Final estimates and bookkeeping of one island run."""

    estimates: dict[str, float]
    log_gamma1: float
    interactions: int
    island_resamples: int
    particle_resamples: int
    n1: int
    n2: int
    steps: int
    seed: int


# ---------------------------------------------------------------------------
# island-level operations


def island_potential(
    pop: Population, model: TimeIndexedModel, p: Optional[int] = None
) -> float:
    """Island potential: within-island weighted mean of the potentials."""
    p = pop.step if p is None else p
    g = model.checked_potential(p, pop.states)
    total = pop.weights.sum()
    if total <= 0.0:
        raise ZeroMass("island potential over zero weight mass")
    return float((pop.weights * g).sum()) / total


def _island_potentials(sys: IslandSystem, model: TimeIndexedModel) -> np.ndarray:
    g = potentials_rows(model, sys.step, sys.states)
    return (sys.weights * g).sum(axis=1) / sys.weights.sum(axis=1)


def island_select_bootstrap(
    sys: IslandSystem, model: TimeIndexedModel, rng: np.random.Generator
) -> np.ndarray:
    """Multinomial island ancestors proportional to the island potentials."""
    pots = _island_potentials(sys, model)
    return _across_bootstrap(sys, pots, rng)


def _across_bootstrap(
    sys: IslandSystem, pots: np.ndarray, rng: np.random.Generator
) -> np.ndarray:
    if pots.sum() <= 0.0:
        raise Extinction(
            f"all island potentials vanish at step {sys.step}", step=sys.step
        )
    ancestors = multinomial_select(pots, sys.n2, rng)
    sys.interaction_count += sys.n2
    sys.island_resample_events += 1
    return ancestors


def island_select_epsilon(
    sys: IslandSystem,
    model: TimeIndexedModel,
    eps: float,
    rng: np.random.Generator,
) -> np.ndarray:
    """Keep island i with probability eps * potential_i, redraw the rest."""
    pots = _island_potentials(sys, model)
    return _across_epsilon(sys, pots, eps, rng)


def _across_epsilon(
    sys: IslandSystem, pots: np.ndarray, eps: float, rng: np.random.Generator
) -> np.ndarray:
    if eps < 0:
        raise EpsilonOutOfRange(f"eps must be nonnegative, got {eps!r}")
    keep_prob = eps * pots
    if keep_prob.size and keep_prob.max() > 1.0 + 1e-12:
        raise EpsilonOutOfRange(
            f"eps * island potential exceeds 1 at step {sys.step}"
        )
    if pots.sum() <= 0.0:
        raise Extinction(
            f"all island potentials vanish at step {sys.step}", step=sys.step
        )
    keep = rng.random(sys.n2) < keep_prob
    ancestors = np.arange(sys.n2, dtype=np.int64)
    replaced = int(np.count_nonzero(~keep))
    if replaced:
        ancestors[~keep] = multinomial_select(pots, replaced, rng)
        sys.island_resample_events += 1
    sys.interaction_count += replaced
    return ancestors


def island_select_ess(
    sys: IslandSystem,
    model: TimeIndexedModel,
    alpha_islands: float,
    rng: np.random.Generator,
) -> tuple[np.ndarray, np.ndarray, bool]:
    """ESS-gated island selection; updates Omega in place.

    Above the threshold the islands are kept and Omega picks up the island
    potentials; below it they are multinomially redrawn proportional to
    Omega * potential and Omega resets to 1.
    """
    pots = _island_potentials(sys, model)
    return _across_ess(sys, pots, alpha_islands, rng)


def _across_ess(
    sys: IslandSystem, pots: np.ndarray, alpha: float, rng: np.random.Generator
) -> tuple[np.ndarray, np.ndarray, bool]:
    products = sys.island_weights * pots
    denom = float(products @ products)
    if denom <= 0.0:
        raise ZeroMass(f"all Omega_i * potential_i vanish at step {sys.step}")
    s = float(products.sum())
    ess = s * s / denom
    if ess >= alpha * sys.n2:
        sys.island_weights = products
        return np.arange(sys.n2, dtype=np.int64), sys.island_weights, False
    ancestors = multinomial_select(products, sys.n2, rng)
    sys.island_weights = np.ones(sys.n2)
    sys.interaction_count += sys.n2
    sys.island_resample_events += 1
    return ancestors, sys.island_weights, True


def double_estimator(
    sys: IslandSystem, f: Callable[[np.ndarray], np.ndarray]
) -> float:
    """Omega-weighted mean over islands of the within-island weighted means."""
    omega_total = sys.island_weights.sum()
    if omega_total <= 0.0:
        raise ZeroMass("island weights carry no mass")
    row_mass = sys.weights.sum(axis=1)
    if np.any(row_mass <= 0.0):
        raise ZeroMass("an island carries no weight mass")
    vals = np.asarray(f(sys.states.reshape(-1)), dtype=float).reshape(sys.states.shape)
    island_means = (sys.weights * vals).sum(axis=1) / row_mass
    return float(sys.island_weights @ island_means) / omega_total


# ---------------------------------------------------------------------------
# the full run


def initialize(model: TimeIndexedModel, cfg: RunConfig) -> IslandSystem:
    """N2 islands of N1 i.i.d. eta_0 draws, unit weights everywhere."""
    pool = _rng.local_pool()
    states = np.stack(
        [
            model.initial(pool.stream(i, cfg.seed, _rng.INIT, i), cfg.n1)
            for i in range(cfg.n2)
        ]
    )
    return IslandSystem(
        states=states,
        weights=np.ones((cfg.n2, cfg.n1)),
        island_weights=np.ones(cfg.n2),
    )


def run(
    model: TimeIndexedModel,
    cfg: RunConfig,
    island_workers: int = 1,
) -> RunResult:
    """Advance an island system over the model's full horizon.

    ``island_workers`` > 1 threads the per-island within-step work for the
    epsilon/ESS schemes; per-island RNG streams make the result identical
    to the serial order.  Propagates Extinction/ZeroMass with the failing
    step index.
    """
    sys = initialize(model, cfg)
    n = model.horizon
    independent = isinstance(cfg.across, Independent)
    log_gamma_rows = np.zeros(cfg.n2) if independent else None
    log_gamma = 0.0

    for p in range(n):
        g_rows = potentials_rows(model, p, sys.states)
        row_mass = sys.weights.sum(axis=1)
        pots = (sys.weights * g_rows).sum(axis=1) / row_mass

        # unnormalized-mass estimate accumulates before Omega moves
        if independent:
            if np.any(pots <= 0.0):
                bad = int(np.argmax(pots <= 0.0))
                raise Extinction(
                    f"island {bad} hit zero potential mass at step {p}", step=p
                )
            log_gamma_rows += np.log(pots)
        else:
            factor = float(sys.island_weights @ pots) / sys.island_weights.sum()
            if factor <= 0.0:
                raise Extinction(f"zero island mass at step {p}", step=p)
            log_gamma += float(np.log(factor))

        pool = _rng.local_pool()
        across_rng = pool.stream(sys.n2, cfg.seed, _rng.ACROSS, p)
        ancestors = _select_across(sys, cfg.across, model, pots, p, across_rng)

        rngs = [
            pool.stream(i, cfg.seed, _rng.ISLAND, i, p) for i in range(sys.n2)
        ]
        _within_step(sys, cfg.within, model, p, ancestors, g_rows, rngs, island_workers)
        sys.step = p + 1

    if independent:
        log_gamma = _log_mean_exp(log_gamma_rows)

    estimates = {
        name: double_estimator(sys, f) for name, f in cfg.test_functions.items()
    }
    return RunResult(
        estimates=estimates,
        log_gamma1=float(log_gamma),
        interactions=sys.interaction_count,
        island_resamples=sys.island_resample_events,
        particle_resamples=sys.particle_resample_events,
        n1=cfg.n1,
        n2=cfg.n2,
        steps=n,
        seed=cfg.seed,
    )


def _log_mean_exp(values: np.ndarray) -> float:
    top = values.max()
    if np.isinf(top):
        return float(top)
    return float(top + np.log(np.mean(np.exp(values - top))))


def _select_across(
    sys: IslandSystem,
    scheme: AcrossScheme,
    model: TimeIndexedModel,
    pots: np.ndarray,
    p: int,
    rng: np.random.Generator,
) -> np.ndarray:
    if isinstance(scheme, Independent):
        return np.arange(sys.n2, dtype=np.int64)
    if isinstance(scheme, Bootstrap):
        return _across_bootstrap(sys, pots, rng)
    if isinstance(scheme, EpsilonBootstrap):
        eps = resolve_epsilon(scheme.policy, model, p, pots)
        return _across_epsilon(sys, pots, eps, rng)
    if isinstance(scheme, AdaptiveESS):
        ancestors, _, _ = _across_ess(sys, pots, scheme.alpha, rng)
        return ancestors
    raise TypeError(f"unknown across scheme: {scheme!r}")


def _within_step(
    sys: IslandSystem,
    scheme: WithinScheme,
    model: TimeIndexedModel,
    p: int,
    ancestors: np.ndarray,
    g_rows: np.ndarray,
    rngs: list[np.random.Generator],
    island_workers: int,
) -> None:
    src_states = sys.states[ancestors]
    src_weights = sys.weights[ancestors]
    src_g = g_rows[ancestors]

    if isinstance(scheme, Bootstrap):
        sys.states, _ = _bootstrap_rows(src_states, model, p, rngs, g_rows=src_g)
        sys.weights = np.ones_like(src_weights)
        sys.particle_resample_events += sys.n2
        return

    if isinstance(scheme, EpsilonBootstrap):
        new_states = np.empty_like(src_states)

        def work(i: int) -> int:
            eps = resolve_epsilon(scheme.policy, model, p, src_g[i])
            new_states[i], replaced = _epsilon_row(
                src_states[i], model, p, eps, rngs[i]
            )
            return replaced

        replaced_counts = _map_islands(work, sys.n2, island_workers)
        sys.states = new_states
        sys.weights = np.ones_like(src_weights)
        sys.particle_resample_events += sum(1 for r in replaced_counts if r > 0)
        return

    if isinstance(scheme, AdaptiveESS):
        new_states = np.empty_like(src_states)
        new_weights = np.empty_like(src_weights)

        def work(i: int) -> int:
            new_states[i], new_weights[i], resampled = _ess_row(
                src_states[i], src_weights[i], model, p, scheme.alpha, rngs[i]
            )
            return int(resampled)

        triggered = _map_islands(work, sys.n2, island_workers)
        sys.states = new_states
        sys.weights = new_weights
        sys.particle_resample_events += sum(triggered)
        return

    raise TypeError(f"unknown within scheme: {scheme!r}")


def _map_islands(work, n2: int, island_workers: int) -> list[int]:
    if island_workers > 1 and n2 > 1:
        with ThreadPoolExecutor(max_workers=island_workers) as pool:
            return list(pool.map(work, range(n2)))
    return [work(i) for i in range(n2)]
