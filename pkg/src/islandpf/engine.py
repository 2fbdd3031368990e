"""Single-island particle approximation of a Feynman-Kac flow.

Three selection schemes are supported at the particle level:

- bootstrap: every slot redraws its ancestor proportionally to the
  potentials, weights stay equal to 1;
- epsilon-bootstrap: each particle is kept with probability
  eps_p * G_p(x_i) and otherwise replaced by a potential-proportional
  redraw, weights stay 1;
- adaptive ESS: weighted particles, multiplied by the potentials while the
  effective sample size stays above alpha * N1, multinomially reset below.

All steps mutate the population in place and also return it.  A Population
is confined to one worker at a time; distinct populations may be advanced
concurrently.  Randomness always enters through an explicit generator so
results are independent of scheduling order.

The row-batched helpers at the bottom step many equal-sized populations in
one set of numpy calls while still consuming one RNG stream per row; the
island engine is built on them and the public single-population operations
are the one-row case.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Union

import numpy as np

from .errors import EpsilonOutOfRange, Extinction, Unsupported, ZeroMass
from .fk import TimeIndexedModel

_EPS_SLACK = 1e-12  # tolerance on eps * G <= 1 checks


@dataclass
class Population:
    """One island: N1 states with nonnegative weights at time ``step``."""

    states: np.ndarray
    weights: np.ndarray
    step: int = 0

    def __post_init__(self):
        self.states = np.asarray(self.states)
        self.weights = np.asarray(self.weights, dtype=float)
        if self.states.ndim != 1 or self.weights.shape != self.states.shape:
            raise ValueError("states and weights must be 1-d arrays of equal length")
        if self.states.shape[0] < 1:
            raise ValueError("a population needs at least one particle")
        if np.any(self.weights < 0):
            raise ValueError("weights must be nonnegative")
        if self.weights.sum() <= 0:
            raise ZeroMass("population weights must carry positive total mass")

    @property
    def n1(self) -> int:
        return self.states.shape[0]

    def copy(self) -> "Population":
        return Population(self.states.copy(), self.weights.copy(), self.step)


# ---------------------------------------------------------------------------
# selection schemes and epsilon policies


@dataclass(frozen=True)
class Bootstrap:
    """Multinomial selection proportional to the potentials, every step."""


@dataclass(frozen=True)
class FixedSchedule:
    """eps_p given explicitly per step."""

    values: tuple[float, ...]


@dataclass(frozen=True)
class SupNormInverse:
    """eps_p = 1 / sup_bound(p); requires the model to declare a bound."""


@dataclass(frozen=True)
class EmpiricalEssSup:
    """eps_p = 1 / max of the potential over the current support."""


EpsilonPolicy = Union[FixedSchedule, SupNormInverse, EmpiricalEssSup]


@dataclass(frozen=True)
class EpsilonBootstrap:
    """Keep each unit with probability eps * potential, redraw otherwise."""

    policy: EpsilonPolicy


@dataclass(frozen=True)
class AdaptiveESS:
    """Resample only when the effective sample size drops below alpha * N."""

    alpha: float

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise ValueError("alpha must lie in (0, 1)")


WithinScheme = Union[Bootstrap, EpsilonBootstrap, AdaptiveESS]


def resolve_epsilon(
    policy: EpsilonPolicy,
    model: TimeIndexedModel,
    p: int,
    potential_values: np.ndarray,
) -> float:
    """The realized eps_p for a step, given the current support's potentials."""
    if isinstance(policy, FixedSchedule):
        return float(policy.values[p])
    if isinstance(policy, SupNormInverse):
        bound = model.sup_bound(p) if model.sup_bound is not None else None
        if bound is None or bound <= 0:
            raise EpsilonOutOfRange(
                f"sup-norm epsilon policy needs a positive sup bound at step {p}"
            )
        return 1.0 / bound
    if isinstance(policy, EmpiricalEssSup):
        top = float(np.max(potential_values))
        if top <= 0:
            raise Extinction(f"all potentials vanish at step {p}", step=p)
        return 1.0 / top
    raise TypeError(f"unknown epsilon policy: {policy!r}")


# ---------------------------------------------------------------------------
# particle-level operations


def ess_criterion(weights, potential_values) -> float:
    """(sum w g)^2 / sum (w g)^2, the effective sample size in [1, N]."""
    wg = np.asarray(weights, dtype=float) * np.asarray(potential_values, dtype=float)
    denom = float(wg @ wg)
    if denom <= 0.0:
        raise ZeroMass("effective sample size undefined: all w_i * g_i are zero")
    s = float(wg.sum())
    return s * s / denom


def multinomial_select(weights, count: int, rng: np.random.Generator) -> np.ndarray:
    """``count`` i.i.d. indices with P(j) proportional to weights[j]."""
    w = np.asarray(weights, dtype=float)
    total = w.sum()
    if total <= 0.0:
        raise ZeroMass("multinomial selection over zero total weight")
    cum = np.cumsum(w)
    idx = np.searchsorted(cum, rng.random(count) * total, side="right")
    return np.minimum(idx, w.shape[0] - 1).astype(np.int64)


def eta_hat(pop: Population, f: Callable[[np.ndarray], np.ndarray]) -> float:
    """Weighted empirical mean sum w_i f(x_i) / sum w_i."""
    total = pop.weights.sum()
    if total <= 0.0:
        raise ZeroMass("eta_hat over zero total weight")
    vals = np.asarray(f(pop.states), dtype=float)
    return float((pop.weights * vals).sum()) / total


def gamma_hat_update(
    log_prev: float,
    pop: Population,
    model: TimeIndexedModel,
    p: Optional[int] = None,
) -> float:
    """log gamma_hat_{p+1}(1) = log_prev + log eta_hat_p(G_p).

    Log-space accumulation: Gaussian-density potentials underflow a linear
    product by n ~ 20.
    """
    p = pop.step if p is None else p
    g = model.checked_potential(p, pop.states)
    total = pop.weights.sum()
    mass = float((pop.weights * g).sum()) / total
    if mass <= 0.0:
        raise Extinction(f"eta_hat(G_{p}) = 0", step=p)
    return float(log_prev + np.log(mass))


def local_error(
    pop: Population,
    pop_prev: Population,
    model: TimeIndexedModel,
    f,
) -> float:
    """sqrt(N1) * [eta_hat_p(f) - Phi_p(eta_hat_{p-1})(f)].

    The one-step transport Phi_p(mu) = (reweight by G_{p-1}, then move by
    M_p) needs M_p f in closed form, so this is available for
    FiniteModel-backed populations only; ``f`` is a vector of values per
    state.
    """
    if model.finite is None:
        raise Unsupported("local_error needs exact kernels; model is sampler-only")
    if pop.step != pop_prev.step + 1:
        raise ValueError("pop must be pop_prev advanced by exactly one step")
    fin = model.finite
    f = np.asarray(f, dtype=float)
    p = pop.step
    mf = fin.transitions[p - 1] @ f
    g = fin.potentials[p - 1]
    w_prev = pop_prev.weights
    denom = float((w_prev * g[pop_prev.states]).sum())
    if denom <= 0.0:
        raise Extinction(f"eta_hat(G_{p - 1}) = 0", step=p - 1)
    transported = float((w_prev * (g * mf)[pop_prev.states]).sum()) / denom
    current = float((pop.weights * f[pop.states]).sum()) / pop.weights.sum()
    return float(np.sqrt(pop.n1) * (current - transported))


def step_bootstrap(
    pop: Population, model: TimeIndexedModel, rng: np.random.Generator
) -> Population:
    """One bootstrap selection/mutation step; weights stay equal to 1."""
    _require_unit_weights(pop)
    states, _ = _bootstrap_rows(
        pop.states[None, :], model, pop.step, [rng]
    )
    pop.states = states[0]
    pop.step += 1
    return pop


def step_epsilon(
    pop: Population,
    model: TimeIndexedModel,
    eps_p: float,
    rng: np.random.Generator,
) -> Population:
    """One epsilon-bootstrap step: keep w.p. eps*G, else redraw, then move."""
    _require_unit_weights(pop)
    states, _replaced = _epsilon_row(pop.states, model, pop.step, eps_p, rng)
    pop.states = states
    pop.step += 1
    return pop


def step_ess(
    pop: Population,
    model: TimeIndexedModel,
    alpha: float,
    rng: np.random.Generator,
) -> tuple[Population, bool]:
    """One adaptive-ESS step; returns the population and the resample flag.

    Ties go to keeping: the population stays weighted whenever
    ESS >= alpha * N1.
    """
    states, weights, resampled = _ess_row(
        pop.states, pop.weights, model, pop.step, alpha, rng
    )
    pop.states = states
    pop.weights = weights
    pop.step += 1
    return pop, resampled


def _require_unit_weights(pop: Population) -> None:
    if not np.all(pop.weights == 1.0):
        raise ValueError("this selection scheme requires unit weights")


# ---------------------------------------------------------------------------
# row-batched kernels
#
# Rows are independent populations of a common size; rngs[k] is row k's
# stream and is consumed in a fixed order (selection draws, then mutation
# draws), so stepping rows serially, threaded or batched yields identical
# results.


def potentials_rows(
    model: TimeIndexedModel, p: int, states: np.ndarray
) -> np.ndarray:
    """G_p over a (K, N) state matrix, invariants checked once."""
    flat = model.checked_potential(p, states.reshape(-1))
    return flat.reshape(states.shape)


def ancestor_rows(
    weight_rows: np.ndarray, rngs: Sequence[np.random.Generator]
) -> np.ndarray:
    """Row-wise multinomial ancestors, one i.i.d. index per slot.

    Row k draws from its own stream; the searchsorted runs once over the
    offset-shifted concatenation of the row cdfs.
    """
    k, n = weight_rows.shape
    totals = weight_rows.sum(axis=1)
    if np.any(totals <= 0.0):
        bad = int(np.argmax(totals <= 0.0))
        raise Extinction(f"all potentials vanish in row {bad}", step=None)
    u = np.empty((k, n))
    for i, rng in enumerate(rngs):
        rng.random(out=u[i])
    cdf = np.cumsum(weight_rows, axis=1) / totals[:, None]
    offs = np.arange(k, dtype=float)[:, None]
    flat = np.searchsorted((cdf + offs).ravel(), (u + offs).ravel(), side="right")
    idx = flat.reshape(k, n) - np.arange(k)[:, None] * n
    return np.minimum(idx, n - 1).astype(np.int64)


def mutate_rows(
    model: TimeIndexedModel,
    p: int,
    state_rows: np.ndarray,
    rngs: Sequence[np.random.Generator],
) -> np.ndarray:
    """Move every row through M_{p+1}, one stream per row.

    Finite models take a batched inverse-cdf path; sampler-only models fall
    back to one ``model.mutate`` call per row.
    """
    k, n = state_rows.shape
    if model.finite is not None:
        cdf = model.finite.transition_cdf[p]
        u = np.empty((k, n))
        for i, rng in enumerate(rngs):
            rng.random(out=u[i])
        rows = cdf[state_rows]
        idx = (u[..., None] >= rows).sum(axis=2)
        return np.minimum(idx, model.finite.d - 1).astype(np.int64)
    out = np.empty_like(state_rows)
    for i, rng in enumerate(rngs):
        out[i] = model.mutate(p, state_rows[i], rng)
    return out


def _bootstrap_rows(
    state_rows: np.ndarray,
    model: TimeIndexedModel,
    p: int,
    rngs: Sequence[np.random.Generator],
    g_rows: Optional[np.ndarray] = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Bootstrap-select then mutate every row; returns (new states, g_rows)."""
    if model.finite is not None:
        return _bootstrap_rows_finite(state_rows, model, p, rngs), g_rows
    if g_rows is None:
        g_rows = potentials_rows(model, p, state_rows)
    anc = ancestor_rows(g_rows, rngs)
    picked = np.take_along_axis(state_rows, anc, axis=1)
    return mutate_rows(model, p, picked, rngs), g_rows


def _bootstrap_rows_finite(
    state_rows: np.ndarray,
    model: TimeIndexedModel,
    p: int,
    rngs: Sequence[np.random.Generator],
) -> np.ndarray:
    """Finite-state bootstrap step over rows, drawing slot laws directly.

    Conditionally on the current row, every new slot is an i.i.d. draw
    from q = sum_s (count_s g_s / sum) M[s, .]: selecting ancestor j
    proportional to G_p(x_j) and then moving it through M only exposes the
    ancestor's state, so drawing from q directly gives the identical joint
    law with one uniform per slot and O(d) work per row.
    """
    fin = model.finite
    k, n = state_rows.shape
    d = fin.d
    g = model.checked_potential(p, np.arange(d))
    offsets = np.arange(k) * d
    counts = np.bincount(
        (state_rows + offsets[:, None]).ravel(), minlength=k * d
    ).reshape(k, d)
    weights = counts * g
    totals = weights.sum(axis=1)
    if np.any(totals <= 0.0):
        bad = int(np.argmax(totals <= 0.0))
        raise Extinction(f"all potentials vanish in row {bad} at step {p}", step=p)
    slot_law = (weights / totals[:, None]) @ fin.transitions[p]
    cdf = np.cumsum(slot_law, axis=1)
    cdf /= cdf[:, -1:]
    u = np.empty((k, n))
    for i, rng in enumerate(rngs):
        rng.random(out=u[i])
    idx = (u[:, :, None] >= cdf[:, None, :]).sum(axis=2)
    return np.minimum(idx, d - 1).astype(np.int64)


def _epsilon_row(
    states: np.ndarray,
    model: TimeIndexedModel,
    p: int,
    eps: float,
    rng: np.random.Generator,
) -> tuple[np.ndarray, int]:
    """One epsilon step for a single row; returns (new states, #replaced)."""
    g = model.checked_potential(p, states)
    if eps < 0:
        raise EpsilonOutOfRange(f"eps must be nonnegative, got {eps!r}")
    keep_prob = eps * g
    if keep_prob.size and keep_prob.max() > 1.0 + _EPS_SLACK:
        raise EpsilonOutOfRange(
            f"eps * G exceeds 1 at step {p}: max {keep_prob.max()!r}"
        )
    if g.sum() <= 0.0:
        raise Extinction(f"all potentials vanish at step {p}", step=p)
    keep = rng.random(states.shape[0]) < keep_prob
    ancestors = np.arange(states.shape[0], dtype=np.int64)
    replaced = int(np.count_nonzero(~keep))
    if replaced:
        ancestors[~keep] = multinomial_select(g, replaced, rng)
    picked = states[ancestors]
    return mutate_rows(model, p, picked[None, :], [rng])[0], replaced


def _ess_row(
    states: np.ndarray,
    weights: np.ndarray,
    model: TimeIndexedModel,
    p: int,
    alpha: float,
    rng: np.random.Generator,
) -> tuple[np.ndarray, np.ndarray, bool]:
    """One adaptive-ESS step for a single row."""
    g = model.checked_potential(p, states)
    products = weights * g
    denom = float(products @ products)
    if denom <= 0.0:
        raise ZeroMass(f"all w_i * G_p(x_i) vanish at step {p}")
    s = float(products.sum())
    ess = s * s / denom
    n1 = states.shape[0]
    if ess >= alpha * n1:
        new_states = mutate_rows(model, p, states[None, :], [rng])[0]
        return new_states, products, False
    ancestors = multinomial_select(products, n1, rng)
    picked = states[ancestors]
    new_states = mutate_rows(model, p, picked[None, :], [rng])[0]
    return new_states, np.ones(n1), True
