"""Feynman-Kac models, exact finite-state flows and semigroup kernels.

A Feynman-Kac flow is the pair of measure sequences (eta_n, gamma_n) driven
by an initial law, Markov mutation kernels M_p and nonnegative potentials
G_p: gamma_n(f) = E[f(X_n) * prod_{p<n} G_p(X_p)] and eta_n = gamma_n
normalized.  On a finite state space everything is explicit linear algebra,
which is what the test oracles and the asymptotic constants build on.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Optional

import numpy as np

from .errors import Extinction, IndexOrder, InvalidTables, ZeroMass

# Tolerance for exact linear-algebra identities (double precision).
EXACT_TOL = 1e-12


def _as_vector(x, name: str) -> np.ndarray:
    v = np.asarray(x, dtype=float)
    if v.ndim != 1:
        raise ValueError(f"{name} must be a 1-d array, got shape {v.shape}")
    return v


@dataclass(frozen=True)
class Distribution:
    """Probability vector over a finite state space."""

    probs: np.ndarray

    def __post_init__(self):
        p = _as_vector(self.probs, "probs")
        if np.any(p < 0):
            raise ValueError("distribution entries must be nonnegative")
        if abs(p.sum() - 1.0) > EXACT_TOL:
            raise ValueError(f"distribution must sum to 1, got {p.sum()!r}")
        p.flags.writeable = False
        object.__setattr__(self, "probs", p)

    @property
    def d(self) -> int:
        return self.probs.shape[0]

    def integrate(self, f) -> float:
        """mu(f) for a function given as a vector of values per state."""
        return float(self.probs @ np.asarray(f, dtype=float))


@dataclass(frozen=True)
class KernelMatrix:
    """Nonnegative finite kernel transporting step ``from_step`` to ``to_step``."""

    entries: np.ndarray
    from_step: int
    to_step: int

    def __post_init__(self):
        m = np.asarray(self.entries, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"kernel must be square, got shape {m.shape}")
        if np.any(m < 0):
            raise ValueError("kernel entries must be nonnegative")
        if self.from_step > self.to_step:
            raise IndexOrder(
                f"kernel steps out of order: {self.from_step} > {self.to_step}"
            )
        m.flags.writeable = False
        object.__setattr__(self, "entries", m)

    def apply(self, f) -> np.ndarray:
        """The function x -> (K f)(x) as a vector."""
        return self.entries @ np.asarray(f, dtype=float)


@dataclass(frozen=True)
class FiniteModel:
    """Matrix representation of a finite-state Feynman-Kac model.

    ``transitions[p]`` is the row-stochastic kernel M_{p+1} taking step p to
    step p+1 (shape (horizon, d, d)); ``potentials[p]`` is the vector of
    G_p values (shape (horizon + 1, d)).
    """

    eta0: np.ndarray
    transitions: np.ndarray
    potentials: np.ndarray

    def __post_init__(self):
        eta0 = _as_vector(self.eta0, "eta0")
        trans = np.asarray(self.transitions, dtype=float)
        pots = np.asarray(self.potentials, dtype=float)
        d = eta0.shape[0]
        if np.any(eta0 < 0) or abs(eta0.sum() - 1.0) > EXACT_TOL:
            raise InvalidTables("eta0 must be a probability vector")
        if trans.ndim != 3 or trans.shape[1:] != (d, d):
            raise InvalidTables(f"transitions must have shape (n, {d}, {d})")
        n = trans.shape[0]
        if n < 1:
            raise InvalidTables("horizon must be >= 1")
        if np.any(trans < 0) or np.any(np.abs(trans.sum(axis=2) - 1.0) > EXACT_TOL):
            raise InvalidTables("each transition row must be a probability vector")
        if pots.shape != (n + 1, d):
            raise InvalidTables(f"potentials must have shape ({n + 1}, {d})")
        if np.any(pots < 0):
            raise InvalidTables("potentials must be nonnegative")
        for a in (eta0, trans, pots):
            a.flags.writeable = False
        object.__setattr__(self, "eta0", eta0)
        object.__setattr__(self, "transitions", trans)
        object.__setattr__(self, "potentials", pots)

    @property
    def d(self) -> int:
        return self.eta0.shape[0]

    @property
    def horizon(self) -> int:
        return self.transitions.shape[0]

    @cached_property
    def transition_cdf(self) -> np.ndarray:
        """Cumulative rows of every transition matrix, for inverse-cdf sampling."""
        return np.cumsum(self.transitions, axis=2)

    def time_indexed(self) -> "TimeIndexedModel":
        """Sampler view of the model, states encoded as integers 0..d-1."""
        cdf = self.transition_cdf
        eta0_cdf = np.cumsum(self.eta0)
        pots = self.potentials
        sup = pots.max(axis=1)

        last = self.d - 1

        def initial(rng: np.random.Generator, size: int) -> np.ndarray:
            idx = np.searchsorted(eta0_cdf, rng.random(size), side="right")
            return np.minimum(idx, last).astype(np.int64)

        def mutate(p: int, states: np.ndarray, rng: np.random.Generator) -> np.ndarray:
            u = rng.random(states.shape[0])
            rows = cdf[p][states]
            idx = (u[:, None] >= rows).sum(axis=1)
            return np.minimum(idx, last).astype(np.int64)

        def potential(p: int, states: np.ndarray) -> np.ndarray:
            return pots[p][states]

        return TimeIndexedModel(
            horizon=self.horizon,
            initial=initial,
            mutate=mutate,
            potential=potential,
            sup_bound=lambda p: float(sup[p]),
            finite=self,
        )


@dataclass(frozen=True)
class TimeIndexedModel:
    """A Feynman-Kac model given by samplers and potential evaluations.

    All callables are vectorized over a 1-d array of states:

    - ``initial(rng, size)`` draws ``size`` i.i.d. states from eta_0,
    - ``mutate(p, states, rng)`` draws one M_{p+1} transition per state,
      0 <= p < horizon,
    - ``potential(p, states)`` evaluates G_p pointwise (nonnegative),
    - ``sup_bound(p)``, when provided, returns an upper bound for
      sup_x G_p(x) or None if the potential is unbounded at that step.

    Values are immutable after construction and safe to share across
    parallel workers; all operations here are pure functions.
    """

    horizon: int
    initial: Callable[[np.random.Generator, int], np.ndarray]
    mutate: Callable[[int, np.ndarray, np.random.Generator], np.ndarray]
    potential: Callable[[int, np.ndarray], np.ndarray]
    sup_bound: Optional[Callable[[int], Optional[float]]] = None
    finite: Optional[FiniteModel] = None

    def __post_init__(self):
        if self.horizon < 1:
            raise ValueError("horizon must be >= 1")

    def checked_potential(self, p: int, states: np.ndarray) -> np.ndarray:
        """G_p values with the runtime invariants asserted.

        Potentials must be nonnegative, and below sup_bound(p) when a bound
        is declared.
        """
        g = np.asarray(self.potential(p, states), dtype=float)
        if np.any(g < 0):
            raise ValueError(f"negative potential at step {p}")
        if self.sup_bound is not None:
            bound = self.sup_bound(p)
            if bound is not None and g.size and g.max() > bound * (1 + 1e-9):
                raise ValueError(
                    f"potential at step {p} exceeds declared sup bound: "
                    f"{g.max()!r} > {bound!r}"
                )
        return g


@dataclass(frozen=True)
class FlowResult:
    """Exact flow of a finite model: eta_p and gamma_p(1) for p = 0..n.

    ``step_masses[p]`` is eta_p(G_p); gamma products are accumulated in
    log space (Gaussian-density potentials underflow by n ~ 20 otherwise).
    """

    etas: np.ndarray        # (n+1, d)
    log_gamma1: np.ndarray  # (n+1,)
    step_masses: np.ndarray  # (n+1,)

    @property
    def horizon(self) -> int:
        return self.etas.shape[0] - 1

    @property
    def gamma1(self) -> np.ndarray:
        return np.exp(self.log_gamma1)

    def eta(self, p: int) -> Distribution:
        return Distribution(self.etas[p])

    def pairs(self) -> list[tuple[Distribution, float]]:
        """The (eta_p, gamma_p(1)) sequence."""
        g1 = self.gamma1
        return [(self.eta(p), float(g1[p])) for p in range(self.horizon + 1)]


def boltzmann_gibbs(mu: Distribution, g) -> Distribution:
    """Reweight ``mu`` by the potential ``g`` and renormalize.

    Raises ZeroMass when mu(g) = 0: the transform is undefined there and
    silently renormalizing would hide model bugs.
    """
    g = _as_vector(g, "g")
    w = mu.probs * g
    mass = w.sum()
    if mass <= 0.0:
        raise ZeroMass("Boltzmann-Gibbs transform of a zero-mass reweighting")
    return Distribution(w / mass)


def exact_flow(model: FiniteModel) -> FlowResult:
    """Exact eta/gamma recursion of a finite model.

    eta_{p+1} is the Boltzmann-Gibbs reweighting of eta_p by G_p pushed
    through M_{p+1}; gamma_{p+1}(1) multiplies up the step masses
    eta_p(G_p).  Raises Extinction as soon as a step mass vanishes.
    """
    n, d = model.horizon, model.d
    etas = np.empty((n + 1, d))
    log_gamma1 = np.zeros(n + 1)
    step_masses = np.empty(n + 1)
    eta = model.eta0.copy()
    for p in range(n + 1):
        etas[p] = eta
        g = model.potentials[p]
        mass = float(eta @ g)
        step_masses[p] = mass
        if p == n:
            break
        if mass <= 0.0:
            raise Extinction(f"total extinction at step {p}: eta_p(G_p) = 0", step=p)
        log_gamma1[p + 1] = log_gamma1[p] + np.log(mass)
        eta = (eta * g / mass) @ model.transitions[p]
    if step_masses[n] <= 0.0:
        # Final-step potential has zero mass; the flow itself is complete but
        # any further selection would be undefined.
        raise Extinction(f"total extinction at step {n}: eta_n(G_n) = 0", step=n)
    return FlowResult(etas=etas, log_gamma1=log_gamma1, step_masses=step_masses)


def q_kernel(model: FiniteModel, p: int, n: int) -> KernelMatrix:
    """Unnormalized semigroup kernel Q_{p,n} = Q_{p+1} ... Q_n.

    Each factor is Q_{l+1}(x, .) = G_l(x) M_{l+1}(x, .); Q_{n,n} is the
    identity by convention.
    """
    if p > n:
        raise IndexOrder(f"q_kernel requires p <= n, got p={p}, n={n}")
    if n > model.horizon:
        raise IndexOrder(f"n={n} exceeds model horizon {model.horizon}")
    mat = np.eye(model.d)
    for step in range(p, n):
        mat = mat @ (model.potentials[step][:, None] * model.transitions[step])
    return KernelMatrix(entries=mat, from_step=p, to_step=n)


def qbar_kernel(model: FiniteModel, p: int, n: int) -> KernelMatrix:
    """Normalized semigroup kernel Q_{p,n} / eta_p(Q_{p,n} 1).

    Satisfies eta_p applied to it reproduces eta_n exactly.
    """
    q = q_kernel(model, p, n)
    if p == n:
        return q
    flow = exact_flow(model)
    mass = float(flow.etas[p] @ q.entries.sum(axis=1))
    if mass <= 0.0:
        raise Extinction(f"eta_{p} Q_{{{p},{n}}}(1) = 0", step=p)
    return KernelMatrix(entries=q.entries / mass, from_step=p, to_step=n)


def kalman_predictive(
    phi: float, sigma_u: float, sigma_v: float, observations
) -> np.ndarray:
    """Exact predictive laws of the linear Gaussian model.

    Returns an array of shape (len(observations) + 1, 2): row p holds the
    mean and variance of X_p given Y_0..Y_{p-1}.  The stationary prior
    Normal(0, sigma_u^2 / (1 - phi^2)) is row 0.
    """
    if not abs(phi) < 1:
        raise ValueError("kalman_predictive requires |phi| < 1")
    if sigma_u <= 0 or sigma_v <= 0:
        raise ValueError("kalman_predictive requires positive noise scales")
    obs = _as_vector(observations, "observations")
    out = np.empty((obs.shape[0] + 1, 2))
    mean, var = 0.0, sigma_u**2 / (1.0 - phi**2)
    out[0] = (mean, var)
    r = sigma_v**2
    for p, y in enumerate(obs):
        gain = var / (var + r)
        mean_f = mean + gain * (y - mean)
        var_f = (1.0 - gain) * var
        mean = phi * mean_f
        var = phi**2 * var_f + sigma_u**2
        out[p + 1] = (mean, var)
    return out
