"""Independent brute-force oracles used by the test suite.

Everything here is deliberately naive: path sums are literal loops over all
state paths, quadrature is a plain trapezoid rule on a fine grid, one-step
laws are exhaustive enumerations of every (selection, mutation) outcome.
None of it shares code with the library paths it checks.
"""

from __future__ import annotations

import itertools
import math

import numpy as np


def enumerate_flow(eta0, transitions, potentials, f=None):
    """gamma_n(f), gamma_n(1) and eta_n(f) by literal path enumeration.

    Sums eta0(x0) * prod_{p<n} [g_p(x_p) M_{p+1}(x_p, x_{p+1})] over every
    path (x_0, ..., x_n); cost d^(n+1).
    """
    eta0 = np.asarray(eta0, dtype=float)
    transitions = np.asarray(transitions, dtype=float)
    potentials = np.asarray(potentials, dtype=float)
    d = eta0.shape[0]
    n = transitions.shape[0]
    if f is None:
        f = np.arange(d, dtype=float)
    f = np.asarray(f, dtype=float)
    gamma_f = 0.0
    gamma_1 = 0.0
    for path in itertools.product(range(d), repeat=n + 1):
        w = eta0[path[0]]
        for p in range(n):
            w *= potentials[p][path[p]] * transitions[p][path[p]][path[p + 1]]
        gamma_1 += w
        gamma_f += w * f[path[n]]
    return gamma_f, gamma_1, gamma_f / gamma_1


def enumerate_eta_sequence(eta0, transitions, potentials):
    """All marginals eta_p, p = 0..n, each by a fresh path enumeration."""
    d = len(eta0)
    n = len(transitions)
    etas = []
    for p in range(n + 1):
        probs = np.empty(d)
        for s in range(d):
            ind = np.zeros(d)
            ind[s] = 1.0
            gf, g1, _ = enumerate_flow(
                eta0, transitions[:p], potentials[: p + 1], f=ind
            )
            probs[s] = gf / g1
        etas.append(probs)
    return np.array(etas)


def q_matrix_product(transitions, potentials, p, n):
    """Q_{p,n} as the explicit product diag(g_p) M_{p+1} ... diag(g_{n-1}) M_n."""
    d = len(potentials[0])
    mat = np.eye(d)
    for step in range(p, n):
        mat = mat @ np.diag(potentials[step]) @ np.asarray(transitions[step])
    return mat


def kalman_grid_oracle(phi, sigma_u, sigma_v, observations, span=10.0, points=4001):
    """Predictive means/variances of the LGM by grid quadrature.

    Runs the filtering recursion on a fine grid with trapezoid integration:
    posterior_p ~ predictive_p(x) * N(y_p; x, sigma_v), predictive_{p+1}(x')
    = integral posterior_p(x) N(x'; phi x, sigma_u) dx.
    """
    sd0 = sigma_u / math.sqrt(1 - phi**2)
    lim = span * max(sd0, sigma_u + sigma_v) + np.max(np.abs(observations), initial=0.0)
    x = np.linspace(-lim, lim, points)
    dx = x[1] - x[0]
    dens = np.exp(-0.5 * (x / sd0) ** 2) / (math.sqrt(2 * math.pi) * sd0)
    out = []
    for y in observations:
        mass = np.trapezoid(dens, dx=dx)
        dens = dens / mass
        mean = np.trapezoid(x * dens, dx=dx)
        var = np.trapezoid((x - mean) ** 2 * dens, dx=dx)
        out.append((mean, var))
        # measurement update
        lik = np.exp(-0.5 * ((y - x) / sigma_v) ** 2)
        post = dens * lik
        post = post / np.trapezoid(post, dx=dx)
        # one-step-ahead prediction: integrate the transition kernel column-wise
        diff = x[:, None] - phi * x[None, :]
        ker = np.exp(-0.5 * (diff / sigma_u) ** 2) / (math.sqrt(2 * math.pi) * sigma_u)
        dens = np.trapezoid(ker * post[None, :], dx=dx, axis=1)
    mass = np.trapezoid(dens, dx=dx)
    dens = dens / mass
    mean = np.trapezoid(x * dens, dx=dx)
    var = np.trapezoid((x - mean) ** 2 * dens, dx=dx)
    out.append((mean, var))
    return np.array(out)


def bootstrap_one_step_law(states, transition, potentials_vec, d):
    """Exact one-step law of the bootstrap move from a fixed population.

    Each slot independently picks ancestor j with probability g(x_j)/sum g
    and then moves by M; returns the probability of every new population in
    {0..d-1}^N (a dict keyed by state tuples).
    """
    g = np.array([potentials_vec[s] for s in states], dtype=float)
    sel = g / g.sum()
    slot_law = np.zeros(d)
    for j, s in enumerate(states):
        slot_law += sel[j] * np.asarray(transition)[s]
    law = {}
    for new in itertools.product(range(d), repeat=len(states)):
        law[new] = float(np.prod([slot_law[s] for s in new]))
    return law


def epsilon_one_step_law(states, transition, potentials_vec, eps, d):
    """Exact one-step law of the epsilon move from a fixed population.

    Each slot i keeps its own particle with probability eps*g(x_i) and
    otherwise redraws the ancestor proportionally to the potentials; every
    slot then mutates by M.
    """
    g = np.array([potentials_vec[s] for s in states], dtype=float)
    sel = g / g.sum()
    trans = np.asarray(transition)
    n = len(states)
    slot_laws = []
    for i, s in enumerate(states):
        keep = eps * g[i]
        law_i = keep * trans[s]
        for j, sj in enumerate(states):
            law_i = law_i + (1 - keep) * sel[j] * trans[sj]
        slot_laws.append(law_i)
    law = {}
    for new in itertools.product(range(d), repeat=n):
        law[new] = float(np.prod([slot_laws[i][s] for i, s in enumerate(new)]))
    return law


def island_bootstrap_one_step_mean(states, transition, potentials_vec, f):
    """E[mean f over the island after one bootstrap move | current island].

    Exhaustive over (ancestor assignment, landing state): the island kernel
    applied to the linear function m(f).
    """
    g = np.array([potentials_vec[s] for s in states], dtype=float)
    sel = g / g.sum()
    trans = np.asarray(transition)
    f = np.asarray(f, dtype=float)
    # each slot is i.i.d.: E[f(new slot)] = sum_j sel_j * (M f)(x_j)
    mf = trans @ f
    per_slot = float(sel @ np.array([mf[s] for s in states]))
    return per_slot
