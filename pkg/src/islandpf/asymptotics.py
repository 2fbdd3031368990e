"""Closed-form asymptotic bias/variance constants on finite models.

For the bootstrap filter the large-N1 bias and variance of the normalized
estimator are B/N1 and V/N1; for the doubly interacting system the
island-level selection adds B_tilde and V_tilde on the 1/(N1*N2) scale.
All four constants are eta-integrals of normalized semigroup kernels and
are evaluated here as exact linear algebra, which is what the statistical
acceptance tests of the samplers compare against.

The mean-squared-error comparison between independent and interacting
islands reduces to the threshold N1 < B^2 * N2 / V_tilde: interaction is
predicted to win only for islands smaller than that.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import EpsilonOutOfRange, Extinction
from .fk import EXACT_TOL, FiniteModel, exact_flow


@dataclass(frozen=True)
class AsymptoticConstants:
    """(B, V, B_tilde, V_tilde) for one test function at one horizon."""

    b: float
    v: float
    b_tilde: float
    v_tilde: float
    horizon: int
    function: str = ""

    def __post_init__(self):
        if self.v < -EXACT_TOL or self.v_tilde < -EXACT_TOL:
            raise ValueError("variance constants must be nonnegative")


def _flow_and_chain(model: FiniteModel, n: Optional[int]):
    if n is None:
        n = model.horizon
    if not 0 <= n <= model.horizon:
        raise ValueError(f"horizon {n} outside [0, {model.horizon}]")
    flow = exact_flow(model)
    return flow, n


def _qbar_rows(model: FiniteModel, flow, ell: int, n: int):
    """Q_bar_{ell,p}(1) for p = ell..n and the full matrix Q_bar_{ell,n}.

    Walks the product Q_{ell,p} forward, normalizing by eta_ell Q_{ell,p}(1)
    at each p.
    """
    d = model.d
    eta_ell = flow.etas[ell]
    mat = np.eye(d)
    ones = np.ones(d)
    qbar1 = [ones.copy()]
    for p in range(ell, n):
        mat = mat @ (model.potentials[p][:, None] * model.transitions[p])
        u = mat.sum(axis=1)
        mass = float(eta_ell @ u)
        if mass <= 0.0:
            raise Extinction(f"eta_{ell} Q_{{{ell},{p + 1}}}(1) = 0", step=ell)
        qbar1.append(u / mass)
    mass = float(eta_ell @ mat.sum(axis=1)) if n > ell else 1.0
    qbar_mat = mat / mass if n > ell else np.eye(d)
    return np.array(qbar1), qbar_mat


def single_constants(
    model: FiniteModel, f, n: Optional[int] = None
) -> tuple[float, float]:
    """Bootstrap constants B_n(f) and V_n(f).

    B = -sum_p eta_p[ Qbar_{p,n}(1) * Qbar_{p,n}(f - eta_n f) ],
    V =  sum_p eta_p[ (Qbar_{p,n}(f - eta_n f))^2 ].
    """
    flow, n = _flow_and_chain(model, n)
    f = np.asarray(f, dtype=float)
    fbar = f - float(flow.etas[n] @ f)
    b = 0.0
    v = 0.0
    for p in range(n + 1):
        qbar1, qbar = _qbar_rows(model, flow, p, n)
        qf = qbar @ fbar
        eta_p = flow.etas[p]
        b -= float(eta_p @ (qbar1[-1] * qf))
        v += float(eta_p @ (qf * qf))
    return b, v


def island_constants(
    model: FiniteModel, f, n: Optional[int] = None
) -> tuple[float, float]:
    """Double-bootstrap excess constants B_tilde_n(f) and V_tilde_n(f).

    V_tilde = sum_l (n - l) eta_l[(Qbar_{l,n} fbar)^2];
    B_tilde = -sum_l (n - l) eta_l[(Qbar_{l,n}(1) - 1) Qbar_{l,n} fbar]
              + sum_l eta_l[(sum_{p=l}^n (Qbar_{l,p}(1) - 1)) Qbar_{l,n} fbar].
    """
    flow, n = _flow_and_chain(model, n)
    f = np.asarray(f, dtype=float)
    fbar = f - float(flow.etas[n] @ f)
    b_tilde = 0.0
    v_tilde = 0.0
    for ell in range(n + 1):
        qbar1, qbar = _qbar_rows(model, flow, ell, n)
        qf = qbar @ fbar
        eta_ell = flow.etas[ell]
        weight = n - ell
        v_tilde += weight * float(eta_ell @ (qf * qf))
        b_tilde -= weight * float(eta_ell @ ((qbar1[-1] - 1.0) * qf))
        centered_sum = (qbar1 - 1.0).sum(axis=0)
        b_tilde += float(eta_ell @ (centered_sum * qf))
    return b_tilde, v_tilde


def constants(
    model: FiniteModel, f, name: str = "", n: Optional[int] = None
) -> AsymptoticConstants:
    """All four constants for one test function."""
    b, v = single_constants(model, f, n)
    bt, vt = island_constants(model, f, n)
    return AsymptoticConstants(
        b=b, v=v, b_tilde=bt, v_tilde=vt,
        horizon=model.horizon if n is None else n,
        function=name,
    )


def epsilon_local_variance(model: FiniteModel, eps: float, p: int, f) -> float:
    """Exact local variance of the epsilon-bootstrap scheme at step p >= 1.

    eta_{p-1}[ S M_p f^2 - (S M_p f)^2 ] with the keep-or-redraw kernel
    S(x, .) = eps g(x) delta_x + (1 - eps g(x)) Psi(eta_{p-1}); at eps = 0
    this collapses to the bootstrap local variance eta_p[(f - eta_p f)^2].
    """
    if p < 1:
        raise ValueError("local variance is defined for steps p >= 1")
    if p > model.horizon:
        raise ValueError(f"step {p} outside the model horizon")
    if eps < 0:
        raise EpsilonOutOfRange(f"eps must be nonnegative, got {eps!r}")
    g = model.potentials[p - 1]
    if eps * g.max() > 1.0 + EXACT_TOL:
        raise EpsilonOutOfRange(
            f"eps * G_{p - 1} exceeds 1: max {eps * g.max()!r}"
        )
    flow = exact_flow(model)
    eta_prev = flow.etas[p - 1]
    psi = eta_prev * g
    psi = psi / psi.sum()
    m = model.transitions[p - 1]
    f = np.asarray(f, dtype=float)
    h1 = m @ f
    h2 = m @ (f * f)
    keep = eps * g
    s_h1 = keep * h1 + (1.0 - keep) * float(psi @ h1)
    s_h2 = keep * h2 + (1.0 - keep) * float(psi @ h2)
    return float(eta_prev @ (s_h2 - s_h1 * s_h1))


def mse_predict(
    c: AsymptoticConstants, n1: int, n2: int, mode: str = "independent"
) -> float:
    """Leading-order MSE prediction for either island layout.

    independent: V/(N1 N2) + B^2/N1^2; interacting: (V + V_tilde)/(N1 N2).
    """
    if n1 < 1 or n2 < 1:
        raise ValueError("n1 and n2 must be positive")
    if mode == "independent":
        return c.v / (n1 * n2) + (c.b / n1) ** 2
    if mode == "interacting":
        return (c.v + c.v_tilde) / (n1 * n2)
    raise ValueError(f"mode must be 'independent' or 'interacting', got {mode!r}")


def crossover_n1(c: AsymptoticConstants, n2: int) -> float:
    """Island size below which interaction is predicted to beat independence.

    The threshold B^2 N2 / V_tilde; degenerate V_tilde = 0 reports +inf when
    B != 0 (interaction always predicted better) and 0 when B = 0.
    """
    if n2 < 1:
        raise ValueError("n2 must be positive")
    if c.v_tilde == 0.0:
        return float("inf") if c.b != 0.0 else 0.0
    return c.b * c.b * n2 / c.v_tilde
