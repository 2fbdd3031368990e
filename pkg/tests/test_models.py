"""Model builder tests: LGM, stochastic volatility, finite HMMs."""

import math

import numpy as np
import pytest
from scipy import integrate

from islandpf.engine import Bootstrap, Population, eta_hat, step_bootstrap
from islandpf.errors import InvalidTables
from islandpf.fk import kalman_predictive
from islandpf.models import (
    LgmParams,
    SvParams,
    make_finite_hmm,
    make_lgm,
    make_sv,
    simulate,
    standard_instance,
)


class TestLgm:
    def test_potential_peak_matches_sup_bound(self):
        params = LgmParams(phi=0.9, sigma_u=0.6, sigma_v=1.0, observations=(0.4,))
        m = make_lgm(params)
        peak = 1.0 / (math.sqrt(2 * math.pi) * 1.0)
        assert m.potential(0, np.array([0.4]))[0] == pytest.approx(peak)
        assert m.sup_bound(0) == pytest.approx(peak)
        assert m.potential(0, np.array([0.4 + 2.0]))[0] < peak

    def test_paper_configuration_accepted(self):
        ys = np.zeros(20)
        m = make_lgm(LgmParams(phi=0.9, sigma_u=0.6, sigma_v=1.0, observations=tuple(ys)))
        assert m.horizon == 20

    def test_invalid_params(self):
        with pytest.raises(ValueError):
            LgmParams(phi=1.0, sigma_u=0.6, sigma_v=1.0, observations=(0.0,))
        with pytest.raises(ValueError):
            LgmParams(phi=0.5, sigma_u=-1.0, sigma_v=1.0, observations=(0.0,))

    def test_bootstrap_tracks_kalman_predictive(self):
        rng = np.random.default_rng(5)
        params0 = LgmParams(phi=0.9, sigma_u=0.6, sigma_v=1.0, observations=(0.0,))
        _, ys = simulate("lgm", params0, 12, rng)
        params = LgmParams(phi=0.9, sigma_u=0.6, sigma_v=1.0, observations=tuple(ys))
        m = make_lgm(params)
        want = kalman_predictive(0.9, 0.6, 1.0, ys)
        n1 = 100_000
        pop = Population(m.initial(rng, n1), np.ones(n1))
        for p in range(m.horizon):
            step_bootstrap(pop, m, rng)
        est = eta_hat(pop, lambda x: x)
        # crude SE: predictive sd over sqrt(N1), inflated for selection noise
        se = 4 * math.sqrt(want[-1, 1] / n1) * 4
        assert est == pytest.approx(want[-1, 0], abs=se)


class TestSv:
    def test_zero_observation_monotone(self):
        m = make_sv(SvParams(alpha=0.98, sigma=0.5, beta=1.0, observations=(0.0, 1.0)))
        xs = np.array([-1.0, 0.0, 1.0])
        g = m.potential(0, xs)
        assert g[0] > g[1] > g[2]
        assert g[1] == pytest.approx(1.0 / math.sqrt(2 * math.pi))
        assert m.sup_bound(0) is None

    def test_paper_configuration_accepted(self):
        ys = np.ones(100)
        m = make_sv(SvParams(alpha=0.98, sigma=0.5, beta=1.0, observations=tuple(ys)))
        assert m.horizon == 100

    def test_potential_integrates_to_one_over_y(self):
        m = make_sv(SvParams(alpha=0.5, sigma=0.4, beta=0.8, observations=(1.0,)))
        for x in (-1.2, 0.0, 0.7):
            dens = lambda y: float(
                make_sv(
                    SvParams(alpha=0.5, sigma=0.4, beta=0.8, observations=(y,))
                ).potential(0, np.array([x]))[0]
            )
            total, _ = integrate.quad(dens, -60, 60, limit=200)
            assert total == pytest.approx(1.0, abs=1e-8)

    def test_sup_bound_holds_empirically(self):
        m = make_sv(SvParams(alpha=0.98, sigma=0.5, beta=1.0, observations=(0.7,)))
        xs = np.linspace(-30, 30, 20001)
        assert m.potential(0, xs).max() <= m.sup_bound(0) * (1 + 1e-12)


class TestSimulate:
    def test_degenerate_lgm_is_constant(self):
        params = LgmParams(phi=0.0, sigma_u=1e-12, sigma_v=1.0, observations=(0.0,))
        states, obs = simulate("lgm", params, 6, np.random.default_rng(0))
        np.testing.assert_allclose(states, 0.0, atol=1e-10)
        assert obs.shape == (6,)

    def test_lgm_stationary_variance(self):
        params = LgmParams(phi=0.8, sigma_u=0.5, sigma_v=1.0, observations=(0.0,))
        rng = np.random.default_rng(11)
        finals = np.array(
            [simulate("lgm", params, 3, rng)[0][-1] for _ in range(100_000)]
        )
        want = 0.5**2 / (1 - 0.8**2)
        assert finals.var() == pytest.approx(want, rel=0.02)

    def test_seed_reproducibility(self):
        params = SvParams(alpha=0.9, sigma=0.3, beta=1.0, observations=(0.0,))
        a = simulate("sv", params, 10, np.random.default_rng(42))
        b = simulate("sv", params, 10, np.random.default_rng(42))
        np.testing.assert_array_equal(a[0], b[0])
        np.testing.assert_array_equal(a[1], b[1])

    def test_unknown_kind(self):
        with pytest.raises(ValueError):
            simulate("arma", None, 5, np.random.default_rng(0))


class TestMakeFiniteHmm:
    def test_doubly_stochastic_uniform_flow(self):
        from islandpf.fk import exact_flow

        m = make_finite_hmm(
            2,
            2,
            eta0=[0.5, 0.5],
            transitions=[[[0.3, 0.7], [0.7, 0.3]], [[0.5, 0.5], [0.5, 0.5]]],
            potentials=[[1.0, 1.0]] * 3,
        )
        flow = exact_flow(m)
        np.testing.assert_allclose(flow.etas, 0.5, atol=1e-14)

    def test_random_model_valid(self):
        m = make_finite_hmm(4, 6, seed=7)
        assert m.d == 4
        assert m.horizon == 6
        assert np.all(m.potentials > 0)

    def test_partial_tables_rejected(self):
        with pytest.raises(InvalidTables):
            make_finite_hmm(2, 1, eta0=[0.5, 0.5])

    def test_seed_or_tables_required(self):
        with pytest.raises(InvalidTables):
            make_finite_hmm(3, 4)

    def test_standard_instance_pinned(self):
        m = standard_instance()
        assert m.d == 3
        assert m.horizon == 10
        again = standard_instance()
        np.testing.assert_array_equal(m.eta0, again.eta0)
        np.testing.assert_array_equal(m.transitions, again.transitions)
        np.testing.assert_array_equal(m.potentials, again.potentials)


class TestLgmKalmanConsistency:
    def test_predictive_mean_tracks_kalman_at_every_step(self):
        # mean over independent runs of eta_hat_p(x) within 4 SE of the
        # Kalman predictive mean for every 0 <= p <= 20
        rng = np.random.default_rng(2)
        params0 = LgmParams(phi=0.9, sigma_u=0.6, sigma_v=1.0, observations=(0.0,))
        _, ys = simulate("lgm", params0, 20, rng)
        model = make_lgm(LgmParams(phi=0.9, sigma_u=0.6, sigma_v=1.0,
                                   observations=tuple(ys)))
        want = kalman_predictive(0.9, 0.6, 1.0, ys)
        runs, n1 = 24, 10_000
        track = np.empty((runs, 21))
        for k in range(runs):
            pop = Population(model.initial(rng, n1), np.ones(n1))
            track[k, 0] = eta_hat(pop, lambda x: x)
            for p in range(20):
                step_bootstrap(pop, model, rng)
                track[k, p + 1] = eta_hat(pop, lambda x: x)
        for p in range(21):
            se = track[:, p].std(ddof=1) / math.sqrt(runs)
            assert abs(track[:, p].mean() - want[p, 0]) < 4 * se, f"step {p}"
