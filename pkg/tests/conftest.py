"""Shared fixtures and small helpers for the suite."""

from __future__ import annotations

import numpy as np
import pytest

from islandpf.fk import FiniteModel


def random_finite_model(rng: np.random.Generator, d: int, n: int) -> FiniteModel:
    """A valid random finite model with strictly positive tables."""
    eta0 = rng.uniform(0.2, 1.0, d)
    eta0 /= eta0.sum()
    trans = rng.uniform(0.1, 1.0, (n, d, d))
    trans /= trans.sum(axis=2, keepdims=True)
    pots = rng.uniform(0.2, 2.0, (n + 1, d))
    return FiniteModel(eta0=eta0, transitions=trans, potentials=pots)


@pytest.fixture
def rng():
    return np.random.default_rng(20240914)


@pytest.fixture
def small_model(rng):
    return random_finite_model(rng, d=3, n=4)
