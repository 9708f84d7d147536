"""Shared parameter fixtures for the two reference markets."""
from __future__ import annotations

import pytest

from sysrisk import DynamicsParams, MarketParams


@pytest.fixture(scope="session")
def growth_market():
    """Arrival-dominated setting: w=70, v=20, u=0.15, delta=0.85."""
    return MarketParams(w=70.0, v=20.0, alpha=0.95, delta=0.85,
                        u=0.15, d=-0.6, r_s=0.1, r_b=0.11)


@pytest.fixture(scope="session")
def growth_market_low_delta():
    return MarketParams(w=70.0, v=20.0, alpha=0.95, delta=0.45,
                        u=0.15, d=-0.6, r_s=0.1, r_b=0.11)


@pytest.fixture(scope="session")
def imitation_market():
    """Imitation-dominated setting: w=70, v=15, u=0.13, delta=0.8."""
    return MarketParams(w=70.0, v=15.0, alpha=0.95, delta=0.8,
                        u=0.13, d=-0.6, r_s=0.1, r_b=0.11)


@pytest.fixture(scope="session")
def imitation_dynamics():
    return DynamicsParams(mean_N=7.0, mean_S=6.0, mean_L=0.0,
                          b_n=0.8, b_s=0.8, n0=500, eps0=0.4, rounds=4000)
