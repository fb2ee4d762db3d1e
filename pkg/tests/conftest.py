"""
Shared fixtures.
"""

import pytest

from squirrel.bench.runner import ensure_demo_registry
from squirrel.models import OptimizerSettings


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long end-to-end runs")


@pytest.fixture
def fast_settings() -> OptimizerSettings:
    """Default schedule with a much smaller search budget per batch."""
    return OptimizerSettings(
        gp_restarts=3,
        gp_maxiter=20,
        rf_trees=12,
        n_random_candidates=128,
        n_local_chains=3,
        n_local_steps=5,
    )


@pytest.fixture(scope="session")
def demo_registry():
    """Shipped demonstration registry, built by offline runs on first use."""
    return ensure_demo_registry()
