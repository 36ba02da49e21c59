"""Pytest configuration and fixtures."""

import numpy as np
import pytest

from app.core.config import get_settings
from app.core.logging import configure_logging
from app.services.bethe_sampler import BetheSampler
from app.services.replica_runner import ReplicaRunner


@pytest.fixture(autouse=True, scope="session")
def quiet_logging():
    """JSON logs on stderr, warnings and above."""
    configure_logging("WARNING", "test")


@pytest.fixture(autouse=True)
def settings_cache(monkeypatch):
    """Fresh settings per test, isolated from any local .env seed."""
    monkeypatch.delenv("DEFAULT_SEED", raising=False)
    monkeypatch.setenv("APP_ENV", "test")
    monkeypatch.setenv("LOG_LEVEL", "WARNING")
    get_settings.cache_clear()
    yield
    get_settings.cache_clear()


@pytest.fixture
def rng():
    """Seeded generator."""
    return np.random.default_rng(20240611)


@pytest.fixture
def runner():
    """Inline runner with small chunks."""
    return ReplicaRunner(chunk_size=5_000, workers=1)


@pytest.fixture
def small_batch(rng):
    """200 propagated realizations on the ball of radius 3."""
    topology = BetheSampler.ball_topology(3)
    return BetheSampler.propagate_batch(BetheSampler.sample_batch(topology, 200, rng))


@pytest.fixture
def realization(rng):
    """One propagated realization on the ball of radius 3."""
    return BetheSampler.propagate(BetheSampler.sample_ball(3, rng))
