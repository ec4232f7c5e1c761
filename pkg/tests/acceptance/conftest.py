"""Acceptance runs use the configured pool and band sizes."""
import pytest


@pytest.fixture(autouse=True)
def small_pools():
    yield
