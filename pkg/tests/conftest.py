import numpy as np
import pytest

from conformal_eit import Conductivities, DiskSpec, FourierSeries, PerturbedDiskSpec


@pytest.fixture
def cond():
    """σ₁ = 1, σ₂ = 2, so μ = 1/3."""
    return Conductivities(1.0, 2.0)


@pytest.fixture
def cos3_inclusion():
    def make(eps, radius=0.4):
        return PerturbedDiskSpec(DiskSpec(0, radius), FourierSeries.cos(3), eps)
    return make


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
