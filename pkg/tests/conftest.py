import os

import numpy as np
import pytest

from dmala_mimo.components.ChannelUtils import ChannelUtils
from dmala_mimo.components.ConstellationUtils import ConstellationUtils
from dmala_mimo.models.DetectionInstance import ChannelSpec


@pytest.fixture(scope="session")
def qpsk():
    return ConstellationUtils.build_constellation(2)


@pytest.fixture(scope="session")
def qam16():
    return ConstellationUtils.build_constellation(4)


@pytest.fixture(scope="session")
def make_instance():
    """Factory for seeded random instances: make_instance(nt, nr, q, snr_db, seed)."""

    def make(nt=2, nr=2, q=2, snr_db=8.0, seed=0, kind="rayleigh", rho=0.0):
        spec = ChannelSpec(kind=kind, rho=rho, nt=nt, nr=nr)
        constellation = ConstellationUtils.build_constellation(q)
        rng = np.random.default_rng(seed)
        return ChannelUtils.draw_instance(spec, constellation, snr_db, rng, seed=seed)

    return make


@pytest.fixture()
def instance_2x2(make_instance):
    """2x2 QPSK at 8 dB: 16 states, the oracle's working size."""
    return make_instance(seed=11)


@pytest.fixture()
def slow():
    """Skips acceptance-scale tests unless RUN_SLOW=1."""
    if os.getenv("RUN_SLOW") != "1":
        pytest.skip("RUN_SLOW!=1; skipping acceptance-scale test.")
