import math

import pytest

from mmac_capacity import ChannelConfig, QuadratureSpec


@pytest.fixture(scope="session")
def cfg_5db():
    return ChannelConfig.default_scenario(5.0)


@pytest.fixture(scope="session")
def cfg_0db():
    return ChannelConfig.default_scenario(0.0)


@pytest.fixture(scope="session")
def cfg_m5db():
    return ChannelConfig.default_scenario(-5.0)


@pytest.fixture(scope="session")
def spec():
    return QuadratureSpec()


@pytest.fixture(scope="session")
def sqrt_p_5db(cfg_5db):
    return math.sqrt(cfg_5db.power_budget)
