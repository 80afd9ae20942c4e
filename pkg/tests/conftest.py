import pytest

from nikishin.config import ExperimentConfig, config_from_text
from nikishin.pipeline import build_pipeline
from nikishin.system import NikishinSystem

FLAT_SYSTEM_TEXT = """
[system]
alpha = 0
beta = 0
gamma = 0
delta = 0

[tolerances]
rate_mode = band
"""


@pytest.fixture(scope="session")
def cache_dir(tmp_path_factory):
    return tmp_path_factory.mktemp("cache")


@pytest.fixture(scope="session")
def default_system():
    return NikishinSystem()


@pytest.fixture(scope="session")
def default_config():
    return ExperimentConfig()


@pytest.fixture(scope="session")
def flat_config():
    """Zero exponents at all four endpoints: the leading-order error is a clean 1/n."""
    return config_from_text(FLAT_SYSTEM_TEXT)


@pytest.fixture(scope="session")
def state(default_config, cache_dir):
    return build_pipeline(default_config.system, default_config.q1, 256, cache_dir=cache_dir)


@pytest.fixture(scope="session")
def flat_state(flat_config, cache_dir):
    return build_pipeline(flat_config.system, flat_config.q1, 256, cache_dir=cache_dir)
