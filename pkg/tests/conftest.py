import pytest

from vfabric.params import load_config


@pytest.fixture(scope="session")
def bundle():
    return load_config()
