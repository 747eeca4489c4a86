import pytest

from rcjhand import load_default


@pytest.fixture(scope="session")
def cfg():
    return load_default()


@pytest.fixture(scope="session")
def hand(cfg):
    return cfg.hand


@pytest.fixture(scope="session")
def index_finger(hand):
    return hand.finger("index")


@pytest.fixture(scope="session")
def thumb(hand):
    return hand.finger("thumb")
