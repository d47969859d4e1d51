import pytest

from cgdialog import load_pack


@pytest.fixture(scope="session")
def pack():
    # the shipped pack; treated as read-only by every test
    return load_pack()


@pytest.fixture()
def engine(pack):
    from cgdialog import Engine, EngineConfig

    return Engine(pack, EngineConfig())
