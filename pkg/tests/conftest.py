import pytest

from mimic.ir import World
from mimic.plugins import load_plugin


@pytest.fixture
def w():
    """A bare world with no plugins."""
    return World()


@pytest.fixture
def wc():
    """A world with the core and mem plugins loaded."""
    world = World()
    load_plugin(world, "core")
    load_plugin(world, "mem")
    return world


@pytest.fixture
def wr():
    """A world with the regex plugin (and its dependencies) loaded."""
    world = World()
    load_plugin(world, "regex")
    return world
