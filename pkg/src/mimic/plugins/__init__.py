"""Bundled plugins: core (integer arithmetic), mem (linear memory), regex
(regular expressions with DFA lowering)."""

from __future__ import annotations

from importlib import resources

from ..errors import RegistrationError
from ..registry import register_plugin

BUILTIN = ("core", "mem", "regex")


def decl_source(name):
    return (
        resources.files("mimic.plugins").joinpath("decls", f"{name}.mim")
        .read_text()
    )


def load_plugin(world, name):
    """Register a bundled plugin (and its dependencies); idempotent."""
    if name in world.plugins:
        return
    if name == "core":
        from . import core_arith as mod
    elif name == "mem":
        from . import mem as mod
    elif name == "regex":
        from .regex import plugin as mod
    else:
        raise RegistrationError(f"unknown plugin {name!r}")
    register_plugin(
        world, name, decl_source(name),
        hooks=mod.HOOKS, runtime=mod.RUNTIME, passes=mod.PASSES,
        plugin_loader=load_plugin,
    )
