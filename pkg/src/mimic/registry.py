"""Plugin registry: named bundles of axiom declarations, normalizer hooks,
runtime interpretations, and graph passes.

A plugin ships a `.mim` declaration file plus Python dictionaries mapping
normalizer names to hook functions, axiom annexes to runtime handlers, and
pass names to pass functions. Registration elaborates the declarations into
the world and wires everything up; a plugin can be registered at most once
per world.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import DuplicatePlugin, PassNotFound, RegistrationError, TypingError
from . import surface, typecheck as _tc


def validate_annex(name):
    parts = name.lstrip("%").split(".")
    if name[:1] != "%" or not 2 <= len(parts) <= 3 or not all(parts):
        raise RegistrationError(f"malformed annex name {name!r}")
    return parts


def explicit_telescope_count(w, axiom):
    """Number of non-implicit pi levels in an axiom's declared type."""
    t = w.typeof(axiom)
    count = 0
    while True:
        n = w.node(w.resolve_shallow(t))
        if n.tag != "pi":
            return count
        if not n.payload:
            count += 1
        t = n.ops[1]


def register_plugin(world, name, source, hooks=None, runtime=None, passes=None,
                    plugin_loader=None):
    """Elaborate a plugin's declarations and install its hooks.

    `hooks` maps normalizer names (as referenced from the declarations) to
    functions (world, app_id, args) -> replacement id or None. `runtime` maps
    axiom annexes to (arity, fn) evaluator handlers. `passes` maps pass names
    to functions (world, root_id) -> root_id.
    """
    if name in world.plugins:
        raise DuplicatePlugin(f"plugin {name!r} is already registered")
    world.plugins.add(name)
    hooks = hooks or {}
    try:
        res = surface.elaborate_text(world, source, plugin_loader=plugin_loader)
    except Exception:
        world.plugins.discard(name)
        raise
    for annex, norm, trigger in res.axioms:
        validate_annex(annex)
        if norm is None:
            continue
        fn = hooks.get(norm)
        if fn is None:
            raise RegistrationError(
                f"plugin {name!r} references unknown normalizer {norm!r}"
            )
        if trigger is None:
            trigger = explicit_telescope_count(world, world.annexes[annex])
        world.axiom_hooks[annex] = (trigger, fn)
    for annex, handler in (runtime or {}).items():
        world.axiom_runtime[annex] = handler
    for pname, fn in (passes or {}).items():
        world.passes[f"{name}.{pname}"] = fn
    return res.bindings


# ------------------------------------------------------------------- passes

@dataclass
class PassReport:
    applied: list = field(default_factory=list)  # (pass name, iterations)


def run_passes(world, names, root):
    """Run each named pass to a fixed point, in order."""
    report = PassReport()
    for name in names:
        fn = world.passes.get(name)
        if fn is None:
            raise PassNotFound(f"unknown pass {name!r}")
        iters = 0
        while True:
            iters += 1
            new_root = fn(world, root)
            if new_root == root or iters > 64:
                break
            root = new_root
        report.applied.append((name, iters))
    return root, report


# ------------------------------------------------------------------ recheck

def reachable(world, roots):
    seen = set()
    stack = list(roots)
    while stack:
        nid = stack.pop()
        if nid in seen:
            continue
        seen.add(nid)
        n = world.node(nid)
        if n.type is not None:
            stack.append(n.type)
        for op in n.ops:
            if op is not None:
                stack.append(op)
    return seen


def recheck_world(world, roots):
    """Re-derive every reachable node's type; returns a list of diagnostics
    (empty means the whole graph still checks)."""
    out = []
    for nid in sorted(reachable(world, roots)):
        try:
            _tc.recheck_node(world, nid)
        except TypingError as e:
            out.append(e)
    return out
