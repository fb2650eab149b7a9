"""Command-line driver: check | run | regex | dot.

Exit codes: 0 success, 1 diagnostics (type/runtime errors), 2 usage errors.
The core and mem plugins are enabled by default; regex is opt-in through
`--plugin regex` (the `regex` subcommand enables it automatically).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .errors import MimicError, TypingError
from .evalrt import NatV, IdxV, run, summary
from .ir import World
from .plugins import load_plugin
from .printer import print_node
from .registry import recheck_world, run_passes
from .surface import elaborate_text


def build_parser():
    ap = argparse.ArgumentParser(prog="mimic", description=__doc__)
    sub = ap.add_subparsers(dest="cmd", required=True)
    for name, doc in (
        ("check", "type-check a module and re-verify the whole graph"),
        ("run", "evaluate an entry point and print its value"),
        ("regex", "lower a pattern and match stdin lines against it"),
        ("dot", "emit the reachable expression graph as graphviz dot"),
    ):
        p = sub.add_parser(name, help=doc)
        p.add_argument("file", type=Path)
        p.add_argument("--plugin", action="append", default=[],
                       dest="plugins", metavar="NAME")
        p.add_argument("--pass", action="append", default=[],
                       dest="passes", metavar="NAME")
        p.add_argument("--budget", type=int, default=None)
        p.add_argument("--trace", action="store_true")
        p.add_argument("--format", choices=("text", "json-diagnostics"),
                       default="text")
        p.add_argument("--entry", default="main")
        if name == "run":
            p.add_argument("args", nargs="*",
                           help="entry arguments: naturals or VALUE_BOUND")
        if name == "regex":
            p.add_argument("--emit-dfa", type=Path, default=None)
        if name == "dot":
            p.add_argument("--types", action="store_true",
                           help="include type edges")
    return ap


def emit_diag(exc, world, fmt):
    if isinstance(exc, TypingError):
        show = (lambda n: f"<node {n}>") if world is None \
            else (lambda n: print_node(world, n))
        if fmt == "json-diagnostics":
            line = json.dumps({
                "severity": "error", "kind": exc.kind, "node": exc.offending,
                "expected": None if exc.expected is None
                else show(exc.expected),
                "found": None if exc.found is None else show(exc.found),
                "message": exc.message,
            })
        else:
            line = exc.render(show)
    else:
        kind = type(exc).__name__
        if fmt == "json-diagnostics":
            line = json.dumps(
                {"severity": "error", "kind": kind, "message": str(exc)}
            )
        else:
            line = f"error: {kind}: {exc}"
    print(line, file=sys.stderr)


def make_world(cfg):
    world = World()
    if cfg.budget:
        world.beta_budget = cfg.budget
    for name in ["core", "mem"] + list(cfg.plugins):
        load_plugin(world, name)
    return world


def load_module(cfg, world):
    return elaborate_text(world, cfg.file.read_text(),
                          plugin_loader=load_plugin)


def cmd_check(cfg):
    world = make_world(cfg)
    try:
        res = load_module(cfg, world)
        roots = list(res.bindings.values())
        for root in list(roots):
            new_root, _rep = run_passes(world, cfg.passes, root)
            if new_root != root:
                roots.append(new_root)
        diags = recheck_world(world, roots)
    except MimicError as e:
        emit_diag(e, world, cfg.format)
        return 1
    for d in diags:
        emit_diag(d, world, cfg.format)
    return 1 if diags else 0


def parse_run_arg(text):
    if "_" in text:
        value, bound = text.split("_", 1)
        return IdxV(int(bound), int(value))
    return NatV(int(text))


def cmd_run(cfg):
    world = make_world(cfg)
    try:
        res = load_module(cfg, world)
        entry = res.bindings.get(cfg.entry)
        if entry is None:
            print(f"error: no entry point {cfg.entry!r}", file=sys.stderr)
            return 1
        entry, _rep = run_passes(world, cfg.passes, entry)
        args = [parse_run_arg(a) for a in cfg.args]
        value, ev = run(world, entry, args,
                        budget=cfg.budget or 1_000_000, trace=cfg.trace)
    except MimicError as e:
        emit_diag(e, world, cfg.format)
        return 1
    if cfg.trace:
        for line in ev.trace_lines:
            print(line, file=sys.stderr)
    print(summary(value))
    return 0


def cmd_regex(cfg):
    from .plugins.regex.automata import compile_pattern, to_dot
    from .plugins.regex.lower import lower_matcher, match_string
    from .plugins.regex.pattern import extract_pattern

    if "regex" not in cfg.plugins:
        cfg.plugins.append("regex")
    world = make_world(cfg)
    try:
        res = load_module(cfg, world)
        pattern = res.bindings.get(cfg.entry)
        if pattern is None:
            regex_t = world.annexes["%regex.RegEx"]
            for nid in res.bindings.values():
                if world.alpha_equiv(world.typeof(nid), regex_t):
                    pattern = nid
        if pattern is None:
            print("error: no pattern binding found", file=sys.stderr)
            return 1
        dfa = compile_pattern(extract_pattern(world, pattern))
        if cfg.emit_dfa is not None:
            cfg.emit_dfa.write_text(to_dot(dfa))
            print(f"dfa: {dfa.n_states} states", file=sys.stderr)
        matcher = lower_matcher(world, dfa)
        for line in sys.stdin:
            verdict = match_string(world, matcher, line.rstrip("\n"),
                                   budget=cfg.budget or 1_000_000)
            print("match" if verdict else "no-match")
    except MimicError as e:
        emit_diag(e, world, cfg.format)
        return 1
    return 0


DOT_TAG_LABEL = {
    "lit_nat": lambda n: str(n.payload),
    "lit_idx": lambda n: f"{n.payload[1]}_{n.payload[0]}",
    "axiom": lambda n: n.payload,
    "sort": lambda n: f"Sort {n.payload}",
}


def cmd_dot(cfg):
    from .registry import reachable

    world = make_world(cfg)
    try:
        res = load_module(cfg, world)
        roots = []
        for root in res.bindings.values():
            root, _rep = run_passes(world, cfg.passes, root)
            roots.append(root)
    except MimicError as e:
        emit_diag(e, world, cfg.format)
        return 1
    names = {nid: name for name, nid in res.bindings.items()}
    lines = ["digraph world {", "  node [shape=box, fontname=monospace];"]
    reach = sorted(reachable(world, roots))
    for nid in reach:
        n = world.node(nid)
        label = DOT_TAG_LABEL.get(n.tag, lambda m: m.tag)(n)
        if nid in names:
            label = f"{names[nid]}: {label}"
        style = ', style=dashed' if n.mutable else ""
        lines.append(f'  n{nid} [label="{nid}: {label}"{style}];')
    for nid in reach:
        n = world.node(nid)
        for k, op in enumerate(n.ops):
            if op is not None:
                lines.append(f'  n{nid} -> n{op} [label="{k}"];')
        if cfg.types and n.type is not None:
            lines.append(f"  n{nid} -> n{n.type} [style=dotted];")
    lines.append("}")
    print("\n".join(lines))
    return 0


COMMANDS = {"check": cmd_check, "run": cmd_run,
            "regex": cmd_regex, "dot": cmd_dot}


def main(argv=None):
    cfg = build_parser().parse_args(argv)
    if not cfg.file.exists():
        print(f"error: no such file: {cfg.file}", file=sys.stderr)
        return 2
    return COMMANDS[cfg.cmd](cfg)


if __name__ == "__main__":
    sys.exit(main())
