"""Regular-expression pattern trees extracted from graph terms.

Patterns are over single bytes (0..255): character classes (sets of bytes),
concatenation, alternation, and the three quantifiers.
"""

from __future__ import annotations

from dataclasses import dataclass

from ...errors import UnsupportedConstruct

ALL_BYTES = frozenset(range(256))


@dataclass(frozen=True)
class Class:
    chars: frozenset

@dataclass(frozen=True)
class Concat:
    parts: tuple

@dataclass(frozen=True)
class Alt:
    parts: tuple

@dataclass(frozen=True)
class Rep:
    inner: object
    kind: str  # optional | star | plus


EPSILON = Concat(())


def spine(w, nid):
    args = []
    cur = nid
    while w.node(cur).tag == "app":
        args.append(w.node(cur).ops[1])
        cur = w.node(cur).ops[0]
    args.reverse()
    return cur, args


def _elements(w, nid):
    n = w.node(nid)
    if n.tag == "tuple":
        return list(n.ops)
    if n.tag == "pack" and not n.mutable:
        shape = w.node(n.ops[0])
        if shape.tag == "lit_nat":
            return [n.ops[1]] * shape.payload
    return [nid]  # a singleton collapsed by unary-tuple normalization


def _char(w, nid):
    n = w.node(nid)
    if n.tag == "lit_idx" and n.payload[0] == 256:
        return n.payload[1]
    raise UnsupportedConstruct(f"expected a character literal, got {n.tag}")


def extract_pattern(w, nid):
    """Graph term of matcher type -> Pattern, or UnsupportedConstruct."""
    base, args = spine(w, nid)
    bn = w.node(base)
    if bn.tag != "axiom" or not bn.payload.startswith("%regex."):
        raise UnsupportedConstruct(
            f"node {nid} is not a regex pattern term ({bn.tag})"
        )
    name = bn.payload[len("%regex."):]
    if name == "any":
        return Class(ALL_BYTES)
    if name == "range":
        lo, hi = (
            _char(w, e) for e in _elements(w, args[0])[:2]
        ) if len(_elements(w, args[0])) == 2 else (None, None)
        if lo is None or lo > hi:
            raise UnsupportedConstruct("malformed range")
        return Class(frozenset(range(lo, hi + 1)))
    if name == "not":
        inner = extract_pattern(w, args[0])
        if not isinstance(inner, Class):
            alts = inner.parts if isinstance(inner, Alt) else None
            if alts and all(isinstance(p, Class) for p in alts):
                inner = Class(frozenset().union(*(p.chars for p in alts)))
            else:
                raise UnsupportedConstruct(
                    "complement is only defined for character classes"
                )
        return Class(ALL_BYTES - inner.chars)
    if name in ("conj", "disj"):
        # implicit arity argument first, then the element array
        elems = _elements(w, args[-1])
        parts = tuple(extract_pattern(w, e) for e in elems)
        return Concat(parts) if name == "conj" else Alt(parts)
    if name.startswith("quant."):
        return Rep(extract_pattern(w, args[0]), name.split(".")[1])
    raise UnsupportedConstruct(f"unknown regex constructor {bn.payload}")
