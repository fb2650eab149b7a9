"""Hook and pass tables for the regex plugin."""

from __future__ import annotations

from ...normalize import spine_of
from .lower import regex_lower_pass

_KINDS = ("optional", "star", "plus")


def normalize_quant(w, app_id, args):
    """Collapse directly nested quantifiers: a quantifier applied to itself
    is redundant, and any two distinct quantifiers compose to `star`."""
    outer_base, _ = spine_of(w, app_id)
    outer = w.node(outer_base).payload.rsplit(".", 1)[1]
    inner_base, inner_args = spine_of(w, args[-1])
    bn = w.node(inner_base)
    if bn.tag != "axiom" or len(inner_args) != 1:
        return None
    prefix, _, kind = bn.payload.rpartition(".")
    if prefix != "%regex.quant" or kind not in _KINDS:
        return None
    if kind == outer:
        return args[-1]
    return w.app(w.annexes["%regex.quant.star"], inner_args[0])


HOOKS = {"normalize_quant": normalize_quant}
RUNTIME = {}
PASSES = {"lower": regex_lower_pass}
