"""Printing: stable concrete syntax that re-elaborates to the same graph."""

import pytest

from mimic.printer import print_module, print_node
from mimic.surface import elaborate_text


def roundtrip(w, src, name):
    """Elaborate, print the module, re-elaborate the print-out."""
    first = elaborate_text(w, src).bindings[name]
    text = print_module(w, {name: first})
    again = elaborate_text(w, text).bindings[name]
    assert w.alpha_equiv(first, again)
    return first


def test_atoms_print_canonically(w):
    assert print_node(w, w.star()) == "*"
    assert print_node(w, w.lit_nat(7)) == "7"
    assert print_node(w, w.lit_idx(256, 42)) == "42_256"
    assert print_node(w, w.pack_n(2, w.lit_nat(0))) == "<2; 0>"
    assert print_node(w, w.arr_n(3, w.nat_t())) == "<<3; Nat>>"
    assert print_node(w, w.sigma_([w.nat_t(), w.bool_t()])) == "[Nat, Idx 2]"
    assert print_node(w, w.pi(w.nat_t(), w.nat_t())) == "Nat -> Nat"


def test_roundtrip_simple_function(w):
    roundtrip(w, "lam f (x y: Nat): Nat = x;", "f")


def test_roundtrip_dependent_function(w):
    roundtrip(w, "lam f {T: *} (x: T): T = x;", "f")


def test_roundtrip_tuple_and_extract(w):
    roundtrip(w, "lam f (p: [Nat, Bool]): Nat = p#0_2;", "f")


def test_roundtrip_recursive_function(wc):
    src = (
        "lam f (n: Nat)@(%core.ncmp.ne (n, 0)): Nat ="
        "  f (%core.nat.sub (n, 1));"
    )
    roundtrip(wc, src, "f")


def test_module_print_includes_plugin_headers(wc):
    res = elaborate_text(wc, "let x = %core.nat.add (1, 2);")
    text = print_module(wc, res.bindings)
    assert text.startswith("plugin core;")
