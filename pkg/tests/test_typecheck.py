"""Type synthesis and assignability, including the dependent-extract rules
and the failure modes they guard."""

import pytest

from mimic.errors import TypingError
from mimic.typecheck import (
    apply_with_implicits,
    check_assignable,
    recheck_node,
    synth_type,
)


def idx_var(w, bound):
    lam = w.make_mutable("lam", w.pi(w.idx_tn(bound), w.nat_t()))
    return w.var(lam)


# ------------------------------------------------------ synthesized types

def test_homogeneous_tuple_types_as_array(w):
    t = w.tuple_([w.lit_nat(0), w.lit_nat(1), w.lit_nat(2)])
    assert w.typeof(t) == w.arr_n(3, w.nat_t())


def test_extract_from_homogeneous_tuple_is_element_type(w):
    t = w.tuple_([w.lit_nat(0), w.lit_nat(1), w.lit_nat(2)])
    i = idx_var(w, 3)
    assert w.typeof(w.extract(t, i)) == w.nat_t()


def test_mixed_tuple_types_as_sigma(w):
    t = w.tuple_([w.lit_nat(0), w.tt()])
    assert w.typeof(t) == w.sigma_([w.nat_t(), w.bool_t()])


def test_literal_extract_from_mixed_tuple(w):
    t = w.tuple_([w.lit_nat(0), w.tt()])
    assert w.typeof(w.extract(t, w.lit_idx(2, 0))) == w.nat_t()


def test_variable_extract_from_mixed_tuple_types_as_extract(w):
    """The type of (0, tt)#i is itself an extract: (Nat, Bool)#i."""
    t = w.tuple_([w.lit_nat(0), w.tt()])
    i = idx_var(w, 2)
    e = w.extract(t, i)
    type_tuple = w.tuple_([w.nat_t(), w.bool_t()])
    assert w.typeof(e) == w.extract(type_tuple, i)


def test_type_tuple_extract_lives_in_star(w):
    type_tuple = w.tuple_([w.nat_t(), w.bool_t()])
    i = idx_var(w, 2)
    assert w.typeof(w.extract(type_tuple, i)) == w.star()


def test_heterogeneous_sort_extract_is_rejected(w):
    """(0, Bool)#i mixes a value and a type; no common sort exists."""
    t = w.tuple_([w.lit_nat(0), w.bool_t()])
    i = idx_var(w, 2)
    with pytest.raises(TypingError) as e:
        w.extract(t, i)
    assert e.value.kind == "HeterogeneousSortExtract"


# ---------------------------------------------------------- assignability

def test_nat_literal_is_a_nat(w):
    check_assignable(w, w.nat_t(), w.lit_nat(42))


def test_tuple_assignable_elementwise(w):
    """A mixed-typed pair flows into a homogeneous array type elementwise."""
    s = w.make_mutable("sigma")
    w.grow_mutable(s, 2)
    w.set_operand(s, 0, w.nat_t())
    w.set_operand(s, 1, w.nat_t())
    w.seal(s)
    e = w.var(w.make_mutable("lam", w.pi(w.finalize(s), w.nat_t())))
    check_assignable(w, w.arr_n(2, w.nat_t()), e)


def test_nat_not_assignable_to_index(w):
    with pytest.raises(TypingError) as e:
        check_assignable(w, w.idx_tn(256), w.lit_nat(42))
    assert e.value.kind == "NotAssignable"


def test_application_of_non_function_is_rejected(w):
    with pytest.raises(TypingError) as e:
        w.app(w.lit_nat(1), w.lit_nat(2))
    assert e.value.kind == "NotAFunction"


def test_out_of_bounds_index_literal_is_rejected(w):
    with pytest.raises(TypingError):
        w.lit_idx(2, 5)


def test_filter_must_be_boolean(w):
    lam = w.make_mutable("lam", w.pi(w.nat_t(), w.nat_t()))
    w.set_operand(lam, 0, w.lit_nat(1))
    w.set_operand(lam, 1, w.var(lam))
    with pytest.raises(TypingError) as e:
        w.seal(lam)
    assert e.value.kind == "FilterNotBoolean"


def test_body_must_fit_codomain(w):
    lam = w.make_mutable("lam", w.pi(w.nat_t(), w.bool_t()))
    w.set_operand(lam, 0, w.tt())
    w.set_operand(lam, 1, w.lit_nat(3))
    with pytest.raises(TypingError) as e:
        w.seal(lam)
    assert e.value.kind == "NotAssignable"


# ------------------------------------------------------ implicit arguments

def test_implicit_width_is_inferred(wc):
    minus = wc.annexes["%core.minus"]
    out = apply_with_implicits(
        wc, minus, [wc.lit_nat(0), wc.lit_idx(256, 42)]
    )
    assert out == wc.lit_idx(256, 214)


def test_implicit_element_type_is_inferred(wc):
    """%mem.load's element type comes from the pointer argument."""
    alloc = wc.annexes["%mem.alloc"]
    lam = wc.make_mutable("lam", wc.pi(wc.annexes["%mem.M"], wc.nat_t()))
    m = wc.var(lam)
    pair = apply_with_implicits(
        wc, wc.app(alloc, wc.nat_t()), [wc.tuple_([m])]
    )
    loaded = apply_with_implicits(
        wc, wc.annexes["%mem.load"],
        [wc.tuple_([wc.extract_i(pair, 0), wc.extract_i(pair, 1)])],
    )
    want = wc.sigma_([wc.annexes["%mem.M"], wc.nat_t()])
    assert wc.alpha_equiv(wc.typeof(loaded), want)


# ----------------------------------------------------------------- recheck

def test_recheck_accepts_well_typed_graph(w):
    t = w.tuple_([w.lit_nat(0), w.tt()])
    e = w.extract(t, w.lit_idx(2, 1))
    for nid in (t, e):
        recheck_node(w, nid)
    assert synth_type(w, t) == w.typeof(t)
