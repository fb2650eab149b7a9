"""Normalization rules. Each rewrite is observable as node identity: the
candidate construction returns the id of its normal form."""

import pytest

from mimic.normalize import is_value, step, try_beta
from mimic.surface import elaborate_text


def opaque_fun(w, name, dom, cod):
    """An axiom-backed function that never inlines."""
    return w.axiom(name, w.pi(dom, cod))


def var_of_type(w, ty):
    """A bound variable of the given type (its binder is a dummy lam)."""
    lam = w.make_mutable("lam", w.pi(ty, ty))
    return w.var(lam)


def parametric_pack(w, count, fn):
    pk = w.make_mutable("pack")
    w.set_operand(pk, 0, w.lit_nat(count))
    v = w.var(pk)
    w.set_operand(pk, 1, w.app(fn, v))
    w.seal(pk)
    return w.finalize(pk)


def parametric_arr(w, count, fn):
    ar = w.make_mutable("arr")
    w.set_operand(ar, 0, w.lit_nat(count))
    v = w.var(ar)
    w.set_operand(ar, 1, w.app(fn, v))
    w.seal(ar)
    return w.finalize(ar)


# ----------------------------------------------------------- structural rules

def test_let_constructs_no_node(w):
    res = elaborate_text(w, "let a = 3;\nlet b = a;")
    assert res.bindings["b"] == w.lit_nat(3)


def test_extract_at_bound_one_is_identity(w):
    # a mutable singleton sigma escapes the unary collapse, so a subject of
    # arity one is constructible and the bound-1 extract must vanish
    s = w.make_mutable("sigma")
    w.grow_mutable(s, 1)
    w.set_operand(s, 0, w.nat_t())
    w.seal(s)
    e = var_of_type(w, s)
    assert w.extract(e, w.lit_idx(1, 0)) == e


def test_singleton_tuple_collapses(w):
    assert w.tuple_([w.lit_nat(3)]) == w.lit_nat(3)


def test_singleton_sigma_collapses(w):
    assert w.sigma_([w.nat_t()]) == w.nat_t()


def test_shape_one_pack_collapses(w):
    assert w.pack_n(1, w.lit_nat(3)) == w.lit_nat(3)


def test_shape_one_arr_collapses(w):
    assert w.arr_n(1, w.nat_t()) == w.nat_t()


def test_literal_extract_projects(w):
    t = w.tuple_([w.lit_nat(0), w.lit_nat(1), w.lit_nat(2)])
    assert w.extract(t, w.lit_idx(3, 1)) == w.lit_nat(1)


def test_constant_pack_extract_selects_body(w):
    pk = w.pack_n(3, w.lit_nat(7))
    i = var_of_type(w, w.idx_tn(3))
    assert w.extract(pk, i) == w.lit_nat(7)


def test_eta_tuple_of_projections_is_source(w):
    e = var_of_type(w, w.sigma_([w.nat_t(), w.bool_t()]))
    rebuilt = w.tuple_(
        [w.extract(e, w.lit_idx(2, 0)), w.extract(e, w.lit_idx(2, 1))]
    )
    assert rebuilt == e


def test_repeated_tuple_compresses_to_pack(w):
    x = w.lit_nat(0)
    t = w.tuple_([x, x])
    assert w.node(t).tag == "pack"
    assert t == w.pack_n(2, x)


def test_repeated_sigma_compresses_to_arr(w):
    s = w.sigma_([w.nat_t(), w.nat_t()])
    assert w.node(s).tag == "arr"
    assert s == w.arr_n(2, w.nat_t())


def test_beta_inlines_under_tt_filter(w):
    pi = w.pi(w.nat_t(), w.arr_n(2, w.nat_t()))
    lam = w.make_mutable("lam", pi)
    v = w.var(lam)
    w.set_operand(lam, 0, w.tt())
    w.set_operand(lam, 1, w.tuple_([v, v]))
    w.seal(lam)
    out = w.app(lam, w.lit_nat(4))
    assert out == w.tuple_([w.lit_nat(4), w.lit_nat(4)])


def test_beta_blocked_by_ff_filter(w):
    pi = w.pi(w.nat_t(), w.nat_t())
    lam = w.make_mutable("lam", pi)
    w.set_operand(lam, 0, w.ff())
    w.set_operand(lam, 1, w.var(lam))
    w.seal(lam)
    out = w.app(lam, w.lit_nat(4))
    assert w.node(out).tag == "app"
    assert try_beta(w, out) is None


def test_parametric_pack_expands_to_tuple(w):
    f = opaque_fun(w, "%t.f", w.idx_tn(2), w.nat_t())
    pk = parametric_pack(w, 2, f)
    expected = w.tuple_(
        [w.app(f, w.lit_idx(2, 0)), w.app(f, w.lit_idx(2, 1))]
    )
    assert pk == expected


def test_parametric_arr_expands_to_sigma(w):
    big = opaque_fun(w, "%t.F", w.idx_tn(2), w.star())
    ar = parametric_arr(w, 2, big)
    expected = w.sigma_(
        [w.app(big, w.lit_idx(2, 0)), w.app(big, w.lit_idx(2, 1))]
    )
    assert ar == expected


def test_already_normal_nodes_are_stable(w):
    t = w.tuple_([w.lit_nat(0), w.lit_nat(1)])
    assert w.node(t).tag == "tuple"
    assert w.tuple_([w.lit_nat(0), w.lit_nat(1)]) == t


# ---------------------------------------------- the four definitional squares

def test_homogeneous_sigma_equals_array_type(w):
    assert w.sigma_([w.nat_t(), w.nat_t()]) == w.arr_n(2, w.nat_t())


def test_dependent_array_equals_expanded_sigma(w):
    big = opaque_fun(w, "%t.F2", w.idx_tn(2), w.star())
    assert parametric_arr(w, 2, big) == w.sigma_(
        [w.app(big, w.lit_idx(2, 0)), w.app(big, w.lit_idx(2, 1))]
    )


def test_repeated_tuple_equals_pack(w):
    assert w.tuple_([w.lit_nat(0), w.lit_nat(0)]) == w.pack_n(2, w.lit_nat(0))


def test_dependent_pack_equals_expanded_tuple(w):
    f = opaque_fun(w, "%t.f2", w.idx_tn(2), w.nat_t())
    assert parametric_pack(w, 2, f) == w.tuple_(
        [w.app(f, w.lit_idx(2, 0)), w.app(f, w.lit_idx(2, 1))]
    )


# ------------------------------------------------------------- negative cases

def test_distinct_function_tuple_is_not_compressed(w):
    """Two separately built identity functions are alpha-equal but distinct
    nodes, so the pair of them must stay a tuple."""
    def ident(w):
        lam = w.make_mutable("lam", w.pi(w.nat_t(), w.nat_t()))
        w.set_operand(lam, 0, w.ff())
        w.set_operand(lam, 1, w.var(lam))
        w.seal(lam)
        return w.finalize(lam)

    a, b = ident(w), ident(w)
    assert a != b and w.alpha_equiv(a, b)
    t = w.tuple_([a, b])
    assert w.node(t).tag == "tuple"


def test_distinct_element_tuple_is_not_compressed(w):
    t = w.tuple_([w.lit_nat(0), w.lit_nat(1)])
    assert w.node(t).tag == "tuple"


# --------------------------------------------------------- semantic stepping

def ff_lam(w, body_of_var, cod=None):
    lam = w.make_mutable("lam", w.pi(w.nat_t(), cod or w.nat_t()))
    v = w.var(lam)
    w.set_operand(lam, 0, w.ff())
    w.set_operand(lam, 1, body_of_var(v))
    w.seal(lam)
    return lam


def test_values_do_not_step(w):
    for nid in (w.lit_nat(3), w.tuple_([w.lit_nat(0), w.lit_nat(1)]),
                w.nat_t(), w.pi(w.nat_t(), w.nat_t())):
        assert is_value(w, nid)
        assert step(w, nid) is None


def test_blocked_application_steps_past_its_filter(w):
    lam = ff_lam(w, lambda v: w.tuple_([v, v]), cod=w.arr_n(2, w.nat_t()))
    red = w.app(lam, w.lit_nat(4))
    assert not is_value(w, red)
    assert step(w, red) == w.tuple_([w.lit_nat(4), w.lit_nat(4)])


def test_step_is_leftmost_outermost(w):
    lam = ff_lam(w, lambda v: v)
    inner = w.app(lam, w.lit_nat(1))
    outer = w.tuple_([inner, w.app(lam, w.lit_nat(2))])
    first = step(w, outer)
    assert first == w.tuple_([w.lit_nat(1), w.app(lam, w.lit_nat(2))])
    assert step(w, first) == w.tuple_([w.lit_nat(1), w.lit_nat(2)])
