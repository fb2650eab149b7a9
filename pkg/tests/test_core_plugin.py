"""Integer arithmetic plugin: constant folding, algebraic identities,
wrap-mode promises, conversions, and bitcast."""

import pytest

from mimic.errors import UndefinedBehavior, UnsafeBitcast
from mimic.surface import elaborate_text


def ex(wc, expr):
    """Elaborate a single expression and return its node id."""
    return elaborate_text(wc, f"let x = {expr};").bindings["x"]


# --------------------------------------------------------- Nat arithmetic

def test_nat_add_folds(wc):
    assert ex(wc, "%core.nat.add (3, 5)") == wc.lit_nat(8)


def test_nat_mul_folds(wc):
    assert ex(wc, "%core.nat.mul (6, 7)") == wc.lit_nat(42)


def test_nat_sub_folds_only_when_nonnegative(wc):
    assert ex(wc, "%core.nat.sub (7, 3)") == wc.lit_nat(4)
    stuck = ex(wc, "%core.nat.sub (3, 7)")
    assert wc.node(stuck).tag == "app"


def test_nat_identities(wc):
    src = (
        "lam f (n: Nat): <<4; Nat>> ="
        "  (%core.nat.add (n, 0), %core.nat.add (0, n),"
        "   %core.nat.mul (n, 1), %core.nat.sub (n, 0));"
    )
    f = elaborate_text(wc, src).bindings["f"]
    body = wc.node(f).ops[1]
    v = wc.var(f)
    # every identity collapsed to the bare parameter
    assert body == wc.pack_n(4, v)


def test_nat_mul_by_zero_folds(wc):
    src = "lam f (n: Nat): Nat = %core.nat.mul (n, 0);"
    f = elaborate_text(wc, src).bindings["f"]
    assert wc.node(f).ops[1] == wc.lit_nat(0)


# ---------------------------------------------------------- Nat comparison

def test_ncmp_folds_literals(wc):
    assert ex(wc, "%core.ncmp.l (3, 5)") == wc.tt()
    assert ex(wc, "%core.ncmp.ge (3, 5)") == wc.ff()
    assert ex(wc, "%core.ncmp.e (4, 4)") == wc.tt()


def test_ncmp_reflexive_identities(wc):
    src = (
        "lam f (n: Nat): <<2; Bool>> ="
        "  (%core.ncmp.le (n, n), %core.ncmp.l (n, n));"
    )
    f = elaborate_text(wc, src).bindings["f"]
    assert wc.node(f).ops[1] == wc.tuple_([wc.tt(), wc.ff()])


# ------------------------------------------------------- index construction

def test_idx_folds_modulo(wc):
    assert ex(wc, "%core.idx 10 0 13") == wc.lit_idx(10, 3)


def test_idx_rejects_overflow_in_strict_mode(wc):
    with pytest.raises(UndefinedBehavior):
        ex(wc, "%core.idx 10 1 13")


def test_minus_negates_modularly(wc):
    assert ex(wc, "%core.minus 0 42_256") == wc.lit_idx(256, 214)


# --------------------------------------------------- wrapping arithmetic

def test_wrap_add_wraps(wc):
    assert ex(wc, "%core.wrap.add 256 0 (200_256, 100_256)") \
        == wc.lit_idx(256, 44)


def test_wrap_mul_wraps(wc):
    assert ex(wc, "%core.wrap.mul 16 0 (5_16, 7_16)") == wc.lit_idx(16, 3)


def test_wrap_nuw_violation_is_undefined_behavior(wc):
    with pytest.raises(UndefinedBehavior):
        ex(wc, "%core.wrap.add 256 1 (200_256, 100_256)")


def test_wrap_nsw_violation_is_undefined_behavior(wc):
    # 100 + 100 = 200, which reads as -56 signed: a signed overflow
    with pytest.raises(UndefinedBehavior):
        ex(wc, "%core.wrap.add 256 2 (100_256, 100_256)")


def test_wrap_nsw_allows_in_range_results(wc):
    assert ex(wc, "%core.wrap.add 256 2 (100_256, 20_256)") \
        == wc.lit_idx(256, 120)


def test_wrap_shl(wc):
    assert ex(wc, "%core.wrap.shl 256 0 (3_256, 4_256)") \
        == wc.lit_idx(256, 48)


def test_wrap_identity_is_mode_independent(wc):
    src = "lam f (a: Idx 256): Idx 256 = %core.wrap.add 256 3 (a, 0_256);"
    f = elaborate_text(wc, src).bindings["f"]
    assert wc.node(f).ops[1] == wc.var(f)


# ------------------------------------------------------------------ shifts

def test_shr_logical(wc):
    assert ex(wc, "%core.shr.l 256 (200_256, 2_256)") == wc.lit_idx(256, 50)


def test_shr_arithmetic_extends_sign(wc):
    # 240 is -16 signed; -16 >> 2 = -4, i.e. 252
    assert ex(wc, "%core.shr.a 256 (240_256, 2_256)") == wc.lit_idx(256, 252)


# ------------------------------------------------------- index comparison

def test_icmp_unsigned_and_signed_disagree(wc):
    assert ex(wc, "%core.icmp.ul 256 (255_256, 1_256)") == wc.ff()
    # 255 reads as -1 signed, which is below 1
    assert ex(wc, "%core.icmp.sl 256 (255_256, 1_256)") == wc.tt()


def test_icmp_reflexive_identities(wc):
    src = (
        "lam f (a: Idx 256): <<2; Bool>> ="
        "  (%core.icmp.sge 256 (a, a), %core.icmp.ne 256 (a, a));"
    )
    f = elaborate_text(wc, src).bindings["f"]
    assert wc.node(f).ops[1] == wc.tuple_([wc.tt(), wc.ff()])


# ------------------------------------------------------------- conversion

def test_conv_unsigned_truncates(wc):
    assert ex(wc, "%core.conv.u 16 256 255_256") == wc.lit_idx(16, 15)


def test_conv_signed_extends(wc):
    # 15 is -1 in Idx 16; sign extension keeps it -1, i.e. 255 in Idx 256
    assert ex(wc, "%core.conv.s 256 16 15_16") == wc.lit_idx(256, 255)


# ---------------------------------------------------------------- bitcast

def test_bitcast_same_type_is_identity(wc):
    src = "lam f (a: Idx 256): Idx 256 = %core.bitcast (Idx 256) (Idx 256) a;"
    f = elaborate_text(wc, src).bindings["f"]
    assert wc.node(f).ops[1] == wc.var(f)


def test_bitcast_index_to_nat(wc):
    assert ex(wc, "%core.bitcast Nat (Idx 256) 42_256") == wc.lit_nat(42)


def test_bitcast_nat_to_index(wc):
    assert ex(wc, "%core.bitcast (Idx 256) Nat 42") == wc.lit_idx(256, 42)


def test_bitcast_rechecks_the_bound(wc):
    with pytest.raises(UnsafeBitcast):
        ex(wc, "%core.bitcast (Idx 16) Nat 42")
    with pytest.raises(UnsafeBitcast):
        ex(wc, "%core.bitcast (Idx 16) (Idx 256) 42_256")
