"""Integer arithmetic plugin: literal constructors with wrap modes, Nat
arithmetic and comparison, modular (wrapping) arithmetic on fixed-width
indices, shifts, comparisons, conversion, and bitcast.

Wrap-mode bits: 1 = no unsigned wrap (nuw), 2 = no signed wrap (nsw).
Folding an operation whose no-wrap promise is violated is undefined
behavior and raises instead of producing a value.
"""

from __future__ import annotations

from ..errors import UndefinedBehavior, UnsafeBitcast
from ..evalrt import IdxV, NatV, TypeV

NUW, NSW = 1, 2


# ------------------------------------------------------------------ helpers

def lit_nat(w, nid):
    n = w.node(nid)
    return n.payload if n.tag == "lit_nat" else None


def lit_idx(w, nid):
    n = w.node(nid)
    return n.payload if n.tag == "lit_idx" else None


def pair_of(w, nid):
    n = w.node(nid)
    if n.tag == "tuple" and len(n.ops) == 2:
        return n.ops
    if n.tag == "pack" and not n.mutable:
        shape = w.node(n.ops[0])
        if shape.tag == "lit_nat" and shape.payload == 2:
            return (n.ops[1], n.ops[1])
    return None


def tag_of(w, app_id):
    """Last annex component of the axiom at the bottom of the spine."""
    cur = app_id
    while w.node(cur).tag == "app":
        cur = w.node(cur).ops[0]
    return w.node(cur).payload.rsplit(".", 1)[-1]


def signed(value, bound):
    return value - bound if value >= (bound + 1) // 2 else value


def fold_idx(w, s, mode, value, what):
    """Wrap `value` into Idx s, honoring the no-wrap promises."""
    wrapped = value % s
    if wrapped != value:
        if mode & NUW:
            raise UndefinedBehavior(f"{what}: unsigned wrap with nuw set")
    if mode & NSW:
        lo, hi = -(s // 2), (s + 1) // 2 - 1
        if not lo <= value <= hi and signed(wrapped, s) != value:
            raise UndefinedBehavior(f"{what}: signed wrap with nsw set")
    return w.lit_idx(s, wrapped)


# -------------------------------------------------------------- normalizers

def normalize_idx(w, app_id, args):
    s, m, l = (lit_nat(w, a) for a in args)
    if s is None or l is None or m is None:
        return None
    if l >= s and m:
        raise UndefinedBehavior(f"literal {l} does not fit Idx {s}")
    return w.lit_idx(s, l % s)


def normalize_nat(w, app_id, args):
    op = tag_of(w, app_id)
    p = pair_of(w, args[0])
    if p is None:
        return None
    a, b = p
    av, bv = lit_nat(w, a), lit_nat(w, b)
    if av is not None and bv is not None:
        if op == "add":
            return w.lit_nat(av + bv)
        if op == "mul":
            return w.lit_nat(av * bv)
        if op == "sub":
            # natural subtraction folds only when it cannot go negative
            return w.lit_nat(av - bv) if av >= bv else None
    if op == "add":
        if av == 0:
            return b
        if bv == 0:
            return a
    if op == "sub" and bv == 0:
        return a
    if op == "mul":
        if av == 1:
            return b
        if bv == 1:
            return a
        if av == 0 or bv == 0:
            return w.lit_nat(0)
    return None


NCMP = {
    "e": lambda a, b: a == b, "ne": lambda a, b: a != b,
    "l": lambda a, b: a < b, "le": lambda a, b: a <= b,
    "g": lambda a, b: a > b, "ge": lambda a, b: a >= b,
}


def normalize_ncmp(w, app_id, args):
    op = tag_of(w, app_id)
    p = pair_of(w, args[0])
    if p is None:
        return None
    a, b = p
    av, bv = lit_nat(w, a), lit_nat(w, b)
    if av is not None and bv is not None:
        return w.tt() if NCMP[op](av, bv) else w.ff()
    if a == b and op in ("e", "le", "ge"):
        return w.tt()
    if a == b and op in ("ne", "l", "g"):
        return w.ff()
    return None


def normalize_wrap(w, app_id, args):
    op = tag_of(w, app_id)
    s, m = lit_nat(w, args[0]), lit_nat(w, args[1])
    p = pair_of(w, args[2])
    if p is None:
        return None
    a, b = p
    ai, bi = lit_idx(w, a), lit_idx(w, b)
    if s is not None and m is not None and ai is not None and bi is not None:
        av, bv = ai[1], bi[1]
        if op == "add":
            return fold_idx(w, s, m, av + bv, "wrap.add")
        if op == "sub":
            return fold_idx(w, s, m, av - bv, "wrap.sub")
        if op == "mul":
            return fold_idx(w, s, m, av * bv, "wrap.mul")
        if op == "shl":
            return fold_idx(w, s, m, av << bv, "wrap.shl")
    # mode-independent identities: these never wrap
    if op in ("add", "sub", "shl") and bi is not None and bi[1] == 0:
        return a
    if op == "add" and ai is not None and ai[1] == 0:
        return b
    if op == "mul":
        if bi is not None and bi[1] == 1:
            return a
        if ai is not None and ai[1] == 1:
            return b
        if s is not None and (
            (ai is not None and ai[1] == 0) or (bi is not None and bi[1] == 0)
        ):
            return w.lit_idx(s, 0)
    return None


def normalize_shr(w, app_id, args):
    op = tag_of(w, app_id)
    s = lit_nat(w, args[0])
    p = pair_of(w, args[1])
    if p is None:
        return None
    a, b = p
    ai, bi = lit_idx(w, a), lit_idx(w, b)
    if bi is not None and bi[1] == 0:
        return a
    if s is None or ai is None or bi is None:
        return None
    if op == "l":
        return w.lit_idx(s, (ai[1] >> bi[1]) % s)
    return w.lit_idx(s, (signed(ai[1], s) >> bi[1]) % s)


ICMP = {
    "e": lambda a, b: a == b, "ne": lambda a, b: a != b,
    "ul": lambda a, b: a < b, "ule": lambda a, b: a <= b,
    "ug": lambda a, b: a > b, "uge": lambda a, b: a >= b,
}


def normalize_icmp(w, app_id, args):
    op = tag_of(w, app_id)
    s = lit_nat(w, args[0])
    p = pair_of(w, args[1])
    if p is None:
        return None
    a, b = p
    ai, bi = lit_idx(w, a), lit_idx(w, b)
    if ai is not None and bi is not None and s is not None:
        if op in ICMP:
            return w.tt() if ICMP[op](ai[1], bi[1]) else w.ff()
        av, bv = signed(ai[1], s), signed(bi[1], s)
        rel = {"sl": av < bv, "sle": av <= bv, "sg": av > bv, "sge": av >= bv}
        return w.tt() if rel[op] else w.ff()
    if a == b and op in ("e", "ule", "uge", "sle", "sge"):
        return w.tt()
    if a == b and op in ("ne", "ul", "ug", "sl", "sg"):
        return w.ff()
    return None


def normalize_conv(w, app_id, args):
    op = tag_of(w, app_id)
    ds, ss = lit_nat(w, args[0]), lit_nat(w, args[1])
    vi = lit_idx(w, args[2])
    if ds is None or ss is None or vi is None:
        return None
    val = vi[1]
    if op == "s":
        val = signed(val, ss)
    return w.lit_idx(ds, val % ds)


def normalize_bitcast(w, app_id, args):
    dst, src, v = args
    if dst == src:
        return v
    dn = w.node(w.resolve_shallow(dst))
    vn = w.node(v)
    bound = None
    if dn.tag == "app" and dn.ops[0] == w.idx_head():
        b = w.node(dn.ops[1])
        if b.tag == "lit_nat":
            bound = b.payload
    if vn.tag == "lit_idx":
        if bound is not None:
            if vn.payload[1] >= bound:
                raise UnsafeBitcast(
                    f"value {vn.payload[1]} does not fit Idx {bound}"
                )
            return w.lit_idx(bound, vn.payload[1])
        if dn.tag == "nat":
            return w.lit_nat(vn.payload[1])
    if vn.tag == "lit_nat" and bound is not None:
        if vn.payload >= bound:
            raise UnsafeBitcast(f"value {vn.payload} does not fit Idx {bound}")
        return w.lit_idx(bound, vn.payload)
    return None


HOOKS = {
    "normalize_idx": normalize_idx,
    "normalize_nat": normalize_nat,
    "normalize_ncmp": normalize_ncmp,
    "normalize_wrap": normalize_wrap,
    "normalize_shr": normalize_shr,
    "normalize_icmp": normalize_icmp,
    "normalize_conv": normalize_conv,
    "normalize_bitcast": normalize_bitcast,
}

# ------------------------------------------------------------------ runtime

def _rt_nat(op):
    def fn(ev, args):
        a, b = ev.untuple(args[0], 2)
        av, bv = a.value, b.value
        if op == "add":
            return NatV(av + bv)
        if op == "mul":
            return NatV(av * bv)
        return NatV(av - bv if av >= bv else 0)  # natural monus
    return fn


def _rt_ncmp(op):
    def fn(ev, args):
        a, b = ev.untuple(args[0], 2)
        return IdxV(2, 1 if NCMP[op](a.value, b.value) else 0)
    return fn


def _rt_wrap(op):
    def fn(ev, args):
        s, m = args[0].value, args[1].value
        a, b = ev.untuple(args[2], 2)
        av, bv = a.value, b.value
        raw = {"add": av + bv, "sub": av - bv,
               "mul": av * bv, "shl": av << bv}[op]
        wrapped = raw % s
        if wrapped != raw and m & NUW:
            raise UndefinedBehavior(f"wrap.{op}: unsigned wrap with nuw set")
        return IdxV(s, wrapped)
    return fn


def _rt_shr(op):
    def fn(ev, args):
        s = args[0].value
        a, b = ev.untuple(args[1], 2)
        base = signed(a.value, s) if op == "a" else a.value
        return IdxV(s, (base >> b.value) % s)
    return fn


def _rt_icmp(op):
    def fn(ev, args):
        s = args[0].value
        a, b = ev.untuple(args[1], 2)
        if op in ICMP:
            ok = ICMP[op](a.value, b.value)
        else:
            av, bv = signed(a.value, s), signed(b.value, s)
            ok = {"sl": av < bv, "sle": av <= bv,
                  "sg": av > bv, "sge": av >= bv}[op]
        return IdxV(2, 1 if ok else 0)
    return fn


def _rt_conv(op):
    def fn(ev, args):
        ds, ss, v = args[0].value, args[1].value, args[2].value
        if op == "s":
            v = signed(v, ss)
        return IdxV(ds, v % ds)
    return fn


def _rt_idx(ev, args):
    s, m, l = (a.value for a in args)
    if l >= s and m:
        raise UndefinedBehavior(f"literal {l} does not fit Idx {s}")
    return IdxV(s, l % s)


def _decode_bitcast_target(w, nid):
    """Classify a bitcast target type once per node: a literal-bound index,
    Nat, or something to cast through unchanged."""
    dec = w.rt_type_decode.get(nid)
    if dec is None:
        dn = w.node(w.resolve_shallow(nid))
        dec = ("other", None)
        if dn.tag == "app" and dn.ops[0] == w.idx_head():
            b = w.node(dn.ops[1])
            if b.tag == "lit_nat":
                dec = ("idx", b.payload)
        elif dn.tag == "nat":
            dec = ("nat", None)
        w.rt_type_decode[nid] = dec
    return dec


def _rt_bitcast(ev, args):
    dst, _src, v = args
    if isinstance(dst, TypeV):
        kind, bound = _decode_bitcast_target(ev.w, dst.node)
        if kind == "idx":
            val = v.value
            if val >= bound:
                raise UnsafeBitcast(f"value {val} does not fit Idx {bound}")
            return IdxV(bound, val)
        if kind == "nat":
            return NatV(v.value)
    return v


RUNTIME = {}
for _t in ("add", "sub", "mul"):
    RUNTIME[f"%core.nat.{_t}"] = (1, _rt_nat(_t))
for _t in NCMP:
    RUNTIME[f"%core.ncmp.{_t}"] = (1, _rt_ncmp(_t))
for _t in ("add", "sub", "mul", "shl"):
    RUNTIME[f"%core.wrap.{_t}"] = (3, _rt_wrap(_t))
for _t in ("a", "l"):
    RUNTIME[f"%core.shr.{_t}"] = (2, _rt_shr(_t))
for _t in ("e", "ne", "ul", "ule", "ug", "uge", "sl", "sle", "sg", "sge"):
    RUNTIME[f"%core.icmp.{_t}"] = (2, _rt_icmp(_t))
for _t in ("s", "u"):
    RUNTIME[f"%core.conv.{_t}"] = (3, _rt_conv(_t))
RUNTIME["%core.idx"] = (3, _rt_idx)
RUNTIME["%core.bitcast"] = (3, _rt_bitcast)

PASSES = {}
