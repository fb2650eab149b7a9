"""The normalization relation: structural rules, filter-driven beta reduction,
axiom-normalizer dispatch, and the deterministic semantic step relation.

Structural rules fire inside World.make_immutable before hash-cons insertion;
the parametric expansion rules (constant-arity pack/array unrolling) live in
World.finalize. Rule order is fixed: the unary collapses first, then literal
extracts, then eta, then the compression rules; eta wins over tuple-to-pack
compression on overlapping inputs because it preserves sharing.
"""

from __future__ import annotations

from . import typecheck as _tc


# ------------------------------------------------------------ structural rules

def normalize_structural(w, tag, ty, ops, payload):
    """Apply the first matching rewrite for a node about to be built; None
    means the candidate is already normal (the identity rule)."""
    if tag == "extract":
        e, i = ops
        en = w.node(e)
        inode = w.node(i)
        if inode.tag == "lit_idx":
            bound, val = inode.payload
            if bound == 1:
                return e  # e#0_1 -> e
            if en.tag == "tuple":
                return en.ops[val]  # literal projection
        if en.tag == "pack" and not en.mutable:
            return en.ops[1]  # constant pack: any index selects the body
        return None
    if tag == "tuple":
        n = len(ops)
        if n == 1:
            return ops[0]
        src = _eta_source(w, ops)
        if src is not None:
            return src
        if n > 1 and all(op == ops[0] for op in ops):
            return w.pack(w.lit_nat(n), ops[0])
        return None
    if tag == "sigma":
        n = len(ops)
        if n == 1:
            return ops[0]
        if n > 1 and all(op == ops[0] for op in ops):
            return w.arr(w.lit_nat(n), ops[0])
        return None
    if tag in ("pack", "arr"):
        shape = w.node(ops[0])
        if shape.tag == "lit_nat" and shape.payload == 1:
            return ops[1]
        return None
    return None


def _eta_source(w, ops):
    """(e#0_n, ..., e#(n-1)_n) -> e when e has arity n."""
    n = len(ops)
    src = None
    for k, op in enumerate(ops):
        node = w.node(op)
        if node.tag != "extract":
            return None
        idx = w.node(node.ops[1])
        if idx.tag != "lit_idx" or idx.payload != (n, k):
            return None
        if src is None:
            src = node.ops[0]
        elif node.ops[0] != src:
            return None
    if src is None:
        return None
    if _tc.arity_of(w, w.typeof(src)) != n:
        return None
    return src


# -------------------------------------------------------------- app rewriting

def normalize_app(w, app_id):
    rep = dispatch_axiom_normalizer(w, app_id)
    if rep is not None:
        return rep
    return try_beta(w, app_id)


def try_beta(w, app_id):
    """Filter-driven inlining: substitute the argument into the filter; if it
    normalizes to the literal tt, inline the body."""
    n = w.node(app_id)
    f, a = n.ops
    fn = w.node(f)
    if fn.tag != "lam":
        return None
    filt, body = fn.ops
    if filt is None or body is None:
        return None  # recursive occurrence of a lam still under construction
    v = w._var_of.get(f)
    mapping = {v: a} if v is not None else {}
    inst = w.substitute(filt, mapping) if mapping else filt
    if inst != w.tt():
        return None
    w.spend_beta(app_id)
    return w.substitute(body, mapping) if mapping else body


def spine_of(w, app_id):
    """(base node id, [args applied left to right])."""
    args = []
    cur = app_id
    while w.node(cur).tag == "app":
        args.append(w.node(cur).ops[1])
        cur = w.node(cur).ops[0]
    args.reverse()
    return cur, args


def implicit_flags(w, axiom, count):
    """Implicitness of the first `count` telescope positions of an axiom's
    declared type; None if the telescope is shorter."""
    t = w.typeof(axiom)
    flags = []
    for _ in range(count):
        tn = w.node(w.resolve_shallow(t))
        if tn.tag != "pi":
            return None
        flags.append(bool(tn.payload))
        t = tn.ops[1]
    return flags


def dispatch_axiom_normalizer(w, app_id):
    """Fire an axiom's normalizer hook when exactly trigger_curry explicit
    argument groups have been applied (implicits do not count)."""
    base, args = spine_of(w, app_id)
    bn = w.node(base)
    if bn.tag != "axiom":
        return None
    hook = w.axiom_hooks.get(bn.payload)
    if hook is None:
        return None
    trigger, fn = hook
    flags = implicit_flags(w, base, len(args))
    if flags is None or flags[-1]:
        return None
    if sum(1 for fl in flags if not fl) != trigger:
        return None
    return fn(w, app_id, args)


# ---------------------------------------------------------- semantic stepping

VALUE_ATOMS = frozenset(
    ["lit_nat", "lit_idx", "sort", "bot", "nat", "idx", "pi", "sigma", "arr",
     "lam", "axiom", "var", "placeholder"]
)


def is_value(w, nid):
    n = w.node(nid)
    if n.tag in VALUE_ATOMS:
        return True
    if n.tag in ("tuple", "pack"):
        return all(is_value(w, op) for op in n.ops)
    if n.tag == "app":
        f, a = n.ops
        return is_value(w, f) and is_value(w, a) and w.node(f).tag != "lam"
    if n.tag in ("extract", "insert"):
        return all(is_value(w, op) for op in n.ops)
    return True


def step(w, nid):
    """One deterministic leftmost-outermost beta step, ignoring filters (the
    semantic relation, not the optimizer); None iff the node is a value."""
    n = w.node(nid)
    if is_value(w, nid):
        return None
    if n.tag == "app":
        f, a = n.ops
        if not is_value(w, f):
            sf = step(w, f)
            return None if sf is None else w.app(sf, a)
        if not is_value(w, a):
            sa = step(w, a)
            return None if sa is None else w.app(f, sa)
        fn = w.node(f)
        if fn.tag == "lam":
            v = w._var_of.get(f)
            body = fn.ops[1]
            return w.substitute(body, {v: a}) if v is not None else body
        return None
    if n.tag in ("tuple", "pack", "extract", "insert"):
        for k, op in enumerate(n.ops):
            if not is_value(w, op):
                s = step(w, op)
                if s is None:
                    return None
                new_ops = list(n.ops)
                new_ops[k] = s
                return w.make_immutable(n.tag, None, tuple(new_ops), n.payload)
        return None
    return None
