"""Typing rules, assignability, and implicit-argument inference.

Every rule runs during node construction (synth_for is invoked by
World.make_immutable; check_sealed by World.seal). Placeholder solving is
first-order, syntactic, and single-assignment.
"""

from __future__ import annotations

from .errors import TypingError


# --------------------------------------------------------------------- helpers

def sort_level(w, t):
    """The universe level of the type *of* t; error if t is not a type."""
    st = w.resolve_shallow(w.typeof(t))
    n = w.node(st)
    if n.tag != "sort":
        raise TypingError("SortMismatch", t, expected=w.star(), found=st)
    return n.payload


def arity_of(w, type_id):
    """Tuple arity of a (normalized) type, or None if not statically known."""
    t = w.resolve_shallow(type_id)
    n = w.node(t)
    if n.tag == "sigma":
        return len(n.ops)
    if n.tag == "arr":
        shape = w.node(n.ops[0])
        if shape.tag == "lit_nat":
            return shape.payload
    return None


def element_type_at(w, tgt, subject, k, n):
    """Type of element k of a value of tuple-type tgt, with dependencies
    instantiated by projections of subject."""
    tn = w.node(tgt)
    if tn.tag == "sigma":
        v = w._var_of.get(tgt) if tn.mutable else None
        t = tn.ops[k]
        return w.substitute(t, {v: subject}) if v is not None else t
    assert tn.tag == "arr"
    v = w._var_of.get(tgt) if tn.mutable else None
    body = tn.ops[1]
    return w.substitute(body, {v: w.lit_idx(n, k)}) if v is not None else body


# ------------------------------------------------------------------- synthesis

def synth_for(w, tag, payload, given, ops):
    """Compute the type of a node about to be constructed (the Fig-2 rules for
    immutables); raises TypingError on violation."""
    if tag == "sort":
        return None  # materialized lazily: Sort n : Sort (n+1)
    if tag in ("bot", "nat"):
        return w.star()
    if tag == "idx":
        return w.pi(w.nat_t(), w.star())
    if tag == "lit_nat":
        return w.nat_t()
    if tag == "lit_idx":
        bound, value = payload
        if not 0 <= value < bound:
            raise TypingError(
                "IndexOutOfBounds", -1, message=f"literal {value} out of Idx {bound}"
            )
        return w.idx_tn(bound)
    if tag in ("var", "axiom", "placeholder"):
        if given is None:
            raise TypingError("SortMismatch", -1, message=f"{tag} needs a type")
        return given
    if tag == "pi":
        dom, cod = ops
        return w.sort(max(sort_level(w, dom), sort_level(w, cod)))
    if tag == "lam":
        pi = w.resolve_shallow(given) if given is not None else None
        if pi is None or w.node(pi).tag != "pi":
            raise TypingError("NotAFunction", -1, found=given, message="lam needs a pi type")
        pn = w.node(pi)
        filt, body = ops
        check_filter_expr(w, filt)
        # an immutable lam is non-parametric; its body must already fit the codomain
        check_assignable(w, pn.ops[1], body)
        return pi
    if tag == "app":
        f, a = ops
        ft = w.resolve_shallow(w.typeof(f))
        fn = w.node(ft)
        if fn.tag != "pi":
            raise TypingError("NotAFunction", f, expected=None, found=ft)
        dom, cod = fn.ops
        check_assignable(w, dom, a)
        v = w._var_of.get(ft) if fn.mutable else None
        return w.substitute(cod, {v: a}) if v is not None else cod
    if tag == "sigma":
        if not ops:
            return w.star()
        return w.sort(max(sort_level(w, t) for t in ops))
    if tag == "tuple":
        return w.sigma_(tuple(w.typeof(e) for e in ops))
    if tag == "arr":
        shape, body = ops
        _check_nat(w, shape)
        sort_level(w, body)
        return w.typeof(body)
    if tag == "pack":
        shape, body = ops
        _check_nat(w, shape)
        return w.arr(shape, w.typeof(body))
    if tag == "extract":
        return _type_extract(w, ops[0], ops[1])
    if tag == "insert":
        e, i, v = ops
        elem_t = _type_extract(w, e, i)
        check_assignable(w, elem_t, v)
        return w.typeof(e)
    raise TypingError("SortMismatch", -1, message=f"cannot type tag {tag}")


def _check_nat(w, e):
    t = w.resolve_shallow(w.typeof(e))
    if t != w.nat_t():
        raise TypingError("SortMismatch", e, expected=w.nat_t(), found=t)


def _type_extract(w, e, i):
    et = w.resolve_shallow(w.typeof(e))
    en = w.node(et)
    if en.tag == "arr":
        check_assignable(w, w.idx_t(en.ops[0]), i)
        v = w._var_of.get(et) if en.mutable else None
        body = en.ops[1]
        return w.substitute(body, {v: i}) if v is not None else body
    if en.tag == "sigma":
        count = len(en.ops)
        check_assignable(w, w.idx_tn(count), i)
        v = w._var_of.get(et) if en.mutable else None
        inode = w.node(i)
        if inode.tag == "lit_idx":
            t = en.ops[inode.payload[1]]
            return w.substitute(t, {v: e}) if v is not None else t
        # unknown index: the element types must agree on one sort
        elem_ts = [
            w.substitute(t, {v: e}) if v is not None else t for t in en.ops
        ]
        levels = {sort_level(w, t) for t in elem_ts}
        if len(levels) > 1:
            raise TypingError(
                "HeterogeneousSortExtract",
                e,
                message="element types do not agree on the same sort",
            )
        return w.extract(w.tuple_(elem_ts), i)
    raise TypingError("NotAssignable", e, expected=None, found=et,
                      message="extract from non-tuple type")


# ----------------------------------------------------------------- seal checks

def check_sealed(w, nid):
    """Deferred checks for a mutable that just got all operands."""
    n = w.node(nid)
    if n.tag == "lam":
        pi = n.type
        if pi is None or w.node(pi).tag != "pi":
            raise TypingError("NotAFunction", nid, found=pi, message="lam needs a pi type")
        pn = w.node(pi)
        filt, body = n.ops
        check_filter_expr(w, filt)
        expected = pn.ops[1]
        pv = w._var_of.get(pi) if pn.mutable else None
        if pv is not None:
            expected = w.substitute(expected, {pv: w.var(nid)})
        check_assignable(w, expected, body)
        return
    if n.tag == "pi":
        dom, cod = n.ops
        want = w.sort(max(sort_level(w, dom), sort_level(w, cod)))
        _settle_type(w, nid, want)
        return
    if n.tag == "sigma":
        if n.ops:
            want = w.sort(max(sort_level(w, t) for t in n.ops))
        else:
            want = w.star()
        _settle_type(w, nid, want)
        return
    if n.tag == "arr":
        shape, body = n.ops
        _check_nat(w, shape)
        sort_level(w, body)
        _settle_type(w, nid, w.typeof(body))
        return
    if n.tag == "pack":
        shape, body = n.ops
        _check_nat(w, shape)
        tb = w.typeof(body)
        v = w._var_of.get(nid)
        if v is not None and v in w.free_vars(tb):
            amut = w.make_mutable("arr")
            w.set_operand(amut, 0, shape)
            av = w.var(amut)
            w.set_operand(amut, 1, w.substitute(tb, {v: av}))
            w.seal(amut)
            want = w.finalize(amut)
        else:
            want = w.arr(shape, tb)
        _settle_type(w, nid, want)
        return


def _settle_type(w, nid, want):
    n = w.node(nid)
    if n.type is None:
        w.set_type(nid, want)
    elif not w.alpha_equiv(n.type, want):
        raise TypingError("SortMismatch", nid, expected=want, found=n.type)


def check_filter(w, lam_id):
    check_filter_expr(w, w.node(lam_id).ops[0])


def check_filter_expr(w, filt):
    ft = w.resolve_shallow(w.typeof(filt))
    if ft != w.bool_t():
        raise TypingError("FilterNotBoolean", filt, expected=w.bool_t(), found=ft)


# --------------------------------------------------------------- assignability

def check_assignable(w, target, expr):
    """A-T: synthesized type alpha-equivalent to target (solving placeholders);
    A-Tup: element-wise through the tuple type with dependency substitution."""
    found = w.typeof(expr)
    if unify(w, target, found):
        return
    tgt = w.resolve_shallow(target)
    n = arity_of(w, tgt)
    if n is not None and arity_of(w, found) == n:
        for k in range(n):
            elem_t = element_type_at(w, tgt, expr, k, n)
            check_assignable(w, elem_t, w.extract(expr, w.lit_idx(n, k)))
        return
    raise TypingError("NotAssignable", expr, expected=target, found=found)


def unify(w, target, found):
    return w.alpha_equiv(target, found, checking=True, solver=_solver)


def _occurs(w, ph, other):
    return ph in w._reachable(other)


def _solver(w, a, b, m_ab, m_ba, checking):
    """Placeholder solving plus the pattern cases for parametric arrays."""
    na, nb = w.node(a), w.node(b)
    if na.tag == "placeholder" or nb.tag == "placeholder":
        if a == b:
            return True
        ph, other = (a, b) if na.tag == "placeholder" else (b, a)
        if _occurs(w, ph, other):
            return False
        w.solve_placeholder(ph, other)
        return True
    for x, y in ((a, b), (b, a)):
        xn, yn = w.node(x), w.node(y)
        if xn.tag != "arr" or not xn.mutable:
            continue
        xv = w._var_of.get(x)
        body = xn.ops[1]
        bodyn = w.node(body)
        pattern_ph = None
        if (
            bodyn.tag == "extract"
            and bodyn.ops[1] == xv
            and w.node(w.resolve_shallow(bodyn.ops[0])).tag == "placeholder"
        ):
            pattern_ph = w.resolve_shallow(bodyn.ops[0])
        if yn.tag == "sigma" and not yn.mutable:
            count = len(yn.ops)
            if not w.alpha_equiv(xn.ops[0], w.lit_nat(count), checking, _solver):
                return False
            if pattern_ph is not None:
                w.solve_placeholder(pattern_ph, w.tuple_(yn.ops))
                return True
            if xv is None or xv not in w.free_vars(body):
                return all(
                    w.alpha_equiv(body, t, checking, _solver) for t in yn.ops
                )
            return all(
                w.alpha_equiv(
                    w.substitute(body, {xv: w.lit_idx(count, k)}),
                    yn.ops[k],
                    checking,
                    _solver,
                )
                for k in range(count)
            )
        if yn.tag == "arr" and not yn.mutable:
            if not w.alpha_equiv(xn.ops[0], yn.ops[0], checking, _solver):
                return False
            if pattern_ph is not None:
                w.solve_placeholder(pattern_ph, w.pack(yn.ops[0], yn.ops[1]))
                return True
            if xv is None or xv not in w.free_vars(body):
                return w.alpha_equiv(body, yn.ops[1], checking, _solver)
            return None
    for x, y in ((a, b), (b, a)):
        xn, yn = w.node(x), w.node(y)
        # `«?sh; T» ~ T` solves the arity to 1 (unary-array collapse in
        # reverse); only when the shape is genuinely unknown.
        if (
            xn.tag == "arr"
            and not xn.mutable
            and yn.tag not in ("arr", "sigma")
            and w.node(w.resolve_shallow(xn.ops[0])).tag == "placeholder"
            and w.alpha_equiv(xn.ops[1], y, checking, _solver)
        ):
            return w.alpha_equiv(xn.ops[0], w.lit_nat(1), checking, _solver)
    return None


# ------------------------------------------------------------------- implicits

def apply_with_implicits(w, callee, args):
    """Apply explicit args left to right, inserting placeholders for implicit
    Pi domains; all placeholders must be solved by the end."""
    created = []
    for arg in args:
        while True:
            ft = w.resolve_shallow(w.typeof(callee))
            fn = w.node(ft)
            if fn.tag == "pi" and fn.payload:
                ph = w.placeholder(fn.ops[0])
                created.append(ph)
                callee = w.app(callee, ph)
                continue
            break
        if fn.tag != "pi":
            raise TypingError("NotAFunction", callee, found=ft)
        callee = w.app(callee, arg)
    for ph in created:
        if ph not in w.ph_solutions:
            raise TypingError("UnresolvedPlaceholder", ph)
    out = w.resolve(callee)
    left = w.unsolved_placeholders(out)
    if left:
        raise TypingError("UnresolvedPlaceholder", left[0])
    return out


def synth_type(w, nid):
    """Public query: the node's type edge (recomputing sorts lazily)."""
    return w.typeof(nid)


def recheck_node(w, nid):
    """Re-derive the node's type from scratch and compare with the stored edge."""
    n = w.node(nid)
    if n.tag in ("var", "axiom", "placeholder", "sort"):
        return
    if n.mutable:
        check_sealed(w, nid)
        return
    ty = synth_for(w, n.tag, n.payload, n.type, n.ops)
    if ty != n.type and not w.alpha_equiv(ty, n.type):
        raise TypingError("SortMismatch", nid, expected=ty, found=n.type)
