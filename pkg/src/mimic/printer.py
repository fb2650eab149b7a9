"""Deterministic, re-parseable text output for graphs and modules.

Closed recursive lambdas become named top-level declarations; open or
non-recursive lambdas print inline. Mutable binders get synthesized names
(`q<id>`), and their variables render through those names, so reparsing the
output in the same world yields alpha-equivalent graphs.
"""

from __future__ import annotations

from .errors import UnsupportedConstruct

ARROW, APP, ATOM = 0, 1, 2


class Printer:
    def __init__(self, world, names=None):
        self.w = world
        self.names = dict(names or {})  # node id -> rendered text (ATOM level)
        self._printing = set()

    def q(self, nid):
        return f"q{nid}"

    def p(self, nid, prec=ARROW):
        hit = self.names.get(nid)
        if hit is not None:
            return hit
        w = self.w
        n = w.node(nid)
        t = n.tag
        if t == "lit_nat":
            return str(n.payload)
        if t == "lit_idx":
            bound, val = n.payload
            return f"{val}_{bound}"
        if t == "sort":
            return "*" if n.payload == 0 else f"Sort {n.payload}"
        if t == "bot":
            return "Bot"
        if t == "nat":
            return "Nat"
        if t == "idx":
            return "Idx"
        if t == "axiom":
            return n.payload
        if t == "var":
            raise UnsupportedConstruct(f"variable {nid} escapes its binder")
        if t == "placeholder":
            raise UnsupportedConstruct("cannot print an unsolved placeholder")
        if t == "app":
            f, a = n.ops
            s = f"{self.p(f, APP)} {self.p(a, ATOM)}"
            return f"({s})" if prec > APP else s
        if t == "extract":
            return f"{self.p(n.ops[0], ATOM)}#{self.p(n.ops[1], ATOM)}"
        if t == "insert":
            e, i, v = n.ops
            return f"insert ({self.p(e)}, {self.p(i)}, {self.p(v)})"
        if t == "tuple":
            return "(" + ", ".join(self.p(op) for op in n.ops) + ")"
        if t == "sigma":
            if not n.mutable:
                return "[" + ", ".join(self.p(op) for op in n.ops) + "]"
            return self._sigma_mut(nid)
        if t in ("arr", "pack"):
            lft, rgt = ("<<", ">>") if t == "arr" else ("<", ">")
            shape, body = n.ops
            if n.mutable:
                v = self.w._var_of.get(nid)
                nm = self.q(nid)
                with self._scoped({v: nm} if v is not None else {}):
                    return f"{lft}{nm}: {self.p(shape)}; {self.p(body)}{rgt}"
            return f"{lft}{self.p(shape)}; {self.p(body)}{rgt}"
        if t == "pi":
            return self._pi(nid, prec)
        if t == "lam":
            return self._lam_inline(nid, prec)
        raise UnsupportedConstruct(f"cannot print tag {t!r}")

    def _scoped(self, extra):
        printer = self

        class _Scope:
            def __enter__(self_inner):
                self_inner.saved = {k: printer.names.get(k) for k in extra}
                printer.names.update(extra)

            def __exit__(self_inner, *exc):
                for k, old in self_inner.saved.items():
                    if old is None:
                        printer.names.pop(k, None)
                    else:
                        printer.names[k] = old

        return _Scope()

    def _sigma_mut(self, nid):
        w = self.w
        n = w.node(nid)
        v = w._var_of.get(nid)
        count = len(n.ops)
        extra = {}
        if v is not None:
            parts = []
            for k in range(count):
                nm = f"{self.q(nid)}_{k}"
                ex = w.extract(v, w.lit_idx(count, k))
                extra[ex] = nm
                parts.append(nm)
            extra[v] = "(" + ", ".join(parts) + ")"
        with self._scoped(extra):
            elems = ", ".join(
                f"{self.q(nid)}_{k}: {self.p(op)}" for k, op in enumerate(n.ops)
            )
        return f"[{elems}]"

    def _pi(self, nid, prec):
        w = self.w
        n = w.node(nid)
        dom, cod = n.ops
        implicit = bool(n.payload)
        if n.mutable:
            v = w._var_of.get(nid)
            nm = self.q(nid)
            extra = {v: nm} if v is not None else {}
            with self._scoped(extra):
                ds = self.p(dom)
                cs = self.p(cod)
            grp = f"{{{nm}: {ds}}}" if implicit else f"[{nm}: {ds}]"
            s = f"{grp} -> {cs}"
        else:
            ds = self.p(dom, APP)
            cs = self.p(cod)
            s = f"{{_: {ds}}} -> {cs}" if implicit else f"{ds} -> {cs}"
        return f"({s})" if prec > ARROW else s

    def _lam_header(self, nid):
        """Shared group/cod rendering for a lambda; returns (header, body)."""
        w = self.w
        n = w.node(nid)
        pi = w.node(w.resolve_shallow(n.type))
        nm = self.q(nid)
        extra = {}
        v_lam = w._var_of.get(nid)
        if v_lam is not None:
            extra[v_lam] = nm
        v_pi = w._var_of.get(pi.id) if pi.mutable else None
        if v_pi is not None:
            extra[v_pi] = nm
        with self._scoped(extra):
            dom = self.p(pi.ops[0], APP)
            cod = self.p(pi.ops[1])
            filt = self.p(n.ops[0])
            body = self.p(n.ops[1])
        group = f"{{{nm}: {dom}}}" if pi.payload else f"{nm}: {dom}"
        return f"{group} @({filt}): {cod}", body

    def _lam_inline(self, nid, prec):
        if nid in self._printing:
            raise UnsupportedConstruct(
                f"recursive lambda {nid} is open and cannot print inline"
            )
        self._printing.add(nid)
        try:
            header, body = self._lam_header(nid)
        finally:
            self._printing.discard(nid)
        return f"(λ {header} = {body})"


def collect_closed_lams(w, roots):
    """Reachable mutable lambdas with no free variables, in id order."""
    seen = set()
    out = []
    stack = list(roots)
    while stack:
        nid = stack.pop()
        if nid in seen:
            continue
        seen.add(nid)
        n = w.node(nid)
        if n.tag == "lam" and n.mutable and not w.free_vars(nid):
            out.append(nid)
        if n.type is not None:
            stack.append(n.type)
        for op in n.ops:
            if op is not None:
                stack.append(op)
    return sorted(out)


def print_module(w, bindings):
    """Render named bindings as declarations; reparsing in the same world
    reproduces each binding up to alpha-equivalence."""
    roots = list(bindings.values())
    lams = collect_closed_lams(w, roots)
    lam_name = {}
    for name, nid in bindings.items():
        if nid in lams and nid not in lam_name and not name.startswith("%"):
            lam_name[nid] = name
    for nid in lams:
        lam_name.setdefault(nid, f"_f{nid}")

    pr = Printer(w, names={nid: nm for nid, nm in lam_name.items()})
    lines = [f"plugin {p};" for p in sorted(w.plugins)]
    for nid in lams:
        # _lam_header reads the node directly, so the self-name stays visible
        # for recursive occurrences inside the body.
        header, body = pr._lam_header(nid)
        lines.append(f"lam {lam_name[nid]} {header} = {body};")
    for name, nid in bindings.items():
        n = w.node(nid)
        if n.tag == "axiom" and n.payload == name:
            continue
        if lam_name.get(nid) == name:
            continue
        lines.append(f"let {name} = {pr.p(nid)};")
    return "\n".join(lines) + "\n"


def print_node(w, nid):
    return Printer(w).p(nid)
