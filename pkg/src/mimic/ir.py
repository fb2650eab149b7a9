"""The unified expression graph.

Nodes form a sea-of-nodes style graph: immutable nodes are hash-consed (syntactic
equality coincides with node identity) and built operands-first; mutable nodes are
built node-first so operands may refer back to them (recursion, binders). Every
immutable construction is type-checked and normalized on the fly.
"""

from __future__ import annotations

import sys

from .errors import (
    AlreadySealed,
    ArityMismatch,
    BudgetExceeded,
    IndexOutOfRange,
    MissingOperand,
    NotMutable,
    TypingError,
)
from . import normalize as _norm
from . import typecheck as _tc

# Deep β-reduction chains (loop unrolling) lean on Python recursion.
sys.setrecursionlimit(max(sys.getrecursionlimit(), 100_000))

# Tags. Payload per tag: sort -> level, lit_nat -> value, lit_idx -> (bound, value),
# axiom -> annex name, placeholder -> serial, pi -> implicit flag; otherwise None.
ARITY = {
    "sort": 0,
    "bot": 0,
    "nat": 0,
    "idx": 0,
    "lit_nat": 0,
    "lit_idx": 0,
    "axiom": 0,
    "placeholder": 0,
    "var": 1,
    "pi": 2,
    "lam": 2,  # (filter, body); domain lives in the pi type edge
    "app": 2,
    "arr": 2,  # (shape, body)
    "pack": 2,
    "extract": 2,
    "insert": 3,
    "sigma": None,  # n-ary
    "tuple": None,
}

MUTABLE_TAGS = ("lam", "pi", "sigma", "arr", "pack")


class Node:
    __slots__ = ("id", "tag", "payload", "type", "ops", "mutable", "sealed")

    def __init__(self, nid, tag, payload, type_, ops, mutable):
        self.id = nid
        self.tag = tag
        self.payload = payload
        self.type = type_
        self.ops = ops
        self.mutable = mutable
        self.sealed = not mutable

    def __repr__(self):
        return f"Node({self.id}, {self.tag}, payload={self.payload}, ops={self.ops})"


class World:
    """Owns the node store, the hash-cons table, and the axiom registry."""

    def __init__(self, beta_budget=100_000):
        self.nodes = []
        self._hashcons = {}
        self._norm_memo = {}  # construction key -> post-normalization node id
        self._var_of = {}  # binder id -> var id
        self._fv_cache = {}
        self.annexes = {}  # qualified name -> node id (axioms and let-bound defs)
        self.axiom_hooks = {}  # annex -> (trigger_curry, hook fn)
        self.axiom_runtime = {}  # annex -> (spine arity, eval fn)
        self.plugins = set()
        self.passes = {}  # pass name -> callable(world, roots) -> (roots, count)
        self.ph_solutions = {}  # placeholder node id -> node id
        self._ph_serial = 0
        self.beta_budget = beta_budget
        self._beta_used = 0
        self.rt_const_cache = {}  # node id -> runtime value of a closed term
        self.rt_lam_info = {}  # lam id -> (sorted fvs, var, codomain is bot)
        self.rt_app_sort = {}  # app id -> whether its type is a sort
        self.rt_partial_cache = {}  # (node id, arg) -> partial application
        self.rt_plan = {}  # node id -> precomputed evaluation plan
        self.rt_type_decode = {}  # type node id -> runtime classification

    # ------------------------------------------------------------------ store

    def node(self, nid):
        return self.nodes[nid]

    def _alloc(self, tag, payload, type_, ops, mutable):
        n = Node(len(self.nodes), tag, payload, type_, ops, mutable)
        self.nodes.append(n)
        return n

    def reset_budget(self):
        self._beta_used = 0

    def spend_beta(self, app_id):
        self._beta_used += 1
        if self._beta_used > self.beta_budget:
            raise BudgetExceeded(
                f"reduction budget of {self.beta_budget} exceeded at node {app_id}"
            )

    # ------------------------------------------------------ immutable nodes

    def _check_arity(self, tag, ops):
        want = ARITY.get(tag)
        if want is None and tag in ("sigma", "tuple"):
            return
        if want is None:
            raise ArityMismatch(f"unknown tag {tag!r}")
        if len(ops) != want:
            raise ArityMismatch(f"{tag} wants {want} operands, got {len(ops)}")

    def make_immutable(self, tag, type_=None, ops=(), payload=None):
        ops = tuple(ops)
        self._check_arity(tag, ops)
        if tag == "sort":
            key = (tag, payload, None, ops)
        else:
            key = (tag, payload, type_, ops)
        hit = self._hashcons.get(key)
        if hit is not None:
            return hit
        hit = self._norm_memo.get(key)
        if hit is not None:
            return hit

        ty = _tc.synth_for(self, tag, payload, type_, ops)
        if ty != type_:
            # the synthesized type is authoritative; re-key on it
            key2 = (tag, payload, ty, ops) if tag != "sort" else key
            hit = self._hashcons.get(key2)
            if hit is None:
                hit = self._norm_memo.get(key2)
            if hit is not None:
                if key2 != key:
                    self._norm_memo[key] = hit
                return hit
            key = key2

        rep = _norm.normalize_structural(self, tag, ty, ops, payload)
        if rep is not None:
            self._norm_memo[key] = rep
            return rep

        n = self._alloc(tag, payload, ty, ops, mutable=False)
        self._hashcons[key] = n.id
        if tag == "app":
            rep = _norm.normalize_app(self, n.id)
            if rep is not None and rep != n.id:
                del self._hashcons[key]
                self._norm_memo[key] = rep
                return rep
        return n.id

    # -------------------------------------------------------- mutable nodes

    def make_mutable(self, tag, type_=None):
        if tag not in MUTABLE_TAGS:
            raise ArityMismatch(f"tag {tag!r} cannot be mutable")
        arity = ARITY[tag] if ARITY[tag] is not None else 0
        n = self._alloc(tag, None, type_, [None] * arity, mutable=True)
        return n.id

    def grow_mutable(self, nid, count):
        """Fix the operand count of a mutable sigma/tuple-style node."""
        n = self.node(nid)
        if not n.mutable:
            raise NotMutable(f"node {nid} is immutable")
        if n.sealed:
            raise AlreadySealed(f"node {nid} is sealed")
        n.ops = [None] * count

    def set_operand(self, nid, index, value):
        n = self.node(nid)
        if not n.mutable:
            raise NotMutable(f"node {nid} is immutable")
        if n.sealed:
            raise AlreadySealed(f"node {nid} is sealed")
        if not 0 <= index < len(n.ops):
            raise IndexOutOfRange(f"operand {index} out of range for {n.tag}")
        n.ops[index] = value
        self._fv_cache.clear()
        self.rt_const_cache.clear()
        self.rt_lam_info.clear()
        self.rt_app_sort.clear()
        self.rt_partial_cache.clear()
        self.rt_plan.clear()
        self.rt_type_decode.clear()

    def set_type(self, nid, type_):
        n = self.node(nid)
        if not n.mutable:
            raise NotMutable(f"node {nid} is immutable")
        if n.sealed:
            raise AlreadySealed(f"node {nid} is sealed")
        n.type = type_
        self._fv_cache.clear()
        self.rt_plan.clear()

    def seal(self, nid):
        n = self.node(nid)
        if not n.mutable:
            raise NotMutable(f"node {nid} is immutable")
        if n.sealed:
            return
        if any(op is None for op in n.ops):
            raise MissingOperand(f"node {nid} ({n.tag}) has unset operands")
        n.ops = tuple(n.ops)
        _tc.check_sealed(self, nid)
        n.sealed = True
        self._fv_cache.clear()

    def finalize(self, nid):
        """Demote a sealed mutable to hash-consed immutable form when possible.

        Non-parametric, acyclic mutables are rebuilt as immutables. Parametric
        packs/arrays with a small literal shape are expanded element-wise
        (the constant-arity expansion rules). Everything else stays mutable.
        """
        n = self.node(nid)
        if not n.mutable:
            return nid
        if not n.sealed:
            self.seal(nid)
        if self._reaches(n.ops, nid):
            return nid  # genuinely cyclic: must stay mutable
        v = self._var_of.get(nid)
        parametric = v is not None and self._reaches(n.ops, v)
        if not parametric:
            return self.make_immutable(n.tag, n.type, n.ops, n.payload)
        if n.tag in ("arr", "pack"):
            shape = self.node(n.ops[0])
            if shape.tag == "lit_nat" and shape.payload <= 64:
                count = shape.payload
                elems = tuple(
                    self.substitute(n.ops[1], {v: self.lit_idx(count, k)})
                    for k in range(count)
                )
                out_tag = "sigma" if n.tag == "arr" else "tuple"
                return self.make_immutable(out_tag, None, elems)
        return nid

    def _reaches(self, start_ops, target):
        seen = set()
        stack = [op for op in start_ops if op is not None]
        n0 = self.node(target)
        if n0.type is not None:
            stack.append(n0.type)
        while stack:
            cur = stack.pop()
            if cur == target:
                return True
            if cur in seen:
                continue
            seen.add(cur)
            c = self.node(cur)
            if c.tag == "var":
                continue  # binder back-edge is metadata, not structure
            if c.type is not None:
                stack.append(c.type)
            stack.extend(op for op in c.ops if op is not None)
        return False

    # --------------------------------------------------------------- queries

    def typeof(self, nid):
        n = self.node(nid)
        if n.type is None and n.tag == "sort":
            n.type = self.sort(n.payload + 1)
        return n.type

    def var(self, binder):
        b = self.node(binder)
        if not b.mutable:
            raise NotMutable(f"binder {binder} must be mutable")
        hit = self._var_of.get(binder)
        if hit is not None:
            return hit
        if b.tag == "lam":
            pi = self.node(b.type)
            ty = pi.ops[0]
        elif b.tag == "pi":
            ty = b.ops[0]
        elif b.tag == "sigma":
            ty = binder
        elif b.tag in ("arr", "pack"):
            ty = self.app(self.idx_head(), b.ops[0])
        else:
            raise NotMutable(f"tag {b.tag} does not bind a variable")
        if ty is None:
            raise MissingOperand(f"binder {binder} domain not set yet")
        v = self.make_immutable("var", ty, (binder,))
        self._var_of[binder] = v
        return v

    def binder_of(self, var_id):
        return self.node(var_id).ops[0]

    def free_vars(self, root):
        hit = self._fv_cache.get(root)
        if hit is not None:
            return hit
        reach = self._reachable(root)
        fv = {nid: set() for nid in reach}
        order = list(reach)
        changed = True
        while changed:
            changed = False
            for nid in order:
                n = self.node(nid)
                if n.tag == "var":
                    cur = {nid}
                else:
                    cur = set()
                    for op in n.ops:
                        if op is not None and op in fv:
                            cur |= fv[op]
                    if n.type is not None and n.type in fv:
                        cur |= fv[n.type]
                    if n.mutable:
                        cur.discard(self._var_of.get(nid))
                if cur != fv[nid]:
                    fv[nid] = cur
                    changed = True
        for nid in reach:
            self._fv_cache[nid] = frozenset(fv[nid])
        return self._fv_cache[root]

    def _reachable(self, root):
        seen = set()
        stack = [root]
        while stack:
            cur = stack.pop()
            if cur in seen:
                continue
            seen.add(cur)
            n = self.node(cur)
            if n.tag == "var":
                continue
            if n.type is not None:
                stack.append(n.type)
            stack.extend(op for op in n.ops if op is not None)
        return seen

    # ---------------------------------------------------------- substitution

    def substitute(self, root, mapping):
        """Replace nodes per mapping (vars or placeholders), rebuilding through
        make_immutable so every intermediate is normalized. Subgraphs that do not
        touch the mapping are returned unchanged (identity preserved)."""
        if not mapping:
            return root
        touched = self._touched_set(root, mapping)
        if root not in touched:
            return root
        memo = dict(mapping)
        return self._subst(root, memo, touched, set(mapping))

    def _touched_set(self, root, mapping):
        targets = set(mapping)
        seen = set()
        stack = [root]
        preds = {}
        while stack:
            cur = stack.pop()
            if cur in seen:
                continue
            seen.add(cur)
            n = self.node(cur)
            if cur in targets or n.tag == "var":
                continue
            if n.mutable and self._var_of.get(cur) in targets:
                continue  # the mapped var is bound here; don't enter
            kids = [op for op in n.ops if op is not None]
            if n.type is not None:
                kids.append(n.type)
            for k in kids:
                preds.setdefault(k, []).append(cur)
                stack.append(k)
        touched = set()
        work = [t for t in targets if t in seen or t in preds]
        while work:
            cur = work.pop()
            if cur in touched:
                continue
            touched.add(cur)
            n = self.node(cur)
            if n.mutable and cur not in targets:
                # this binder gets copied, so occurrences of its own variable
                # must be redirected to the copy's variable as well
                v = self._var_of.get(cur)
                if v is not None and v not in touched:
                    work.append(v)
            work.extend(preds.get(cur, ()))
        return touched

    def _subst(self, nid, memo, touched, targets):
        hit = memo.get(nid)
        if hit is not None:
            return hit
        if nid not in touched:
            memo[nid] = nid
            return nid
        n = self.node(nid)
        if n.tag == "var":
            # a free variable that is not itself mapped stays put; bound
            # occurrences are redirected via memo when their binder is copied
            memo[nid] = nid
            return nid
        if n.mutable:
            if self._var_of.get(nid) in targets:
                memo[nid] = nid
                return nid
            nn = self.make_mutable(n.tag, None)
            self.node(nn).payload = n.payload
            if ARITY[n.tag] is None:
                self.grow_mutable(nn, len(n.ops))
            memo[nid] = nn
            new_ty = None
            if n.type is not None:
                new_ty = self._subst(n.type, memo, touched, targets)
                self.set_type(nn, new_ty)
            # wire the domain-bearing operand first so the copy's var is typable
            order = list(range(len(n.ops)))
            if n.tag in ("pi", "arr", "pack"):
                order = [0] + [i for i in order if i != 0]
            old_var = self._var_of.get(nid)
            var_done = False
            for i in order:
                if old_var is not None and not var_done and self._op_ready(nn, n.tag, i):
                    memo[old_var] = self.var(nn)
                    var_done = True
                self.set_operand(nn, i, self._subst(n.ops[i], memo, touched, targets))
            if old_var is not None and not var_done:
                memo[old_var] = self.var(nn)
            self.seal(nn)
            out = self.finalize(nn)
            memo[nid] = out
            return out
        new_ops = tuple(self._subst(op, memo, touched, targets) for op in n.ops)
        given = None
        if n.tag == "placeholder":
            given = self._subst(n.type, memo, touched, targets)
            out = self.placeholder(given)
        elif n.tag == "axiom":
            out = nid
        elif n.tag == "lam":
            # a lam's pi is a given, not synthesized; rewrite it alongside
            new_ty = self._subst(n.type, memo, touched, targets)
            out = self.make_immutable(n.tag, new_ty, new_ops, n.payload)
        else:
            out = self.make_immutable(n.tag, None, new_ops, n.payload)
        memo[nid] = out
        return out

    def _op_ready(self, mut, tag, next_index):
        # the copy's var can be created once its domain source is available
        if tag == "lam":
            return True  # domain comes from the type edge
        if tag in ("pi", "arr", "pack"):
            return next_index != 0
        return True  # sigma: var typed by the node itself

    # ------------------------------------------------------- alpha-equivalence

    def resolve_shallow(self, nid):
        while True:
            sol = self.ph_solutions.get(nid)
            if sol is None:
                return nid
            nid = sol

    def alpha_equiv(self, a, b, checking=False, solver=None):
        return self._aeq(a, b, {}, {}, set(), checking, solver)

    def _aeq(self, a, b, m_ab, m_ba, visited, checking, solver):
        a = self.resolve_shallow(a)
        b = self.resolve_shallow(b)
        if a == b:
            if not m_ab and not m_ba:
                return True
            fv = self.free_vars(a)
            if not any(self.binder_of(v) in m_ab or self.binder_of(v) in m_ba for v in fv):
                return True
        na, nb = self.node(a), self.node(b)
        if solver is not None and (na.tag == "placeholder" or nb.tag == "placeholder"):
            got = solver(self, a, b, m_ab, m_ba, checking)
            if got is not None:
                return got
        if na.tag == "var" and nb.tag == "var":
            ba, bb = na.ops[0], nb.ops[0]
            if m_ab.get(ba) == bb and m_ba.get(bb) == ba:
                return True
            if ba == bb and ba not in m_ab and bb not in m_ba:
                return True
            if checking and ba not in m_ab and bb not in m_ba:
                return True  # distinct free variables: optimistic
            return False
        if na.tag != nb.tag or na.payload != nb.payload:
            if solver is not None:
                got = solver(self, a, b, m_ab, m_ba, checking)
                if got is not None:
                    return got
            return False
        if na.tag == "sort":
            return True  # payload compared above
        if na.tag == "axiom":
            return a == b
        if len(na.ops) != len(nb.ops):
            if solver is not None:
                got = solver(self, a, b, m_ab, m_ba, checking)
                if got is not None:
                    return got
            return False
        if (a, b) in visited:
            return True  # coinductive success on cyclic mutables
        visited.add((a, b))
        if na.mutable or nb.mutable:
            m_ab = dict(m_ab)
            m_ba = dict(m_ba)
            if na.mutable and nb.mutable:
                m_ab[a] = b
                m_ba[b] = a
        if na.tag == "lam":
            if not self._aeq(na.type, nb.type, m_ab, m_ba, visited, checking, solver):
                return False
        if solver is not None:
            got = solver(self, a, b, m_ab, m_ba, checking)
            if got is not None:
                return got
        for oa, ob in zip(na.ops, nb.ops):
            if not self._aeq(oa, ob, m_ab, m_ba, visited, checking, solver):
                return False
        return True

    # --------------------------------------------------------------- builders

    def sort(self, level):
        return self.make_immutable("sort", None, (), level)

    def star(self):
        return self.sort(0)

    def bot(self):
        return self.make_immutable("bot")

    def nat_t(self):
        return self.make_immutable("nat")

    def idx_head(self):
        return self.make_immutable("idx")

    def idx_t(self, bound):
        """Idx applied to a bound node (use idx_tn for a literal bound)."""
        return self.app(self.idx_head(), bound)

    def idx_tn(self, bound):
        return self.app(self.idx_head(), self.lit_nat(bound))

    def bool_t(self):
        return self.idx_tn(2)

    def lit_nat(self, value):
        return self.make_immutable("lit_nat", None, (), value)

    def lit_idx(self, bound, value):
        return self.make_immutable("lit_idx", None, (), (bound, value))

    def tt(self):
        return self.lit_idx(2, 1)

    def ff(self):
        return self.lit_idx(2, 0)

    def axiom(self, annex, type_):
        return self.make_immutable("axiom", type_, (), annex)

    def placeholder(self, type_):
        self._ph_serial += 1
        return self.make_immutable("placeholder", type_, (), self._ph_serial)

    def pi(self, dom, cod, implicit=False):
        return self.make_immutable("pi", None, (dom, cod), bool(implicit))

    def lam(self, pi_type, filter_, body):
        return self.make_immutable("lam", pi_type, (filter_, body))

    def app(self, f, a):
        return self.make_immutable("app", None, (f, a))

    def tuple_(self, elems):
        return self.make_immutable("tuple", None, tuple(elems))

    def unit(self):
        return self.tuple_(())

    def sigma_(self, types):
        return self.make_immutable("sigma", None, tuple(types))

    def arr(self, shape, body):
        return self.make_immutable("arr", None, (shape, body))

    def arr_n(self, count, body):
        return self.arr(self.lit_nat(count), body)

    def pack(self, shape, body):
        return self.make_immutable("pack", None, (shape, body))

    def pack_n(self, count, body):
        return self.pack(self.lit_nat(count), body)

    def extract(self, e, index):
        return self.make_immutable("extract", None, (e, index))

    def extract_i(self, e, i):
        n = _tc.arity_of(self, self.typeof(e))
        if n is None:
            raise TypingError("NotAssignable", e, message="extract from non-tuple")
        return self.extract(e, self.lit_idx(n, i))

    def insert(self, e, index, value):
        return self.make_immutable("insert", None, (e, index, value))

    # ----------------------------------------------------------- placeholders

    def solve_placeholder(self, ph, solution):
        assert self.node(ph).tag == "placeholder"
        assert ph not in self.ph_solutions, "placeholder solved twice"
        self.ph_solutions[ph] = solution
        self.rt_plan.clear()

    def resolve(self, root):
        """Substitute all solved placeholders reachable from root."""
        mapping = {}
        for nid in self._reachable(root):
            if self.node(nid).tag == "placeholder" and nid in self.ph_solutions:
                mapping[nid] = self.resolve_shallow(nid)
        if not mapping:
            return root
        out = self.substitute(root, mapping)
        # solutions may themselves contain placeholders solved later
        if any(
            self.node(nid).tag == "placeholder" and nid in self.ph_solutions
            for nid in self._reachable(out)
        ):
            return self.resolve(out)
        return out

    def unsolved_placeholders(self, root):
        return [
            nid
            for nid in self._reachable(root)
            if self.node(nid).tag == "placeholder" and nid not in self.ph_solutions
        ]
