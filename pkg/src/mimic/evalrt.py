"""A strict, left-to-right CPS evaluator giving closed programs operational
semantics. Continuation invocations (codomain Bot) become trampoline jumps,
so tail calls run in constant stack space. Axioms evaluate through runtime
handlers registered by plugins; axioms without handlers raise
NoRuntimeSemantics when fully applied.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import NoRuntimeSemantics, StepBudgetExceeded, Stuck
from .plugins.mem import Store


# ------------------------------------------------------------------- values

@dataclass(frozen=True)
class NatV:
    value: int

@dataclass(frozen=True)
class IdxV:
    bound: int
    value: int

@dataclass(frozen=True)
class TupleV:
    items: tuple

@dataclass(frozen=True)
class ClosureV:
    lam: int
    env: tuple  # sorted (var id, value) pairs

    def env_dict(self):
        return dict(self.env)

@dataclass(frozen=True)
class AxiomV:
    annex: str
    args: tuple = ()

@dataclass(frozen=True)
class MemV:
    pass

@dataclass(frozen=True)
class PtrV:
    addr: tuple  # (base row, slot or None)

@dataclass(frozen=True)
class TypeV:
    node: int

@dataclass(frozen=True)
class ExitK:
    pass

@dataclass
class Jump:
    target: object  # ClosureV or ExitK
    arg: object


TYPE_TAGS = frozenset(["sort", "bot", "nat", "idx", "pi", "sigma", "arr"])


class Evaluator:
    def __init__(self, world, budget=1_000_000, trace=False):
        self.w = world
        self.store = Store()
        self.budget = budget
        self.steps = 0
        self.trace = trace
        self.trace_lines = []

    # ---- helpers for plugin runtime handlers

    def tuple_value(self, items):
        return TupleV(tuple(items))

    def mem_value(self):
        return MemV()

    def ptr_value(self, addr):
        return PtrV(addr)

    def ptr_addr(self, v):
        if not isinstance(v, PtrV):
            raise Stuck(f"expected a pointer, got {v!r}")
        return v.addr

    def untuple(self, v, n):
        if not isinstance(v, TupleV) or len(v.items) != n:
            raise Stuck(f"expected a {n}-tuple, got {v!r}")
        return v.items

    def index_value(self, v):
        if isinstance(v, IdxV):
            return v.value
        if isinstance(v, NatV):
            return v.value
        raise Stuck(f"expected an index, got {v!r}")

    def tick(self):
        self.steps += 1
        if self.steps > self.budget:
            raise StepBudgetExceeded(f"evaluation exceeded {self.budget} steps")

    def lam_info(self, lam_id):
        """(sorted free vars, binder var, codomain-is-Bot) for a lambda."""
        w = self.w
        hit = w.rt_lam_info.get(lam_id)
        if hit is None:
            lam = w.node(lam_id)
            pi = w.node(w.resolve_shallow(lam.type))
            cod = w.node(w.resolve_shallow(pi.ops[1]))
            hit = (tuple(sorted(w.free_vars(lam_id))),
                   w._var_of.get(lam_id), cod.tag == "bot")
            w.rt_lam_info[lam_id] = hit
        return hit

    # ---- the interpreter

    # evaluation plans: per-node facts that never change while the graph is
    # stable (placeholder resolution, tag dispatch, operand list, closedness,
    # whether an application is type-level) are computed once and cached on
    # the world; every structural mutation clears the cache.
    VALUE, VAR, APP, EXTRACT, TUPLE, LAM, RARE = range(7)

    def plan(self, nid):
        w = self.w
        sol = w.ph_solutions.get(nid)
        rid = nid if sol is None else w.resolve_shallow(sol)
        n = w.node(rid)
        t = n.tag
        closed = not w.free_vars(rid)
        if t == "lit_nat":
            p = (self.VALUE, rid, NatV(n.payload))
        elif t == "lit_idx":
            p = (self.VALUE, rid, IdxV(*n.payload))
        elif t == "var":
            p = (self.VAR, rid, None)
        elif t == "app":
            ty = w.node(w.resolve_shallow(w.typeof(rid)))
            if ty.tag == "sort":
                # a type-level application (Idx n, Ptr T, ...)
                p = (self.VALUE, rid, TypeV(rid))
            else:
                p = (self.APP, rid, closed, n.ops[0], n.ops[1])
        elif t == "extract":
            p = (self.EXTRACT, rid, closed, n.ops[0], n.ops[1])
        elif t == "tuple":
            p = (self.TUPLE, rid, closed, tuple(n.ops))
        elif t == "lam":
            p = (self.LAM, rid, closed)
        elif t in TYPE_TAGS:
            p = (self.VALUE, rid, TypeV(rid))
        else:
            p = (self.RARE, rid, closed)
        w.rt_plan[nid] = p
        return p

    def eval(self, nid, env, memo=None):
        w = self.w
        p = w.rt_plan.get(nid)
        if p is None:
            p = self.plan(nid)
        code = p[0]
        if code == 0:  # VALUE: env-independent
            return p[2]
        rid = p[1]
        if code == 1:  # VAR
            out = env.get(rid)
            if out is None:
                raise Stuck(f"unbound variable {rid}")
            return out
        if memo is not None:
            hit = memo.get(rid)
            if hit is not None:
                return hit
        closed = p[2]
        if closed:
            hit = w.rt_const_cache.get(rid)
            if hit is not None:
                return hit
        self.steps += 1
        if self.steps > self.budget:
            raise StepBudgetExceeded(f"evaluation exceeded {self.budget} steps")
        eva = self.eval
        if code == 2:  # APP
            out = self.apply(eva(p[3], env, memo), eva(p[4], env, memo))
        elif code == 3:  # EXTRACT
            subj = eva(p[3], env, memo)
            idx = eva(p[4], env, memo)
            if not isinstance(subj, TupleV):
                raise Stuck(f"expected a tuple, got {subj!r}")
            items = subj.items
            if isinstance(idx, (IdxV, NatV)):
                k = idx.value
            else:
                raise Stuck(f"expected an index, got {idx!r}")
            if not 0 <= k < len(items):
                raise Stuck(f"extract index {k} out of range")
            out = items[k]
        elif code == 4:  # TUPLE
            out = TupleV(tuple([eva(op, env, memo) for op in p[3]]))
        elif code == 5:  # LAM
            info = w.rt_lam_info.get(rid)
            if info is None:
                info = self.lam_info(rid)
            fv = info[0]
            out = ClosureV(rid, tuple([(v, env[v]) for v in fv if v in env]))
        else:
            n = w.node(rid)
            out = self._eval_rare(rid, n, n.tag, env, memo)
        # closed subterms always evaluate to the same (immutable) value;
        # effects only ever happen when a handler receives a memory token,
        # which no closed term can produce. Within one frame the environment
        # is fixed, so shared open subterms are memoized per frame.
        if closed:
            w.rt_const_cache[rid] = out
        elif memo is not None:
            memo[rid] = out
        return out

    def _eval_rare(self, nid, n, t, env, memo):
        w = self.w
        if t == "lit_nat":
            return NatV(n.payload)
        if t == "lit_idx":
            return IdxV(*n.payload)
        if t == "pack":
            shape = self.eval(n.ops[0], env, memo)
            if not isinstance(shape, NatV):
                raise Stuck("pack with non-constant shape")
            v = self.w._var_of.get(n.id) if n.mutable else None
            items = []
            for k in range(shape.value):
                env2 = dict(env)
                if v is not None:
                    env2[v] = IdxV(shape.value, k)
                items.append(self.eval(n.ops[1], env2, {}))
            return TupleV(tuple(items))
        if t == "insert":
            subj = self.eval(n.ops[0], env, memo)
            idx = self.index_value(self.eval(n.ops[1], env, memo))
            val = self.eval(n.ops[2], env, memo)
            items = list(self.untuple(subj, len(subj.items)))
            items[idx] = val
            return TupleV(tuple(items))
        if t == "lam":
            fv, _v, _b = self.lam_info(n.id)
            captured = tuple([(v, env[v]) for v in fv if v in env])
            return ClosureV(n.id, captured)
        if t == "axiom":
            return AxiomV(n.payload)
        if t == "placeholder":
            raise Stuck("unsolved placeholder at runtime")
        if t in TYPE_TAGS:
            return TypeV(n.id)
        raise Stuck(f"cannot evaluate tag {t!r}")

    def apply(self, f, a):
        w = self.w
        self.steps += 1
        if self.steps > self.budget:
            raise StepBudgetExceeded(f"evaluation exceeded {self.budget} steps")
        if isinstance(f, ExitK):
            return Jump(f, a)
        if isinstance(f, AxiomV):
            args = f.args + (a,)
            handler = w.axiom_runtime.get(f.annex)
            if handler is not None:
                arity, fn = handler
                if len(args) == arity:
                    return fn(self, list(args))
                return AxiomV(f.annex, args)
            raise NoRuntimeSemantics(
                f"axiom {f.annex} has no runtime interpretation"
            )
        if isinstance(f, ClosureV):
            info = w.rt_lam_info.get(f.lam)
            if info is None:
                info = self.lam_info(f.lam)
            _fv, v, cod_is_bot = info
            env = dict(f.env)
            if v is not None:
                env[v] = a
            if cod_is_bot:
                return Jump(ReadyBody(f.lam, env), a)
            return self.eval(w.node(f.lam).ops[1], env, {})
        raise Stuck(f"cannot apply {f!r}")

    def run_from(self, f, a):
        """Trampoline: keep jumping through continuations until the exit
        continuation is invoked (CPS) or a plain value comes back."""
        state = self.apply(f, a)
        while isinstance(state, Jump):
            if isinstance(state.target, ExitK):
                return state.arg
            body_env = state.target
            if self.trace:
                self.trace_lines.append(
                    f"jump lam{body_env.lam} {summary(state.arg)}"
                )
            state = self.eval(
                self.w.node(body_env.lam).ops[1], body_env.env, {})
        return state


@dataclass
class ReadyBody:
    lam: int
    env: dict


def summary(v):
    if isinstance(v, NatV):
        return str(v.value)
    if isinstance(v, IdxV):
        return f"{v.value}_{v.bound}"
    if isinstance(v, TupleV):
        return "(" + ", ".join(summary(x) for x in v.items) + ")"
    if isinstance(v, ClosureV):
        return f"<cont lam{v.lam}>"
    if isinstance(v, ExitK):
        return "<exit>"
    return type(v).__name__


def domain_arity(w, pi_id):
    import mimic.typecheck as _tc
    pi = w.node(w.resolve_shallow(pi_id))
    return _tc.arity_of(w, pi.ops[0])


def run(world, entry, args=(), budget=1_000_000, trace=False):
    """Run a closed function. For a Cn-typed entry, appends the distinguished
    exit continuation and returns the value it is invoked with; for
    direct-style entries, returns the result value."""
    ev = Evaluator(world, budget=budget, trace=trace)
    f = ev.eval(entry, {})
    if not isinstance(f, ClosureV):
        return f, ev
    pi = world.node(world.resolve_shallow(world.node(f.lam).type))
    cod = world.node(world.resolve_shallow(pi.ops[1]))
    values = list(args)
    if cod.tag == "bot":
        values.append(ExitK())
    if len(values) == 1:
        arg = values[0]
    else:
        arg = TupleV(tuple(values))
    out = ev.run_from(f, arg)
    return out, ev
