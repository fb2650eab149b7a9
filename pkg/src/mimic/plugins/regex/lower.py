"""Lower regular-expression pattern terms to executable matcher functions.

A pattern term (an application spine of the regex constructors) is compiled
to a minimal DFA and then emitted as a nest of recursive per-state functions:

    state_k : [M, Nat] -> [M, Bool]

Each state checks for end of input, otherwise loads the current byte through
the string pointer, dispatches on merged byte ranges, and jumps to the next
state with the position advanced. All state functions and branch thunks carry
`ff` inlining filters so the recursion is never unrolled at construction
time. The matcher itself has the same type as a pattern term, so the lowering
pass can splice it in place of the pattern.
"""

from __future__ import annotations

from ...errors import UnsupportedConstruct
from ... import surface
from ...evalrt import Evaluator, IdxV, MemV, NatV, PtrV, TupleV
from .automata import compile_pattern
from .pattern import extract_pattern, spine

RET = "[%mem.M, Bool]"


def _range_test(st, lo, hi):
    ch = f"ch{st}"
    if (lo, hi) == (0, 255):
        return "1_2"
    if lo == hi:
        return f"%core.icmp.e 256 ({ch}, {lo}_256)"
    if lo == 0:
        return f"%core.icmp.ule 256 ({ch}, {hi}_256)"
    if hi == 255:
        return f"%core.icmp.ule 256 ({lo}_256, {ch})"
    return (f"%core.wrap.mul 2 0 (%core.icmp.ule 256 ({lo}_256, {ch}), "
            f"%core.icmp.ule 256 ({ch}, {hi}_256))")


def _cond(st, ranges):
    out = _range_test(st, *ranges[0])
    for lo, hi in ranges[1:]:
        out = f"(({out}, 1_2)#({_range_test(st, lo, hi)}))"
    return out


def _chain(st, pairs, total, depth):
    """Chained range tests; when `total` the last branch needs no test,
    otherwise missing bytes fall through to an immediate reject."""
    if not pairs:
        return f"(mm{st}, 0_2)"
    tgt, ranges = pairs[0]
    jump = f"st{tgt} (mm{st}, %core.nat.add (pos, 1))"
    if len(pairs) == 1 and total:
        return jump
    u = f"{st}_{depth}"
    return (
        f"(el{u}, go{u})#({_cond(st, ranges)}) () where "
        f"lam go{u} (): {RET} = {jump}; "
        f"lam el{u} (): {RET} = {_chain(st, pairs[1:], total, depth + 1)}; "
        "end"
    )


def dead_states(dfa):
    """Non-accepting states that can never reach an accepting state."""
    k = len(dfa.classes)
    alive = set(dfa.accepting)
    changed = True
    while changed:
        changed = False
        for s in range(dfa.n_states):
            if s not in alive and any(
                dfa.delta[s][c] in alive for c in range(k)
            ):
                alive.add(s)
                changed = True
    return frozenset(range(dfa.n_states)) - alive


def _state_body(dfa, st, dead):
    acc = "1_2" if st in dfa.accepting else "0_2"
    pairs = sorted(
        ((tgt, ranges)
         for tgt, ranges in dfa.transitions_by_target(st).items()
         if tgt not in dead),
        key=lambda kv: kv[1][0][0],
    )
    total = sum(hi - lo + 1 for _t, rs in pairs for lo, hi in rs) == 256
    # the loaded byte and memory token are passed as parameters (not inlined
    # graph sharing) so the evaluator computes the load exactly once per step
    if not pairs:
        dispatch = "(m, 0_2)"
    else:
        dispatch = (
            f"wc{st} (ld{st}#0_2, ld{st}#1_2) where "
            f"lam wc{st} (mm{st}: %mem.M, ch{st}: %regex.Char)@ff: {RET} = "
            f"{_chain(st, pairs, total, 0)}; "
            f"let ld{st} = %mem.load (m, %mem.lea "
            f"(s, %core.bitcast (Idx n) Nat pos)); end"
        )
    return (
        f"(dn{st}, mo{st})#(%core.ncmp.l (pos, n)) () where "
        f"lam dn{st} (): {RET} = (m, {acc}); "
        f"lam mo{st} (): {RET} = {dispatch}; end"
    )


def matcher_source(dfa):
    dead = dead_states(dfa)
    lines = [
        "lam rxmatch {n: Nat} "
        "(inp: [%mem.M, %regex.Str n, Idx n]): [%mem.M, Bool, Idx n] =",
        "  (r#0_2, r#1_2, inp#2_3) where",
        "  let s = inp#1_3;",
    ]
    for st in range(dfa.n_states):
        if st in dead and st != dfa.start:
            continue
        lines.append(
            f"  lam st{st} (m: %mem.M, pos: Nat)@ff: {RET} = "
            f"{_state_body(dfa, st, dead)};"
        )
    lines.append(
        f"  let r = st{dfa.start} "
        "(inp#0_3, %core.bitcast Nat (Idx n) inp#2_3);"
    )
    lines.append("  end;")
    return "\n".join(lines) + "\n"


def lower_matcher(world, dfa):
    """Emit the matcher for a DFA into the world; returns its node id."""
    res = surface.elaborate_text(world, matcher_source(dfa))
    return res.bindings["rxmatch"]


def lower_pattern(world, nid):
    return lower_matcher(world, compile_pattern(extract_pattern(world, nid)))


def match_string(world, matcher, data, budget=1_000_000):
    """Run a lowered matcher on a byte string; returns True on acceptance."""
    if isinstance(data, str):
        data = data.encode()
    ev = Evaluator(world, budget=budget)
    n = len(data)
    base = ev.store.alloc(max(n, 1))
    ev.store.rows[base] = [IdxV(256, b) for b in data] or [None]
    # the length-partial application is a pure closure independent of the
    # store, so it can be shared across runs of the same matcher
    cache = world.rt_partial_cache
    f = cache.get((matcher, n))
    if f is None:
        f = ev.apply(ev.eval(matcher, {}), NatV(n))
        cache[(matcher, n)] = f
    out = ev.apply(
        f, TupleV((MemV(), PtrV((base, None)), IdxV(max(n, 1), 0)))
    )
    return ev.untuple(out, 3)[1].value == 1


def _is_pattern_term(world, nid):
    n = world.node(nid)
    if n.tag not in ("app", "axiom"):
        return False
    base, _args = spine(world, nid)
    bn = world.node(base)
    if bn.tag != "axiom" or not bn.payload.startswith("%regex."):
        return False
    regex_t = world.annexes.get("%regex.RegEx")
    return regex_t is not None and world.alpha_equiv(world.typeof(nid), regex_t)


def regex_lower_pass(world, root):
    """Replace every maximal pattern term reachable from `root` with its
    compiled matcher. Terms the extractor cannot interpret are left alone."""
    reach = world._reachable(root)
    cands = [nid for nid in sorted(reach) if _is_pattern_term(world, nid)]
    inside = set()
    for c in cands:
        for sub in world._reachable(c):
            if sub != c:
                inside.add(sub)
    mapping = {}
    for c in cands:
        if c in inside:
            continue
        try:
            mapping[c] = lower_pattern(world, c)
        except UnsupportedConstruct:
            continue
    if not mapping:
        return root
    return world.substitute(root, mapping)
