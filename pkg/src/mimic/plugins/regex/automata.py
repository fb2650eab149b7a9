"""Pattern -> Thompson epsilon-NFA -> subset-construction DFA -> Hopcroft
minimization. DFAs are total (a dead state absorbs missing transitions) and
operate over character equivalence classes, a partition of 0..255 induced by
the NFA edge labels.
"""

from __future__ import annotations

from dataclasses import dataclass

from ...errors import StateBlowupExceeded
from .pattern import Alt, Class, Concat, Rep

MAX_DFA_STATES = 4096


class NFA:
    def __init__(self):
        self.edges = []  # (src, label frozenset or None, dst)
        self.n = 0

    def state(self):
        self.n += 1
        return self.n - 1

    def edge(self, src, label, dst):
        self.edges.append((src, label, dst))


def thompson(pattern):
    """Returns (nfa, start, accept)."""
    nfa = NFA()

    def build(p):
        if isinstance(p, Class):
            s, t = nfa.state(), nfa.state()
            nfa.edge(s, frozenset(p.chars), t)
            return s, t
        if isinstance(p, Concat):
            s = t = nfa.state()
            for part in p.parts:
                ps, pt = build(part)
                nfa.edge(t, None, ps)
                t = pt
            return s, t
        if isinstance(p, Alt):
            s, t = nfa.state(), nfa.state()
            for part in p.parts:
                ps, pt = build(part)
                nfa.edge(s, None, ps)
                nfa.edge(pt, None, t)
            return s, t
        if isinstance(p, Rep):
            ps, pt = build(p.inner)
            s, t = nfa.state(), nfa.state()
            nfa.edge(s, None, ps)
            nfa.edge(pt, None, t)
            if p.kind in ("optional", "star"):
                nfa.edge(s, None, t)
            if p.kind in ("star", "plus"):
                nfa.edge(pt, None, ps)
            return s, t
        raise TypeError(f"not a pattern: {p!r}")

    start, accept = build(pattern)
    return nfa, start, accept


def char_classes(labels):
    """Partition 0..255 by which labels contain each byte."""
    sig = {}
    for c in range(256):
        key = tuple(c in lab for lab in labels)
        sig.setdefault(key, []).append(c)
    classes = [frozenset(v) for v in sig.values()]
    classes.sort(key=min)
    class_of = [0] * 256
    for k, cl in enumerate(classes):
        for c in cl:
            class_of[c] = k
    return tuple(classes), tuple(class_of)


@dataclass
class DFA:
    n_states: int
    start: int
    accepting: frozenset
    classes: tuple     # tuple of frozensets partitioning 0..255
    class_of: tuple    # byte -> class index
    delta: tuple       # delta[state][class] -> state (total)

    def accepts(self, data):
        s = self.start
        for c in data:
            s = self.delta[s][self.class_of[c]]
        return s in self.accepting

    def transitions_by_target(self, state):
        """{target: sorted list of (lo, hi) byte ranges} excluding self-dead."""
        out = {}
        for k, cl in enumerate(self.classes):
            tgt = self.delta[state][k]
            out.setdefault(tgt, set()).update(cl)
        ranges = {}
        for tgt, chars in out.items():
            ranges[tgt] = to_ranges(chars)
        return ranges


def to_ranges(chars):
    rs = []
    for c in sorted(chars):
        if rs and rs[-1][1] == c - 1:
            rs[-1][1] = c
        else:
            rs.append([c, c])
    return [tuple(r) for r in rs]


def determinize(nfa, start, accept):
    labels = sorted(
        {lab for _s, lab, _t in nfa.edges if lab is not None},
        key=lambda s: (min(s) if s else -1, len(s), sorted(s)),
    )
    classes, class_of = char_classes(labels)

    eps = {}
    by_src = {}
    for s, lab, t in nfa.edges:
        if lab is None:
            eps.setdefault(s, []).append(t)
        else:
            by_src.setdefault(s, []).append((lab, t))

    def closure(states):
        out = set(states)
        work = list(states)
        while work:
            s = work.pop()
            for t in eps.get(s, ()):
                if t not in out:
                    out.add(t)
                    work.append(t)
        return frozenset(out)

    start_set = closure({start})
    ids = {start_set: 0}
    order = [start_set]
    delta = []
    i = 0
    while i < len(order):
        cur = order[i]
        row = []
        for k, cl in enumerate(classes):
            rep = min(cl)
            nxt = set()
            for s in cur:
                for lab, t in by_src.get(s, ()):
                    if rep in lab:
                        nxt.add(t)
            nxt = closure(nxt) if nxt else frozenset()
            if nxt not in ids:
                if len(ids) >= MAX_DFA_STATES:
                    raise StateBlowupExceeded(
                        f"determinization exceeded {MAX_DFA_STATES} states"
                    )
                ids[nxt] = len(order)
                order.append(nxt)
            row.append(ids[nxt])
        delta.append(tuple(row))
        i += 1
    accepting = frozenset(ids[s] for s in order if accept in s)
    return DFA(len(order), 0, accepting, classes, class_of, tuple(delta))


def hopcroft(dfa):
    """Partition-refinement minimization; returns an equivalent minimal DFA
    with states renumbered in BFS order from the start state."""
    n, k = dfa.n_states, len(dfa.classes)
    acc = set(dfa.accepting)
    non = set(range(n)) - acc
    parts = [p for p in (acc, non) if p]
    work = [p.copy() for p in parts]
    preds = [dict() for _ in range(k)]  # class -> target -> set of sources
    for s in range(n):
        for c in range(k):
            preds[c].setdefault(dfa.delta[s][c], set()).add(s)
    while work:
        a = work.pop()
        for c in range(k):
            x = set()
            for t in a:
                x |= preds[c].get(t, set())
            new_parts = []
            for p in parts:
                inter, diff = p & x, p - x
                if inter and diff:
                    new_parts.extend((inter, diff))
                    if p in work:
                        work.remove(p)
                        work.extend((inter, diff))
                    else:
                        work.append(min(inter, diff, key=len))
                else:
                    new_parts.append(p)
            parts = new_parts
    block_of = {}
    for b, p in enumerate(parts):
        for s in p:
            block_of[s] = b
    # renumber blocks in BFS order from the start block
    start_b = block_of[dfa.start]
    reps = {b: min(p) for b, p in enumerate(parts)}
    bfs = [start_b]
    seen = {start_b}
    i = 0
    while i < len(bfs):
        b = bfs[i]
        for c in range(k):
            nb = block_of[dfa.delta[reps[b]][c]]
            if nb not in seen:
                seen.add(nb)
                bfs.append(nb)
        i += 1
    for b in range(len(parts)):  # unreachable blocks last, stable order
        if b not in seen:
            seen.add(b)
            bfs.append(b)
    newid = {b: idx for idx, b in enumerate(bfs)}
    delta = []
    for b in bfs:
        delta.append(
            tuple(newid[block_of[dfa.delta[reps[b]][c]]] for c in range(k))
        )
    accepting = frozenset(
        newid[block_of[s]] for s in dfa.accepting
    )
    return DFA(len(parts), newid[start_b], accepting, dfa.classes,
               dfa.class_of, tuple(delta))


def compile_pattern(pattern):
    nfa, start, accept = thompson(pattern)
    return hopcroft(determinize(nfa, start, accept))


def to_dot(dfa):
    lines = ["digraph dfa {", "  rankdir=LR;", '  hidden [shape=none, label=""];',
             f"  hidden -> s{dfa.start};"]
    for s in range(dfa.n_states):
        shape = "doublecircle" if s in dfa.accepting else "circle"
        lines.append(f"  s{s} [shape={shape}];")
    for s in range(dfa.n_states):
        for tgt, ranges in sorted(dfa.transitions_by_target(s).items()):
            label = ",".join(
                f"{lo:#04x}" if lo == hi else f"{lo:#04x}-{hi:#04x}"
                for lo, hi in ranges
            )
            if len(ranges) == 1 and ranges[0] == (0, 255):
                label = "any"
            lines.append(f'  s{s} -> s{tgt} [label="{label}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"
