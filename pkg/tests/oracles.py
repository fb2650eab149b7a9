"""Independent reference implementations used to pin down expected values.

Everything here is deliberately naive and written without reference to the
package internals: a position-set backtracking matcher, a table-filling DFA
minimizer, a plain DFA simulator, and a random pattern generator. Test
expectations are frozen against these.
"""

from __future__ import annotations

import itertools
import random


# ---------------------------------------------------------------- regex side
# Oracle pattern ASTs are plain tuples:
#   ("class", frozenset-of-bytes)
#   ("cat", [parts]) / ("alt", [parts])
#   ("opt"|"star"|"plus", part)

def backtrack_match(pattern, data):
    """Full-match semantics by exhaustive backtracking over end positions.

    Recursion is structural (only into subpatterns); repetition is a
    breadth-first closure over positions, so nullable bodies terminate.
    """
    if isinstance(data, str):
        data = data.encode()
    n = len(data)
    memo = {}

    def ends(p, i):
        key = (id(p), i)
        hit = memo.get(key)
        if hit is not None:
            return hit
        kind = p[0]
        if kind == "class":
            out = frozenset([i + 1]) if i < n and data[i] in p[1] \
                else frozenset()
        elif kind == "cat":
            cur = {i}
            for part in p[1]:
                nxt = set()
                for j in cur:
                    nxt |= ends(part, j)
                cur = nxt
            out = frozenset(cur)
        elif kind == "alt":
            out = frozenset().union(*(ends(part, i) for part in p[1]))
        elif kind == "opt":
            out = frozenset([i]) | ends(p[1], i)
        elif kind in ("star", "plus"):
            seen = set()
            work = list(ends(p[1], i))
            seen.update(work)
            while work:
                j = work.pop()
                for k in ends(p[1], j):
                    if k not in seen:
                        seen.add(k)
                        work.append(k)
            if kind == "star":
                seen.add(i)
            out = frozenset(seen)
        else:
            raise ValueError(kind)
        memo[key] = out
        return out

    return n in ends(pattern, 0)


def dfa_simulate(dfa, data):
    """Plain simulation against the package's DFA structure."""
    if isinstance(data, str):
        data = data.encode()
    s = dfa.start
    for c in data:
        s = dfa.delta[s][dfa.class_of[c]]
    return s in dfa.accepting


def table_filling_minimize(dfa):
    """O(n^2) distinguishability marking; returns (n_blocks, block_of)."""
    n = dfa.n_states
    k = len(dfa.classes)
    marked = set()
    for a in range(n):
        for b in range(a):
            if (a in dfa.accepting) != (b in dfa.accepting):
                marked.add((a, b))
    changed = True
    while changed:
        changed = False
        for a in range(n):
            for b in range(a):
                if (a, b) in marked:
                    continue
                for c in range(k):
                    x, y = dfa.delta[a][c], dfa.delta[b][c]
                    if x == y:
                        continue
                    pair = (max(x, y), min(x, y))
                    if pair in marked:
                        marked.add((a, b))
                        changed = True
                        break
    block_of = {}
    blocks = []
    for s in range(n):
        for t in range(s):
            if (s, t) not in marked and t in block_of:
                block_of[s] = block_of[t]
                break
        if s not in block_of:
            block_of[s] = len(blocks)
            blocks.append(s)
    return len(blocks), block_of


def random_pattern(rng: random.Random, depth=None, alphabet=b"abc"):
    """Oracle AST for a random pattern over a small alphabet.

    The nesting depth is bounded by 4; drawing the bound uniformly makes the
    corpus cover shallow and deep patterns alike.
    """
    if depth is None:
        depth = rng.randint(1, 4)
    if depth == 0 or rng.random() < 0.3:
        lo = rng.randrange(len(alphabet))
        hi = rng.randrange(lo, len(alphabet))
        return ("class", frozenset(alphabet[lo:hi + 1]))
    kind = rng.choice(["cat", "alt", "opt", "star", "plus"])
    if kind in ("cat", "alt"):
        parts = [random_pattern(rng, depth - 1, alphabet)
                 for _ in range(rng.randint(2, 3))]
        return (kind, parts)
    return (kind, random_pattern(rng, depth - 1, alphabet))


def build_pattern_term(w, pattern):
    """Build the graph term for an oracle AST via the plugin's axioms."""
    import mimic.typecheck as tc

    ax = w.annexes

    def lit(c):
        return w.lit_idx(256, c)

    def go(p):
        kind = p[0]
        if kind == "class":
            chars = sorted(p[1])
            ranges = []
            for c in chars:
                if ranges and ranges[-1][1] == c - 1:
                    ranges[-1][1] = c
                else:
                    ranges.append([c, c])
            alts = [
                tc.apply_with_implicits(
                    w, ax["%regex.range"], [w.tuple_([lit(lo), lit(hi)])]
                )
                for lo, hi in ranges
            ]
            if len(alts) == 1:
                return alts[0]
            return tc.apply_with_implicits(
                w, ax["%regex.disj"], [w.tuple_(alts)]
            )
        if kind in ("cat", "alt"):
            parts = [go(q) for q in p[1]]
            head = "%regex.conj" if kind == "cat" else "%regex.disj"
            if len(parts) == 1:
                return parts[0]
            return tc.apply_with_implicits(w, ax[head], [w.tuple_(parts)])
        quant = {"opt": "optional", "star": "star", "plus": "plus"}[kind]
        return w.app(ax[f"%regex.quant.{quant}"], go(p[1]))

    return go(pattern)


def all_strings(alphabet="abc", max_len=6):
    return [
        "".join(t)
        for length in range(max_len + 1)
        for t in itertools.product(alphabet, repeat=length)
    ]
