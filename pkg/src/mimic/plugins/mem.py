"""Linear memory plugin: a memory token type `%mem.M` threads effect order,
`%mem.Ptr T` is a typed pointer, and alloc/load/store/free/lea operate on a
runtime store. There are no compile-time normalizers; all semantics live in
the evaluator runtime handlers.
"""

from __future__ import annotations

from ..errors import UndefinedBehavior


class Store:
    """Slot-based heap: every allocation is a row of value slots; `lea`
    yields a pointer to one slot."""

    def __init__(self):
        self.rows = []
        self.freed = set()

    def alloc(self, slot_count):
        self.rows.append([None] * max(slot_count, 1))
        return len(self.rows) - 1

    def row(self, base):
        if base in self.freed:
            raise UndefinedBehavior(f"use of freed allocation {base}")
        if not 0 <= base < len(self.rows):
            raise UndefinedBehavior(f"dangling pointer {base}")
        return self.rows[base]

    def free(self, base):
        self.row(base)
        self.freed.add(base)


def _slot_count(ev, type_value):
    """Number of slots for a stored value of this type (arrays expand)."""
    w = ev.w
    nid = getattr(type_value, "node", None)
    if nid is None:
        return 1
    n = w.node(w.resolve_shallow(nid))
    if n.tag == "arr":
        shape = w.node(n.ops[0])
        if shape.tag == "lit_nat":
            return shape.payload
    if n.tag == "sigma":
        return len(n.ops)
    return 1


def rt_alloc(ev, args):
    type_v, _mem = args
    base = ev.store.alloc(_slot_count(ev, type_v))
    return ev.tuple_value([ev.mem_value(), ev.ptr_value((base, None))])


def _addr(ev, ptr):
    return ev.ptr_addr(ptr)


def rt_load(ev, args):
    _t, pair = args
    _mem, ptr = ev.untuple(pair, 2)
    base, slot = _addr(ev, ptr)
    row = ev.store.row(base)
    if slot is None:
        val = row[0] if len(row) == 1 else ev.tuple_value(list(row))
    else:
        val = row[slot]
    if val is None:
        raise UndefinedBehavior("load of uninitialized memory")
    return ev.tuple_value([ev.mem_value(), val])


def rt_store(ev, args):
    _t, triple = args
    _mem, ptr, val = ev.untuple(triple, 3)
    base, slot = _addr(ev, ptr)
    row = ev.store.row(base)
    if slot is None:
        if len(row) == 1:
            row[0] = val
        else:
            parts = ev.untuple(val, len(row))
            row[:] = list(parts)
    else:
        row[slot] = val
    return ev.mem_value()


def rt_free(ev, args):
    _t, pair = args
    _mem, ptr = ev.untuple(pair, 2)
    base, _slot = _addr(ev, ptr)
    ev.store.free(base)
    return ev.mem_value()


def rt_lea(ev, args):
    _l, _ts, pair = args
    ptr, index = ev.untuple(pair, 2)
    base, slot = _addr(ev, ptr)
    if slot is not None:
        raise UndefinedBehavior("lea through an element pointer")
    return ev.ptr_value((base, ev.index_value(index)))


HOOKS = {}
RUNTIME = {
    "%mem.alloc": (2, rt_alloc),
    "%mem.load": (2, rt_load),
    "%mem.store": (2, rt_store),
    "%mem.free": (2, rt_free),
    "%mem.lea": (3, rt_lea),
}
PASSES = {}
