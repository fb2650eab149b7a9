"""Plugin registration, pass running, and whole-graph rechecking."""

import pytest

from mimic.errors import (
    DuplicatePlugin,
    PassNotFound,
    RegistrationError,
)
from mimic.plugins import load_plugin
from mimic.registry import (
    recheck_world,
    register_plugin,
    run_passes,
    validate_annex,
)
from mimic.surface import elaborate_text


def test_standard_plugins_register(w):
    for name in ("core", "mem", "regex"):
        load_plugin(w, name)
    assert {"core", "mem", "regex"} <= w.plugins
    assert "%core.nat.add" in w.annexes
    assert "%mem.load" in w.annexes
    assert "%regex.conj" in w.annexes


def test_load_plugin_is_idempotent(w):
    load_plugin(w, "core")
    before = dict(w.annexes)
    load_plugin(w, "core")
    assert w.annexes == before


def test_duplicate_registration_is_rejected(w):
    load_plugin(w, "core")
    with pytest.raises(DuplicatePlugin):
        register_plugin(w, "core", "plugin core;\n", hooks={})


def test_unknown_normalizer_reference_is_rejected(w):
    with pytest.raises(RegistrationError):
        register_plugin(
            w, "broken",
            "plugin broken;\naxm %broken.op: Nat -> Nat, normalize_nope, 1;\n",
            hooks={},
        )


def test_malformed_annex_names_are_rejected(w):
    for bad in ("noprefix.x", "%onlyplugin", "%a.b.c.d", "%a..b"):
        with pytest.raises(RegistrationError):
            validate_annex(bad)
    assert validate_annex("%core.nat.add") == ["core", "nat", "add"]


def test_unknown_pass_is_rejected(w):
    with pytest.raises(PassNotFound):
        run_passes(w, ["nope"], w.lit_nat(0))


def test_empty_pass_list_is_identity(w):
    root = w.lit_nat(3)
    out, report = run_passes(w, [], root)
    assert out == root
    assert report.applied == []


def test_pass_runs_to_fixed_point(w):
    def shrink(world, root):
        n = world.node(root)
        if n.tag == "lit_nat" and n.payload > 0:
            return world.lit_nat(n.payload - 1)
        return root

    w.passes["t.shrink"] = shrink
    out, report = run_passes(w, ["t.shrink"], w.lit_nat(3))
    assert out == w.lit_nat(0)
    assert report.applied[0][0] == "t.shrink"


def test_recheck_world_accepts_elaborated_module(wc):
    res = elaborate_text(wc, "lam f (x: Nat): Nat = %core.nat.add (x, 1);")
    assert recheck_world(wc, list(res.bindings.values())) == []


def test_regex_plugin_pass_is_registered(wr):
    assert "regex.lower" in wr.passes
