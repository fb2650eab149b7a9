"""Surface language: lexing, parsing, and elaboration of .mim text."""

import pytest

from mimic.errors import LexError, NameNotFound, ParseError
from mimic.surface import elaborate_text, parse_module, tokenize


# -------------------------------------------------------------------- lexer

def test_index_literals_and_char_literals(w):
    kinds = [(t.kind, t.value) for t in tokenize("42_256 'a' '\\n'")]
    assert kinds[:3] == [
        ("LITIDX", (256, 42)), ("LITIDX", (256, 97)), ("LITIDX", (256, 10))
    ]


def test_comments_are_skipped(w):
    toks = tokenize("1 // line\n/* block\nstill */ 2")
    assert [t.kind for t in toks] == ["NUM", "NUM", "EOF"]


def test_unicode_and_ascii_punctuation_agree(w):
    uni = [t.kind for t in tokenize("« » ‹ › →")]
    asc = [t.kind for t in tokenize("<< >> < > ->")]
    assert uni[:5] == asc[:5]


def test_unterminated_block_comment_is_a_lex_error(w):
    with pytest.raises(LexError):
        tokenize("1 /* never closed")


def test_unterminated_char_literal_is_a_lex_error(w):
    with pytest.raises(LexError):
        tokenize("'a")


# ------------------------------------------------------------------- parser

def test_missing_semicolon_is_a_parse_error(w):
    with pytest.raises(ParseError):
        parse_module("let x = 3")


def test_module_parses_every_decl_form(w):
    decls = parse_module(
        "plugin core;\n"
        "axm %t.a: Nat;\n"
        "let x = 3;\n"
        "lam f (y: Nat): Nat = y;\n"
    )
    assert len(decls) == 4


# -------------------------------------------------------------- elaboration

def test_let_binds_the_literal_node(w):
    res = elaborate_text(w, "let x = 3;")
    assert res.bindings["x"] == w.lit_nat(3)


def test_sugar_spellings_elaborate_alpha_equivalent(w):
    """Four spellings of 'first of a Nat pair' mean the same function."""
    spellings = [
        "lam f (x y: Nat): Nat = x;",
        "lam f (x: Nat, y: Nat): Nat = x;",
        "let f = λ p: <<2; Nat>> @tt: Nat = p#0_2;",
        "lam f p: «2; Nat»: Nat = p#0_2;",
    ]
    names = []
    for k, s in enumerate(spellings):
        s2 = s.replace("f ", f"f{k} ", 1).replace("f =", f"f{k} =", 1)
        names.append(elaborate_text(w, s2).bindings[f"f{k}"])
    for other in names[1:]:
        assert w.alpha_equiv(names[0], other)


def test_continuation_type_sugar(w):
    t1 = elaborate_text(w, "let a = Cn Nat;").bindings["a"]
    t2 = elaborate_text(w, "let b = Nat -> Bot;").bindings["b"]
    t3 = elaborate_text(w, "let c = Nat → ⊥;").bindings["c"]
    assert t1 == t2 == t3
    assert w.node(w.node(t1).ops[1]).tag == "bot"


def test_builtin_abbreviations(w):
    res = elaborate_text(w, "let b = Bool;\nlet i = I8;\nlet s = *;")
    assert res.bindings["b"] == w.idx_tn(2)
    assert res.bindings["i"] == w.idx_tn(256)
    assert res.bindings["s"] == w.star()


def test_where_scopes_declarations_over_head(w):
    res = elaborate_text(
        w, "let r = (x, y) where let x = 1; let y = 2; end;"
    )
    assert res.bindings["r"] == w.tuple_([w.lit_nat(1), w.lit_nat(2)])


def test_unknown_name_is_reported(w):
    with pytest.raises(NameNotFound):
        elaborate_text(w, "let x = nope;")


def test_unit_parameter_group(w):
    res = elaborate_text(w, "lam f (): Nat = 7;")
    f = res.bindings["f"]
    pi = w.node(w.typeof(f))
    assert w.node(pi.ops[0]).tag == "sigma"
    assert w.node(pi.ops[0]).ops == ()


def test_fun_appends_return_continuation(w):
    res = elaborate_text(w, "fun f (x: Nat): Nat = return x;")
    pi = w.node(w.typeof(res.bindings["f"]))
    assert w.node(pi.ops[1]).tag == "bot"


def test_mutual_recursion_between_named_functions(wc):
    src = (
        "lam even (n: Nat)@ff: Bool ="
        "  (y, o)#(%core.ncmp.e (n, 0)) () where"
        "    lam y (): Bool = tt;"
        "    lam o (): Bool = odd (%core.nat.sub (n, 1));"
        "  end;"
        "lam odd (n: Nat)@ff: Bool ="
        "  (y, o)#(%core.ncmp.e (n, 0)) () where"
        "    lam y (): Bool = ff;"
        "    lam o (): Bool = even (%core.nat.sub (n, 1));"
        "  end;"
    )
    res = elaborate_text(wc, src)
    assert "even" in res.bindings and "odd" in res.bindings
