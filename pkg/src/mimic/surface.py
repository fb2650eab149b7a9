"""Surface language: lexer, parser, and elaborator for `.mim` modules.

Declarations: `plugin`, `axm`, `let`, and named function forms (`lam`, `con`,
`fun`). Expressions cover the full type/term syntax with both Unicode and
ASCII spellings. Desugaring follows the standard table: `*` is Sort 0,
`Bool` is Idx 2, `Cn T` is `T -> Bot`, `Fn T -> U` is `Cn [T, Cn U]`,
`cn x:T = e` is a ff-filter lambda into Bot, `fun/fn` append a `return`
continuation to the last group, and `e where decls end` scopes decls over e.
Let-bindings wire uses directly; no let node is ever constructed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import LexError, NameNotFound, ParseError, TypingError
from . import typecheck as _tc

KEYWORDS = {
    "plugin", "axm", "let", "lam", "con", "fun", "cn", "fn", "Cn", "Fn",
    "Sort", "Nat", "Idx", "Bool", "Bot", "I8", "I16", "I32", "I64",
    "tt", "ff", "insert", "where", "end",
}

PUNCT = [
    ("<<", "ARR_L"), (">>", "ARR_R"), ("->", "ARROW"),
    ("(", "LP"), (")", "RP"), ("[", "LB"), ("]", "RB"),
    ("{", "LC"), ("}", "RC"), ("<", "PACK_L"), (">", "PACK_R"),
    (";", "SEMI"), (",", "COMMA"), (":", "COLON"), ("=", "EQ"),
    ("@", "AT"), ("#", "HASH"), ("*", "STAR"),
    ("«", "ARR_L"), ("»", "ARR_R"),      # « »
    ("‹", "PACK_L"), ("›", "PACK_R"),    # ‹ ›
    ("→", "ARROW"), ("⊥", "BOT"), ("λ", "LAMBDA"),  # → ⊥ λ
]

ESCAPES = {"n": "\n", "t": "\t", "r": "\r", "0": "\0", "\\": "\\", "'": "'",
           "f": "\f", "v": "\v"}


@dataclass
class Token:
    kind: str
    value: object
    line: int
    col: int


def tokenize(text):
    toks = []
    i, line, col = 0, 1, 1
    n = len(text)

    def err(msg):
        raise LexError(msg, line, col)

    while i < n:
        c = text[i]
        if c == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if c in " \t\r":
            i += 1
            col += 1
            continue
        if text.startswith("//", i):
            j = text.find("\n", i)
            i = n if j < 0 else j
            continue
        if text.startswith("/*", i):
            j = text.find("*/", i)
            if j < 0:
                err("unterminated block comment")
            chunk = text[i:j + 2]
            line += chunk.count("\n")
            i = j + 2
            continue
        if c == "'":
            j = i + 1
            if j < n and text[j] == "\\":
                if j + 1 >= n:
                    err("unterminated char literal")
                esc = text[j + 1]
                if esc == "x":
                    val = int(text[j + 2:j + 4], 16)
                    j += 4
                elif esc in ESCAPES:
                    val = ord(ESCAPES[esc])
                    j += 2
                else:
                    err(f"unknown escape \\{esc}")
            elif j < n and text[j] != "'":
                val = ord(text[j])
                j += 1
            else:
                err("empty char literal")
            if j >= n or text[j] != "'":
                err("unterminated char literal")
            toks.append(Token("LITIDX", (256, val), line, col))
            col += j + 1 - i
            i = j + 1
            continue
        if c == "%":
            j = i + 1
            start = j
            while j < n and (text[j].isalnum() or text[j] in "_."):
                j += 1
            name = text[start:j]
            if "." not in name:
                err("annex name needs at least plugin.group")
            toks.append(Token("ANNEX", "%" + name, line, col))
            col += j - i
            i = j
            continue
        if c.isdigit():
            j = i
            if text.startswith("0x", i) or text.startswith("0X", i):
                j = i + 2
                while j < n and text[j] in "0123456789abcdefABCDEF":
                    j += 1
                toks.append(Token("NUM", int(text[i:j], 16), line, col))
            else:
                while j < n and text[j].isdigit():
                    j += 1
                if j < n and text[j] == "_" and j + 1 < n and text[j + 1].isdigit():
                    k = j + 1
                    while k < n and text[k].isdigit():
                        k += 1
                    toks.append(
                        Token("LITIDX", (int(text[j + 1:k]), int(text[i:j])), line, col)
                    )
                    j = k
                else:
                    toks.append(Token("NUM", int(text[i:j]), line, col))
            col += j - i
            i = j
            continue
        if (c.isalpha() or c == "_") and not any(c == p for p, _ in PUNCT):
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_") and text[j] != "λ":
                j += 1
            word = text[i:j]
            kind = word if word in KEYWORDS else "IDENT"
            toks.append(Token(kind, word, line, col))
            col += j - i
            i = j
            continue
        for lit, kind in PUNCT:
            if text.startswith(lit, i):
                toks.append(Token(kind, lit, line, col))
                col += len(lit)
                i += len(lit)
                break
        else:
            err(f"stray character {c!r}")
    toks.append(Token("EOF", None, line, col))
    return toks


# ---------------------------------------------------------------------- AST

@dataclass
class Lit:
    value: int

@dataclass
class LitIdx:
    bound: int
    value: int

@dataclass
class Name:
    name: str

@dataclass
class Annex:
    name: str

@dataclass
class SortE:
    level: int

@dataclass
class Builtin:
    which: str  # Nat | Bool | Bot | Idx | star

@dataclass
class IdxTy:
    bound: int  # I8 and friends

@dataclass
class TupleE:
    elems: list

@dataclass
class SigmaE:
    elems: list  # [(names or None, type-ast)]

@dataclass
class SeqE:
    kind: str  # arr | pack
    name: object  # binder name or None
    shape: object
    body: object

@dataclass
class ExtractE:
    subject: object
    index: object

@dataclass
class InsertE:
    subject: object
    index: object
    value: object

@dataclass
class AppE:
    callee: object
    args: list

@dataclass
class Group:
    implicit: bool
    params: list  # [(name or None, type-ast)]
    filter: object = None
    # names packed one level deeper inside params[0] (return-continuation form)
    sub_names: list = None

@dataclass
class PiE:
    groups: list
    cod: object

@dataclass
class LamE:
    style: str  # lam | cn | fn
    groups: list
    cod: object
    body: object
    name: str = ""

@dataclass
class AscribeE:
    expr: object
    type: object

@dataclass
class WhereE:
    decls: list
    expr: object


@dataclass
class PluginD:
    name: str

@dataclass
class AxmD:
    annex: str
    tags: list
    type: object
    norm: str = None
    trigger: int = None

@dataclass
class LetD:
    name: str
    ann: object
    value: object

@dataclass
class FunD:
    style: str
    name: str
    groups: list
    cod: object
    body: object


# -------------------------------------------------------------------- parser

ATOM_STARTS = {
    "NUM", "LITIDX", "IDENT", "ANNEX", "STAR", "Sort", "Nat", "Bool", "Bot",
    "BOT", "Idx", "I8", "I16", "I32", "I64", "tt", "ff", "LP", "LB",
    "ARR_L", "PACK_L", "insert", "LAMBDA", "lam", "cn", "fn",
}


class Parser:
    def __init__(self, toks):
        self.toks = toks
        self.pos = 0

    # -- token plumbing

    def peek(self, k=0):
        return self.toks[min(self.pos + k, len(self.toks) - 1)]

    def at(self, kind, k=0):
        return self.peek(k).kind == kind

    def next(self):
        t = self.toks[self.pos]
        self.pos += 1
        return t

    def expect(self, kind):
        t = self.peek()
        if t.kind != kind:
            raise ParseError(f"expected {kind}, found {t.kind} {t.value!r}",
                             t.line, t.col)
        return self.next()

    def accept(self, kind):
        if self.at(kind):
            return self.next()
        return None

    def expect_close(self, kind):
        """Close an arr/pack, splitting '>>' into '>' '>' when needed."""
        t = self.peek()
        if t.kind == kind:
            return self.next()
        if kind == "PACK_R" and t.kind == "ARR_R":
            # rewrite >> into two >
            self.toks[self.pos] = Token("PACK_R", ">", t.line, t.col)
            self.toks.insert(self.pos + 1, Token("PACK_R", ">", t.line, t.col + 1))
            return self.next()
        raise ParseError(f"expected {kind}, found {t.kind}", t.line, t.col)

    # -- declarations

    def parse_module(self):
        decls = []
        while not self.at("EOF"):
            decls.append(self.parse_decl())
        return decls

    def parse_decl(self):
        t = self.peek()
        if t.kind == "plugin":
            self.next()
            name = self.expect("IDENT").value
            self.expect("SEMI")
            return PluginD(name)
        if t.kind == "axm":
            self.next()
            annex = self.expect("ANNEX").value
            tags = None
            if self.accept("LP"):
                tags = [self.expect("IDENT").value]
                while self.accept("COMMA"):
                    tags.append(self.expect("IDENT").value)
                self.expect("RP")
            self.expect("COLON")
            ty = self.parse_expr()
            norm = trigger = None
            if self.accept("COMMA"):
                norm = self.expect("IDENT").value
                if self.accept("COMMA"):
                    trigger = self.expect("NUM").value
            self.expect("SEMI")
            return AxmD(annex, tags, ty, norm, trigger)
        if t.kind == "let":
            self.next()
            if self.at("ANNEX"):
                name = self.next().value
            else:
                name = self.expect("IDENT").value
            ann = None
            if self.accept("COLON"):
                ann = self.parse_expr()
            self.expect("EQ")
            val = self.parse_expr()
            self.expect("SEMI")
            return LetD(name, ann, val)
        if t.kind in ("lam", "con", "fun") and (
            self.at("IDENT", 1) or self.at("ANNEX", 1)
        ):
            style = self.next().kind
            name = self.next().value
            groups, cod = self.parse_fun_header(require_cod=style != "con")
            self.expect("EQ")
            body = self.parse_expr()
            self.expect("SEMI")
            return FunD(style, name, groups, cod, body)
        raise ParseError(f"expected a declaration, found {t.kind} {t.value!r}",
                         t.line, t.col)

    def parse_fun_header(self, require_cod):
        groups = self.parse_groups()
        if not groups:
            t = self.peek()
            raise ParseError("function needs at least one parameter group",
                             t.line, t.col)
        cod = None
        if self.accept("COLON"):
            cod = self.parse_expr()
        elif require_cod:
            t = self.peek()
            raise ParseError("missing codomain", t.line, t.col)
        return groups, cod

    def parse_groups(self):
        groups = []
        while True:
            if self.at("LP"):
                self.next()
                params = self.parse_params("RP")
                self.expect("RP")
                groups.append(Group(False, params))
            elif self.at("LC"):
                self.next()
                params = self.parse_params("RC")
                self.expect("RC")
                groups.append(Group(True, params))
            elif self.at("IDENT") and self.at("COLON", 1) and not groups:
                # one bare `x: T` group
                name = self.next().value
                self.expect("COLON")
                ty = self.parse_expr()
                groups.append(Group(False, [(name, ty)]))
            else:
                break
            if self.accept("AT"):
                groups[-1].filter = self.parse_postfix()
        return groups

    def parse_params(self, closer):
        params = []
        while not self.at(closer):
            names = []
            save = self.pos
            while self.at("IDENT"):
                names.append(self.next().value)
            if names and self.accept("COLON"):
                ty = self.parse_expr()
                params.extend((nm, ty) for nm in names)
            else:
                self.pos = save
                params.append((None, self.parse_expr()))
            if not self.accept("COMMA"):
                break
        return params

    # -- expressions

    def parse_expr(self):
        e = self.parse_arrow()
        while self.at("where"):
            self.next()
            decls = []
            while not self.at("end"):
                decls.append(self.parse_decl())
            self.expect("end")
            e = WhereE(decls, e)
        return e

    def parse_arrow(self):
        if self.at("Cn"):
            self.next()
            doms = self.parse_domain_seq()
            return self._pi_chain(doms, Builtin("Bot"))
        if self.at("Fn"):
            self.next()
            doms = self.parse_domain_seq()
            self.expect("ARROW")
            cod = self.parse_arrow()
            last = doms[-1]
            merged = SigmaE([(None, self._group_type(last)),
                             (None, PiE([Group(False, [(None, cod)])], Builtin("Bot")))])
            chain = doms[:-1] + [Group(False, [(None, merged)])]
            return self._pi_chain(chain, Builtin("Bot"))
        # speculative: binder groups followed by ->
        save = self.pos
        groups = []
        try:
            while self.at("LB") or self.at("LC"):
                implicit = self.at("LC")
                self.next()
                params = self.parse_params("RC" if implicit else "RB")
                self.expect("RC" if implicit else "RB")
                groups.append(Group(implicit, params))
            if groups and self.at("ARROW"):
                self.next()
                cod = self.parse_arrow()
                return PiE(groups, cod)
        except ParseError:
            pass
        self.pos = save
        e = self.parse_app()
        if self.accept("ARROW"):
            cod = self.parse_arrow()
            return PiE([Group(False, [(None, e)])], cod)
        return e

    def parse_domain_seq(self):
        """Domains for Cn/Fn: bracket/brace groups, or one applicative expr."""
        if self.at("LB") or self.at("LC"):
            doms = []
            while self.at("LB") or self.at("LC"):
                implicit = self.at("LC")
                self.next()
                params = self.parse_params("RC" if implicit else "RB")
                self.expect("RC" if implicit else "RB")
                doms.append(Group(implicit, params))
            return doms
        return [Group(False, [(None, self.parse_app())])]

    @staticmethod
    def _group_type(g):
        if len(g.params) == 1 and g.params[0][0] is None:
            return g.params[0][1]
        return SigmaE(list(g.params))

    @staticmethod
    def _pi_chain(groups, cod):
        out = cod
        for g in reversed(groups):
            out = PiE([g], out)
        return out

    def parse_app(self):
        e = self.parse_postfix()
        while self.peek().kind in ATOM_STARTS:
            arg = self.parse_postfix()
            if isinstance(e, AppE):
                e.args.append(arg)
            else:
                e = AppE(e, [arg])
        return e

    def parse_postfix(self):
        e = self.parse_atom()
        while self.accept("HASH"):
            idx = self.parse_atom()
            e = ExtractE(e, idx)
        return e

    def parse_atom(self):
        t = self.peek()
        k = t.kind
        if k == "NUM":
            self.next()
            return Lit(t.value)
        if k == "LITIDX":
            self.next()
            return LitIdx(t.value[0], t.value[1])
        if k == "tt":
            self.next()
            return LitIdx(2, 1)
        if k == "ff":
            self.next()
            return LitIdx(2, 0)
        if k == "STAR":
            self.next()
            return SortE(0)
        if k == "Sort":
            self.next()
            lvl = self.expect("NUM").value
            return SortE(lvl)
        if k in ("Nat", "Bool", "Idx"):
            self.next()
            return Builtin(k)
        if k in ("Bot", "BOT"):
            self.next()
            return Builtin("Bot")
        if k in ("I8", "I16", "I32", "I64"):
            self.next()
            return IdxTy({"I8": 1 << 8, "I16": 1 << 16,
                          "I32": 1 << 32, "I64": 1 << 64}[k])
        if k == "IDENT":
            self.next()
            return Name(t.value)
        if k == "ANNEX":
            self.next()
            return Annex(t.value)
        if k == "insert":
            self.next()
            self.expect("LP")
            e = self.parse_expr()
            self.expect("COMMA")
            i = self.parse_expr()
            self.expect("COMMA")
            v = self.parse_expr()
            self.expect("RP")
            return InsertE(e, i, v)
        if k in ("LAMBDA", "lam", "cn", "fn"):
            self.next()
            style = {"LAMBDA": "lam", "lam": "lam", "cn": "cn", "fn": "fn"}[k]
            groups, cod = self.parse_fun_header(require_cod=style != "cn")
            self.expect("EQ")
            body = self.parse_expr()
            return LamE(style, groups, cod, body)
        if k == "LP":
            self.next()
            if self.accept("RP"):
                return TupleE([])
            first = self.parse_expr()
            if self.accept("COLON"):
                ty = self.parse_expr()
                self.expect("RP")
                return AscribeE(first, ty)
            elems = [first]
            while self.accept("COMMA"):
                elems.append(self.parse_expr())
            self.expect("RP")
            if len(elems) == 1:
                return elems[0]
            return TupleE(elems)
        if k == "LB":
            self.next()
            elems = []
            while not self.at("RB"):
                names = []
                save = self.pos
                while self.at("IDENT"):
                    names.append(self.next().value)
                if names and self.accept("COLON"):
                    ty = self.parse_expr()
                    elems.extend((nm, ty) for nm in names)
                else:
                    self.pos = save
                    elems.append((None, self.parse_expr()))
                if not self.accept("COMMA"):
                    break
            self.expect("RB")
            return SigmaE(elems)
        if k in ("ARR_L", "PACK_L"):
            self.next()
            kind = "arr" if k == "ARR_L" else "pack"
            closer = "ARR_R" if k == "ARR_L" else "PACK_R"
            name = None
            if self.at("IDENT") and self.at("COLON", 1):
                name = self.next().value
                self.next()
            shape = self.parse_expr()
            self.expect("SEMI")
            body = self.parse_expr()
            self.expect_close(closer)
            return SeqE(kind, name, shape, body)
        raise ParseError(f"unexpected {k} {t.value!r}", t.line, t.col)


def parse_module(text):
    return Parser(tokenize(text)).parse_module()


def parse_expr_text(text):
    p = Parser(tokenize(text))
    e = p.parse_expr()
    p.expect("EOF")
    return e


# ---------------------------------------------------------------- elaborator

@dataclass
class ModuleResult:
    bindings: dict
    axioms: list = field(default_factory=list)  # (annex, norm name, trigger)


class Elaborator:
    def __init__(self, world, plugin_loader=None):
        self.w = world
        self.plugin_loader = plugin_loader
        self.result = ModuleResult({})

    # -- declaration blocks

    def run(self, decls, env=None):
        env = dict(env or {})
        self.elab_block(decls, env, top=True)
        return self.result

    def elab_block(self, decls, env, top=False):
        i = 0
        while i < len(decls):
            d = decls[i]
            if isinstance(d, FunD):
                run = [d]
                while i + len(run) < len(decls) and isinstance(decls[i + len(run)], FunD):
                    run.append(decls[i + len(run)])
                self.elab_fun_run(run, env, top)
                i += len(run)
                continue
            if isinstance(d, PluginD):
                if self.plugin_loader is not None:
                    self.plugin_loader(self.w, d.name)
                elif d.name not in self.w.plugins:
                    raise NameNotFound(f"plugin {d.name} is not available")
            elif isinstance(d, AxmD):
                self.elab_axm(d, env, top)
            elif isinstance(d, LetD):
                val = self.elab(d.value, env)
                if d.ann is not None:
                    want = self.elab(d.ann, env)
                    _tc.check_assignable(self.w, want, val)
                self.bind(d.name, val, env, top)
            else:
                raise ParseError(f"unexpected declaration {d}")
            i += 1

    def bind(self, name, node, env, top):
        env[name] = node
        if name.startswith("%"):
            self.w.annexes[name] = node
        if top:
            self.result.bindings[name] = node

    def elab_axm(self, d, env, top):
        ty = self.elab(d.type, env)
        names = [d.annex] if d.tags is None else [f"{d.annex}.{t}" for t in d.tags]
        for nm in names:
            ax = self.w.axiom(nm, ty)
            self.bind(nm, ax, env, top)
            self.result.axioms.append((nm, d.norm, d.trigger))

    # -- functions

    def effective_groups(self, style, groups, cod):
        """Apply the fn/fun return-continuation transform and pick default
        filters: tt everywhere, except ff on the final continuation group."""
        groups = [Group(g.implicit, list(g.params), g.filter) for g in groups]
        if style in ("fn", "fun"):
            if cod is None:
                raise ParseError("fn/fun need a codomain")
            ret_t = PiE([Group(False, [(None, cod)])], Builtin("Bot"))
            last = groups[-1]
            if len(last.params) >= 2:
                inner = SigmaE(list(last.params))
                groups[-1] = Group(last.implicit,
                                   [(None, inner), ("return", ret_t)],
                                   last.filter,
                                   sub_names=[nm for nm, _ in last.params])
            else:
                last.params.append(("return", ret_t))
            cod = Builtin("Bot")
            style = "cn"
        if style in ("cn", "con"):
            cod = Builtin("Bot")
            style = "cn"
        defaults = []
        for k, g in enumerate(groups):
            if g.filter is not None:
                defaults.append(None)
            elif style == "cn" and k == len(groups) - 1:
                defaults.append(LitIdx(2, 0))
            else:
                defaults.append(LitIdx(2, 1))
        for g, df in zip(groups, defaults):
            if df is not None:
                g.filter = df
        if cod is None:
            raise ParseError("missing codomain")
        return groups, cod

    def elab_fun_run(self, run, env, top):
        pre = []
        for d in run:
            groups, cod = self.effective_groups(d.style, d.groups, d.cod)
            pi_full = self.build_pi(groups, cod, env)
            lam_mut = self.w.make_mutable("lam", pi_full)
            self.bind(d.name, lam_mut, env, top)
            pre.append((d, groups, pi_full, lam_mut))
        for d, groups, pi_full, lam_mut in pre:
            out = self.elab_lam_chain(groups, d.body, env, pi_full, outer=lam_mut)
            self.bind(d.name, out, env, top)

    def build_pi(self, groups, cod_ast, env):
        if not groups:
            return self.elab(cod_ast, env)
        g = groups[0]
        w = self.w
        named = any(nm is not None for nm, _ in g.params)
        if len(g.params) == 1:
            nm, ty_ast = g.params[0]
            dom = self.elab(ty_ast, env)
            if nm is not None and nm != "_":
                pi = w.make_mutable("pi")
                pi_node = w.node(pi)
                pi_node.payload = g.implicit
                w.set_operand(pi, 0, dom)
                env2 = dict(env)
                env2[nm] = w.var(pi)
                w.set_operand(pi, 1, self.build_pi(groups[1:], cod_ast, env2))
                w.seal(pi)
                return w.finalize(pi)
            cod = self.build_pi(groups[1:], cod_ast, env)
            return w.pi(dom, cod, implicit=g.implicit)
        dom, names = self.elab_sigma(g.params, env)
        if named:
            pi = w.make_mutable("pi")
            w.node(pi).payload = g.implicit
            w.set_operand(pi, 0, dom)
            v = w.var(pi)
            env2 = dict(env)
            count = len(g.params)
            for k, (nm, _) in enumerate(g.params):
                if nm is not None and nm != "_":
                    env2[nm] = w.extract(v, w.lit_idx(count, k))
            w.set_operand(pi, 1, self.build_pi(groups[1:], cod_ast, env2))
            w.seal(pi)
            return w.finalize(pi)
        cod = self.build_pi(groups[1:], cod_ast, env)
        return w.pi(dom, cod, implicit=g.implicit)

    def elab_sigma(self, params, env):
        """Elaborate a (possibly dependent) element list into a tuple type."""
        w = self.w
        if len(params) == 1:
            return self.elab(params[0][1], env), [params[0][0]]
        if all(nm is None for nm, _ in params):
            return w.sigma_([self.elab(t, env) for _, t in params]), [None] * len(params)
        sig = w.make_mutable("sigma")
        w.grow_mutable(sig, len(params))
        v = w.var(sig)
        env2 = dict(env)
        count = len(params)
        for k, (nm, ty_ast) in enumerate(params):
            w.set_operand(sig, k, self.elab(ty_ast, env2))
            if nm is not None and nm != "_":
                env2[nm] = w.extract(v, w.lit_idx(count, k))
        w.seal(sig)
        return w.finalize(sig), [nm for nm, _ in params]

    def elab_lam_chain(self, groups, body_ast, env, pi_full, outer=None):
        w = self.w
        lams = []
        pi = pi_full
        for k in range(len(groups)):
            lam = outer if (k == 0 and outer is not None) else w.make_mutable("lam", pi)
            lams.append(lam)
            # Re-anchor the codomain on the lambda's own variable so that the
            # types embedded in the term chain are rewritten by beta.
            pn = w.node(w.resolve_shallow(w.typeof(lam)))
            cod = pn.ops[1]
            v_pi = w._var_of.get(pn.id)
            if v_pi is not None:
                cod = w.substitute(cod, {v_pi: w.var(lam)})
            pi = cod
            if k + 1 < len(groups):
                if w.node(w.resolve_shallow(pi)).tag != "pi":
                    raise ParseError("curried group count exceeds the pi chain")
        env2 = dict(env)
        for lam, g in zip(lams, groups):
            self.bind_params(lam, g, env2)
        body = self.elab(body_ast, env2)
        value = body
        for lam, g in zip(reversed(lams), reversed(groups)):
            filt = self.elab(g.filter, env2)
            w.set_operand(lam, 0, filt)
            w.set_operand(lam, 1, value)
            w.seal(lam)
            value = w.finalize(lam)
        return value

    def bind_params(self, lam, g, env):
        w = self.w
        if not g.params:
            return
        if len(g.params) == 1:
            nm = g.params[0][0]
            if nm is not None and nm != "_":
                env[nm] = w.var(lam)
            return
        v = w.var(lam)
        count = len(g.params)
        for k, (nm, _) in enumerate(g.params):
            if nm is not None and nm != "_":
                env[nm] = w.extract(v, w.lit_idx(count, k))
        if g.sub_names:
            inner = w.extract(v, w.lit_idx(count, 0))
            sub = [nm for nm in g.sub_names]
            for k, nm in enumerate(sub):
                if nm is not None and nm != "_":
                    env[nm] = w.extract(inner, w.lit_idx(len(sub), k))

    # -- expressions

    def elab(self, e, env):
        w = self.w
        if isinstance(e, Lit):
            return w.lit_nat(e.value)
        if isinstance(e, LitIdx):
            return w.lit_idx(e.bound, e.value)
        if isinstance(e, SortE):
            return w.sort(e.level)
        if isinstance(e, Builtin):
            return {
                "Nat": w.nat_t, "Bool": w.bool_t, "Bot": w.bot, "Idx": w.idx_head,
            }[e.which]()
        if isinstance(e, IdxTy):
            return w.idx_tn(e.bound)
        if isinstance(e, Name):
            if e.name not in env:
                raise NameNotFound(f"unknown name {e.name}")
            return env[e.name]
        if isinstance(e, Annex):
            if e.name not in self.w.annexes:
                raise NameNotFound(f"unknown annex {e.name}")
            return self.w.annexes[e.name]
        if isinstance(e, TupleE):
            return w.tuple_([self.elab(x, env) for x in e.elems])
        if isinstance(e, SigmaE):
            node, _ = self.elab_sigma(e.elems, env)
            return node
        if isinstance(e, SeqE):
            shape = self.elab(e.shape, env)
            if e.name is None:
                body = self.elab(e.body, env)
                return getattr(w, e.kind)(shape, body)
            mut = w.make_mutable(e.kind)
            w.set_operand(mut, 0, shape)
            env2 = dict(env)
            env2[e.name] = w.var(mut)
            w.set_operand(mut, 1, self.elab(e.body, env2))
            w.seal(mut)
            return w.finalize(mut)
        if isinstance(e, ExtractE):
            subj = self.elab(e.subject, env)
            idx = self.elab_index(e.index, subj, env)
            return w.extract(subj, idx)
        if isinstance(e, InsertE):
            subj = self.elab(e.subject, env)
            idx = self.elab_index(e.index, subj, env)
            return w.insert(subj, idx, self.elab(e.value, env))
        if isinstance(e, AppE):
            f = self.elab(e.callee, env)
            args = [self.elab(a, env) for a in e.args]
            return _tc.apply_with_implicits(w, f, args)
        if isinstance(e, PiE):
            return self.build_pi(e.groups, e.cod, env)
        if isinstance(e, LamE):
            groups, cod = self.effective_groups(e.style, e.groups, e.cod)
            pi_full = self.build_pi(groups, cod, env)
            return self.elab_lam_chain(groups, e.body, env, pi_full)
        if isinstance(e, AscribeE):
            want = self.elab(e.type, env)
            if isinstance(e.expr, Lit):
                tn = w.node(w.resolve_shallow(want))
                if tn.tag == "app" and tn.ops[0] == w.idx_head():
                    bound = w.node(tn.ops[1])
                    if bound.tag == "lit_nat":
                        return w.lit_idx(bound.payload, e.expr.value)
            val = self.elab(e.expr, env)
            _tc.check_assignable(w, want, val)
            return val
        if isinstance(e, WhereE):
            env2 = dict(env)
            self.elab_block(e.decls, env2)
            return self.elab(e.expr, env2)
        raise ParseError(f"cannot elaborate {e!r}")

    def elab_index(self, idx_ast, subject, env):
        """A bare Nat literal index takes its bound from the subject arity."""
        w = self.w
        if isinstance(idx_ast, Lit):
            n = _tc.arity_of(w, w.typeof(subject))
            if n is not None:
                return w.lit_idx(n, idx_ast.value)
        return self.elab(idx_ast, env)


def elaborate(world, decls, env=None, plugin_loader=None):
    return Elaborator(world, plugin_loader).run(decls, env)


def elaborate_text(world, text, env=None, plugin_loader=None):
    return elaborate(world, parse_module(text), env, plugin_loader)
