"""Concrete syntax: lexer, parser and printer for programs, signatures and stores.

Program files are split into sections introduced by a header line at column 0::

    signature:
      + : (li int, li int) -> li int = add
      1 : li int = const:1
    store:
    f : un (li int -> li int) = un \\x: li int. x + 1
    main:
      f 1
    params:
      n = 4

Store entries start at column 0; continuation lines are indented.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from .syntax import (
    App, ArrayRange, Arrow, Base, Case, Cons, Expr, HI, Hidden, If, LI, Lam, Let, ListT, Lit,
    Nil, Op, OperatorType, PseudoType, Q, QualifiedSignature, SigEntry, Split, TupleE, TupleT,
    Type, UN, Var,
)


class ParseError(Exception):
    def __init__(self, message: str, line: int, col: int, expected: Sequence[str] = ()):
        self.message = message
        self.line = line
        self.col = col
        self.expected = tuple(expected)
        text = f"line {line}, col {col}: {message}"
        if self.expected:
            text += f" (expected {' or '.join(self.expected)})"
        super().__init__(text)


# ---------------------------------------------------------------- lexer

KEYWORDS = {
    "li", "un", "hi", "spl", "as", "in", "if", "then", "else", "let", "case", "of",
    "true", "false", "list",
}
INFIX = {"=": 1, "==": 1, "<": 1, "<=": 1, "+": 2, "-": 2, "*": 3}
SYMBOLS = sorted(
    ["->", "<-", "<=", "==", "::", "..", "<", ">", "(", ")", "[", "]", "{", "}", ",", ":",
     ".", "\\", "=", "+", "-", "*", "@", ";"],
    key=len, reverse=True,
)
UNICODE = {"λ": "\\", "→": "->", "≡": "=", "⟨": "<", "⟩": ">", "←": "<-"}
_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_']*")
_INT = re.compile(r"[0-9]+")


@dataclass(frozen=True)
class Token:
    kind: str  # IDENT, INT, KW, SYM, EOF
    text: str
    line: int
    col: int


def tokenize(text: str, line0: int = 1, col0: int = 1) -> List[Token]:
    toks: List[Token] = []
    line, col = line0, col0
    i, n = 0, len(text)
    while i < n:
        c = text[i]
        if c == "\n":
            line, col = line + 1, 1
            i += 1
            continue
        if c.isspace():
            i += 1
            col += 1
            continue
        if c == "#":
            while i < n and text[i] != "\n":
                i += 1
            continue
        if c in UNICODE:
            toks.append(Token("SYM", UNICODE[c], line, col))
            i += 1
            col += 1
            continue
        m = _IDENT.match(text, i)
        if m:
            word = m.group()
            toks.append(Token("KW" if word in KEYWORDS else "IDENT", word, line, col))
        else:
            m = _INT.match(text, i)
            if m:
                toks.append(Token("INT", m.group(), line, col))
            else:
                for s in SYMBOLS:
                    if text.startswith(s, i):
                        toks.append(Token("SYM", s, line, col))
                        break
                else:
                    raise ParseError(f"unexpected character {c!r}", line, col)
                i += len(toks[-1].text)
                col += len(toks[-1].text)
                continue
        i += len(m.group())
        col += len(m.group())
    toks.append(Token("EOF", "", line, col))
    return toks


# ---------------------------------------------------------------- parser


class Parser:
    def __init__(self, tokens: List[Token], ops: Iterable[str] = (), store_names: Iterable[str] = ()):
        self.toks = tokens
        self.i = 0
        self.ops = set(ops)
        self.store_names = set(store_names)
        self.bound: List[str] = []

    # token helpers
    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def peek(self, k: int = 1) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def at(self, *texts: str) -> bool:
        t = self.tok
        return t.kind in ("SYM", "KW") and t.text in texts

    def advance(self) -> Token:
        t = self.tok
        self.i += 1
        return t

    def fail(self, message: str, *expected: str):
        t = self.tok
        raise ParseError(message, t.line, t.col, expected)

    def expect(self, text: str) -> Token:
        if not self.at(text):
            found = self.tok.text or "end of input"
            self.fail(f"unexpected {found!r}", repr(text))
        return self.advance()

    def ident(self) -> str:
        if self.tok.kind != "IDENT":
            found = self.tok.text or "end of input"
            self.fail(f"unexpected {found!r}", "identifier")
        return self.advance().text

    def eof(self):
        if self.tok.kind != "EOF":
            self.fail(f"unexpected {self.tok.text!r}", "end of input")

    def pos(self) -> tuple:
        return (self.tok.line, self.tok.col)

    # ------------------------------------------------------------ types

    def qualifier(self, allow_hidden: bool = False) -> Q:
        t = self.tok
        if t.kind == "KW" and t.text in ("li", "un"):
            self.advance()
            return Q(t.text)
        if t.kind == "KW" and t.text == "hi":
            if not allow_hidden:
                self.fail("hi may only qualify operator inputs in a signature")
            self.advance()
            return HI
        self.fail(f"unexpected {t.text or 'end of input'!r}", "qualifier")

    def type_(self) -> Type:
        q = self.qualifier()
        return Type(q, self.pretype())

    def pretype(self):
        t = self.tok
        if t.kind == "IDENT":
            self.advance()
            return Base(t.text)
        if self.at("list"):
            self.advance()
            return ListT(self.type_())
        if self.at("<"):
            self.advance()
            items = [self.type_()]
            while self.at(","):
                self.advance()
                items.append(self.type_())
            self.expect(">")
            return TupleT(tuple(items))
        if self.at("["):
            self.advance()
            elem = self.type_()
            self.expect("]")
            return ListT(elem)
        if self.at("("):
            self.advance()
            dom = self.type_()
            self.expect("->")
            cod = self.type_()
            self.expect(")")
            return Arrow(dom, cod)
        self.fail(f"unexpected {t.text or 'end of input'!r}", "pretype")

    def pseudotype(self) -> PseudoType:
        if self.at("hi"):
            self.advance()
            t = self.tok
            pre = self.pretype()
            if not isinstance(pre, Base):
                raise ParseError("hi applies only to base pretypes", t.line, t.col)
            return Hidden(pre)
        return self.type_()

    def optype(self) -> OperatorType:
        if self.at("(", "<"):
            close = ")" if self.advance().text == "(" else ">"
            inputs = []
            if not self.at(close):
                inputs.append(self.pseudotype())
                while self.at(","):
                    self.advance()
                    inputs.append(self.pseudotype())
            self.expect(close)
            self.expect("->")
            return OperatorType(tuple(inputs), self.type_())
        first = self.pseudotype()
        if self.at("->"):
            self.advance()
            return OperatorType((first,), self.type_())
        if isinstance(first, Hidden):
            self.fail("a constant cannot have a hidden type")
        return OperatorType((), first)

    # ------------------------------------------------------------ expressions

    def expr(self) -> Expr:
        t = self.tok
        p = self.pos()
        if self.at("let"):
            self.advance()
            name = self.ident()
            ann = None
            if self.at(":"):
                self.advance()
                ann = self.type_()
            self.expect("=")
            bound = self.expr()
            self.expect("in")
            body = self.scoped([name], self.expr)
            return Let(name, bound, body, ann, pos=p)
        if self.at("if"):
            self.advance()
            c = self.expr()
            self.expect("then")
            a = self.expr()
            self.expect("else")
            b = self.expr()
            return If(c, a, b, pos=p)
        if self.at("spl"):
            self.advance()
            scrut = self.expr()
            self.expect("as")
            self.expect("<")
            names = [self.ident()]
            while self.at(","):
                self.advance()
                names.append(self.ident())
            self.expect(">")
            if len(set(names)) != len(names):
                raise ParseError("pattern variables must be pairwise distinct", t.line, t.col)
            self.expect("in")
            body = self.scoped(names, self.expr)
            return Split(scrut, tuple(names), body, pos=p)
        if self.at("case"):
            self.advance()
            scrut = self.expr()
            self.expect("of")
            self.expect("(")
            nil = self.expr()
            self.expect(",")
            self.expect("(")
            z1 = self.ident()
            self.expect(":")
            z2 = self.ident()
            self.expect(")")
            if z1 == z2:
                raise ParseError("case pattern variables must be distinct", t.line, t.col)
            self.expect("->")
            cons = self.scoped([z1, z2], self.expr)
            self.expect(")")
            return Case(scrut, nil, z1, z2, cons, pos=p)
        if self.at("\\"):
            self.fail("lambda needs a qualifier", "li", "un")
        return self.infix(1)

    def scoped(self, names, fn):
        self.bound.extend(names)
        try:
            return fn()
        finally:
            del self.bound[len(self.bound) - len(names):]

    def infix(self, level: int) -> Expr:
        if level > 3:
            return self.application()
        lhs = self.infix(level + 1)
        while self.tok.kind == "SYM" and INFIX.get(self.tok.text) == level:
            t = self.advance()
            index = self.index_suffix()
            rhs = self.infix(level + 1)
            lhs = Op(t.text, (lhs, rhs), index, pos=(t.line, t.col))
            if level == 1:
                if self.tok.kind == "SYM" and INFIX.get(self.tok.text) == 1:
                    self.fail("comparison operators do not chain")
                break
        return lhs

    def index_suffix(self) -> Optional[int]:
        if not self.at("@"):
            return None
        self.advance()
        if self.tok.kind != "INT":
            return 0  # bare `@`: operator forced, index left open
        return int(self.advance().text)

    def starts_atom(self) -> bool:
        t = self.tok
        if t.kind in ("IDENT", "INT"):
            return True
        if t.kind == "KW":
            return t.text in ("li", "un", "hi", "true", "false")
        return t.kind == "SYM" and t.text == "("

    def application(self) -> Expr:
        fn = self.postfix()
        while self.starts_atom():
            arg = self.postfix()
            fn = App(fn, arg, pos=fn.pos)
        return fn

    def postfix(self) -> Expr:
        e = self.atom()
        while self.at("["):
            p = self.pos()
            self.advance()
            idx = self.expr()
            if self.at("<-"):
                self.advance()
                val = self.expr()
                self.expect("]")
                e = Op("set", (e, idx, val), pos=p)
            else:
                self.expect("]")
                e = Op("get", (e, idx), pos=p)
        return e

    def atom(self) -> Expr:
        t = self.tok
        p = self.pos()
        if t.kind == "INT":
            self.advance()
            return self.op_tail(t.text, p, allow_call=False)
        if t.kind == "IDENT":
            self.advance()
            name = t.text
            if self.at("@"):
                return self.op_tail(name, p)
            if name in self.bound or name in self.store_names or name not in self.ops:
                return Var(name, pos=p)
            return self.op_tail(name, p)
        if self.at("true", "false"):
            self.advance()
            return self.op_tail(t.text, p, allow_call=False)
        if self.at("li", "un", "hi"):
            return self.qualified()
        if self.at("("):
            if self.peek().kind == "SYM" and self.peek().text in INFIX and self.peek(2).text == ")":
                self.advance()
                name = self.advance().text
                self.advance()
                return self.op_tail(name, p)
            self.advance()
            e = self.expr()
            self.expect(")")
            return e
        self.fail(f"unexpected {t.text or 'end of input'!r}", "expression")

    def op_tail(self, name: str, p, allow_call: bool = True) -> Op:
        index = self.index_suffix()
        if index == 0:
            index = None
        args: Tuple[Expr, ...] = ()
        if allow_call and self.at("("):
            self.advance()
            items = []
            if not self.at(")"):
                items.append(self.expr())
                while self.at(","):
                    self.advance()
                    items.append(self.expr())
            self.expect(")")
            args = tuple(items)
        return Op(name, args, index, pos=p)

    def qualified(self) -> Expr:
        t = self.tok
        p = self.pos()
        if t.text == "hi":
            self.fail("hi is not a value qualifier", "li", "un")
        q = Q(self.advance().text)
        if self.at("<"):
            self.advance()
            items = [self.expr()]
            while self.at(","):
                self.advance()
                items.append(self.expr())
            self.expect(">")
            return TupleE(q, tuple(items), pos=p)
        if self.at("\\"):
            return self.lambda_(q, p)
        if self.at("["):
            self.advance()
            self.expect("]")
            elem = None
            if self.at("::"):
                self.advance()
                elem = self.type_()
            return Nil(q, elem, pos=p)
        if self.at("("):
            self.advance()
            if self.at("\\"):
                lam = self.lambda_(q, p)
                self.expect(")")
                return lam
            head = self.expr()
            self.expect(":")
            tail = self.expr()
            self.expect(")")
            return Cons(q, head, tail, pos=p)
        if self.tok.kind == "INT" or (self.at("-") and self.peek().kind == "INT"):
            return Lit(q, self.integer(), pos=p)
        if self.at("true", "false"):
            return Lit(q, self.advance().text == "true", pos=p)
        if self.at("{"):
            return Lit(q, self.array_literal(), pos=p)
        self.fail(f"unexpected {self.tok.text or 'end of input'!r}", "<", "\\", "[", "(", "literal")

    def lambda_(self, q: Q, p) -> Lam:
        self.expect("\\")
        x = self.ident()
        self.expect(":")
        ty = self.type_()
        self.expect(".")
        body = self.scoped([x], self.expr)
        return Lam(q, x, ty, body, pos=p)

    def array_literal(self):
        self.expect("{")
        if self.at("}"):
            self.advance()
            return ()
        first = self.bound_()
        if self.at(".."):
            self.advance()
            last = self.bound_()
            self.expect("}")
            return ArrayRange(first, last)
        if not isinstance(first, int):
            self.fail("array elements must be integers")
        items = [first]
        while self.at(","):
            self.advance()
            items.append(self.integer())
        self.expect("}")
        return tuple(items)

    def integer(self) -> int:
        sign = -1 if self.at("-") and self.advance() else 1
        if self.tok.kind != "INT":
            self.fail(f"unexpected {self.tok.text!r}", "integer")
        return sign * int(self.advance().text)

    def bound_(self):
        if self.tok.kind == "INT" or self.at("-"):
            return self.integer()
        name = self.ident()
        off = 0
        if self.at("+", "-"):
            sign = 1 if self.advance().text == "+" else -1
            if self.tok.kind != "INT":
                self.fail(f"unexpected {self.tok.text!r}", "integer")
            off = sign * int(self.advance().text)
        return (name, off)


# ---------------------------------------------------------------- program files


@dataclass(frozen=True)
class StoreEntry:
    name: str
    value: Expr
    ann: Optional[Type] = None


@dataclass(frozen=True)
class ProgramFile:
    signature: QualifiedSignature
    store: Tuple[StoreEntry, ...]
    main: Expr
    params: Tuple[Tuple[str, int], ...] = ()

    @property
    def param_dict(self) -> Dict[str, int]:
        return dict(self.params)

    def with_params(self, **values: int) -> "ProgramFile":
        merged = dict(self.params)
        for k, v in values.items():
            if k not in merged:
                raise KeyError(f"unknown parameter {k!r}")
            merged[k] = int(v)
        return ProgramFile(self.signature, self.store, self.main, tuple(merged.items()))


SECTIONS = ("signature", "store", "main", "params")
_HEADER = re.compile(r"^(signature|store|main|params):\s*(#.*)?$")


def _sections(text: str) -> Dict[str, Tuple[int, List[str]]]:
    found: Dict[str, Tuple[int, List[str]]] = {}
    current = None
    for lineno, line in enumerate(text.splitlines(), start=1):
        m = _HEADER.match(line)
        if m:
            current = m.group(1)
            if current in found:
                raise ParseError(f"duplicate section {current!r}", lineno, 1)
            found[current] = (lineno + 1, [])
            continue
        if current is None:
            if line.strip() and not line.lstrip().startswith("#"):
                raise ParseError("text before the first section header", lineno, 1, [f"{s}:" for s in SECTIONS])
            continue
        found[current][1].append(line)
    return found


def parse_signature_line(line: str, lineno: int = 1) -> SigEntry:
    body = line.split("#", 1)[0]
    head, eq, key = body.rpartition("=")
    key = key.strip()
    if not eq or not key or ":" not in head:
        raise ParseError("signature entries have the form `name : type = key`", lineno, 1,
                         ["name : type = key"])
    p = Parser(tokenize(head, lineno))
    t = p.tok
    if t.kind in ("IDENT", "INT") or (t.kind == "SYM" and t.text in INFIX) or (
            t.kind == "KW" and t.text in ("true", "false")):
        name = p.advance().text
    else:
        p.fail(f"unexpected {t.text or 'end of input'!r}", "operator name")
    p.expect(":")
    optype = p.optype()
    p.eof()
    return SigEntry(name, optype, key)


def parse_signature(lines: Sequence[str], line0: int = 1) -> QualifiedSignature:
    entries = []
    for k, line in enumerate(lines):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        entries.append(parse_signature_line(line, line0 + k))
    return QualifiedSignature(entries)


def _store_chunks(lines: Sequence[str], line0: int):
    chunk = None
    for k, line in enumerate(lines):
        if not line.strip() or line.lstrip().startswith("#"):
            if chunk is not None:
                chunk[1].append("")
            continue
        if not line[0].isspace():
            if chunk is not None:
                yield chunk
            chunk = (line0 + k, [line])
        else:
            if chunk is None:
                raise ParseError("indented line outside a store entry", line0 + k, 1, ["entry name at column 1"])
            chunk[1].append(line)
    if chunk is not None:
        yield chunk


def parse_program(text: str) -> ProgramFile:
    secs = _sections(text)
    if "main" not in secs:
        raise ParseError("missing section 'main:'", len(text.splitlines()) + 1, 1, ["main:"])
    sig_line0, sig_lines = secs.get("signature", (1, []))
    sig = parse_signature(sig_lines, sig_line0)
    ops = sig.names()

    params: List[Tuple[str, int]] = []
    pl0, plines = secs.get("params", (1, []))
    for k, line in enumerate(plines):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        p = Parser(tokenize(line, pl0 + k))
        name = p.ident()
        p.expect("=")
        if p.tok.kind != "INT":
            p.fail(f"unexpected {p.tok.text!r}", "integer")
        value = int(p.advance().text)
        p.eof()
        if name in dict(params):
            raise ParseError(f"duplicate parameter {name!r}", pl0 + k, 1)
        params.append((name, value))

    sl0, slines = secs.get("store", (1, []))
    chunks = list(_store_chunks(slines, sl0))
    headers = []
    for line0, chunk in chunks:
        p = Parser(tokenize(chunk[0], line0))
        headers.append((p.ident(), line0))
    names = [h for h, _ in headers]
    seen = set()
    for name, line0 in headers:
        if name in seen:
            raise ParseError(f"duplicate store variable {name!r}", line0, 1)
        seen.add(name)

    entries = []
    for line0, chunk in chunks:
        p = Parser(tokenize("\n".join(chunk), line0), ops, names)
        name = p.ident()
        ann = None
        if p.at(":"):
            p.advance()
            ann = p.type_()
        p.expect("=")
        value = p.expr()
        p.eof()
        entries.append(StoreEntry(name, value, ann))

    ml0, mlines = secs["main"]
    p = Parser(tokenize("\n".join(mlines), ml0), ops, names)
    main = p.expr()
    p.eof()
    return ProgramFile(sig, tuple(entries), main, tuple(params))


def parse_expr(text: str, ops: Iterable[str] = (), store_names: Iterable[str] = ()) -> Expr:
    p = Parser(tokenize(text), ops, store_names)
    e = p.expr()
    p.eof()
    return e


def parse_type(text: str) -> Type:
    p = Parser(tokenize(text))
    t = p.type_()
    p.eof()
    return t


def parse_optype(text: str) -> OperatorType:
    p = Parser(tokenize(text))
    t = p.optype()
    p.eof()
    return t


# ---------------------------------------------------------------- printer


def show_pretype(p) -> str:
    if isinstance(p, Base):
        return p.name
    if isinstance(p, TupleT):
        return "<" + ", ".join(show_type(t) for t in p.items) + ">"
    if isinstance(p, ListT):
        return "[" + show_type(p.elem) + "]"
    if isinstance(p, Arrow):
        return f"({show_type(p.dom)} -> {show_type(p.cod)})"
    raise TypeError(p)


def show_type(t) -> str:
    if isinstance(t, Hidden):
        return f"hi {t.base.name}"
    return f"{t.q.value} {show_pretype(t.pre)}"


def show_optype(t: OperatorType) -> str:
    if not t.inputs:
        return show_type(t.output)
    return "(" + ", ".join(show_type(i) for i in t.inputs) + ") -> " + show_type(t.output)


def show_sig_entry(e: SigEntry) -> str:
    return f"{e.name} : {show_optype(e.optype)} = {e.key}"


def _show_bound(b) -> str:
    if isinstance(b, int):
        return str(b)
    name, off = b
    if off == 0:
        return name
    return f"{name} {'+' if off > 0 else '-'} {abs(off)}"


def _show_lit(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, ArrayRange):
        return "{" + _show_bound(v.lo) + " .. " + _show_bound(v.hi) + "}"
    return "{" + ", ".join(str(x) for x in v) + "}"


def _is_symbolic(name: str) -> bool:
    return name in INFIX


def show_expr(e: Expr, scope: Iterable[str] = ()) -> str:
    return _Printer(set(scope)).show(e, 0)


class _Printer:
    # precedence levels: 0 open-ended forms, 1-3 infix, 4 application, 5 atoms
    def __init__(self, scope: set):
        self.scope = scope

    def paren(self, s: str, mine: int, ctx: int) -> str:
        return f"({s})" if mine < ctx else s

    def under(self, names, e, level):
        added = [n for n in names if n not in self.scope]
        self.scope.update(added)
        try:
            return self.show(e, level)
        finally:
            self.scope.difference_update(added)

    def op_name(self, e: Op) -> str:
        name = f"({e.name})" if _is_symbolic(e.name) else e.name
        if e.index is not None:
            return f"{name}@{e.index}"
        if not e.args and name in self.scope:
            return f"{name}@"
        return name

    def show(self, e: Expr, ctx: int) -> str:
        t = type(e)
        if t is Var:
            return e.name
        if t is Lit:
            return f"{e.q.value} {_show_lit(e.value)}"
        if t is Op:
            return self.show_op(e, ctx)
        if t is TupleE:
            return f"{e.q.value} <" + ", ".join(self.show(a, 0) for a in e.items) + ">"
        if t is Nil:
            s = f"{e.q.value} []"
            if e.elem is not None:
                s += f" :: {show_type(e.elem)}"
            return s
        if t is Cons:
            return f"{e.q.value} ({self.show(e.head, 0)} : {self.show(e.tail, 0)})"
        if t is App:
            fn = self.show(e.fn, 4)
            if type(e.fn) is Op and not e.fn.args:
                fn = f"({fn})"  # keep `n (x)` from reading as a call of n
            return self.paren(f"{fn} {self.show(e.arg, 5)}", 4, ctx)
        if t is Lam:
            s = f"{e.q.value} \\{e.param}: {show_type(e.ptype)}. {self.under([e.param], e.body, 0)}"
            return self.paren(s, 0, ctx)
        if t is Split:
            s = (f"spl {self.show(e.expr, 0)} as <{', '.join(e.pattern)}> in "
                 f"{self.under(e.pattern, e.body, 0)}")
            return self.paren(s, 0, ctx)
        if t is If:
            s = f"if {self.show(e.cond, 0)} then {self.show(e.then, 0)} else {self.show(e.else_, 0)}"
            return self.paren(s, 0, ctx)
        if t is Let:
            ann = f" : {show_type(e.ann)}" if e.ann is not None else ""
            s = f"let {e.name}{ann} = {self.show(e.bound, 0)} in {self.under([e.name], e.body, 0)}"
            return self.paren(s, 0, ctx)
        if t is Case:
            s = (f"case {self.show(e.scrut, 0)} of ({self.show(e.nil_branch, 0)}, "
                 f"({e.head} : {e.tail}) -> {self.under([e.head, e.tail], e.cons_branch, 0)})")
            return self.paren(s, 0, ctx)
        raise TypeError(e)

    def show_op(self, e: Op, ctx: int) -> str:
        n = len(e.args)
        if e.index is None and e.name == "get" and n == 2 and "get" not in self.scope:
            return f"{self.show(e.args[0], 5)}[{self.show(e.args[1], 0)}]"
        if e.index is None and e.name == "set" and n == 3 and "set" not in self.scope:
            a, i, v = (self.show(x, 0) for x in e.args)
            return f"{self.show(e.args[0], 5)}[{i} <- {v}]"
        if _is_symbolic(e.name) and n == 2:
            level = INFIX[e.name]
            sym = e.name if e.index is None else f"{e.name}@{e.index}"
            lhs = self.show(e.args[0], level + (1 if level == 1 else 0))
            rhs = self.show(e.args[1], level + 1)
            return self.paren(f"{lhs} {sym} {rhs}", level, ctx)
        name = self.op_name(e)
        if n == 0:
            return name
        return name + "(" + ", ".join(self.show(a, 0) for a in e.args) + ")"


def print_program(p: ProgramFile) -> str:
    out = ["signature:"]
    out += ["  " + show_sig_entry(e) for e in p.signature]
    out.append("store:")
    names = [s.name for s in p.store]
    for s in p.store:
        ann = f" : {show_type(s.ann)}" if s.ann is not None else ""
        out.append(f"{s.name}{ann} = {show_expr(s.value, names)}")
    out.append("main:")
    out.append("  " + show_expr(p.main, names))
    if p.params:
        out.append("params:")
        out += [f"  {k} = {v}" for k, v in p.params]
    return "\n".join(out) + "\n"
