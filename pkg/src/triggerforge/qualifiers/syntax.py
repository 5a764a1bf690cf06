"""Mini C-like declaration language embedded in ``typecheck { ... }``."""
from __future__ import annotations

from dataclasses import dataclass, field

from ..dsl.lexer import Span, Token, TokenStream, tokenize
from .types import Level, QualifiedType

MARKERS = ("unique_field", "unique_pointer_field")
_TYPE_START = ("unique", "immutable", "int", "void", "struct")


@dataclass(frozen=True)
class CExpr:
    kind: str  # int | name | addr | deref | index | field | call
    args: tuple = ()
    data: object = None
    span: Span | None = field(default=None, compare=False)


@dataclass(frozen=True)
class StructDef:
    name: str
    members: tuple  # ((QualifiedType, name), ...)
    span: Span | None = field(default=None, compare=False)


@dataclass(frozen=True)
class FuncDecl:
    name: str
    returns: QualifiedType
    params: tuple  # ((QualifiedType, name), ...)
    span: Span | None = field(default=None, compare=False)


@dataclass(frozen=True)
class VarDecl:
    type: QualifiedType
    name: str
    init: CExpr | None = None
    marker: str | None = None
    span: Span | None = field(default=None, compare=False)


@dataclass(frozen=True)
class Assign:
    target: CExpr
    value: CExpr
    span: Span | None = field(default=None, compare=False)


@dataclass(frozen=True)
class CallStmt:
    call: CExpr
    span: Span | None = field(default=None, compare=False)


@dataclass(frozen=True)
class Program:
    items: tuple


# -- parsing -----------------------------------------------------------------

def _qualifiers(ts: TokenStream) -> Level:
    unique, immutable = None, False
    while True:
        tok = ts.peek()
        if ts.accept("unique"):
            ts.expect("<")
            if ts.at("-"):
                ts.fail(ts.peek(), "uniqueness numbers are nonnegative", "E_QUALIFIER")
            num = ts.next()
            if num.kind != "int":
                ts.fail(num, "expected a uniqueness number", "E_QUALIFIER")
            ts.expect(">")
            if unique is not None and unique != int(num.text):
                ts.fail(tok, "conflicting uniqueness numbers on one level", "E_QUALIFIER")
            unique = int(num.text)
        elif ts.accept("immutable"):
            immutable = True
        else:
            return Level(unique, immutable)


def _merge(a: Level, b: Level, ts: TokenStream, tok: Token) -> Level:
    if a.unique is not None and b.unique is not None and a.unique != b.unique:
        ts.fail(tok, "conflicting uniqueness numbers on one level", "E_QUALIFIER")
    return Level(a.unique if a.unique is not None else b.unique, a.immutable or b.immutable)


def parse_type(ts: TokenStream) -> QualifiedType:
    start = ts.peek()
    lead = _qualifiers(ts)
    if ts.accept("struct"):
        base = "struct " + ts.ident("struct name").text
    elif ts.at("int") or ts.at("void"):
        base = ts.next().text
    else:
        ts.fail(ts.peek(), f"expected a type, found {ts.peek().text!r}", "E_QUALIFIER")
    base_level = _merge(lead, _qualifiers(ts), ts, start)
    inner_to_outer = [base_level]
    while ts.accept("*"):
        inner_to_outer.append(_qualifiers(ts))
    return QualifiedType(base, tuple(reversed(inner_to_outer)))


def _starts_type(ts: TokenStream) -> bool:
    return any(ts.at(k) for k in _TYPE_START)


def parse_program_tokens(ts: TokenStream) -> Program:
    """Parse items until the closing ``}`` of the section (not consumed)."""
    items = []
    while not ts.at("}") and ts.peek().kind != "eof":
        items.append(_item(ts))
    return Program(tuple(items))


def parse_program(text: str) -> Program:
    ts = TokenStream(tokenize(text))
    prog = parse_program_tokens(ts)
    if ts.peek().kind != "eof":
        ts.fail(ts.peek(), f"unexpected {ts.peek().text!r}")
    return prog


def _item(ts: TokenStream):
    start = ts.peek()
    if ts.at("struct") and ts.peek(1).kind == "ident" and ts.at("{", 2):
        ts.next()
        name = ts.ident("struct name").text
        ts.expect("{")
        members = []
        while not ts.at("}"):
            t = parse_type(ts)
            m = ts.ident("member name").text
            ts.expect(";")
            members.append((t, m))
        ts.expect("}")
        end = ts.expect(";")
        return StructDef(name, tuple(members), start.span.join(end.span))
    marker = None
    if ts.peek().text in MARKERS:
        marker = ts.next().text
    if marker or _starts_type(ts):
        t = parse_type(ts)
        name = ts.ident("declared name").text
        if ts.accept("("):
            if marker:
                ts.fail(start, "instance markers apply to variable declarations only", "E_QUALIFIER")
            params = []
            if not ts.at(")"):
                while True:
                    pt = parse_type(ts)
                    pn = ts.ident("parameter name").text
                    params.append((pt, pn))
                    if not ts.accept(","):
                        break
            ts.expect(")")
            end = ts.expect(";")
            return FuncDecl(name, t, tuple(params), start.span.join(end.span))
        init = None
        if ts.accept("="):
            init = _expr(ts)
        end = ts.expect(";")
        return VarDecl(t, name, init, marker, start.span.join(end.span))
    lhs = _expr(ts)
    if lhs.kind == "call" and ts.at(";"):
        end = ts.next()
        return CallStmt(lhs, start.span.join(end.span))
    ts.expect("=")
    rhs = _expr(ts)
    end = ts.expect(";")
    return Assign(lhs, rhs, start.span.join(end.span))


def _expr(ts: TokenStream) -> CExpr:
    tok = ts.peek()
    if ts.accept("&"):
        return CExpr("addr", (_expr(ts),), span=tok.span)
    if ts.accept("*"):
        return CExpr("deref", (_expr(ts),), span=tok.span)
    return _postfix(ts)


def _postfix(ts: TokenStream) -> CExpr:
    tok = ts.next()
    if tok.kind == "int":
        e = CExpr("int", data=int(tok.text), span=tok.span)
    elif tok.kind == "ident":
        if ts.accept("("):
            args = []
            if not ts.at(")"):
                while True:
                    args.append(_expr(ts))
                    if not ts.accept(","):
                        break
            ts.expect(")")
            return CExpr("call", tuple(args), tok.text, tok.span)
        e = CExpr("name", data=tok.text, span=tok.span)
    elif tok.kind == "op" and tok.text == "(":
        e = _expr(ts)
        ts.expect(")")
    else:
        ts.fail(tok, f"unexpected {tok.text or 'end of input'!r}")
    while True:
        if ts.accept("."):
            e = CExpr("field", (e,), ts.ident("member name").text, tok.span)
        elif ts.accept("["):
            idx = _expr(ts)
            ts.expect("]")
            e = CExpr("index", (e, idx), span=tok.span)
        else:
            return e


# -- printing ----------------------------------------------------------------

def print_cexpr(e: CExpr) -> str:
    if e.kind == "int":
        return str(e.data)
    if e.kind == "name":
        return e.data
    if e.kind == "addr":
        return "&" + print_cexpr(e.args[0])
    if e.kind == "deref":
        return "*" + print_cexpr(e.args[0])
    if e.kind == "field":
        return f"{_operand(e.args[0])}.{e.data}"
    if e.kind == "index":
        return f"{_operand(e.args[0])}[{print_cexpr(e.args[1])}]"
    if e.kind == "call":
        return f"{e.data}({', '.join(print_cexpr(a) for a in e.args)})"
    raise TypeError(e.kind)


def _operand(e: CExpr) -> str:
    txt = print_cexpr(e)
    return f"({txt})" if e.kind in ("addr", "deref") else txt


def print_item(item) -> str:
    if isinstance(item, StructDef):
        members = " ".join(f"{t} {n};" for t, n in item.members)
        return f"struct {item.name} {{ {members} }};"
    if isinstance(item, FuncDecl):
        params = ", ".join(f"{t} {n}" for t, n in item.params)
        return f"{item.returns} {item.name}({params});"
    if isinstance(item, VarDecl):
        head = f"{item.marker} " if item.marker else ""
        init = f" = {print_cexpr(item.init)}" if item.init is not None else ""
        return f"{head}{item.type} {item.name}{init};"
    if isinstance(item, Assign):
        return f"{print_cexpr(item.target)} = {print_cexpr(item.value)};"
    if isinstance(item, CallStmt):
        return print_cexpr(item.call) + ";"
    raise TypeError(item)


def print_program(p: Program) -> str:
    return "\n".join(print_item(i) for i in p.items)
