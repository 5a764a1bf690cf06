"""Type-check uniqueness and immutability over a mini-C program."""
from __future__ import annotations

from dataclasses import replace

from ..dsl.lexer import Diagnostic, Span
from .syntax import Assign, CallStmt, CExpr, FuncDecl, Program, StructDef, VarDecl
from .types import (ArityError, FunctionSignature, Level, QualifiedType,
                    assignable, call_consistent)

_NOSPAN = Span(0, 0, 0, 0)

_MESSAGES = {
    "E_TYPE_MISMATCH": "types differ after erasing qualifiers",
    "E_UNIQUE_MISMATCH": "uniqueness numbers differ",
    "E_IMMUTABLE_DROP": "immutable data cannot become mutable",
    "E_CALL_PARTITION": "call does not group parameters like the declaration",
}


class _Fail(Exception):
    def __init__(self, code: str, message: str, span):
        self.code, self.message, self.span = code, message, span


def _explicit_numbers(program: Program) -> set[int]:
    nums: set[int] = set()

    def add(t: QualifiedType):
        nums.update(l.unique for l in t.levels if l.unique is not None)

    for item in program.items:
        if isinstance(item, StructDef):
            for t, _ in item.members:
                add(t)
        elif isinstance(item, FuncDecl):
            add(item.returns)
            for t, _ in item.params:
                add(t)
        elif isinstance(item, VarDecl):
            add(item.type)
    return nums


class TypeChecker:
    """Walks a program once; ``diagnostics`` holds violations, ``notes`` the rest.

    Taking the address of an unqualified local scalar moves it to the
    heap: the first ``&a`` adopts the uniqueness number the context asks
    for (a fresh cell has no aliases) or otherwise draws a fresh number,
    and later ``&a`` reuse that number.
    """

    def __init__(self, program: Program):
        self.program = program
        self.structs: dict[str, tuple] = {}
        self.functions: dict[str, FunctionSignature] = {}
        self.vars: dict[str, QualifiedType] = {}
        self.promoted: dict[str, int | None] = {}
        self.diagnostics: list[Diagnostic] = []
        self.notes: list[Diagnostic] = []
        used = _explicit_numbers(program)
        self._next_fresh = (max(used) + 1) if used else 0

    def fresh(self) -> int:
        n = self._next_fresh
        self._next_fresh += 1
        return n

    def run(self) -> list[Diagnostic]:
        for item in self.program.items:
            try:
                self.item(item)
            except _Fail as f:
                self.diagnostics.append(Diagnostic("error", f.span or item.span or _NOSPAN, f.message, f.code))
        return self.diagnostics

    def note(self, span, message: str, code: str) -> None:
        self.notes.append(Diagnostic("note", span or _NOSPAN, message, code))

    # -- items ------------------------------------------------------------

    def item(self, item) -> None:
        if isinstance(item, StructDef):
            if item.name in self.structs:
                raise _Fail("E_DUPLICATE", f"struct {item.name} redefined", item.span)
            self.structs[item.name] = item.members
        elif isinstance(item, FuncDecl):
            self._declare(item.name, item.span)
            self.functions[item.name] = FunctionSignature(
                item.name, tuple(t for t, _ in item.params), item.returns,
                tuple(n for _, n in item.params))
        elif isinstance(item, VarDecl):
            self._declare(item.name, item.span)
            t = self.instance_type(item.type, item.marker, item.span)
            self.vars[item.name] = t
            if item.init is not None:
                self.flow(t, item.init, item.span, f"initialisation of {item.name}")
        elif isinstance(item, Assign):
            target = self.lvalue_type(item.target, item.span)
            self.flow(target, item.value, item.span, "assignment")
        elif isinstance(item, CallStmt):
            self.expr_type(item.call, None, item.span)

    def _declare(self, name: str, span) -> None:
        if name in self.vars or name in self.functions:
            raise _Fail("E_DUPLICATE", f"{name} declared twice", span)

    def instance_type(self, t: QualifiedType, marker: str | None, span) -> QualifiedType:
        if not t.base.startswith("struct "):
            if marker:
                raise _Fail("E_NOT_STRUCT", f"{marker} applies to struct instances only", span)
            return t
        sname = t.base[len("struct "):]
        if sname not in self.structs:
            raise _Fail("E_UNDECLARED", f"unknown struct {sname}", span)
        members = []
        number = self.fresh() if marker else None
        for mt, mname in self.structs[sname]:
            if marker == "unique_field":
                last = mt.levels[-1]
                if last.unique is None:
                    mt = mt.with_level(mt.depth, replace(last, unique=number))
            elif marker == "unique_pointer_field":
                for lvl in range(1, len(mt.levels)):
                    if mt.levels[lvl].unique is None:
                        mt = mt.with_level(lvl, replace(mt.levels[lvl], unique=number))
            members.append((mname, mt))
        if marker:
            self.note(span, f"instance fields receive fresh uniqueness number {number}", "N_FRESH")
        return replace(t, members=tuple(members), marker=marker)

    # -- flows ------------------------------------------------------------

    def flow(self, target: QualifiedType, value: CExpr, span, what: str) -> None:
        source = self.expr_type(value, target, span)
        verdict = assignable(target, source)
        if verdict.refuted:
            code = verdict.detail
            raise _Fail(code, f"{what}: {_MESSAGES.get(code, code)} ({source} to {target})", span)
        if verdict.detail == "N_COERCE":
            self.coerce(value, target, span)

    def coerce(self, value: CExpr, target: QualifiedType, span) -> None:
        """Record a mutable-to-immutable coercion; the source stays immutable."""
        self.note(span, f"{_print(value)} coerced to {target}; permission release is not modelled", "N_COERCE")
        root, extra = _root_name(value)
        if root is None or root not in self.vars:
            return
        vt = self.vars[root]
        # value level l is the variable's level l + extra
        for lvl in range(1, len(target.levels)):
            vl = lvl + extra
            if 0 <= vl < len(vt.levels) and target.levels[lvl].immutable:
                vt = vt.with_level(vl, replace(vt.levels[vl], immutable=True))
        self.vars[root] = vt

    def lvalue_type(self, e: CExpr, span) -> QualifiedType:
        t = self.expr_type(e, None, span)
        if e.kind == "name":
            if t.levels[0].immutable:
                raise _Fail("E_IMMUTABLE_WRITE", f"{e.data} is immutable", span)
        elif e.kind in ("deref", "index"):
            if t.levels[0].immutable:
                raise _Fail("E_IMMUTABLE_WRITE", f"write through immutable {_print(e.args[0])}", span)
        elif e.kind == "field":
            if t.levels[0].immutable:
                raise _Fail("E_IMMUTABLE_WRITE", f"member {e.data} is immutable", span)
        else:
            raise _Fail("E_LVALUE", f"cannot assign to {_print(e)}", span)
        return t

    # -- expression types -------------------------------------------------

    def expr_type(self, e: CExpr, expected: QualifiedType | None, span) -> QualifiedType:
        k = e.kind
        if k == "int":
            return QualifiedType("int")
        if k == "name":
            if e.data not in self.vars:
                raise _Fail("E_UNDECLARED", f"undeclared {e.data}", span)
            return self.vars[e.data]
        if k == "deref":
            t = self.expr_type(e.args[0], None, span)
            if t.depth == 0:
                raise _Fail("E_DEREF", f"cannot dereference {_print(e.args[0])}", span)
            return t.pointee()
        if k == "index":
            t = self.expr_type(e.args[0], None, span)
            self.expr_type(e.args[1], None, span)
            if t.depth == 0:
                raise _Fail("E_DEREF", f"cannot index {_print(e.args[0])}", span)
            return t.pointee()
        if k == "field":
            t = self.expr_type(e.args[0], None, span)
            for mname, mt in t.members:
                if mname == e.data:
                    return mt
            raise _Fail("E_NO_MEMBER", f"{t} has no member {e.data}", span)
        if k == "addr":
            return self.address_type(e.args[0], expected, span)
        if k == "call":
            sig = self.functions.get(e.data)
            if sig is None:
                raise _Fail("E_UNDECLARED", f"undeclared function {e.data}", span)
            if len(e.args) != len(sig.params):
                raise _Fail("E_ARITY", f"{e.data} expects {len(sig.params)} arguments, got {len(e.args)}", span)
            args = [self.expr_type(a, p, span) for a, p in zip(e.args, sig.params)]
            try:
                verdict = call_consistent(sig, args)
            except ArityError as exc:
                raise _Fail("E_ARITY", str(exc), span) from None
            if verdict.refuted:
                code = verdict.detail
                raise _Fail(code, f"call to {e.data}: {_MESSAGES.get(code, code)} {verdict.witness}", span)
            if verdict.detail == "N_COERCE":
                for a, p in zip(e.args, sig.params):
                    if any(p.levels[l].immutable for l in range(1, len(p.levels))):
                        self.coerce(a, p, span)
            return sig.returns
        raise _Fail("E_SYNTAX", f"unsupported expression {k}", span)

    def address_type(self, inner: CExpr, expected: QualifiedType | None, span) -> QualifiedType:
        if inner.kind == "name" and inner.data in self.vars:
            t = self.vars[inner.data]
            if t.depth == 0 and not t.base.startswith("struct ") and t.levels[0].unique is None:
                name = inner.data
                if name not in self.promoted:
                    want = None
                    if expected is not None and expected.depth == 1:
                        want = expected.levels[1].unique
                    number = want if want is not None else self.fresh()
                    self.promoted[name] = number
                    self.note(span, f"{name} moves to the heap with uniqueness number {number}", "N_PROMOTE")
                t = t.with_level(0, replace(t.levels[0], unique=self.promoted[name]))
                self.vars[name] = t
            return t.address_of()
        return self.expr_type(inner, None, span).address_of()


def _root_name(e: CExpr):
    """Variable named by an expression and the number of dereferences applied."""
    extra = 0
    while e.kind in ("deref", "index", "addr"):
        extra += -1 if e.kind == "addr" else 1
        e = e.args[0]
    if e.kind == "name":
        return e.data, extra
    return None, 0


def _print(e: CExpr) -> str:
    from .syntax import print_cexpr

    return print_cexpr(e)


def check_program(program: Program) -> list[Diagnostic]:
    return TypeChecker(program).run()
