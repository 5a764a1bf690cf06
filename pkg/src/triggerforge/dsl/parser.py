"""Recursive-descent parser for ``.tfq`` annotation files."""
from __future__ import annotations

from ..core import expr as E
from ..core.expr import Expr, SortError
from ..core.symbols import SymbolError, SymbolTable
from .lexer import Diagnostic, DSLError, Token, TokenStream, tokenize
from .syntax import (ArrayDecl, FunctionDef, ParamDecl, QuantifiedFormula,
                     SourceFile, TypecheckSection)

KEYWORDS = {"forall", "int", "param", "array", "where", "define", "true", "false", "typecheck"}
BUILTIN_CALLS = {"abs": 1, "acc1d": 4}


class _Scope:
    def __init__(self, symbols: SymbolTable, bound: tuple[str, ...] = (), formals: tuple[str, ...] = ()):
        self.symbols = symbols
        self.bound = set(bound) | set(formals)


class Parser:
    def __init__(self, text: str):
        self.ts = TokenStream(tokenize(text))
        self.symbols = SymbolTable()

    # -- top level ----------------------------------------------------------

    def parse_file(self) -> SourceFile:
        decls = []
        while self.ts.peek().kind != "eof":
            decls.append(self.declaration())
        return SourceFile(decls, self.symbols)

    def declaration(self):
        tok = self.ts.peek()
        if self.ts.at("param"):
            return self.param_decl()
        if self.ts.at("array"):
            return self.array_decl()
        if self.ts.at("define"):
            return self.function_def()
        if self.ts.at("forall"):
            return self.quantifier()
        if self.ts.at("typecheck"):
            return self.typecheck()
        self.ts.fail(tok, f"expected a declaration, found {tok.text or 'end of input'!r}")

    def _declare(self, tok: Token, fn, *args) -> None:
        if tok.text in KEYWORDS or tok.text in BUILTIN_CALLS and fn != self.symbols.declare_function:
            self.ts.fail(tok, f"{tok.text!r} is reserved", "E_DUPLICATE")
        try:
            fn(tok.text, *args)
        except SymbolError as exc:
            code = "E_DUPLICATE" if "duplicate" in str(exc) else "E_UNDECLARED"
            self.ts.fail(tok, str(exc), code)

    def param_decl(self) -> ParamDecl:
        start = self.ts.expect("param")
        self.ts.expect("int")
        name = self.ts.ident("parameter name")
        if name.text in self.symbols.names():
            self.ts.fail(name, f"duplicate declaration of {name.text}", "E_DUPLICATE")
        where = None
        if self.ts.accept("where"):
            self.symbols.params[name.text] = []  # visible inside its own clause
            where = self.bool_expr(_Scope(self.symbols))
            del self.symbols.params[name.text]
        end = self.ts.expect(";")
        self._declare(name, self.symbols.declare_param, E.conjuncts(where) if where is not None else [])
        return ParamDecl(name.text, where, start.span.join(end.span))

    def array_decl(self) -> ArrayDecl:
        start = self.ts.expect("array")
        self.ts.expect("int")
        name = self.ts.ident("array name")
        end = self.ts.expect(";")
        self._declare(name, self.symbols.declare_array)
        return ArrayDecl(name.text, start.span.join(end.span))

    def function_def(self) -> FunctionDef:
        start = self.ts.expect("define")
        name = self.ts.ident("function name")
        self.ts.expect("(")
        formals = []
        if not self.ts.at(")"):
            while True:
                f = self.ts.ident("formal parameter")
                if f.text in formals:
                    self.ts.fail(f, f"duplicate formal {f.text}", "E_DUPLICATE")
                formals.append(f.text)
                if not self.ts.accept(","):
                    break
        self.ts.expect(")")
        self.ts.expect("=")
        body = self.int_expr(_Scope(self.symbols, formals=tuple(formals)))
        end = self.ts.expect(";")
        if name.text in BUILTIN_CALLS and len(formals) != BUILTIN_CALLS[name.text]:
            self.ts.fail(name, f"{name.text} takes {BUILTIN_CALLS[name.text]} arguments", "E_ARITY")
        self._declare(name, self.symbols.declare_function, tuple(formals), body)
        return FunctionDef(name.text, tuple(formals), body, start.span.join(end.span))

    def quantifier(self) -> QuantifiedFormula:
        start = self.ts.expect("forall")
        names: list[str] = []
        while True:
            self.ts.expect("int")
            v = self.ts.ident("bound variable")
            if v.text in names or v.text in self.symbols.names() or v.text in KEYWORDS:
                self.ts.fail(v, f"bound variable {v.text} clashes with an existing name", "E_DUPLICATE")
            names.append(v.text)
            if not self.ts.accept(","):
                break
        self.ts.expect(";")
        scope = _Scope(self.symbols, tuple(names))
        domain = self.bool_expr(scope)
        self.ts.expect(";")
        body = self.bool_expr(scope)
        end = self.ts.expect(";")
        return QuantifiedFormula(tuple(names), domain, body, start.span.join(end.span))

    def typecheck(self) -> TypecheckSection:
        from ..qualifiers.syntax import parse_program_tokens

        start = self.ts.expect("typecheck")
        self.ts.expect("{")
        program = parse_program_tokens(self.ts)
        end = self.ts.expect("}")
        return TypecheckSection(program, start.span.join(end.span))

    # -- expressions --------------------------------------------------------

    def bool_expr(self, scope: _Scope) -> Expr:
        tok = self.ts.peek()
        e = self.expr(scope)
        if e.sort != E.BOOL:
            self.ts.fail(tok, f"expected a boolean expression, got {E.to_text(e)}", "E_SORT")
        return e

    def int_expr(self, scope: _Scope) -> Expr:
        tok = self.ts.peek()
        e = self.expr(scope)
        if e.sort != E.INT:
            self.ts.fail(tok, f"expected an integer expression, got {E.to_text(e)}", "E_SORT")
        return e

    def expr(self, scope: _Scope) -> Expr:
        return self.implication(scope)

    def _build(self, tok: Token, fn, *args) -> Expr:
        try:
            return fn(*args)
        except SortError as exc:
            self.ts.fail(tok, str(exc), "E_SORT")

    def implication(self, scope) -> Expr:
        lhs = self.disjunction(scope)
        tok = self.ts.peek()
        if self.ts.accept("==>"):
            rhs = self.implication(scope)
            return self._build(tok, E.binary, "implies", lhs, rhs)
        return lhs

    def _left_assoc(self, scope, ops: tuple[str, ...], sub) -> Expr:
        lhs = sub(scope)
        while True:
            tok = self.ts.peek()
            if tok.kind == "op" and tok.text in ops:
                self.ts.next()
                rhs = sub(scope)
                lhs = self._build(tok, E.binary, E.SYMBOL_TO_OP[tok.text], lhs, rhs)
            else:
                return lhs

    def disjunction(self, scope):
        return self._left_assoc(scope, ("||",), self.conjunction)

    def conjunction(self, scope):
        return self._left_assoc(scope, ("&&",), self.equality)

    def equality(self, scope):
        return self._left_assoc(scope, ("==", "!="), self.relation)

    def relation(self, scope):
        return self._left_assoc(scope, ("<", "<=", ">", ">="), self.additive)

    def additive(self, scope):
        return self._left_assoc(scope, ("+", "-"), self.multiplicative)

    def multiplicative(self, scope):
        return self._left_assoc(scope, ("*", "/", "%"), self.unary)

    def unary(self, scope) -> Expr:
        tok = self.ts.peek()
        if self.ts.accept("-"):
            operand = self.unary(scope)
            return self._build(tok, E.neg, operand)
        if self.ts.accept("!"):
            operand = self.unary(scope)
            return self._build(tok, E.not_, operand)
        return self.primary(scope)

    def primary(self, scope: _Scope) -> Expr:
        tok = self.ts.next()
        if tok.kind == "int":
            return E.num(int(tok.text))
        if tok.kind == "op" and tok.text == "(":
            e = self.expr(scope)
            self.ts.expect(")")
            return e
        if tok.kind == "op" and tok.text == "{:":
            inner = self.primary(scope)
            if inner.op != "access":
                self.ts.fail(tok, "trigger markers must enclose an array access", "E_TRIGGER")
            self.ts.expect(":}")
            return E.trigger(inner)
        if tok.kind != "ident":
            self.ts.fail(tok, f"unexpected {tok.text or 'end of input'!r}")
        name = tok.text
        if name == "true":
            return E.TRUE
        if name == "false":
            return E.FALSE
        if self.ts.at("["):
            if name not in scope.symbols.arrays:
                self.ts.fail(tok, f"undeclared array {name}", "E_UNDECLARED")
            self.ts.next()
            idx = self.int_expr(scope)
            self.ts.expect("]")
            return E.access(name, idx)
        if self.ts.at("("):
            self.ts.next()
            args = []
            if not self.ts.at(")"):
                while True:
                    args.append(self.int_expr(scope))
                    if not self.ts.accept(","):
                        break
            self.ts.expect(")")
            if name in scope.symbols.functions:
                arity = len(scope.symbols.functions[name][0])
            elif name in BUILTIN_CALLS:
                arity = BUILTIN_CALLS[name]
            else:
                self.ts.fail(tok, f"undeclared function {name}", "E_UNDECLARED")
            if len(args) != arity:
                self.ts.fail(tok, f"{name} expects {arity} arguments, got {len(args)}", "E_ARITY")
            if name == "abs" and name not in scope.symbols.functions:
                return E.absval(args[0])
            return E.call(name, *args)
        if name in scope.bound:
            return E.var(name)
        if name in scope.symbols.params:
            return E.param(name)
        if name in scope.symbols.arrays:
            self.ts.fail(tok, f"array {name} used without an index", "E_SORT")
        self.ts.fail(tok, f"undeclared symbol {name}", "E_UNDECLARED")


def parse(text: str) -> SourceFile:
    return Parser(text).parse_file()


def parse_expr(text: str, symbols: SymbolTable | None = None, variables=()) -> Expr:
    """Parse a standalone expression against an existing symbol table."""
    p = Parser(text)
    if symbols is not None:
        p.symbols = symbols
    e = p.expr(_Scope(p.symbols, tuple(variables)))
    tok = p.ts.peek()
    if tok.kind != "eof":
        p.ts.fail(tok, f"trailing input {tok.text!r}")
    return e


def parse_formula(text: str, symbols: SymbolTable) -> QuantifiedFormula:
    p = Parser(text)
    p.symbols = symbols
    q = p.quantifier()
    tok = p.ts.peek()
    if tok.kind != "eof":
        p.ts.fail(tok, f"trailing input {tok.text!r}")
    return q


def diagnostic_from(exc: DSLError) -> list[Diagnostic]:
    return exc.diagnostics
