"""Frontend for the ``.abp`` surface language.

Grammar (``//`` line comments, identifiers ``[A-Za-z_][A-Za-z0-9_]*``,
decimal integer literals)::

    program := item* ; item := shared | thread | final
    shared  := "shared" "int" IDENT ("=" "-"? INT)? ";"
    thread  := "thread" IDENT "{" stmt* "}"
    final   := "final" "assert" "(" cond ")" ";"
    stmt    := IDENT "=" expr ";" | "assume" "(" cond ")" ";"
             | "assert" "(" cond ")" ";"
             | "if" "(" cond ")" block ("else" block)?
             | "while" "(" cond ")" block
             | "lock" "(" IDENT ")" ";" | "unlock" "(" IDENT ")" ";"
             | "skip" ";"

Expressions are linear by construction (multiplication only with an integer
literal on the left). Parsing produces an AST whose expressions are already
:class:`~abpress.formula.Lin` / :class:`~abpress.formula.Formula` values over
current-frame variables; :func:`lower` turns the AST into per-thread CFGs of
assignment/assume actions with one error location per thread and explicit
frame equalities on every transition.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Optional

from abpress import model
from abpress.formula import (
    Formula,
    Lin,
    conj,
    disj,
    eq_cmp,
    le_cmp,
    lt_cmp,
    neg,
    neq_cmp,
    render,
)

KEYWORDS = {
    "shared", "int", "thread", "final", "assert", "assume",
    "if", "else", "while", "lock", "unlock", "skip",
}


class SourceError(Exception):
    """Diagnostic with a 1-based source position."""

    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"{line}:{col}: {message}")
        self.message = message
        self.line = line
        self.col = col


class LexError(SourceError):
    pass


class ParseError(SourceError):
    pass


class UndeclaredVariable(SourceError):
    pass


class DuplicateThreadName(SourceError):
    pass


class DuplicateDeclaration(SourceError):
    pass


class NoThreads(SourceError):
    pass


# ---------------------------------------------------------------------------
# Lexer
# ---------------------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<comment>//[^\n]*)
  | (?P<int>[0-9]+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>==|!=|<=|>=|&&|\|\||[=<>!+\-*;(){}])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str  # "int" | "ident" | keyword | operator | "eof"
    value: str
    line: int
    col: int


def tokenize(source: str) -> list:
    tokens = []
    pos = 0
    line = 1
    line_start = 0
    while pos < len(source):
        m = _TOKEN_RE.match(source, pos)
        if m is None:
            col = pos - line_start + 1
            raise LexError(f"unexpected character {source[pos]!r}", line, col)
        text = m.group(0)
        col = pos - line_start + 1
        kind = m.lastgroup
        if kind == "int":
            tokens.append(Token("int", text, line, col))
        elif kind == "ident":
            tokens.append(Token(text if text in KEYWORDS else "ident", text, line, col))
        elif kind == "op":
            tokens.append(Token(text, text, line, col))
        nl = text.count("\n")
        if nl:
            line += nl
            line_start = pos + text.rindex("\n") + 1
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


# ---------------------------------------------------------------------------
# AST
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Stmt:
    kind: str  # assign | assume | assert | if | while | lock | unlock | skip
    line: int
    col: int
    var: Optional[str] = None
    expr: Optional[Lin] = None
    cond: Optional[Formula] = None
    body: tuple = ()  # then-branch / loop body
    orelse: tuple = ()
    used: frozenset = frozenset()  # identifiers mentioned in this statement


@dataclass
class ProgramAst:
    shared_decls: list  # [(name, init)]
    threads: list  # [(name, tuple[Stmt])]
    final_assert: Optional[Formula] = None
    final_used: frozenset = frozenset()


def _var(name: str) -> Lin:
    return Lin.of_var((name, None))


class _Parser:
    def __init__(self, tokens: list):
        self.tokens = tokens
        self.i = 0
        self.used: set = set()

    def peek(self) -> Token:
        return self.tokens[self.i]

    def advance(self) -> Token:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def accept(self, kind: str) -> Optional[Token]:
        if self.peek().kind == kind:
            return self.advance()
        return None

    def expect(self, kind: str) -> Token:
        tok = self.peek()
        if tok.kind != kind:
            what = tok.value or "end of input"
            raise ParseError(f"expected {kind!r}, found {what!r}", tok.line, tok.col)
        return self.advance()

    # --- expressions -----------------------------------------------------

    def parse_expr(self) -> Lin:
        lin = self.parse_term()
        while True:
            if self.accept("+"):
                lin = lin + self.parse_term()
            elif self.accept("-"):
                lin = lin - self.parse_term()
            else:
                return lin

    def parse_term(self) -> Lin:
        tok = self.peek()
        if tok.kind == "-":
            self.advance()
            return -self.parse_term()
        if tok.kind == "int":
            self.advance()
            k = int(tok.value)
            if self.accept("*"):
                return self.parse_term().scale(k)
            return Lin.of_const(k)
        if tok.kind == "ident":
            self.advance()
            self.used.add(tok.value)
            return _var(tok.value)
        if tok.kind == "(":
            self.advance()
            lin = self.parse_expr()
            self.expect(")")
            return lin
        what = tok.value or "end of input"
        raise ParseError(f"expected expression, found {what!r}", tok.line, tok.col)

    # --- conditions --------------------------------------------------------

    def parse_cond(self) -> Formula:
        f = self.parse_cond_and()
        while self.accept("||"):
            f = disj((f, self.parse_cond_and()))
        return f

    def parse_cond_and(self) -> Formula:
        f = self.parse_cond_not()
        while self.accept("&&"):
            f = conj((f, self.parse_cond_not()))
        return f

    def parse_cond_not(self) -> Formula:
        if self.accept("!"):
            return neg(self.parse_cond_not())
        tok = self.peek()
        if tok.kind == "(":
            # Either a parenthesized condition or a parenthesized expression
            # starting a comparison; backtrack over the token index.
            mark = self.i
            self.advance()
            try:
                f = self.parse_cond()
                self.expect(")")
            except ParseError:
                self.i = mark
                return self.parse_cmp()
            if self.peek().kind in ("==", "!=", "<", "<=", ">", ">="):
                self.i = mark
                return self.parse_cmp()
            return f
        return self.parse_cmp()

    def parse_cmp(self) -> Formula:
        a = self.parse_expr()
        tok = self.peek()
        if tok.kind == "==":
            self.advance()
            return eq_cmp(a, self.parse_expr())
        if tok.kind == "!=":
            self.advance()
            return neq_cmp(a, self.parse_expr())
        if tok.kind == "<":
            self.advance()
            return lt_cmp(a, self.parse_expr())
        if tok.kind == "<=":
            self.advance()
            return le_cmp(a, self.parse_expr())
        if tok.kind == ">":
            self.advance()
            return lt_cmp(self.parse_expr(), a)
        if tok.kind == ">=":
            self.advance()
            return le_cmp(self.parse_expr(), a)
        what = tok.value or "end of input"
        raise ParseError(f"expected comparison operator, found {what!r}", tok.line, tok.col)

    # --- statements --------------------------------------------------------

    def parse_block(self) -> tuple:
        self.expect("{")
        stmts = []
        while not self.accept("}"):
            stmts.append(self.parse_stmt())
        return tuple(stmts)

    def parse_stmt(self) -> Stmt:
        tok = self.peek()
        self.used = set()
        if tok.kind == "ident":
            self.advance()
            self.used.add(tok.value)
            self.expect("=")
            expr = self.parse_expr()
            self.expect(";")
            return Stmt("assign", tok.line, tok.col, var=tok.value, expr=expr,
                        used=frozenset(self.used))
        if tok.kind in ("assume", "assert"):
            self.advance()
            self.expect("(")
            cond = self.parse_cond()
            self.expect(")")
            self.expect(";")
            return Stmt(tok.kind, tok.line, tok.col, cond=cond, used=frozenset(self.used))
        if tok.kind == "if":
            self.advance()
            self.expect("(")
            cond = self.parse_cond()
            used = frozenset(self.used)
            self.expect(")")
            body = self.parse_block()
            orelse: tuple = ()
            if self.accept("else"):
                orelse = self.parse_block()
            return Stmt("if", tok.line, tok.col, cond=cond, body=body, orelse=orelse, used=used)
        if tok.kind == "while":
            self.advance()
            self.expect("(")
            cond = self.parse_cond()
            used = frozenset(self.used)
            self.expect(")")
            body = self.parse_block()
            return Stmt("while", tok.line, tok.col, cond=cond, body=body, used=used)
        if tok.kind in ("lock", "unlock"):
            self.advance()
            self.expect("(")
            name = self.expect("ident")
            self.expect(")")
            self.expect(";")
            return Stmt(tok.kind, tok.line, tok.col, var=name.value,
                        used=frozenset({name.value}))
        if tok.kind == "skip":
            self.advance()
            self.expect(";")
            return Stmt("skip", tok.line, tok.col)
        what = tok.value or "end of input"
        raise ParseError(f"expected statement, found {what!r}", tok.line, tok.col)

    # --- items --------------------------------------------------------------

    def parse_program(self) -> ProgramAst:
        shared: list = []
        threads: list = []
        final_assert = None
        final_used: frozenset = frozenset()
        while True:
            tok = self.peek()
            if tok.kind == "eof":
                break
            if tok.kind == "shared":
                self.advance()
                self.expect("int")
                name = self.expect("ident")
                init = 0
                if self.accept("="):
                    sign = -1 if self.accept("-") else 1
                    init = sign * int(self.expect("int").value)
                self.expect(";")
                if any(n == name.value for n, _ in shared):
                    raise DuplicateDeclaration(
                        f"shared variable {name.value!r} declared twice", name.line, name.col)
                shared.append((name.value, init))
            elif tok.kind == "thread":
                self.advance()
                name = self.expect("ident")
                if any(n == name.value for n, _ in threads):
                    raise DuplicateThreadName(
                        f"thread {name.value!r} declared twice", name.line, name.col)
                threads.append((name.value, self.parse_block()))
            elif tok.kind == "final":
                self.advance()
                self.expect("assert")
                self.expect("(")
                self.used = set()
                cond = self.parse_cond()
                final_used = frozenset(self.used)
                self.expect(")")
                self.expect(";")
                if final_assert is not None:
                    raise ParseError("multiple 'final assert' items", tok.line, tok.col)
                final_assert = cond
            else:
                what = tok.value or "end of input"
                raise ParseError(
                    f"expected 'shared', 'thread' or 'final', found {what!r}", tok.line, tok.col)
        if not threads:
            eof = self.tokens[-1]
            raise NoThreads("program declares no threads", eof.line, eof.col)
        return ProgramAst(shared, threads, final_assert, final_used)


def _check_idents(ast: ProgramAst) -> None:
    declared = {n for n, _ in ast.shared_decls}

    def walk(stmts) -> None:
        for s in stmts:
            missing = sorted(s.used - declared)
            if missing:
                raise UndeclaredVariable(
                    f"undeclared variable {missing[0]!r}", s.line, s.col)
            walk(s.body)
            walk(s.orelse)

    for _, body in ast.threads:
        walk(body)
    missing = sorted(ast.final_used - declared)
    if missing:
        raise UndeclaredVariable(f"undeclared variable {missing[0]!r} in final assert", 0, 0)


def parse(source: str) -> ProgramAst:
    """Parse and validate surface text into an AST."""
    ast = _Parser(tokenize(source)).parse_program()
    _check_idents(ast)
    return ast


# ---------------------------------------------------------------------------
# Lowering
# ---------------------------------------------------------------------------


def _frame_conj(shared, written, extra):
    """Transition formula: extra constraints plus v@1 == v@0 frames."""
    parts = list(extra)
    for v in shared:
        if v not in written:
            parts.append(eq_cmp(Lin.of_var((v, 1)), Lin.of_var((v, 0))))
    return conj(parts)


def _at0(f: Formula) -> Formula:
    from abpress.formula import state_at

    return state_at(f, 0)


def _lin_at0(e: Lin) -> Lin:
    return e.rebind(lambda v: (v[0], 0))


class _Lowerer:
    def __init__(self, shared):
        self.shared = list(shared)
        self.next_action_id = 0

    def new_thread(self, tid: int, name: str) -> model.Thread:
        self._loc = 0
        t = model.Thread(id=tid, name=name, entry=self.alloc(), error=self.alloc())
        t.locations.update({t.entry, t.error})
        return t

    def alloc(self) -> int:
        loc = self._loc
        self._loc += 1
        return loc

    def emit(self, t: model.Thread, entry: int, exit_: int, kind: str, label: str,
             reads, writes, trans, **payload) -> None:
        a = model.Action(
            id=self.next_action_id, thread=t.id, entry=entry, exit=exit_, kind=kind,
            label=label, reads=frozenset(reads), writes=frozenset(writes), trans=trans,
            **payload,
        )
        self.next_action_id += 1
        t.add_action(a)

    def assume_edge(self, t, entry, exit_, cond: Formula, loop_entry=False) -> None:
        from abpress.formula import fvars

        reads = {v[0] for v in fvars(cond)}
        trans = _frame_conj(self.shared, set(), [_at0(cond)])
        self.emit(t, entry, exit_, model.ASSUME, f"assume {render(cond)}", reads, set(),
                  trans, cond=cond, loop_entry=loop_entry)

    def lower_stmt(self, t: model.Thread, s: Stmt, entry: int, exit_: int) -> None:
        if s.kind == "assign":
            expr0 = _lin_at0(s.expr)
            trans = _frame_conj(self.shared, {s.var},
                                [eq_cmp(Lin.of_var((s.var, 1)), expr0)])
            reads = {v[0] for v in s.expr.vars()}
            self.emit(t, entry, exit_, model.ASSIGN, f"{s.var} = {s.expr.render()}",
                      reads, {s.var}, trans, assign_var=s.var, assign_expr=s.expr)
        elif s.kind == "assume":
            self.assume_edge(t, entry, exit_, s.cond)
        elif s.kind == "assert":
            self.assume_edge(t, entry, exit_, s.cond)
            self.assume_edge(t, entry, t.error, neg(s.cond))
        elif s.kind == "if":
            then_body = _strip_skips(s.body)
            else_body = _strip_skips(s.orelse)
            if then_body:
                mid = self.alloc()
                self.assume_edge(t, entry, mid, s.cond)
                self.lower_block(t, then_body, mid, exit_)
            else:
                self.assume_edge(t, entry, exit_, s.cond)
            if else_body:
                mid = self.alloc()
                self.assume_edge(t, entry, mid, neg(s.cond))
                self.lower_block(t, else_body, mid, exit_)
            else:
                self.assume_edge(t, entry, exit_, neg(s.cond))
        elif s.kind == "while":
            body = _strip_skips(s.body)
            self.assume_edge(t, entry, exit_, neg(s.cond))
            if body:
                mid = self.alloc()
                self.assume_edge(t, entry, mid, s.cond, loop_entry=True)
                self.lower_block(t, body, mid, entry)
            else:
                self.assume_edge(t, entry, entry, s.cond, loop_entry=True)
        elif s.kind == "lock":
            m = s.var
            trans = _frame_conj(self.shared, {m},
                                [eq_cmp(Lin.of_var((m, 0)), Lin.of_const(0)),
                                 eq_cmp(Lin.of_var((m, 1)), Lin.of_const(1))])
            self.emit(t, entry, exit_, model.LOCK, f"lock({m})", {m}, {m}, trans,
                      lock_var=m)
        elif s.kind == "unlock":
            m = s.var
            trans = _frame_conj(self.shared, {m},
                                [eq_cmp(Lin.of_var((m, 1)), Lin.of_const(0))])
            self.emit(t, entry, exit_, model.UNLOCK, f"unlock({m})", set(), {m}, trans,
                      lock_var=m)
        else:  # pragma: no cover - skips are stripped before lowering
            raise AssertionError(f"unexpected statement kind {s.kind}")

    def lower_block(self, t: model.Thread, stmts, entry: int, exit_: int) -> None:
        assert stmts
        cur = entry
        for i, s in enumerate(stmts):
            nxt = exit_ if i == len(stmts) - 1 else self.alloc()
            self.lower_stmt(t, s, cur, nxt)
            cur = nxt


def _strip_skips(stmts) -> tuple:
    return tuple(s for s in stmts if s.kind != "skip")


def lower(ast: ProgramAst) -> model.Program:
    """Lower the AST into per-thread CFGs of assignment/assume actions."""
    shared = dict(ast.shared_decls)
    lw = _Lowerer(shared)
    threads = []
    for tid, (name, body) in enumerate(ast.threads):
        t = lw.new_thread(tid, name)
        stmts = _strip_skips(body)
        if stmts:
            exit_ = lw.alloc()
            lw.lower_block(t, stmts, t.entry, exit_)
        threads.append(t)
    program = model.Program(shared=shared, threads=threads)
    if ast.final_assert is not None:
        tid = len(threads)
        t = lw.new_thread(tid, "final")
        violated = neg(ast.final_assert)
        lw.assume_edge(t, t.entry, t.error, violated)
        threads.append(t)
        program.checker = tid
        program.final_cond = ast.final_assert
    program.finalize()
    return program


def load_program(path: str) -> model.Program:
    with open(path, "r", encoding="utf-8") as fh:
        return lower(parse(fh.read()))
