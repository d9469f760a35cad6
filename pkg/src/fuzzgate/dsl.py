"""Parser and AST for the boolean rule DSL used by the registry rules.

The grammar covers exactly the constructs that occur in the rule catalog:

    rule        := bool_expr [ 'implies' bool_expr ]
    bool_expr   := bool_term { 'and' bool_term }
    bool_term   := '(' bool_expr ')' | predicate
    predicate   := operand '->' 'startswith' '(' string ')'
                 | operand ('=' | '!=') operand
                 | operand ('in' | 'notIn') list
    operand     := field [ '->' 'substring' '(' int ',' int ')' ]
                 | string
    list        := '[' string { ',' string } ']'

``implies`` may only appear once, as the outermost connective.
``substring(a, b)`` selects the 1-based inclusive character range [a, b].
Evaluation is over string-valued fields; see :mod:`fuzzgate.rules`.
"""

from __future__ import annotations

import re
from dataclasses import dataclass


class DslError(ValueError):
    """Base error for DSL problems."""


class DslSyntaxError(DslError):
    """Raised on malformed rule text; carries a 1-based character offset."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at character {offset})")
        self.offset = offset


class UnknownOperatorError(DslError):
    """Raised when a ``->name(...)`` transform is not a known operator."""

    def __init__(self, name: str, offset: int):
        super().__init__(f"unknown operator {name!r} (at character {offset})")
        self.name = name
        self.offset = offset


# ---------------------------------------------------------------------------
# AST nodes
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FieldRef:
    name: str


@dataclass(frozen=True)
class StrLit:
    value: str


@dataclass(frozen=True)
class ListLit:
    values: tuple[str, ...]


@dataclass(frozen=True)
class Substring:
    """1-based inclusive character range of a string-valued operand."""

    operand: "ValueExpr"
    start: int
    end: int


ValueExpr = FieldRef | StrLit | Substring


@dataclass(frozen=True)
class StartsWith:
    operand: ValueExpr
    prefix: str


@dataclass(frozen=True)
class Compare:
    op: str  # "=" or "!="
    left: ValueExpr
    right: ValueExpr


@dataclass(frozen=True)
class Membership:
    op: str  # "in" or "notIn"
    left: ValueExpr
    items: tuple[str, ...]


@dataclass(frozen=True)
class And:
    parts: tuple["BoolExpr", ...]


@dataclass(frozen=True)
class Implies:
    antecedent: "BoolExpr"
    consequent: "BoolExpr"


BoolExpr = StartsWith | Compare | Membership | And | Implies
RuleExpr = BoolExpr


def referenced_fields(expr) -> tuple[str, ...]:
    """Field names referenced by *expr*, in first-appearance order."""
    seen: list[str] = []

    def walk(node) -> None:
        if isinstance(node, FieldRef):
            if node.name not in seen:
                seen.append(node.name)
        elif isinstance(node, Substring):
            walk(node.operand)
        elif isinstance(node, StartsWith):
            walk(node.operand)
        elif isinstance(node, Compare):
            walk(node.left)
            walk(node.right)
        elif isinstance(node, Membership):
            walk(node.left)
        elif isinstance(node, And):
            for part in node.parts:
                walk(part)
        elif isinstance(node, Implies):
            walk(node.antecedent)
            walk(node.consequent)

    walk(expr)
    return tuple(seen)


# ---------------------------------------------------------------------------
# Compilation to closures
# ---------------------------------------------------------------------------

def compile_value(expr):
    """Compile a value expression to ``env -> str``.

    *env* maps lowercased field names to strings (field resolution is
    case-insensitive); missing fields must be resolved by the caller
    before evaluation (the engine guarantees this for validation rules
    and substitutes "" for aggregation rules).
    """
    if isinstance(expr, FieldRef):
        name = expr.name.lower()
        return lambda env: env.get(name, "")
    if isinstance(expr, StrLit):
        value = expr.value
        return lambda env: value
    if isinstance(expr, Substring):
        inner = compile_value(expr.operand)
        lo, hi = expr.start - 1, expr.end
        return lambda env: inner(env)[lo:hi]
    raise TypeError(f"not a value expression: {expr!r}")


def compile_bool(expr):
    """Compile a boolean expression to ``env -> bool``."""
    if isinstance(expr, StartsWith):
        inner = compile_value(expr.operand)
        prefix = expr.prefix
        return lambda env: inner(env).startswith(prefix)
    if isinstance(expr, Compare):
        left, right = compile_value(expr.left), compile_value(expr.right)
        if expr.op == "=":
            return lambda env: left(env) == right(env)
        return lambda env: left(env) != right(env)
    if isinstance(expr, Membership):
        left = compile_value(expr.left)
        items = frozenset(expr.items)
        if expr.op == "in":
            return lambda env: left(env) in items
        return lambda env: left(env) not in items
    if isinstance(expr, And):
        parts = tuple(compile_bool(p) for p in expr.parts)
        return lambda env: all(p(env) for p in parts)
    if isinstance(expr, Implies):
        ant = compile_bool(expr.antecedent)
        con = compile_bool(expr.consequent)
        return lambda env: (not ant(env)) or con(env)
    raise TypeError(f"not a boolean expression: {expr!r}")


# ---------------------------------------------------------------------------
# Printing
# ---------------------------------------------------------------------------

def _print_value(expr) -> str:
    if isinstance(expr, FieldRef):
        return expr.name
    if isinstance(expr, StrLit):
        return f"'{expr.value}'"
    if isinstance(expr, Substring):
        return f"{_print_value(expr.operand)}->substring({expr.start},{expr.end})"
    raise TypeError(f"not a value expression: {expr!r}")


def print_expr(expr) -> str:
    """Render *expr* as canonical DSL text; ``parse_expr`` round-trips it."""
    if isinstance(expr, StartsWith):
        return f"{_print_value(expr.operand)}->startswith('{expr.prefix}')"
    if isinstance(expr, Compare):
        return f"{_print_value(expr.left)} {expr.op} {_print_value(expr.right)}"
    if isinstance(expr, Membership):
        items = ", ".join(f"'{v}'" for v in expr.items)
        return f"{_print_value(expr.left)} {expr.op} [{items}]"
    if isinstance(expr, And):
        rendered = []
        for part in expr.parts:
            text = print_expr(part)
            if isinstance(part, (And, Implies)):
                text = f"({text})"
            rendered.append(text)
        return " and ".join(rendered)
    if isinstance(expr, Implies):
        ant = print_expr(expr.antecedent)
        if isinstance(expr.antecedent, And):
            ant = f"({ant})"
        return f"{ant} implies {print_expr(expr.consequent)}"
    raise TypeError(f"not a boolean expression: {expr!r}")


# ---------------------------------------------------------------------------
# Tokenizer
# ---------------------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<string>'(?P<str_body>[^']*)')
  | (?P<arrow>->)
  | (?P<neq>!=)
  | (?P<eq>=)
  | (?P<lparen>\()
  | (?P<rparen>\))
  | (?P<lbracket>\[)
  | (?P<rbracket>\])
  | (?P<comma>,)
  | (?P<int>\d+)
  | (?P<word>[A-Za-z_][A-Za-z0-9_]*)
    """,
    re.VERBOSE,
)

_KEYWORDS = {"and", "implies", "in", "notIn"}
_TRANSFORMS = {"startswith", "substring"}


@dataclass(frozen=True)
class _Token:
    kind: str
    text: str
    offset: int  # 1-based character offset


def _tokenize(text: str) -> list[_Token]:
    tokens: list[_Token] = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise DslSyntaxError(f"unexpected character {text[pos]!r}", pos + 1)
        kind = m.lastgroup
        if kind == "string":
            kind = "string"
            tok_text = m.group("str_body")
        else:
            tok_text = m.group()
        if kind != "ws":
            if kind == "word" and tok_text in _KEYWORDS:
                kind = tok_text
            tokens.append(_Token(kind, tok_text, pos + 1))
        pos = m.end()
    tokens.append(_Token("eof", "", len(text) + 1))
    return tokens


# ---------------------------------------------------------------------------
# Parser (recursive descent)
# ---------------------------------------------------------------------------

class _Parser:
    def __init__(self, tokens: list[_Token]):
        self.tokens = tokens
        self.pos = 0

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def next(self) -> _Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, kind: str) -> _Token:
        tok = self.next()
        if tok.kind != kind:
            raise DslSyntaxError(
                f"expected {kind!r}, found {tok.text or 'end of input'!r}", tok.offset
            )
        return tok

    def parse_rule(self) -> BoolExpr:
        left = self.parse_and()
        if self.peek().kind == "implies":
            self.next()
            right = self.parse_and()
            left = Implies(left, right)
        tok = self.peek()
        if tok.kind != "eof":
            raise DslSyntaxError(f"trailing input {tok.text!r}", tok.offset)
        return left

    def parse_and(self) -> BoolExpr:
        parts = [self.parse_term()]
        while self.peek().kind == "and":
            self.next()
            parts.append(self.parse_term())
        if len(parts) == 1:
            return parts[0]
        return And(tuple(parts))

    def parse_term(self) -> BoolExpr:
        if self.peek().kind == "lparen":
            self.next()
            inner = self.parse_and()
            self.expect("rparen")
            return inner
        return self.parse_predicate()

    def parse_predicate(self) -> BoolExpr:
        operand = self.parse_operand()
        if isinstance(operand, StartsWith):
            return operand
        tok = self.next()
        if tok.kind in ("eq", "neq"):
            right = self.parse_operand()
            if isinstance(right, StartsWith):
                raise DslSyntaxError("startswith is not a value", tok.offset)
            op = "=" if tok.kind == "eq" else "!="
            return Compare(op, operand, right)
        if tok.kind in ("in", "notIn"):
            items = self.parse_list()
            return Membership(tok.kind, operand, items)
        raise DslSyntaxError(
            f"expected comparison after operand, found {tok.text or 'end of input'!r}",
            tok.offset,
        )

    def parse_operand(self):
        tok = self.next()
        if tok.kind == "string":
            base: ValueExpr = StrLit(tok.text)
        elif tok.kind == "word":
            base = FieldRef(tok.text)
        else:
            raise DslSyntaxError(
                f"expected field or string, found {tok.text or 'end of input'!r}",
                tok.offset,
            )
        while self.peek().kind == "arrow":
            self.next()
            name_tok = self.next()
            if name_tok.kind != "word":
                raise DslSyntaxError("expected transform name after '->'", name_tok.offset)
            if name_tok.text not in _TRANSFORMS:
                raise UnknownOperatorError(name_tok.text, name_tok.offset)
            self.expect("lparen")
            if name_tok.text == "startswith":
                prefix = self.expect("string")
                self.expect("rparen")
                return StartsWith(base, prefix.text)
            a_tok = self.expect("int")
            self.expect("comma")
            b_tok = self.expect("int")
            self.expect("rparen")
            a, b = int(a_tok.text), int(b_tok.text)
            if not 1 <= a <= b:
                raise DslSyntaxError(
                    f"substring range ({a},{b}) must satisfy 1 <= a <= b", a_tok.offset
                )
            base = Substring(base, a, b)
        return base

    def parse_list(self) -> tuple[str, ...]:
        self.expect("lbracket")
        items = [self.expect("string").text]
        while self.peek().kind == "comma":
            self.next()
            items.append(self.expect("string").text)
        self.expect("rbracket")
        return tuple(items)


def parse_expr(text: str) -> BoolExpr:
    """Parse DSL *text* into an AST; raises :class:`DslSyntaxError` on junk."""
    return _Parser(_tokenize(text)).parse_rule()
