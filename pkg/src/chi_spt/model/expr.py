"""Arithmetic expression DSL used to define the maps f and g.

Expressions are parsed into a small immutable AST. Two evaluation paths
exist: :func:`evaluate` walks the tree directly, and :func:`compile_vector`
turns a tuple of trees into a single Python function for the simulators'
hot loops. Both perform the same float operations in the same order, so
their results agree bit for bit.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Callable, Mapping, Sequence, Union

from ..errors import ExprSyntaxError, NonFiniteError, UnknownIdentifierError

__all__ = [
    "Num", "Var", "BinOp", "Neg", "Call", "Expr",
    "parse_expr", "to_source", "evaluate", "compile_vector", "variables",
    "FUNCTIONS",
]


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    kind: str  # "x", "z" or "w"
    index: int  # 1-based

    @property
    def name(self) -> str:
        return f"{self.kind}{self.index}"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Neg:
    operand: "Expr"


@dataclass(frozen=True)
class Call:
    name: str
    args: tuple


Expr = Union[Num, Var, BinOp, Neg, Call]


def _sat(u):
    if u > 1.0:
        return 1.0
    if u < -1.0:
        return -1.0
    return u


# name -> (implementation, min arity, max arity or None for variadic)
FUNCTIONS: dict[str, tuple[Callable, int, int | None]] = {
    "sin": (math.sin, 1, 1),
    "cos": (math.cos, 1, 1),
    "tanh": (math.tanh, 1, 1),
    "exp": (math.exp, 1, 1),
    "abs": (abs, 1, 1),
    "min": (min, 2, None),
    "max": (max, 2, None),
    "sat": (_sat, 1, 1),
}

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*/(),])
    """,
    re.VERBOSE,
)
_VAR_RE = re.compile(r"([xzw])([1-9]\d*)$")


@dataclass(frozen=True)
class _Token:
    kind: str
    text: str
    pos: int


def _tokenize(text, line, col_offset):
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ExprSyntaxError(
                f"unexpected character {text[pos]!r}", line, col_offset + pos + 1
            )
        if m.lastgroup != "ws":
            tokens.append(_Token(m.lastgroup, m.group(), pos))
        pos = m.end()
    tokens.append(_Token("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text, dims, line, col_offset):
        self.tokens = _tokenize(text, line, col_offset)
        self.i = 0
        self.dims = dims
        self.line = line
        self.col_offset = col_offset

    def _error(self, cls, message, tok):
        return cls(message, self.line, self.col_offset + tok.pos + 1)

    @property
    def tok(self):
        return self.tokens[self.i]

    def _advance(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def _expect(self, text):
        tok = self.tok
        if tok.text != text:
            found = tok.text or "end of expression"
            raise self._error(ExprSyntaxError, f"expected {text!r}, found {found!r}", tok)
        return self._advance()

    def parse(self):
        node = self.expr()
        if self.tok.kind != "end":
            raise self._error(ExprSyntaxError, f"unexpected {self.tok.text!r}", self.tok)
        return node

    def expr(self):
        node = self.term()
        while self.tok.text in ("+", "-"):
            op = self._advance().text
            node = BinOp(op, node, self.term())
        return node

    def term(self):
        node = self.unary()
        while self.tok.text in ("*", "/"):
            op = self._advance().text
            node = BinOp(op, node, self.unary())
        return node

    def unary(self):
        if self.tok.text == "-":
            self._advance()
            return Neg(self.unary())
        return self.primary()

    def primary(self):
        tok = self.tok
        if tok.kind == "num":
            self._advance()
            value = float(tok.text)
            if not math.isfinite(value):
                raise self._error(ExprSyntaxError, f"literal {tok.text} overflows", tok)
            return Num(value)
        if tok.kind == "ident":
            self._advance()
            if self.tok.text == "(":
                return self.call(tok)
            return self.variable(tok)
        if tok.text == "(":
            self._advance()
            node = self.expr()
            self._expect(")")
            return node
        if tok.kind == "end":
            raise self._error(ExprSyntaxError, "unexpected end of expression", tok)
        raise self._error(ExprSyntaxError, f"unexpected {tok.text!r}", tok)

    def call(self, name_tok):
        if name_tok.text not in FUNCTIONS:
            raise self._error(UnknownIdentifierError, f"unknown function {name_tok.text!r}", name_tok)
        self._expect("(")
        args = [self.expr()]
        while self.tok.text == ",":
            self._advance()
            args.append(self.expr())
        self._expect(")")
        _, lo, hi = FUNCTIONS[name_tok.text]
        if len(args) < lo or (hi is not None and len(args) > hi):
            raise self._error(
                ExprSyntaxError,
                f"{name_tok.text}() takes {lo if hi == lo else f'at least {lo}'} argument(s), got {len(args)}",
                name_tok,
            )
        return Call(name_tok.text, tuple(args))

    def variable(self, tok):
        m = _VAR_RE.match(tok.text)
        if m is None:
            raise self._error(UnknownIdentifierError, f"unknown identifier {tok.text!r}", tok)
        kind, index = m.group(1), int(m.group(2))
        if index > self.dims.get(kind, 0):
            raise self._error(UnknownIdentifierError, f"unknown identifier {tok.text!r}", tok)
        return Var(kind, index)


def parse_expr(text: str, dims: Mapping[str, int], line: int | None = None, col_offset: int = 0) -> Expr:
    """Parse ``text`` into an AST.

    ``dims`` maps each variable family (``"x"``, ``"z"``, ``"w"``) to the
    number of components in scope; a family missing from ``dims`` is not
    allowed at all. ``line`` and ``col_offset`` only affect error messages.
    """
    return _Parser(text, dict(dims), line, col_offset).parse()


def to_source(node: Expr) -> str:
    """Pretty-print with full parenthesization; parsing the result gives back ``node``."""
    if isinstance(node, Num):
        return repr(float(node.value))
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Neg):
        return f"(-{to_source(node.operand)})"
    if isinstance(node, BinOp):
        return f"({to_source(node.left)} {node.op} {to_source(node.right)})"
    if isinstance(node, Call):
        return f"{node.name}({', '.join(to_source(a) for a in node.args)})"
    raise TypeError(f"not an expression node: {node!r}")


def variables(node: Expr) -> set[Var]:
    if isinstance(node, Var):
        return {node}
    if isinstance(node, Neg):
        return variables(node.operand)
    if isinstance(node, BinOp):
        return variables(node.left) | variables(node.right)
    if isinstance(node, Call):
        out = set()
        for a in node.args:
            out |= variables(a)
        return out
    return set()


def _eval(node, env):
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Var):
        return env[node.kind][node.index - 1]
    if isinstance(node, Neg):
        return -_eval(node.operand, env)
    if isinstance(node, BinOp):
        a = _eval(node.left, env)
        b = _eval(node.right, env)
        if node.op == "+":
            return a + b
        if node.op == "-":
            return a - b
        if node.op == "*":
            return a * b
        return a / b
    fn = FUNCTIONS[node.name][0]
    return fn(*[_eval(a, env) for a in node.args])


def evaluate(node: Expr, env: Mapping[str, Sequence[float]]) -> float:
    """Tree-walking reference evaluator. ``env`` maps families to float sequences."""
    try:
        value = _eval(node, env)
    except (ZeroDivisionError, OverflowError, ValueError) as exc:
        raise NonFiniteError(f"expression {to_source(node)} is singular: {exc}") from None
    if not math.isfinite(value):
        raise NonFiniteError(f"expression {to_source(node)} evaluated to {value}")
    return float(value)


_CALL_NAMES = {name: f"_fn_{name}" for name in FUNCTIONS}


def _codegen(node):
    if isinstance(node, Num):
        return repr(float(node.value))
    if isinstance(node, Var):
        return f"{node.kind}[{node.index - 1}]"
    if isinstance(node, Neg):
        return f"(-{_codegen(node.operand)})"
    if isinstance(node, BinOp):
        return f"({_codegen(node.left)} {node.op} {_codegen(node.right)})"
    return f"{_CALL_NAMES[node.name]}({', '.join(_codegen(a) for a in node.args)})"


def compile_vector(nodes: Sequence[Expr], params: Sequence[str]) -> Callable[..., tuple]:
    """Compile expressions into ``fn(*families) -> tuple of floats``.

    The generated source is built only from AST nodes, never from user text,
    and is evaluated with empty builtins. Each family argument must be an
    indexable sequence of Python floats.
    """
    body = ", ".join(_codegen(n) for n in nodes)
    src = f"lambda {', '.join(params)}: ({body},)"
    namespace = {"__builtins__": {}}
    namespace.update({alias: FUNCTIONS[name][0] for name, alias in _CALL_NAMES.items()})
    return eval(compile(src, "<chi-expr>", "eval"), namespace)
