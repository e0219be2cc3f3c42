"""Symbol expressions: ``sin(pi*x)``, ``2*step(0.3)+1-step(0.3)``, ``x^2``.

Grammar (``^`` is right-associative and binds tighter than unary minus, so
``-x^2`` is ``-(x^2)``; unary minus binds tighter than ``*`` and ``/``)::

    expr  := term (("+" | "-") term)*
    term  := unary (("*" | "/") unary)*
    unary := "-" unary | power
    power := atom ("^" unary)?
    atom  := number | name | name "(" expr ")" | "(" expr ")"

``step(a)`` is the indicator of ``x >= a``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

from diagglt.errors import ExprSyntaxError, UnknownIdentifierError
from diagglt.symbols import Symbol

FUNCTIONS = ("sin", "cos", "exp", "abs", "sqrt", "step")
CONSTANTS = {"pi": np.pi}


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Const:
    name: str


@dataclass(frozen=True)
class Neg:
    arg: object


@dataclass(frozen=True)
class BinOp:
    op: str
    left: object
    right: object


@dataclass(frozen=True)
class Call:
    func: str
    arg: object


_TOKEN = re.compile(r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
                    r"|(?P<name>[A-Za-z_]\w*)|(?P<op>[-+*/^()]))")


def _tokenize(text):
    pos, out = 0, []
    raw = text.encode()
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            bad = pos + len(text[pos:]) - len(text[pos:].lstrip())
            raise ExprSyntaxError(f"unexpected character {text[bad]!r}",
                                  len(text[:bad].encode()))
        kind = m.lastgroup
        start = m.start(kind)
        out.append((kind, m.group(kind), len(text[:start].encode())))
        pos = m.end()
    out.append(("end", "", len(raw)))
    return out


class _Parser:
    def __init__(self, text, variables):
        self.toks = _tokenize(text)
        self.i = 0
        self.variables = variables

    def peek(self):
        return self.toks[self.i]

    def take(self):
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def expect(self, value):
        kind, v, off = self.take()
        if v != value or kind == "end":
            got = "end of input" if kind == "end" else repr(v)
            raise ExprSyntaxError(f"expected {value!r}, got {got}", off)

    def expr(self):
        node = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            node = BinOp(self.take()[1], node, self.term())
        return node

    def term(self):
        node = self.unary()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            node = BinOp(self.take()[1], node, self.unary())
        return node

    def unary(self):
        if self.peek()[:2] == ("op", "-"):
            self.take()
            return Neg(self.unary())
        return self.power()

    def power(self):
        node = self.atom()
        if self.peek()[:2] == ("op", "^"):
            self.take()
            node = BinOp("^", node, self.unary())
        return node

    def atom(self):
        kind, v, off = self.take()
        if kind == "num":
            return Num(float(v))
        if kind == "name":
            if v in FUNCTIONS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return Call(v, arg)
            if v in CONSTANTS:
                return Const(v)
            if v in self.variables:
                return Var(v)
            raise UnknownIdentifierError(v, off)
        if (kind, v) == ("op", "("):
            node = self.expr()
            self.expect(")")
            return node
        raise ExprSyntaxError("unexpected end of input" if kind == "end"
                              else f"unexpected {v!r}", off)


def parse_symbol(text: str, variables=("x",)):
    """Parse ``text`` into an AST; ``variables`` lists the allowed free names."""
    p = _Parser(text, tuple(variables))
    node = p.expr()
    kind, v, off = p.peek()
    if kind != "end":
        raise ExprSyntaxError(f"unexpected {v!r}", off)
    return node


# printing ------------------------------------------------------------------

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "^": 4}


def _prec(node):
    if isinstance(node, BinOp):
        return _PREC[node.op]
    if isinstance(node, Neg):
        return 3
    return 5


def _num(v):
    s = repr(float(v))
    return s[:-2] if s.endswith(".0") else s


def to_text(node) -> str:
    """Canonical text with the fewest parentheses that re-parse to ``node``."""
    if isinstance(node, Num):
        s = _num(node.value)
        return f"({s})" if node.value < 0 else s
    if isinstance(node, (Var, Const)):
        return node.name
    if isinstance(node, Call):
        return f"{node.func}({to_text(node.arg)})"
    if isinstance(node, Neg):
        inner = to_text(node.arg)
        return f"-{inner}" if _prec(node.arg) >= 3 else f"-({inner})"
    p = _PREC[node.op]
    left, right = to_text(node.left), to_text(node.right)
    if node.op == "^":
        if _prec(node.left) <= p:
            left = f"({left})"
        if _prec(node.right) < 3:
            right = f"({right})"
        return f"{left}^{right}"
    if _prec(node.left) < p:
        left = f"({left})"
    if _prec(node.right) <= p:
        right = f"({right})"
    return f"{left}{node.op}{right}"


# evaluation ----------------------------------------------------------------

_UNARY = {"sin": np.sin, "cos": np.cos, "exp": np.exp, "abs": np.abs, "sqrt": np.sqrt}


def evaluate(node, env):
    """Evaluate ``node`` with variable values from ``env`` (scalars or arrays)."""
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Const):
        return CONSTANTS[node.name]
    if isinstance(node, Var):
        return env[node.name]
    if isinstance(node, Neg):
        return -evaluate(node.arg, env)
    if isinstance(node, Call):
        a = evaluate(node.arg, env)
        if node.func == "step":
            return (np.asarray(env["x"]) >= a).astype(float)
        return _UNARY[node.func](a)
    a, b = evaluate(node.left, env), evaluate(node.right, env)
    with np.errstate(divide="ignore", invalid="ignore"):
        if node.op == "+":
            return a + b
        if node.op == "-":
            return a - b
        if node.op == "*":
            return a * b
        if node.op == "/":
            return np.true_divide(a, b)
        return np.power(a, b)


def free_variables(node) -> set:
    if isinstance(node, Var):
        return {node.name}
    if isinstance(node, (Neg, Call)):
        return free_variables(node.arg)
    if isinstance(node, BinOp):
        return free_variables(node.left) | free_variables(node.right)
    return set()


def is_continuous(node) -> bool:
    """No ``step`` and no division by an expression that depends on a variable."""
    if isinstance(node, Call):
        return node.func != "step" and is_continuous(node.arg)
    if isinstance(node, Neg):
        return is_continuous(node.arg)
    if isinstance(node, BinOp):
        if node.op == "/" and free_variables(node.right):
            return False
        if node.op == "^" and free_variables(node.right):
            return False
        return is_continuous(node.left) and is_continuous(node.right)
    return True


def to_symbol(expr) -> Symbol:
    """A real closure symbol in ``x`` from text or an AST."""
    node = parse_symbol(expr) if isinstance(expr, str) else expr
    text = to_text(node)

    def func(x):
        return np.broadcast_to(np.asarray(evaluate(node, {"x": x}), dtype=float),
                               np.shape(x))

    return Symbol.from_callable(func, real=True, descriptor=text,
                                continuous=is_continuous(node))
