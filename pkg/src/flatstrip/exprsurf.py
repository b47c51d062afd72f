"""Coordinate expressions: a small Pratt parser and exact 2-jet evaluation.

Grammar, loosest to tightest binding::

    expr   := expr ('+' | '-') expr
            | expr ('*' | '/') expr
            | '-' expr
            | expr '^' expr          (right associative, constant exponent)
            | NAME '(' expr ')' | NAME | NUMBER | '(' expr ')'

Derivatives are propagated by second-order forward mode: every node carries
its value, gradient and Hessian with respect to the declared variables. All
three may carry leading batch dimensions, so a whole grid is evaluated in
one tree walk.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .errors import (
    ArityError,
    EvaluationError,
    ExpressionSyntaxError,
    UnknownIdentifierError,
)

FUNCTIONS = ("sin", "cos", "tan", "exp", "log", "sqrt")
CONSTANTS = {"pi": math.pi}


# --------------------------------------------------------------------------
# tree


@dataclass(frozen=True)
class Num:
    value: float
    name: str | None = None
    offset: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Var:
    name: str
    offset: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Neg:
    operand: object
    offset: int = field(default=0, compare=False)


@dataclass(frozen=True)
class BinOp:
    op: str
    left: object
    right: object
    offset: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Call:
    func: str
    arg: object
    offset: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Expression:
    """A parsed expression together with its declared variable list."""

    root: object
    variables: tuple
    text: str = field(default="", compare=False)

    def __str__(self):
        return to_text(self.root)

    def uses(self):
        return sorted(_free_vars(self.root))


def _free_vars(node):
    if isinstance(node, Var):
        return {node.name}
    if isinstance(node, Num):
        return set()
    if isinstance(node, Neg):
        return _free_vars(node.operand)
    if isinstance(node, Call):
        return _free_vars(node.arg)
    return _free_vars(node.left) | _free_vars(node.right)


# --------------------------------------------------------------------------
# tokenizer / parser

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>\*\*|[-+*/^(),]))"
)

_BINARY_BP = {"+": 10, "-": 10, "*": 20, "/": 20, "^": 40}
_UNARY_BP = 30


class _Parser:
    def __init__(self, text, variables):
        self.text = text
        self.variables = tuple(variables)
        self.tokens = list(self._tokenize())
        self.pos = 0

    def _tokenize(self):
        text = self.text
        i = 0
        while True:
            while i < len(text) and text[i].isspace():
                i += 1
            if i >= len(text):
                yield ("end", None, len(text))
                return
            m = _TOKEN.match(text, i)
            if m is None or m.end() == i:
                raise ExpressionSyntaxError(f"unexpected character {text[i]!r}", i)
            start = m.start(m.lastgroup)
            kind = m.lastgroup
            value = m.group(kind)
            if kind == "op" and value == "**":
                value = "^"
            yield (kind, value, start)
            i = m.end()

    def peek(self):
        return self.tokens[self.pos]

    def advance(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, value):
        kind, val, off = self.advance()
        if val != value:
            got = "end of input" if kind == "end" else repr(val)
            raise ExpressionSyntaxError(f"expected {value!r}, got {got}", off)

    def parse(self):
        node = self.expression(0)
        kind, val, off = self.peek()
        if kind != "end":
            raise ExpressionSyntaxError(f"unexpected token {val!r}", off)
        return node

    def expression(self, rbp):
        left = self.nud(self.advance())
        while True:
            kind, val, off = self.peek()
            if kind != "op" or val not in _BINARY_BP:
                return left
            lbp = _BINARY_BP[val]
            if lbp <= rbp:
                return left
            self.advance()
            if val == "^":
                right = self.expression(lbp - 1)
                if _free_vars(right):
                    raise ExpressionSyntaxError("exponent must be a constant", off)
                left = BinOp("^", left, right, off)
            else:
                left = BinOp(val, left, self.expression(lbp), off)

    def nud(self, tok):
        kind, val, off = tok
        if kind == "num":
            return Num(float(val), offset=off)
        if kind == "name":
            if val in FUNCTIONS:
                nkind, nval, noff = self.peek()
                if nval != "(":
                    raise ArityError(f"function {val!r} must be called with one argument", noff)
                self.advance()
                if self.peek()[1] == ")":
                    raise ArityError(f"function {val!r} takes exactly one argument", self.peek()[2])
                arg = self.expression(0)
                kind2, val2, off2 = self.peek()
                if val2 == ",":
                    raise ArityError(f"function {val!r} takes exactly one argument", off2)
                self.expect(")")
                return Call(val, arg, off)
            if val in self.variables:
                return Var(val, off)
            if val in CONSTANTS:
                return Num(CONSTANTS[val], name=val, offset=off)
            raise UnknownIdentifierError(val, off)
        if val == "(":
            node = self.expression(0)
            self.expect(")")
            return node
        if val == "-":
            return Neg(self.expression(_UNARY_BP), off)
        if val == "+":
            return self.expression(_UNARY_BP)
        if kind == "end":
            raise ExpressionSyntaxError("unexpected end of input", off)
        raise ExpressionSyntaxError(f"unexpected token {val!r}", off)


def parse_expression(text: str, variables: Sequence[str]) -> Expression:
    """Parse ``text`` into an :class:`Expression` over ``variables``.

    Raises ExpressionSyntaxError (with ``.offset``), UnknownIdentifierError or
    ArityError.
    """
    if not text or not text.strip():
        raise ExpressionSyntaxError("empty expression", 0)
    for v in variables:
        if v in FUNCTIONS or v in CONSTANTS:
            raise ExpressionSyntaxError(f"variable name {v!r} is reserved", 0)
    root = _Parser(text, variables).parse()
    return Expression(root, tuple(variables), text)


# --------------------------------------------------------------------------
# printer

def _prec(node):
    if isinstance(node, BinOp):
        return _BINARY_BP[node.op]
    if isinstance(node, Neg):
        return _UNARY_BP
    return 100


def to_text(node) -> str:
    """Render a tree as text that parses back to an identical tree."""
    if isinstance(node, Num):
        return node.name if node.name else repr(node.value)
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Call):
        return f"{node.func}({to_text(node.arg)})"
    if isinstance(node, Neg):
        inner = to_text(node.operand)
        if _prec(node.operand) < _UNARY_BP or isinstance(node.operand, Neg):
            inner = f"({inner})"
        return "-" + inner
    p = _BINARY_BP[node.op]
    left, right = to_text(node.left), to_text(node.right)
    if node.op == "^":
        # right associative: parenthesize anything on the left that is not atomic
        if _prec(node.left) <= p:
            left = f"({left})"
        if _prec(node.right) < p and not isinstance(node.right, Neg):
            right = f"({right})"
        return f"{left}^{right}"
    if _prec(node.left) < p:
        left = f"({left})"
    if _prec(node.right) <= p or isinstance(node.right, Neg):
        right = f"({right})"
    return f"{left} {node.op} {right}"


# --------------------------------------------------------------------------
# second-order jets


class Jet2:
    """Value, gradient and Hessian of a scalar function.

    ``value`` has shape ``B``, ``grad`` shape ``B + (n,)`` and ``hess`` shape
    ``B + (n, n)`` for a batch shape ``B``. The Hessian is assembled from
    symmetric terms only, so it is exactly symmetric.
    """

    __slots__ = ("value", "grad", "hess")

    def __init__(self, value, grad, hess):
        self.value = value
        self.grad = grad
        self.hess = hess

    @classmethod
    def constant(cls, c, shape, n):
        return cls(np.full(shape, float(c)), np.zeros(shape + (n,)), np.zeros(shape + (n, n)))

    @classmethod
    def variable(cls, x, i, n):
        x = np.asarray(x, dtype=float)
        grad = np.zeros(x.shape + (n,))
        grad[..., i] = 1.0
        return cls(x.copy(), grad, np.zeros(x.shape + (n, n)))

    def chain(self, g0, g1, g2):
        """Compose with a scalar function whose derivatives at ``value`` are g0, g1, g2."""
        g1e = np.asarray(g1)[..., None]
        outer = self.grad[..., :, None] * self.grad[..., None, :]
        return Jet2(
            g0,
            g1e * self.grad,
            g1e[..., None] * self.hess + np.asarray(g2)[..., None, None] * outer,
        )

    def __add__(self, other):
        return Jet2(self.value + other.value, self.grad + other.grad, self.hess + other.hess)

    def __sub__(self, other):
        return Jet2(self.value - other.value, self.grad - other.grad, self.hess - other.hess)

    def __neg__(self):
        return Jet2(-self.value, -self.grad, -self.hess)

    def __mul__(self, other):
        a, b = self.value[..., None], other.value[..., None]
        cross = self.grad[..., :, None] * other.grad[..., None, :]
        return Jet2(
            self.value * other.value,
            a * other.grad + b * self.grad,
            a[..., None] * other.hess + b[..., None] * self.hess + (cross + np.swapaxes(cross, -1, -2)),
        )

    def __repr__(self):
        return f"Jet2(value={self.value!r}, grad={self.grad!r}, hess={self.hess!r})"


def _fail(msg, node):
    raise EvaluationError(msg, getattr(node, "offset", None))


def _eval(node, env, shape, n):
    if isinstance(node, Num):
        return Jet2.constant(node.value, shape, n)
    if isinstance(node, Var):
        return env[node.name]
    if isinstance(node, Neg):
        return -_eval(node.operand, env, shape, n)
    if isinstance(node, Call):
        a = _eval(node.arg, env, shape, n)
        x = a.value
        f = node.func
        if f == "sin":
            s, c = np.sin(x), np.cos(x)
            return a.chain(s, c, -s)
        if f == "cos":
            s, c = np.sin(x), np.cos(x)
            return a.chain(c, -s, -c)
        if f == "tan":
            c = np.cos(x)
            if np.any(c == 0.0):
                _fail("tan evaluated at a pole", node)
            t = np.tan(x)
            sec2 = 1.0 + t * t
            return a.chain(t, sec2, 2.0 * t * sec2)
        if f == "exp":
            e = np.exp(x)
            return a.chain(e, e, e)
        if f == "log":
            if np.any(x <= 0.0):
                _fail("log of a non-positive number", node)
            return a.chain(np.log(x), 1.0 / x, -1.0 / (x * x))
        if f == "sqrt":
            if np.any(x <= 0.0):
                _fail("sqrt of a non-positive number (derivative undefined)", node)
            r = np.sqrt(x)
            return a.chain(r, 0.5 / r, -0.25 / (r * x))
        raise AssertionError(f)
    a = _eval(node.left, env, shape, n)
    if node.op == "^":
        p = float(_eval(node.right, {}, (), 0).value)
        x = a.value
        if p == int(p):
            k = int(p)
            if k < 0 and np.any(x == 0.0):
                _fail("zero raised to a negative power", node)
            if k == 0:
                return Jet2.constant(1.0, shape, n)
            if k == 1:
                return a
            if k == 2:
                return a * a
            g0 = x**k
            g1 = k * x ** (k - 1)
            g2 = k * (k - 1) * x ** (k - 2)
            return a.chain(g0, g1, g2)
        if np.any(x <= 0.0):
            _fail("non-integer power of a non-positive number", node)
        return a.chain(x**p, p * x ** (p - 1), p * (p - 1) * x ** (p - 2))
    b = _eval(node.right, env, shape, n)
    if node.op == "+":
        return a + b
    if node.op == "-":
        return a - b
    if node.op == "*":
        return a * b
    if node.op == "/":
        y = b.value
        if np.any(y == 0.0):
            _fail("division by zero", node)
        inv = b.chain(1.0 / y, -1.0 / (y * y), 2.0 / (y * y * y))
        return a * inv
    raise AssertionError(node.op)


def eval_jet2(expr: Expression, point: Mapping[str, object] | Sequence[float]) -> Jet2:
    """Exact value, gradient and Hessian of ``expr`` at ``point``.

    ``point`` maps variable names to values (scalars or equally shaped
    arrays), or is a sequence in declaration order.
    """
    names = expr.variables
    if isinstance(point, Mapping):
        missing = [v for v in names if v not in point]
        if missing:
            raise KeyError(f"unassigned variables: {missing}")
        values = [np.asarray(point[v], dtype=float) for v in names]
    else:
        values = [np.asarray(v, dtype=float) for v in point]
        if len(values) != len(names):
            raise ValueError(f"expected {len(names)} coordinates, got {len(values)}")
    values = np.broadcast_arrays(*values) if values else []
    shape = values[0].shape if values else ()
    n = len(names)
    env = {v: Jet2.variable(x, i, n) for i, (v, x) in enumerate(zip(names, values))}
    with np.errstate(all="ignore"):
        return _eval(expr.root, env, shape, n)


def eval_value(expr: Expression, point) -> np.ndarray:
    return eval_jet2(expr, point).value
