"""Infix arithmetic expressions in one variable ``x``.

Grammar (whitespace-insensitive)::

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := ('+' | '-') unary | power
    power  := atom ('^' unary)?          # right associative
    atom   := NUMBER | 'x' | 'pi' | 'e' | FUNC '(' expr ')' | '(' expr ')'
    FUNC   := sin | cos | exp | sqrt | abs

Expressions are parsed once into a small tree and evaluated with numpy, so the
same object works for scalars and arrays.
"""

import math
import re
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

from .errors import ContractViolation

FUNCTIONS: dict[str, Callable] = {
    "sin": np.sin,
    "cos": np.cos,
    "exp": np.exp,
    "sqrt": np.sqrt,
    "abs": np.abs,
}
CONSTANTS: dict[str, float] = {"pi": math.pi, "e": math.e}

_TOKEN = re.compile(r"\s*(?:(\d+\.?\d*(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?)|([A-Za-z_]\w*)|(\S))")


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    pass


@dataclass(frozen=True)
class Call:
    func: str
    arg: "Node"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Neg:
    arg: "Node"


Node = Union[Num, Var, Call, BinOp, Neg]


def _tokenize(text: str) -> list[tuple[str, str]]:
    tokens: list[tuple[str, str]] = []
    pos = 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ContractViolation(f"cannot tokenize expression at position {pos}: {text!r}")
        number, name, sym = m.groups()
        if number is not None:
            tokens.append(("num", number))
        elif name is not None:
            tokens.append(("name", name))
        else:
            tokens.append(("sym", sym))
        pos = m.end()
    return tokens


class _Parser:
    def __init__(self, text: str) -> None:
        self.text = text
        self.tokens = _tokenize(text)
        self.pos = 0

    def peek(self) -> tuple[str, str] | None:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def take(self) -> tuple[str, str]:
        tok = self.peek()
        if tok is None:
            raise ContractViolation(f"unexpected end of expression: {self.text!r}")
        self.pos += 1
        return tok

    def expect(self, sym: str) -> None:
        tok = self.take()
        if tok != ("sym", sym):
            raise ContractViolation(f"expected {sym!r}, found {tok[1]!r} in {self.text!r}")

    def parse(self) -> Node:
        node = self.expr()
        if self.peek() is not None:
            raise ContractViolation(f"trailing input {self.peek()[1]!r} in {self.text!r}")
        return node

    def expr(self) -> Node:
        node = self.term()
        while self.peek() in (("sym", "+"), ("sym", "-")):
            op = self.take()[1]
            node = BinOp(op, node, self.term())
        return node

    def term(self) -> Node:
        node = self.unary()
        while self.peek() in (("sym", "*"), ("sym", "/")):
            op = self.take()[1]
            node = BinOp(op, node, self.unary())
        return node

    def unary(self) -> Node:
        if self.peek() == ("sym", "-"):
            self.take()
            return Neg(self.unary())
        if self.peek() == ("sym", "+"):
            self.take()
            return self.unary()
        return self.power()

    def power(self) -> Node:
        base = self.atom()
        if self.peek() == ("sym", "^"):
            self.take()
            return BinOp("^", base, self.unary())
        return base

    def atom(self) -> Node:
        kind, value = self.take()
        if kind == "num":
            return Num(float(value))
        if kind == "name":
            if value == "x":
                return Var()
            if value in CONSTANTS:
                return Num(CONSTANTS[value])
            if value in FUNCTIONS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return Call(value, arg)
            raise ContractViolation(f"unknown name {value!r} in {self.text!r}")
        if value == "(":
            node = self.expr()
            self.expect(")")
            return node
        raise ContractViolation(f"unexpected symbol {value!r} in {self.text!r}")


def _evaluate(node: Node, x):
    if isinstance(node, Num):
        return node.value + 0.0 * x
    if isinstance(node, Var):
        return x
    if isinstance(node, Neg):
        return -_evaluate(node.arg, x)
    if isinstance(node, Call):
        return FUNCTIONS[node.func](_evaluate(node.arg, x))
    left = _evaluate(node.left, x)
    right = _evaluate(node.right, x)
    if node.op == "+":
        return left + right
    if node.op == "-":
        return left - right
    if node.op == "*":
        return left * right
    if node.op == "/":
        return left / right
    return np.power(left, right)


@dataclass(frozen=True)
class Expression:
    """A parsed expression; call it with a float or an array of abscissae."""

    text: str
    tree: Node

    def __call__(self, x):
        return _evaluate(self.tree, x)


def parse_expression(text: str) -> Expression:
    """Parse ``text`` according to the module grammar."""
    if not text or not text.strip():
        raise ContractViolation("empty expression")
    return Expression(text.strip(), _Parser(text).parse())
