"""Small arithmetic expression language for config-defined functions.

Grammar (precedence low to high):

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := '-' unary | power
    power  := atom ('^' unary)?          (right associative)
    atom   := NUMBER | VAR | NAME '(' expr (',' expr)* ')' | '(' expr ')'

Variables are coordinates ``x0, x1, ...`` with aliases ``x, y, z`` for
the first three.  Functions: ``abs``, ``exp``, ``log`` (one argument),
``min``, ``max`` (two or more), and ``dist`` whose arguments are the
constant coordinates of a point.  Everything compiles to numpy closures
over the cell-center array; nothing is ever passed to ``eval``.
"""

from __future__ import annotations

import re

import numpy as np

__all__ = ["ExpressionError", "Expression", "parse_expression",
           "grid_function_from_expression"]


class ExpressionError(ValueError):
    """Raised for syntax errors, unknown names, or arity mistakes."""


_TOKEN = re.compile(r"""
    (?P<num>(\d+\.\d*|\.\d+|\d+)([eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*/^(),])
  | (?P<ws>\s+)
""", re.VERBOSE)

_ALIASES = {"x": 0, "y": 1, "z": 2}
_VAR = re.compile(r"^x(\d+)$")


def _tokenize(text: str):
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ExpressionError(
                f"unexpected character {text[pos]!r} at position {pos}")
        if m.lastgroup != "ws":
            tokens.append((m.lastgroup, m.group(), pos))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Node:
    """Compiled subexpression: a closure plus a constness flag."""

    __slots__ = ("fn", "const", "variables")

    def __init__(self, fn, const, variables):
        self.fn = fn
        self.const = const
        self.variables = variables


def _const(value):
    return _Node(lambda coords, v=value: v, True, frozenset())


def _binary(op, a, b):
    return _Node(lambda coords: op(a.fn(coords), b.fn(coords)),
                 a.const and b.const, a.variables | b.variables)


_FUNCTIONS = {
    "abs": (1, 1, np.abs),
    "exp": (1, 1, np.exp),
    "log": (1, 1, np.log),
    "min": (2, None, None),
    "max": (2, None, None),
    "dist": (1, None, None),
}


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value):
        kind, text, pos = self.take()
        if text != value:
            raise ExpressionError(
                f"expected {value!r} at position {pos}, got {text!r}")

    def parse(self) -> _Node:
        node = self.expr()
        kind, text, pos = self.peek()
        if kind != "end":
            raise ExpressionError(
                f"trailing input {text!r} at position {pos}")
        return node

    def expr(self) -> _Node:
        node = self.term()
        while self.peek()[1] in ("+", "-"):
            op = self.take()[1]
            rhs = self.term()
            node = _binary(np.add if op == "+" else np.subtract, node, rhs)
        return node

    def term(self) -> _Node:
        node = self.unary()
        while self.peek()[1] in ("*", "/"):
            op = self.take()[1]
            rhs = self.unary()
            node = _binary(np.multiply if op == "*" else np.divide, node, rhs)
        return node

    def unary(self) -> _Node:
        if self.peek()[1] == "-":
            self.take()
            inner = self.unary()
            return _Node(lambda coords: np.negative(inner.fn(coords)),
                         inner.const, inner.variables)
        return self.power()

    def power(self) -> _Node:
        base = self.atom()
        if self.peek()[1] == "^":
            self.take()
            expo = self.unary()
            return _binary(np.power, base, expo)
        return base

    def atom(self) -> _Node:
        kind, text, pos = self.take()
        if kind == "num":
            return _const(float(text))
        if text == "(":
            node = self.expr()
            self.expect(")")
            return node
        if kind == "name":
            if self.peek()[1] == "(":
                return self.call(text, pos)
            return self.variable(text, pos)
        raise ExpressionError(f"unexpected {text!r} at position {pos}")

    def variable(self, name: str, pos: int) -> _Node:
        if name in _ALIASES:
            j = _ALIASES[name]
        else:
            m = _VAR.match(name)
            if m is None:
                raise ExpressionError(
                    f"unknown name {name!r} at position {pos}")
            j = int(m.group(1))
        return _Node(lambda coords, j=j: coords[:, j], False, frozenset([j]))

    def call(self, name: str, pos: int) -> _Node:
        if name not in _FUNCTIONS:
            raise ExpressionError(
                f"unknown function {name!r} at position {pos}")
        self.expect("(")
        args = [self.expr()]
        while self.peek()[1] == ",":
            self.take()
            args.append(self.expr())
        self.expect(")")
        lo, hi, ufunc = _FUNCTIONS[name]
        if len(args) < lo or (hi is not None and len(args) > hi):
            raise ExpressionError(
                f"{name} takes at least {lo} argument(s), got {len(args)}")
        variables = frozenset().union(*(a.variables for a in args))
        const = all(a.const for a in args)
        if ufunc is not None:
            a = args[0]
            return _Node(lambda coords: ufunc(a.fn(coords)), const, variables)
        if name in ("min", "max"):
            reducer = np.minimum if name == "min" else np.maximum
            def fn(coords, args=args, reducer=reducer):
                out = args[0].fn(coords)
                for a in args[1:]:
                    out = reducer(out, a.fn(coords))
                return out
            return _Node(fn, const, variables)
        # dist: Euclidean distance from the cell to a constant point
        if not all(a.const for a in args):
            raise ExpressionError(
                f"dist arguments must be constants (position {pos})")
        point = np.array([float(a.fn(None)) for a in args])
        def dist_fn(coords, point=point):
            if coords.shape[1] != point.size:
                raise ExpressionError(
                    f"dist point has {point.size} coordinates, "
                    f"space has {coords.shape[1]}")
            return np.linalg.norm(coords - point, axis=1)
        return _Node(dist_fn, False, variables)


class Expression:
    """A parsed expression, callable on an ``(ncells, dim)`` array."""

    def __init__(self, text: str):
        self.text = text
        self._node = _Parser(text).parse()
        self.variables = self._node.variables

    def __call__(self, coords) -> np.ndarray:
        coords = np.asarray(coords, dtype=float)
        if coords.ndim != 2:
            raise ExpressionError("coordinates must be a 2-d array")
        if self.variables and max(self.variables) >= coords.shape[1]:
            raise ExpressionError(
                f"expression uses x{max(self.variables)} but the space "
                f"has dimension {coords.shape[1]}")
        out = self._node.fn(coords)
        return np.broadcast_to(np.asarray(out, dtype=float),
                               (coords.shape[0],)).copy()

    def __repr__(self) -> str:
        return f"Expression({self.text!r})"


def parse_expression(text: str) -> Expression:
    return Expression(text)


def grid_function_from_expression(space, text: str):
    """Evaluate an expression at the cell centers of ``space``."""
    from .measure import GridFunction

    expr = parse_expression(text)
    return GridFunction(space, expr(space.centers))
