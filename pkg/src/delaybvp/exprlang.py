"""Arithmetic expression language for coefficient functions.

Problem configurations describe the potential q(x) and the retardation
Delta(x) as plain text formulas in the single variable ``x``.  This module
parses those formulas into immutable syntax trees and evaluates them on
scalars or numpy arrays.

Grammar (standard precedence, ``^`` tightest and right-associative, unary
minus tighter than ``*``/``/``)::

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := '-' unary | power
    power  := atom ('^' unary)?
    atom   := NUMBER | 'x' | 'pi' | 'e' | FUNC '(' expr ')' | '(' expr ')'

Supported functions: sin cos tan exp log sqrt abs.  There are no
user-defined functions and no conditionals; piecewise coefficients are
expressed at the configuration level with one formula per subinterval.
Trees are immutable after parsing and safe to share across threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

__all__ = [
    "Expr",
    "Num",
    "Var",
    "Const",
    "Neg",
    "BinOp",
    "Call",
    "ExprError",
    "ExprSyntaxError",
    "ExprDomainError",
    "parse",
    "unparse",
]

_FUNCTIONS = ("sin", "cos", "tan", "exp", "log", "sqrt", "abs")
_CONSTANTS = {"pi": math.pi, "e": math.e}


class ExprError(Exception):
    """Base class for expression language errors."""


class ExprSyntaxError(ExprError):
    """Raised when the source text cannot be parsed.

    Carries the byte offset of the failure and a description of what was
    expected there.
    """

    def __init__(self, offset: int, expected: str, found: str):
        self.offset = offset
        self.expected = expected
        self.found = found
        super().__init__(f"at offset {offset}: expected {expected}, found {found}")


class ExprDomainError(ExprError):
    """Raised when evaluation leaves the real domain (log/sqrt of a negative
    number, division by zero) or produces a non-finite value."""

    def __init__(self, subexpr: "Expr", x, reason: str):
        self.subexpr = subexpr
        self.x = x
        self.reason = reason
        super().__init__(f"{reason} in '{unparse(subexpr)}' at x = {x!r}")


# --- syntax tree ----------------------------------------------------------


@dataclass(frozen=True)
class Num:
    value: float

    def eval(self, x):
        return self.value if np.isscalar(x) else np.full_like(x, self.value, dtype=float)


@dataclass(frozen=True)
class Var:
    def eval(self, x):
        return x


@dataclass(frozen=True)
class Const:
    name: str

    def eval(self, x):
        v = _CONSTANTS[self.name]
        return v if np.isscalar(x) else np.full_like(x, v, dtype=float)


@dataclass(frozen=True)
class Neg:
    operand: "Expr"

    def eval(self, x):
        return -self.operand.eval(x)


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Expr"
    right: "Expr"

    def eval(self, x):
        a = self.left.eval(x)
        b = self.right.eval(x)
        if self.op == "+":
            return a + b
        if self.op == "-":
            return a - b
        if self.op == "*":
            return a * b
        if self.op == "/":
            if np.any(b == 0):
                raise ExprDomainError(self, _offending(x, b == 0), "division by zero")
            return a / b
        # '^': np.power keeps negative-base fractional exponents real (nan),
        # which the finiteness check below turns into a reported error
        with np.errstate(invalid="ignore", divide="ignore", over="ignore"):
            out = np.power(a, b)
        if np.any(~np.isfinite(out)):
            raise ExprDomainError(self, _offending(x, ~np.isfinite(out)), "non-finite power")
        return out


@dataclass(frozen=True)
class Call:
    func: str
    arg: "Expr"

    def eval(self, x):
        v = self.arg.eval(x)
        f = self.func
        if f == "sin":
            return np.sin(v)
        if f == "cos":
            return np.cos(v)
        if f == "tan":
            out = np.tan(v)
            if np.any(~np.isfinite(out)):
                raise ExprDomainError(self, _offending(x, ~np.isfinite(out)), "non-finite tangent")
            return out
        if f == "exp":
            with np.errstate(over="ignore"):
                out = np.exp(v)
            if np.any(~np.isfinite(out)):
                raise ExprDomainError(self, _offending(x, ~np.isfinite(out)), "overflow in exp")
            return out
        if f == "log":
            if np.any(v <= 0):
                raise ExprDomainError(self, _offending(x, v <= 0), "log of a non-positive value")
            return np.log(v)
        if f == "sqrt":
            if np.any(v < 0):
                raise ExprDomainError(self, _offending(x, v < 0), "sqrt of a negative value")
            return np.sqrt(v)
        return np.abs(v)


Expr = Union[Num, Var, Const, Neg, BinOp, Call]


def _offending(x, mask):
    """First x that triggered a domain error (x itself when scalar)."""
    if np.isscalar(x):
        return x
    mask = np.broadcast_to(mask, np.shape(x))
    idx = np.argmax(mask)
    return float(np.asarray(x).ravel()[idx])


# --- tokenizer ------------------------------------------------------------

_OPERATORS = "+-*/^()"


def _tokenize(source: str):
    """Yield (kind, text, offset) triples; kinds: num, ident, op, end."""
    tokens = []
    i = 0
    n = len(source)
    while i < n:
        c = source[i]
        if c.isspace():
            i += 1
            continue
        if c in _OPERATORS:
            tokens.append(("op", c, i))
            i += 1
            continue
        if c.isdigit() or (c == "." and i + 1 < n and source[i + 1].isdigit()):
            j = i
            while j < n and (source[j].isdigit() or source[j] == "."):
                j += 1
            if j < n and source[j] in "eE":
                k = j + 1
                if k < n and source[k] in "+-":
                    k += 1
                if k < n and source[k].isdigit():
                    j = k
                    while j < n and source[j].isdigit():
                        j += 1
            text = source[i:j]
            try:
                float(text)
            except ValueError:
                raise ExprSyntaxError(i, "a numeric literal", repr(text)) from None
            tokens.append(("num", text, i))
            i = j
            continue
        if c.isalpha() or c == "_":
            j = i
            while j < n and (source[j].isalnum() or source[j] == "_"):
                j += 1
            tokens.append(("ident", source[i:j], i))
            i = j
            continue
        raise ExprSyntaxError(i, "a number, identifier or operator", repr(c))
    tokens.append(("end", "", n))
    return tokens


# --- recursive-descent parser ---------------------------------------------


class _Parser:
    def __init__(self, source: str):
        self.source = source
        self.tokens = _tokenize(source)
        self.pos = 0

    def peek(self):
        return self.tokens[self.pos]

    def advance(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect_op(self, op: str):
        kind, text, off = self.peek()
        if kind == "op" and text == op:
            return self.advance()
        raise ExprSyntaxError(off, f"'{op}'", repr(text) if text else "end of input")

    def parse_expr(self):
        node = self.parse_term()
        while True:
            kind, text, _ = self.peek()
            if kind == "op" and text in "+-":
                self.advance()
                node = BinOp(text, node, self.parse_term())
            else:
                return node

    def parse_term(self):
        node = self.parse_unary()
        while True:
            kind, text, _ = self.peek()
            if kind == "op" and text in "*/":
                self.advance()
                node = BinOp(text, node, self.parse_unary())
            else:
                return node

    def parse_unary(self):
        kind, text, _ = self.peek()
        if kind == "op" and text == "-":
            self.advance()
            return Neg(self.parse_unary())
        return self.parse_power()

    def parse_power(self):
        base = self.parse_atom()
        kind, text, _ = self.peek()
        if kind == "op" and text == "^":
            self.advance()
            # right-associative; the exponent may carry a unary minus
            return BinOp("^", base, self.parse_unary())
        return base

    def parse_atom(self):
        kind, text, off = self.advance()
        if kind == "num":
            value = float(text)
            if not math.isfinite(value):
                raise ExprSyntaxError(off, "a finite numeric literal", repr(text))
            return Num(value)
        if kind == "ident":
            if text == "x":
                return Var()
            if text in _CONSTANTS:
                return Const(text)
            if text in _FUNCTIONS:
                self.expect_op("(")
                arg = self.parse_expr()
                self.expect_op(")")
                return Call(text, arg)
            raise ExprSyntaxError(off, "'x', 'pi', 'e' or a known function", repr(text))
        if kind == "op" and text == "(":
            node = self.parse_expr()
            self.expect_op(")")
            return node
        found = repr(text) if text else "end of input"
        raise ExprSyntaxError(off, "a number, name or '('", found)


def parse(source: str) -> Expr:
    """Parse an expression string into an immutable syntax tree."""
    if not isinstance(source, str) or not source.strip():
        raise ExprSyntaxError(0, "a non-empty expression", repr(source))
    p = _Parser(source)
    node = p.parse_expr()
    kind, text, off = p.peek()
    if kind != "end":
        raise ExprSyntaxError(off, "end of input", repr(text))
    return node


# --- unparser --------------------------------------------------------------

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "neg": 3, "^": 4}


def _prec(node) -> int:
    if isinstance(node, BinOp):
        return _PREC[node.op]
    if isinstance(node, Neg):
        return _PREC["neg"]
    return 5


def unparse(node: Expr) -> str:
    """Render a tree back to source text that reparses to an identical tree."""
    if isinstance(node, Num):
        return repr(node.value)
    if isinstance(node, Var):
        return "x"
    if isinstance(node, Const):
        return node.name
    if isinstance(node, Neg):
        inner = unparse(node.operand)
        if _prec(node.operand) < _PREC["neg"]:
            inner = f"({inner})"
        return f"-{inner}"
    if isinstance(node, Call):
        return f"{node.func}({unparse(node.arg)})"
    # BinOp: parenthesize children whose precedence is too loose; for the
    # non-associative/right-associative sides a tie also needs parentheses
    op = node.op
    lp, rp = _prec(node.left), _prec(node.right)
    left = unparse(node.left)
    right = unparse(node.right)
    if op == "^":
        # right-associative: 'a ^ b ^ c' means a ^ (b ^ c)
        if lp <= _PREC["^"]:
            left = f"({left})"
        if rp < _PREC["^"]:
            right = f"({right})"
    else:
        # left-associative: a same-precedence right child would reassociate
        if lp < _PREC[op]:
            left = f"({left})"
        if rp <= _PREC[op]:
            right = f"({right})"
        # unary minus on the right of '-'/'+' would glue into '--'; keep it wrapped
        if isinstance(node.right, Neg) and op in ("+", "-"):
            right = f"({right})"
    return f"{left} {op} {right}"
