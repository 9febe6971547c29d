"""Small arithmetic expression language with exact differentiation.

Supports +, -, *, /, ^ (or **), the functions sin, cos, exp, log, the
constants pi and e, and free variables named by any identifier.  Expressions
are parsed into immutable trees that can be differentiated symbolically and
evaluated on floats or numpy arrays.  This single language serves both the
scenario-file grammar (evaluation only) and the small-time expansion engine
(which needs exact derivatives of the ansatz profiles).
"""

from __future__ import annotations

import ast
import math
from dataclasses import dataclass

import numpy as np

__all__ = ["Expr", "Num", "Var", "parse_expression", "ZERO", "ONE"]

_FUNCTIONS = {"sin", "cos", "exp", "log"}
_CONSTANTS = {"pi": math.pi, "e": math.e}


class Expr:
    """Base class for expression nodes."""

    def diff(self, var: str) -> "Expr":
        raise NotImplementedError

    def evaluate(self, env: dict):
        raise NotImplementedError

    def variables(self) -> set:
        return set()

    # Operator sugar so engine code can combine trees arithmetically.
    def __add__(self, other):
        return add(self, _coerce(other))

    def __radd__(self, other):
        return add(_coerce(other), self)

    def __sub__(self, other):
        return sub(self, _coerce(other))

    def __rsub__(self, other):
        return sub(_coerce(other), self)

    def __mul__(self, other):
        return mul(self, _coerce(other))

    def __rmul__(self, other):
        return mul(_coerce(other), self)

    def __truediv__(self, other):
        return div(self, _coerce(other))

    def __rtruediv__(self, other):
        return div(_coerce(other), self)

    def __neg__(self):
        return mul(Num(-1.0), self)


def _coerce(value) -> Expr:
    if isinstance(value, Expr):
        return value
    if isinstance(value, (int, float)):
        return Num(float(value))
    raise TypeError(f"cannot use {type(value).__name__} in an expression")


@dataclass(frozen=True)
class Num(Expr):
    value: float

    def diff(self, var):
        return ZERO

    def evaluate(self, env):
        return self.value

    def __repr__(self):
        return repr(self.value)


@dataclass(frozen=True)
class Var(Expr):
    name: str

    def diff(self, var):
        return ONE if var == self.name else ZERO

    def evaluate(self, env):
        try:
            return env[self.name]
        except KeyError:
            raise ValueError(f"unbound variable {self.name!r} in expression") from None

    def variables(self):
        return {self.name}

    def __repr__(self):
        return self.name


@dataclass(frozen=True)
class BinOp(Expr):
    op: str  # one of + - * / ^
    left: Expr
    right: Expr

    def diff(self, var):
        a, b = self.left, self.right
        da, db = a.diff(var), b.diff(var)
        if self.op == "+":
            return add(da, db)
        if self.op == "-":
            return sub(da, db)
        if self.op == "*":
            return add(mul(da, b), mul(a, db))
        if self.op == "/":
            return sub(div(da, b), div(mul(a, db), mul(b, b)))
        if self.op == "^":
            if not isinstance(b, Num):
                raise ValueError("can only differentiate powers with constant exponent")
            return mul(mul(b, pow_(a, Num(b.value - 1.0))), da)
        raise AssertionError(self.op)

    def evaluate(self, env):
        lhs = self.left.evaluate(env)
        rhs = self.right.evaluate(env)
        if self.op == "+":
            return lhs + rhs
        if self.op == "-":
            return lhs - rhs
        if self.op == "*":
            return lhs * rhs
        if self.op == "/":
            return lhs / rhs
        if self.op == "^":
            return lhs ** rhs
        raise AssertionError(self.op)

    def variables(self):
        return self.left.variables() | self.right.variables()

    def __repr__(self):
        return f"({self.left!r} {self.op} {self.right!r})"


@dataclass(frozen=True)
class Call(Expr):
    func: str
    arg: Expr

    def diff(self, var):
        inner = self.arg.diff(var)
        if self.func == "sin":
            outer = Call("cos", self.arg)
        elif self.func == "cos":
            outer = mul(Num(-1.0), Call("sin", self.arg))
        elif self.func == "exp":
            outer = self
        elif self.func == "log":
            outer = div(ONE, self.arg)
        else:
            raise AssertionError(self.func)
        return mul(outer, inner)

    def evaluate(self, env):
        value = self.arg.evaluate(env)
        return getattr(np, self.func)(value)

    def variables(self):
        return self.arg.variables()

    def __repr__(self):
        return f"{self.func}({self.arg!r})"


ZERO = Num(0.0)
ONE = Num(1.0)


def _is_num(node: Expr, value: float | None = None) -> bool:
    return isinstance(node, Num) and (value is None or node.value == value)


# Smart constructors fold constants and drop algebraic no-ops, which keeps
# the trees produced by repeated differentiation from ballooning.

def add(a: Expr, b: Expr) -> Expr:
    if _is_num(a) and _is_num(b):
        return Num(a.value + b.value)
    if _is_num(a, 0.0):
        return b
    if _is_num(b, 0.0):
        return a
    return BinOp("+", a, b)


def sub(a: Expr, b: Expr) -> Expr:
    if _is_num(a) and _is_num(b):
        return Num(a.value - b.value)
    if _is_num(b, 0.0):
        return a
    if _is_num(a, 0.0):
        return mul(Num(-1.0), b)
    return BinOp("-", a, b)


def mul(a: Expr, b: Expr) -> Expr:
    if _is_num(a) and _is_num(b):
        return Num(a.value * b.value)
    if _is_num(a, 0.0) or _is_num(b, 0.0):
        return ZERO
    if _is_num(a, 1.0):
        return b
    if _is_num(b, 1.0):
        return a
    return BinOp("*", a, b)


def div(a: Expr, b: Expr) -> Expr:
    if _is_num(a, 0.0):
        return ZERO
    if _is_num(b, 1.0):
        return a
    if _is_num(a) and _is_num(b):
        return Num(a.value / b.value)
    return BinOp("/", a, b)


def pow_(a: Expr, b: Expr) -> Expr:
    if _is_num(b, 1.0):
        return a
    if _is_num(b, 0.0):
        return ONE
    if _is_num(a) and _is_num(b):
        return Num(a.value ** b.value)
    return BinOp("^", a, b)


_AST_BINOPS = {
    ast.Add: "+",
    ast.Sub: "-",
    ast.Mult: "*",
    ast.Div: "/",
    ast.Pow: "^",
}


def _from_ast(node: ast.expr) -> Expr:
    if isinstance(node, ast.Constant):
        if isinstance(node.value, (int, float)):
            return Num(float(node.value))
        raise ValueError(f"unsupported literal {node.value!r}")
    if isinstance(node, ast.Name):
        if node.id in _CONSTANTS:
            return Num(_CONSTANTS[node.id])
        return Var(node.id)
    if isinstance(node, ast.UnaryOp):
        if isinstance(node.op, ast.USub):
            return mul(Num(-1.0), _from_ast(node.operand))
        if isinstance(node.op, ast.UAdd):
            return _from_ast(node.operand)
        raise ValueError("unsupported unary operator")
    if isinstance(node, ast.BinOp):
        op = _AST_BINOPS.get(type(node.op))
        if op is None:
            raise ValueError(f"unsupported operator {type(node.op).__name__}")
        left, right = _from_ast(node.left), _from_ast(node.right)
        return {"+": add, "-": sub, "*": mul, "/": div, "^": pow_}[op](left, right)
    if isinstance(node, ast.Call):
        if not isinstance(node.func, ast.Name) or node.func.id not in _FUNCTIONS:
            raise ValueError("only sin, cos, exp, log calls are allowed")
        if len(node.args) != 1 or node.keywords:
            raise ValueError(f"{node.func.id} takes exactly one positional argument")
        return Call(node.func.id, _from_ast(node.args[0]))
    raise ValueError(f"unsupported syntax: {ast.dump(node)}")


def parse_expression(text: str) -> Expr:
    """Parse ``text`` into an expression tree.

    The grammar accepts +, -, *, /, ^ (also **), parentheses, numeric
    literals, the functions sin/cos/exp/log, the constants pi and e, and
    variables named by identifiers.  Raises ValueError on anything else.
    """
    if not isinstance(text, str) or not text.strip():
        raise ValueError("expression must be a non-empty string")
    try:
        tree = ast.parse(text.replace("^", "**"), mode="eval")
    except SyntaxError as exc:
        raise ValueError(f"could not parse expression {text!r}: {exc.msg}") from None
    return _from_ast(tree.body)
