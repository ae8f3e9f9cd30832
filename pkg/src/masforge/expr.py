"""Expression trees shared by effects, drift rules, guards and rule arguments.

The language is deliberately small: literals, names, arithmetic, comparisons,
``and``/``or``/``not`` and a handful of builtin functions. ``choice(...)`` is
the only source of non-determinism and needs a seeded generator.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Iterator, Mapping

from .errors import EvalError

VALUE_KINDS = ("int", "real", "symbol", "bool")
FUNCTIONS = ("choice", "min", "max", "abs")


def kind_of(value: Any) -> str:
    if isinstance(value, bool):
        return "bool"
    if isinstance(value, int):
        return "int"
    if isinstance(value, float):
        return "real"
    if isinstance(value, str):
        return "symbol"
    raise TypeError(f"unsupported value {value!r}")


def default_for(kind: str) -> Any:
    return {"int": 0, "real": 0.0, "symbol": "", "bool": False}[kind]


def coerce(value: Any, kind: str) -> Any:
    """Return ``value`` as ``kind`` or raise ``TypeError``.

    Integers widen to reals; nothing else converts.
    """
    actual = kind_of(value)
    if actual == kind:
        return value
    if kind == "real" and actual == "int":
        return float(value)
    raise TypeError(f"expected {kind}, got {actual}")


class Expr:
    """Base class for expression nodes."""

    precedence = 9


@dataclass(frozen=True)
class Lit(Expr):
    value: Any
    kind: str = field(default="")

    def __post_init__(self):
        if not self.kind:
            object.__setattr__(self, "kind", kind_of(self.value))


@dataclass(frozen=True)
class Name(Expr):
    id: str


@dataclass(frozen=True)
class Call(Expr):
    func: str
    args: tuple[Expr, ...] = ()


@dataclass(frozen=True)
class Unary(Expr):
    op: str
    operand: Expr

    @property
    def precedence(self) -> int:  # type: ignore[override]
        return 3 if self.op == "not" else 7


@dataclass(frozen=True)
class Binary(Expr):
    op: str
    left: Expr
    right: Expr

    @property
    def precedence(self) -> int:  # type: ignore[override]
        return BINARY_PRECEDENCE[self.op]


BINARY_PRECEDENCE = {
    "or": 1,
    "and": 2,
    "==": 4, "!=": 4, "<": 4, "<=": 4, ">": 4, ">=": 4,
    "+": 5, "-": 5,
    "*": 6, "/": 6,
}
COMPARISONS = frozenset(("==", "!=", "<", "<=", ">", ">="))


# -- printing ---------------------------------------------------------------

def format_literal(value: Any) -> str:
    kind = kind_of(value)
    if kind == "bool":
        return "true" if value else "false"
    if kind == "real":
        if not math.isfinite(value):
            raise ValueError(f"non-finite literal {value!r}")
        return repr(value)
    if kind == "symbol":
        return json.dumps(value, ensure_ascii=False)
    return str(value)


def to_source(expr: Expr) -> str:
    if isinstance(expr, Lit):
        return format_literal(expr.value)
    if isinstance(expr, Name):
        return expr.id
    if isinstance(expr, Call):
        return f"{expr.func}({', '.join(to_source(a) for a in expr.args)})"
    if isinstance(expr, Unary):
        inner = to_source(expr.operand)
        operand = expr.operand
        needs_parens = operand.precedence < expr.precedence or (
            # "-3" would reparse as a negative literal
            expr.op == "-" and isinstance(operand, Lit) and operand.kind in ("int", "real")
        )
        if needs_parens:
            inner = f"({inner})"
        return f"not {inner}" if expr.op == "not" else f"-{inner}"
    if isinstance(expr, Binary):
        p = expr.precedence
        left, right = to_source(expr.left), to_source(expr.right)
        left_limit = p + 1 if expr.op in COMPARISONS else p
        if expr.left.precedence < left_limit:
            left = f"({left})"
        if expr.right.precedence <= p:
            right = f"({right})"
        return f"{left} {expr.op} {right}"
    raise TypeError(f"not an expression: {expr!r}")


# -- analysis ---------------------------------------------------------------

def walk(expr: Expr) -> Iterator[Expr]:
    yield expr
    if isinstance(expr, Call):
        for a in expr.args:
            yield from walk(a)
    elif isinstance(expr, Unary):
        yield from walk(expr.operand)
    elif isinstance(expr, Binary):
        yield from walk(expr.left)
        yield from walk(expr.right)


def names(expr: Expr | None) -> set[str]:
    if expr is None:
        return set()
    return {e.id for e in walk(expr) if isinstance(e, Name)}


def calls(expr: Expr | None) -> set[str]:
    if expr is None:
        return set()
    return {e.func for e in walk(expr) if isinstance(e, Call)}


# -- evaluation -------------------------------------------------------------

def _numeric(value: Any, op: str) -> Any:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise EvalError(f"operator {op!r} needs a number, got {value!r}")
    return value


def _arith(op: str, a: Any, b: Any) -> Any:
    if op == "+" and isinstance(a, str) and isinstance(b, str):
        return a + b
    a, b = _numeric(a, op), _numeric(b, op)
    if op == "+":
        return a + b
    if op == "-":
        return a - b
    if op == "*":
        return a * b
    if b == 0:
        raise EvalError("division by zero")
    return a / b


def _compare(op: str, a: Any, b: Any) -> bool:
    if op == "==":
        return a == b
    if op == "!=":
        return a != b
    if isinstance(a, str) != isinstance(b, str):
        raise EvalError(f"cannot order {a!r} and {b!r}")
    if op == "<":
        return a < b
    if op == "<=":
        return a <= b
    if op == ">":
        return a > b
    return a >= b


def evaluate(
    expr: Expr,
    scope: Mapping[str, Any],
    choose: Callable[[int], int] | None = None,
) -> Any:
    """Evaluate ``expr`` against ``scope``.

    ``choose(n)`` returns an index in ``range(n)``; it is required only when the
    expression calls ``choice``.
    """
    if isinstance(expr, Lit):
        return expr.value
    if isinstance(expr, Name):
        try:
            return scope[expr.id]
        except KeyError:
            raise EvalError(f"unknown name {expr.id!r}") from None
    if isinstance(expr, Unary):
        value = evaluate(expr.operand, scope, choose)
        if expr.op == "not":
            return not value
        return -_numeric(value, "-")
    if isinstance(expr, Binary):
        if expr.op == "and":
            return bool(evaluate(expr.left, scope, choose)) and bool(
                evaluate(expr.right, scope, choose)
            )
        if expr.op == "or":
            return bool(evaluate(expr.left, scope, choose)) or bool(
                evaluate(expr.right, scope, choose)
            )
        a = evaluate(expr.left, scope, choose)
        b = evaluate(expr.right, scope, choose)
        if expr.op in COMPARISONS:
            return _compare(expr.op, a, b)
        return _arith(expr.op, a, b)
    if isinstance(expr, Call):
        if expr.func == "choice":
            if choose is None:
                raise EvalError("choice() needs a seeded stream")
            if not expr.args:
                raise EvalError("choice() needs at least one alternative")
            return evaluate(expr.args[choose(len(expr.args))], scope, choose)
        args = [evaluate(a, scope, choose) for a in expr.args]
        if expr.func == "abs" and len(args) == 1:
            return abs(_numeric(args[0], "abs"))
        if expr.func in ("min", "max") and args:
            return (min if expr.func == "min" else max)(args)
        raise EvalError(f"bad call {expr.func}/{len(args)}")
    raise TypeError(f"not an expression: {expr!r}")


def holds(guard: Expr | None, scope: Mapping[str, Any]) -> bool:
    """Truth of an optional guard; unknown names make the guard false."""
    if guard is None:
        return True
    try:
        return bool(evaluate(guard, scope))
    except EvalError:
        return False
