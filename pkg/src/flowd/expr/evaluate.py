"""Expression evaluation over an attribute environment.

Evaluation is pure and deterministic.  ``and``/``or`` short-circuit left to
right.  Integer arithmetic is checked against the 64-bit signed range;
division by zero raises instead of producing a value (floats included, so
inf/nan never enter the value space).
"""

from __future__ import annotations

from typing import Mapping

from flowd.errors import (
    DivisionByZeroError,
    IntegerOverflowError,
    TypeMismatchError,
    UnboundAttributeError,
)
from flowd.expr.nodes import AttrRef, Binary, Expression, Literal, Unary
from flowd.values import INT64_MAX, INT64_MIN, Value, scalar_of


def _check_int(result: int) -> int:
    if not INT64_MIN <= result <= INT64_MAX:
        raise IntegerOverflowError("integer result outside 64-bit signed range")
    return result


def _is_int(value: Value) -> bool:
    return isinstance(value, int) and not isinstance(value, bool)


def _is_number(value: Value) -> bool:
    return _is_int(value) or isinstance(value, float)


def _as_bool(value: Value, op: str) -> bool:
    if not isinstance(value, bool):
        raise TypeMismatchError(f"{op!r} needs Boolean, got {scalar_of(value)}")
    return value


def evaluate(expr: Expression, env: Mapping[str, Value]) -> Value:
    if isinstance(expr, Literal):
        return expr.value

    if isinstance(expr, AttrRef):
        try:
            return env[expr.path]
        except KeyError:
            raise UnboundAttributeError(f"unbound attribute {expr.path!r}") from None

    if isinstance(expr, Unary):
        if expr.op == "not":
            return not _as_bool(evaluate(expr.operand, env), "not")
        value = evaluate(expr.operand, env)
        if _is_int(value):
            return _check_int(-value)
        if isinstance(value, float):
            return -value
        raise TypeMismatchError(f"unary '-' needs a number, got {scalar_of(value)}")

    if isinstance(expr, Binary):
        op = expr.op
        if op == "and":
            return (
                _as_bool(evaluate(expr.right, env), op)
                if _as_bool(evaluate(expr.left, env), op)
                else False
            )
        if op == "or":
            return (
                True
                if _as_bool(evaluate(expr.left, env), op)
                else _as_bool(evaluate(expr.right, env), op)
            )

        left = evaluate(expr.left, env)
        right = evaluate(expr.right, env)

        if op in ("==", "!="):
            if scalar_of(left) is not scalar_of(right):
                raise TypeMismatchError(
                    f"{op!r} needs same-type operands, got "
                    f"{scalar_of(left)} and {scalar_of(right)}"
                )
            return (left == right) if op == "==" else (left != right)

        if op in ("<", "<=", ">", ">="):
            ok = (_is_number(left) and _is_number(right)) or (
                isinstance(left, str) and isinstance(right, str)
            )
            if not ok:
                raise TypeMismatchError(
                    f"{op!r} cannot order {scalar_of(left)} and {scalar_of(right)}"
                )
            if op == "<":
                return left < right
            if op == "<=":
                return left <= right
            if op == ">":
                return left > right
            return left >= right

        if not (_is_number(left) and _is_number(right)):
            raise TypeMismatchError(
                f"{op!r} needs numeric operands, got "
                f"{scalar_of(left)} and {scalar_of(right)}"
            )
        both_int = _is_int(left) and _is_int(right)
        if op == "+":
            return _check_int(left + right) if both_int else float(left) + float(right)
        if op == "-":
            return _check_int(left - right) if both_int else float(left) - float(right)
        if op == "*":
            return _check_int(left * right) if both_int else float(left) * float(right)
        if op == "/":
            if right == 0:
                raise DivisionByZeroError("division by zero")
            if both_int:
                # Truncate toward zero, unlike Python's floor division.
                return _check_int(_truncdiv(left, right))
            return float(left) / float(right)

    raise TypeError(f"not an expression node: {expr!r}")


def _truncdiv(a: int, b: int) -> int:
    q = abs(a) // abs(b)
    return q if (a >= 0) == (b >= 0) else -q
