"""Static type checking for expressions against an attribute schema.

Rules: Integer op Decimal promotes to Decimal for arithmetic and ordering;
``==``/``!=`` require operands of the same type; ``and``/``or``/``not``
require Booleans; ``/`` on two Integers stays Integer (truncating toward
zero); ordering also works on Strings (code-point order).
"""

from __future__ import annotations

from typing import Mapping

from flowd.errors import TypeMismatchError, UnknownAttributeError
from flowd.expr.nodes import AttrRef, Binary, Expression, Literal, Unary
from flowd.values import ScalarType, scalar_of

_NUMERIC = (ScalarType.INTEGER, ScalarType.DECIMAL)


def typecheck(expr: Expression, schema: Mapping[str, ScalarType]) -> ScalarType:
    if isinstance(expr, Literal):
        return scalar_of(expr.value)

    if isinstance(expr, AttrRef):
        try:
            return schema[expr.path]
        except KeyError:
            raise UnknownAttributeError(f"unknown attribute {expr.path!r}") from None

    if isinstance(expr, Unary):
        inner = typecheck(expr.operand, schema)
        if expr.op == "not":
            if inner is not ScalarType.BOOLEAN:
                raise TypeMismatchError(f"'not' needs Boolean, got {inner}")
            return ScalarType.BOOLEAN
        if inner not in _NUMERIC:
            raise TypeMismatchError(f"unary '-' needs a number, got {inner}")
        return inner

    if isinstance(expr, Binary):
        left = typecheck(expr.left, schema)
        right = typecheck(expr.right, schema)
        op = expr.op

        if op in ("and", "or"):
            if left is not ScalarType.BOOLEAN or right is not ScalarType.BOOLEAN:
                raise TypeMismatchError(
                    f"{op!r} needs Boolean operands, got {left} and {right}"
                )
            return ScalarType.BOOLEAN

        if op in ("==", "!="):
            if left is not right:
                raise TypeMismatchError(
                    f"{op!r} needs same-type operands, got {left} and {right}"
                )
            return ScalarType.BOOLEAN

        if op in ("<", "<=", ">", ">="):
            if left in _NUMERIC and right in _NUMERIC:
                return ScalarType.BOOLEAN
            if left is ScalarType.STRING and right is ScalarType.STRING:
                return ScalarType.BOOLEAN
            raise TypeMismatchError(
                f"{op!r} cannot order {left} and {right}"
            )

        # Arithmetic.
        if left not in _NUMERIC or right not in _NUMERIC:
            raise TypeMismatchError(
                f"{op!r} needs numeric operands, got {left} and {right}"
            )
        if left is ScalarType.DECIMAL or right is ScalarType.DECIMAL:
            return ScalarType.DECIMAL
        return ScalarType.INTEGER

    raise TypeError(f"not an expression node: {expr!r}")
