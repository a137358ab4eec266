"""AST node types for the condition/assignment expression language."""

from __future__ import annotations

from dataclasses import dataclass

from flowd.values import Value

BOOL_OPS = ("and", "or")
CMP_OPS = ("==", "!=", "<", "<=", ">", ">=")
ADD_OPS = ("+", "-")
MUL_OPS = ("*", "/")


class Expression:
    """Base class; concrete nodes are frozen dataclasses below."""

    __slots__ = ()


@dataclass(frozen=True)
class Literal(Expression):
    value: Value


@dataclass(frozen=True)
class AttrRef(Expression):
    path: str


@dataclass(frozen=True)
class Unary(Expression):
    op: str  # "not" | "neg"
    operand: Expression


@dataclass(frozen=True)
class Binary(Expression):
    op: str  # one of BOOL_OPS + CMP_OPS + ADD_OPS + MUL_OPS
    left: Expression
    right: Expression
