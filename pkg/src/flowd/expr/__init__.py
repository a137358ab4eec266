"""Condition/assignment expression language: parse, check, evaluate."""

from flowd.expr.evaluate import evaluate
from flowd.expr.nodes import AttrRef, Binary, Expression, Literal, Unary
from flowd.expr.parser import parse_expression, to_source
from flowd.expr.typecheck import typecheck

__all__ = [
    "AttrRef",
    "Binary",
    "Expression",
    "Literal",
    "Unary",
    "evaluate",
    "parse_expression",
    "to_source",
    "typecheck",
]
