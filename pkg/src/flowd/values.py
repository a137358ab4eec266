"""Scalar type system and runtime values.

Runtime values are plain Python objects: ``int`` for Integer (64-bit signed
range), ``float`` for Decimal, ``str`` for String, ``bool`` for Boolean, and
``list`` for homogeneous scalar lists.  ``bool`` is checked before ``int``
everywhere because it subclasses ``int`` in Python.
"""

from __future__ import annotations

import enum
from typing import Union

from flowd.errors import TypeMismatchError

Value = Union[int, float, str, bool, list]

INT64_MIN = -(2**63)
INT64_MAX = 2**63 - 1


class ScalarType(enum.Enum):
    INTEGER = "Integer"
    DECIMAL = "Decimal"
    STRING = "String"
    BOOLEAN = "Boolean"

    def __str__(self) -> str:
        return self.value

    @classmethod
    def parse(cls, name: str) -> "ScalarType":
        """Case-insensitive lookup; canonical names are the enum values."""
        for member in cls:
            if member.value.lower() == name.lower():
                return member
        raise TypeMismatchError(f"unknown scalar type {name!r}")


def scalar_of(value: Value) -> ScalarType:
    """The scalar kind of a non-list value."""
    if isinstance(value, bool):
        return ScalarType.BOOLEAN
    if isinstance(value, int):
        return ScalarType.INTEGER
    if isinstance(value, float):
        return ScalarType.DECIMAL
    if isinstance(value, str):
        return ScalarType.STRING
    raise TypeMismatchError(f"no scalar kind for {type(value).__name__}")


def matches(value: Value, scalar: ScalarType, *, allow_list: bool = False) -> bool:
    """Whether a JSON-decoded value fits ``scalar``.

    Integers are accepted where a Decimal is expected (promoted by the
    caller); Booleans never coerce either way.
    """
    if isinstance(value, list):
        return allow_list and all(
            not isinstance(v, list) and matches(v, scalar) for v in value
        )
    if isinstance(value, bool):
        return scalar is ScalarType.BOOLEAN
    if isinstance(value, int):
        return scalar in (ScalarType.INTEGER, ScalarType.DECIMAL) and (
            scalar is not ScalarType.INTEGER or INT64_MIN <= value <= INT64_MAX
        )
    if isinstance(value, float):
        return scalar is ScalarType.DECIMAL
    if isinstance(value, str):
        return scalar is ScalarType.STRING
    return False


def coerce(value: Value, scalar: ScalarType, *, allow_list: bool = False) -> Value:
    """Validate ``value`` against ``scalar`` and normalize (int -> float for
    Decimal).  Raises TypeMismatchError when the value does not fit."""
    if not matches(value, scalar, allow_list=allow_list):
        raise TypeMismatchError(
            f"expected {scalar}, got {value!r}"
        )
    if isinstance(value, list):
        return [coerce(v, scalar) for v in value]
    if scalar is ScalarType.DECIMAL and isinstance(value, int) and not isinstance(value, bool):
        return float(value)
    return value
