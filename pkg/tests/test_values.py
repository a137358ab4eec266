import pytest

from flowd.errors import TypeMismatchError
from flowd.values import (
    INT64_MAX,
    INT64_MIN,
    ScalarType,
    coerce,
    matches,
    scalar_of,
)


def test_parse_is_case_insensitive_with_canonical_names():
    assert ScalarType.parse("integer") is ScalarType.INTEGER
    assert ScalarType.parse("Integer") is ScalarType.INTEGER
    assert str(ScalarType.parse("DECIMAL")) == "Decimal"
    with pytest.raises(TypeMismatchError):
        ScalarType.parse("Float")


def test_scalar_of_distinguishes_bool_from_int():
    assert scalar_of(True) is ScalarType.BOOLEAN
    assert scalar_of(1) is ScalarType.INTEGER
    assert scalar_of(1.0) is ScalarType.DECIMAL
    assert scalar_of("1") is ScalarType.STRING


@pytest.mark.parametrize(
    "value,scalar,ok",
    [
        (3, ScalarType.INTEGER, True),
        (3, ScalarType.DECIMAL, True),
        (3.5, ScalarType.INTEGER, False),
        (True, ScalarType.INTEGER, False),
        (True, ScalarType.BOOLEAN, True),
        (1, ScalarType.BOOLEAN, False),
        ("x", ScalarType.STRING, True),
        ("x", ScalarType.BOOLEAN, False),
        (INT64_MAX, ScalarType.INTEGER, True),
        (INT64_MAX + 1, ScalarType.INTEGER, False),
        (INT64_MIN - 1, ScalarType.INTEGER, False),
    ],
)
def test_matches_scalars(value, scalar, ok):
    assert matches(value, scalar) is ok


def test_matches_lists_only_when_allowed():
    assert matches([1, 2], ScalarType.INTEGER) is False
    assert matches([1, 2], ScalarType.INTEGER, allow_list=True) is True
    assert matches([1, "x"], ScalarType.INTEGER, allow_list=True) is False
    assert matches([[1]], ScalarType.INTEGER, allow_list=True) is False


def test_coerce_promotes_int_to_decimal():
    out = coerce(3, ScalarType.DECIMAL)
    assert out == 3.0 and isinstance(out, float)
    out = coerce([1, 2.5], ScalarType.DECIMAL, allow_list=True)
    assert out == [1.0, 2.5]
    assert all(isinstance(v, float) for v in out)


def test_coerce_rejects_mismatch():
    with pytest.raises(TypeMismatchError):
        coerce("3", ScalarType.INTEGER)
    with pytest.raises(TypeMismatchError):
        coerce(2**63, ScalarType.INTEGER)
