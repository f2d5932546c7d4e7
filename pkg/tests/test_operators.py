"""Operator semantics and tier classification checks."""

import pytest

from tierlang.operators import (
    NEUTRAL,
    OTHER,
    POSITIVE,
    ClassificationError,
    OperatorSpec,
    classify_operator,
    lookup,
    verify_builtins,
)
from tierlang.syntax import BOOLEAN, INT


def test_saturating_minus_is_neutral():
    spec = lookup("-")
    assert spec.classification == NEUTRAL
    assert classify_operator(spec) == NEUTRAL
    assert spec.fn(3, 5) == 0
    assert spec.fn(5, 3) == 2


def test_plain_plus_is_other():
    spec = lookup("+")
    assert spec.classification == OTHER
    assert classify_operator(spec) == OTHER


def test_partial_plus_is_positive():
    spec = lookup("+1")
    assert spec.classification == POSITIVE
    assert classify_operator(spec) == POSITIVE
    assert spec.fn(41) == 42
    spec5 = lookup("+5")
    assert spec5.constant == 5


def test_partial_minus_is_neutral():
    spec = lookup("-2")
    assert spec.classification == NEUTRAL
    assert spec.fn(1) == 0  # saturates


def test_misdeclared_neutral_refuted_by_sampling():
    bogus = OperatorSpec("+bogus", 2, ("int", "int"), INT, NEUTRAL, lambda a, b: a + b)
    with pytest.raises(ClassificationError):
        classify_operator(bogus)


def test_misdeclared_positive_refuted_by_sampling():
    bogus = OperatorSpec(
        "double", 1, ("int",), INT, POSITIVE, lambda a: a * 2, constant=3
    )
    with pytest.raises(ClassificationError):
        classify_operator(bogus)


def test_boolean_output_forces_neutral():
    bogus = OperatorSpec("<?", 2, ("int", "int"), BOOLEAN, POSITIVE, lambda a, b: a < b)
    with pytest.raises(ClassificationError):
        classify_operator(bogus)


def test_ternary_choice_is_neutral():
    spec = lookup("?:")
    assert spec.classification == NEUTRAL
    assert classify_operator(spec) == NEUTRAL
    assert spec.fn(True, 3, 9) == 3
    assert spec.fn(False, 3, 9) == 9


def test_division_and_modulo_total():
    assert lookup("/").fn(7, 2) == 3
    assert lookup("/").fn(7, 0) == 0
    assert lookup("%").fn(7, 2) == 1
    assert lookup("%").fn(7, 0) == 0


def test_all_builtins_verify():
    verify_builtins()
