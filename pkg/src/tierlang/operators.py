"""Built-in operators: signatures, semantics, and tier classification.

An operator is *neutral* when its output is boolean/char or a natural
bounded by the max of its int inputs, *positive* when the output may exceed
that max by at most a fixed constant, and *other* when unbounded.  Neutral
operators type at both tiers, positive ones only at tier 0, and other ones
not at all.

Arithmetic is over the naturals: `-` saturates at zero, `/` and `%` are
total with a zero divisor yielding 0.  `+` applied to a literal parses as
the unary partial application `+k`, which is positive; bare `+` and `*`
remain unclassified.
"""

import random
from dataclasses import dataclass

from .syntax import BOOLEAN, CHAR, INT, TypeName

NEUTRAL = "neutral"
POSITIVE = "positive"
OTHER = "other"


@dataclass(frozen=True)
class OperatorSpec:
    name: str
    arity: int
    arg_kinds: tuple  # per-argument: 'int' | 'boolean' | 'char' | 'any' | 'same'
    result: TypeName
    classification: str
    fn: object
    constant: int = 0  # the c of the positive bound


def _sat_sub(x, y):
    return max(x - y, 0)


def _div(x, y):
    return x // y if y else 0


def _mod(x, y):
    return x % y if y else 0


def _if_then_else(c, a, b):
    return a if c else b


_FIXED: dict[str, OperatorSpec] = {}


def _register(spec: OperatorSpec):
    _FIXED[spec.name] = spec


_register(OperatorSpec("==", 2, ("same", "same"), BOOLEAN, NEUTRAL, lambda a, b: a == b))
_register(OperatorSpec("!=", 2, ("same", "same"), BOOLEAN, NEUTRAL, lambda a, b: a != b))
_register(OperatorSpec("<", 2, ("int", "int"), BOOLEAN, NEUTRAL, lambda a, b: a < b))
_register(OperatorSpec("<=", 2, ("int", "int"), BOOLEAN, NEUTRAL, lambda a, b: a <= b))
_register(OperatorSpec(">", 2, ("int", "int"), BOOLEAN, NEUTRAL, lambda a, b: a > b))
_register(OperatorSpec(">=", 2, ("int", "int"), BOOLEAN, NEUTRAL, lambda a, b: a >= b))
_register(
    OperatorSpec("&&", 2, ("boolean", "boolean"), BOOLEAN, NEUTRAL, lambda a, b: a and b)
)
_register(
    OperatorSpec("||", 2, ("boolean", "boolean"), BOOLEAN, NEUTRAL, lambda a, b: a or b)
)
_register(OperatorSpec("!", 1, ("boolean",), BOOLEAN, NEUTRAL, lambda a: not a))
_register(OperatorSpec("-", 2, ("int", "int"), INT, NEUTRAL, _sat_sub))
_register(OperatorSpec("/", 2, ("int", "int"), INT, NEUTRAL, _div))
_register(OperatorSpec("%", 2, ("int", "int"), INT, NEUTRAL, _mod))
_register(OperatorSpec("+", 2, ("int", "int"), INT, OTHER, lambda a, b: a + b))
_register(OperatorSpec("*", 2, ("int", "int"), INT, OTHER, lambda a, b: a * b))
_register(
    OperatorSpec("?:", 3, ("boolean", "same", "same"), INT, NEUTRAL, _if_then_else)
)


def lookup(name: str) -> OperatorSpec | None:
    """Finds an operator spec; synthesizes the +k / -k partial applications."""
    spec = _FIXED.get(name)
    if spec is not None:
        return spec
    if len(name) > 1 and name[0] in "+-" and name[1:].isdigit():
        k = int(name[1:])
        if name[0] == "+":
            return OperatorSpec(
                name, 1, ("int",), INT, POSITIVE, lambda a, k=k: a + k, constant=k
            )
        return OperatorSpec(
            name, 1, ("int",), INT, NEUTRAL, lambda a, k=k: _sat_sub(a, k)
        )
    return None


def apply(spec: OperatorSpec, args: list):
    return spec.fn(*args)


class ClassificationError(Exception):
    """A declared classification was refuted by a sampled counterexample."""


def classify_operator(spec: OperatorSpec, samples: int = 500, seed: int = 7) -> str:
    """Verifies the declared classification on random int inputs.

    Boolean/char-valued operators are neutral by definition.  For the int
    ones, the neutral bound 0 <= op(xs) <= max(xs) and the positive bound
    op(xs) <= max(xs) + c are sampled; a violation raises.  `other` needs no
    check: it gets no tiered type at all.
    """
    if spec.result in (BOOLEAN, CHAR):
        if spec.classification != NEUTRAL:
            raise ClassificationError(
                f"{spec.name}: boolean/char output forces the neutral class"
            )
        return NEUTRAL
    if spec.classification == OTHER:
        return OTHER

    rng = random.Random(seed)
    for _ in range(samples):
        args = []
        for kind in spec.arg_kinds:
            if kind == "boolean":
                args.append(rng.random() < 0.5)
            else:
                args.append(rng.randrange(0, 10_000))
        ints = [a for a in args if isinstance(a, int) and not isinstance(a, bool)]
        out = spec.fn(*args)
        hi = max(ints) if ints else 0
        if out < 0:
            raise ClassificationError(f"{spec.name}: negative output on {args}")
        if spec.classification == NEUTRAL and out > hi:
            raise ClassificationError(
                f"{spec.name}: output {out} exceeds max input {hi} on {args}"
            )
        if spec.classification == POSITIVE and out > hi + spec.constant:
            raise ClassificationError(
                f"{spec.name}: output {out} exceeds max+{spec.constant} on {args}"
            )
    return spec.classification


def verify_builtins():
    """Re-checks every fixed operator and a few partial applications."""
    for spec in _FIXED.values():
        classify_operator(spec)
    for name in ("+1", "-1", "+5", "-3"):
        classify_operator(lookup(name))
