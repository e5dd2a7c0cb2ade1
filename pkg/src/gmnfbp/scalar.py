"""Numeric scalars: exact rationals by default, binary floats on request."""

from __future__ import annotations

from fractions import Fraction
from numbers import Rational
from typing import Union

from gmpy2 import mpq

#: exact rational type used in rational mode (interoperates with Fraction)
Q = mpq

Scalar = Union[mpq, float]

RATIONAL = "rational"
FLOAT = "float"
MODES = (RATIONAL, FLOAT)

#: absolute tolerance for comparisons in float mode
FLOAT_TOL = 1e-9


def parse_scalar(value, mode: str = RATIONAL) -> Scalar:
    """Parse a JSON value (number or ``"p/q"`` string) into a scalar.

    Strings are read exactly.  Plain numbers become :data:`Q` in rational
    mode (using their decimal text, so ``0.1`` is exactly one tenth) and
    ``float`` in float mode.
    """
    if isinstance(value, bool):
        raise ValueError(f"not a number: {value!r}")
    if isinstance(value, str):
        q = Q(Fraction(value.strip()))
        return q if mode == RATIONAL else float(q)
    if isinstance(value, int):
        return Q(value) if mode == RATIONAL else float(value)
    if isinstance(value, float):
        return Q(repr(value)) if mode == RATIONAL else value
    if isinstance(value, Rational):
        return Q(value) if mode == RATIONAL else float(value)
    raise ValueError(f"not a number: {value!r}")


def convert(value: Scalar, mode: str) -> Scalar:
    if mode == FLOAT:
        return float(value)
    return Q(value)


def format_scalar(value: Scalar):
    """JSON-friendly rendering: integers as int, other rationals as "p/q"."""
    if isinstance(value, float):
        return value
    if isinstance(value, Rational):
        if value.denominator == 1:
            return int(value.numerator)
        return f"{value.numerator}/{value.denominator}"
    return value


def is_exact(*values) -> bool:
    return not any(type(v) is float for v in values)


def eq(a, b) -> bool:
    if type(a) is float or type(b) is float:
        return abs(a - b) <= FLOAT_TOL
    return a == b


def lt(a, b) -> bool:
    """Strict ``a < b``, beyond tolerance in float mode."""
    if type(a) is float or type(b) is float:
        return a < b - FLOAT_TOL
    return a < b


def le(a, b) -> bool:
    if type(a) is float or type(b) is float:
        return a <= b + FLOAT_TOL
    return a <= b
