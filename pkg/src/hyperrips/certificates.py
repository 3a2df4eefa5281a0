"""Named numeric checks that can be serialized and re-evaluated."""

from __future__ import annotations

import operator
from dataclasses import dataclass
from fractions import Fraction

_OPS = {"<=": operator.le, "<": operator.lt, "==": operator.eq, "!=": operator.ne, ">=": operator.ge, ">": operator.gt}


def num(x):
    """JSON-friendly exact number: int when integral, 'p/q' otherwise."""
    x = Fraction(x)
    return x.numerator if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def parse_num(x) -> Fraction:
    return Fraction(x)


@dataclass(frozen=True)
class Check:
    name: str
    lhs: Fraction | int | bool
    rel: str
    rhs: Fraction | int | bool

    @property
    def ok(self) -> bool:
        return bool(_OPS[self.rel](self.lhs, self.rhs))

    def to_dict(self) -> dict:
        conv = (lambda v: v) if isinstance(self.lhs, bool) else num
        return {"lhs": conv(self.lhs), "rel": self.rel, "rhs": conv(self.rhs), "pass": self.ok}


def flag(name: str, value: bool) -> Check:
    return Check(name, bool(value), "==", True)
