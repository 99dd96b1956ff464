"""Exact sums of square roots with Scalar coefficients.

Matrix elements of bosonic words are products of square roots of integers,
so an exact matrix element is ``sum_q c_q * sqrt(q)`` with square-free ``q``.
"""
from __future__ import annotations

import math
from functools import lru_cache

from .scalars import QI_I, Scalar


@lru_cache(maxsize=4096)
def split_square(r: int) -> tuple[int, int]:
    """Write ``r = s*s*q`` with square-free ``q`` and return ``(s, q)``."""
    if r < 0:
        raise ValueError("negative radicand")
    if r == 0:
        return 0, 1
    s, q = 1, 1
    p = 2
    while p * p <= r:
        e = 0
        while r % p == 0:
            r //= p
            e += 1
        s *= p ** (e // 2)
        if e % 2:
            q *= p
        p += 1
    return s, q * r


class Surd:
    __slots__ = ("_parts",)

    def __init__(self, parts: dict[int, Scalar] | None = None):
        self._parts: dict[int, Scalar] = {q: c for q, c in (parts or {}).items() if not c.is_zero()}

    @classmethod
    def sqrt(cls, r: int, coeff: Scalar | int = 1) -> "Surd":
        """``coeff * sqrt(r)``; a negative radicand becomes ``i*sqrt(|r|)``."""
        coeff = coeff if isinstance(coeff, Scalar) else Scalar.const(coeff)
        if r < 0:
            coeff = coeff * Scalar.const(QI_I)
            r = -r
        s, q = split_square(r)
        if s == 0:
            return cls()
        return cls({q: coeff * Scalar.const(s)})

    def is_zero(self) -> bool:
        return not self._parts

    def __add__(self, other: "Surd") -> "Surd":
        out = dict(self._parts)
        for q, c in other._parts.items():
            out[q] = out[q] + c if q in out else c
        return Surd(out)

    def __neg__(self) -> "Surd":
        return Surd({q: -c for q, c in self._parts.items()})

    def __sub__(self, other: "Surd") -> "Surd":
        return self + (-other)

    def scale(self, c) -> "Surd":
        c = c if isinstance(c, Scalar) else Scalar.const(c)
        return Surd({q: v * c for q, v in self._parts.items()})

    def conjugate(self) -> "Surd":
        return Surd({q: c.conjugate() for q, c in self._parts.items()})

    def restrict_monomial(self, mono) -> "Surd":
        return Surd({q: Scalar({tuple(mono): c.coefficient(mono)}) for q, c in self._parts.items()})

    def monomials(self) -> list:
        return sorted({m for c in self._parts.values() for m in c.monomials()})

    def evaluate(self, alpha=0.0, beta=0.0, g=0.0) -> complex:
        return sum((c.evaluate(alpha, beta, g) * math.sqrt(q) for q, c in self._parts.items()), 0j)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Surd):
            return NotImplemented
        return self._parts == other._parts

    def __hash__(self):
        return hash(frozenset(self._parts.items()))

    def __str__(self) -> str:
        if not self._parts:
            return "0"
        parts = []
        for q in sorted(self._parts):
            c = str(self._parts[q])
            c = f"({c})" if " " in c else c
            parts.append(c if q == 1 else f"{c}*sqrt({q})")
        return " + ".join(parts)

    __repr__ = __str__
