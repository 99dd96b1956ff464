"""Exact scalars for the operator algebra.

Coefficients are Gaussian rationals (``QI``) attached to monomials in the
coupling parameters alpha, beta and g.  A ``Scalar`` is a sparse polynomial
``{(a, b, c): QI}`` meaning ``sum coeff * alpha**a * beta**b * g**c``.
No floating point is involved until :meth:`Scalar.evaluate` is called.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Mapping

PARAMS = ("alpha", "beta", "g")

Monomial = tuple[int, int, int]
ONE_MONO: Monomial = (0, 0, 0)


def _frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        return Fraction(str(x))
    return Fraction(x)


@dataclass(frozen=True, slots=True)
class QI:
    """Exact complex rational ``re + i*im``."""

    re: Fraction = Fraction(0)
    im: Fraction = Fraction(0)

    @classmethod
    def of(cls, value) -> "QI":
        if isinstance(value, QI):
            return value
        if isinstance(value, complex):
            return cls(_frac(value.real), _frac(value.imag))
        return cls(_frac(value), Fraction(0))

    def __bool__(self) -> bool:
        return bool(self.re) or bool(self.im)

    def __add__(self, other: "QI") -> "QI":
        return QI(self.re + other.re, self.im + other.im)

    def __sub__(self, other: "QI") -> "QI":
        return QI(self.re - other.re, self.im - other.im)

    def __neg__(self) -> "QI":
        return QI(-self.re, -self.im)

    def __mul__(self, other: "QI") -> "QI":
        return QI(self.re * other.re - self.im * other.im,
                  self.re * other.im + self.im * other.re)

    def conjugate(self) -> "QI":
        return QI(self.re, -self.im)

    def __complex__(self) -> complex:
        return complex(float(self.re), float(self.im))

    def __str__(self) -> str:
        if not self.im:
            return str(self.re)
        if not self.re:
            return f"{self.im}i"
        return f"({self.re}{'+' if self.im > 0 else '-'}{abs(self.im)}i)"


QI_ZERO = QI()
QI_ONE = QI(Fraction(1))
QI_I = QI(Fraction(0), Fraction(1))


class Scalar:
    """Polynomial in (alpha, beta, g) with exact Gaussian-rational coefficients."""

    __slots__ = ("_terms", "_hash")

    def __init__(self, terms: Mapping[Monomial, QI] | None = None):
        self._terms: dict[Monomial, QI] = {}
        self._hash = None
        if terms:
            for mono, c in terms.items():
                c = QI.of(c)
                if c:
                    self._terms[tuple(mono)] = c

    @classmethod
    def const(cls, value) -> "Scalar":
        return cls({ONE_MONO: QI.of(value)})

    @classmethod
    def param(cls, name: str, power: int = 1) -> "Scalar":
        mono = [0, 0, 0]
        mono[PARAMS.index(name)] = power
        return cls({tuple(mono): QI_ONE})

    @property
    def terms(self) -> dict[Monomial, QI]:
        return dict(self._terms)

    def items(self) -> Iterator[tuple[Monomial, QI]]:
        return iter(sorted(self._terms.items()))

    def monomials(self) -> list[Monomial]:
        return sorted(self._terms)

    def coefficient(self, mono: Monomial) -> QI:
        return self._terms.get(tuple(mono), QI_ZERO)

    def is_zero(self) -> bool:
        return not self._terms

    def __bool__(self) -> bool:
        return bool(self._terms)

    def __add__(self, other) -> "Scalar":
        other = _as_scalar(other)
        out = dict(self._terms)
        for mono, c in other._terms.items():
            out[mono] = out.get(mono, QI_ZERO) + c
        return Scalar(out)

    __radd__ = __add__

    def __neg__(self) -> "Scalar":
        return Scalar({m: -c for m, c in self._terms.items()})

    def __sub__(self, other) -> "Scalar":
        return self + (-_as_scalar(other))

    def __rsub__(self, other) -> "Scalar":
        return _as_scalar(other) - self

    def __mul__(self, other) -> "Scalar":
        other = _as_scalar(other)
        out: dict[Monomial, QI] = {}
        for m1, c1 in self._terms.items():
            for m2, c2 in other._terms.items():
                mono = (m1[0] + m2[0], m1[1] + m2[1], m1[2] + m2[2])
                out[mono] = out.get(mono, QI_ZERO) + c1 * c2
        return Scalar(out)

    __rmul__ = __mul__

    def conjugate(self) -> "Scalar":
        # alpha, beta, g are real parameters
        return Scalar({m: c.conjugate() for m, c in self._terms.items()})

    def evaluate(self, alpha: complex = 0.0, beta: complex = 0.0,
                 g: complex = 0.0) -> complex:
        total = 0j
        for (a, b, c), coeff in self._terms.items():
            total += complex(coeff) * alpha**a * beta**b * g**c
        return total

    def __eq__(self, other) -> bool:
        try:
            other = _as_scalar(other)
        except TypeError:
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(frozenset(self._terms.items()))
        return self._hash

    def __repr__(self) -> str:
        return f"Scalar({self})"

    def __str__(self) -> str:
        if not self._terms:
            return "0"
        parts = []
        for mono, c in self.items():
            mono_s = monomial_str(mono)
            if mono_s == "1":
                parts.append(str(c))
            elif c == QI_ONE:
                parts.append(mono_s)
            elif c == -QI_ONE:
                parts.append(f"-{mono_s}")
            else:
                parts.append(f"{c}*{mono_s}")
        return " + ".join(parts).replace("+ -", "- ")


def _as_scalar(x) -> Scalar:
    if isinstance(x, Scalar):
        return x
    if isinstance(x, (int, Fraction, float, complex, QI)):
        return Scalar.const(x)
    raise TypeError(f"cannot interpret {x!r} as a Scalar")


_GLYPH = {"alpha": "α", "beta": "β", "g": "g"}


def monomial_str(mono: Monomial, ascii_only: bool = False) -> str:
    parts = []
    for name, power in zip(PARAMS, mono):
        sym = name if ascii_only else _GLYPH[name]
        if power == 1:
            parts.append(sym)
        elif power > 1:
            parts.append(f"{sym}^{power}")
    return ("*" if ascii_only else "").join(parts) or "1"


def parse_monomial(text: str) -> Monomial:
    """Parse ``"alpha^2*beta"``-style monomial labels."""
    mono = [0, 0, 0]
    if text.strip() in ("", "1"):
        return ONE_MONO
    for part in text.replace(" ", "").split("*"):
        name, _, power = part.partition("^")
        mono[PARAMS.index(name)] += int(power or 1)
    return tuple(mono)
