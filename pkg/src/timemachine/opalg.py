"""Exact algebra of time-shifted bosonic mode operators.

A mode operator ``a_i(t + kT)`` (or its dagger) is a :class:`ModeOp` with
region ``i`` and integer shift ``k``.  Products carry an exact coefficient
(:class:`~timemachine.scalars.Scalar`) and a multiset of literal delta
factors produced by contractions.

The only non-vanishing commutators are

    [a_i(t), a_j†(t')] = δ_ij Δ(t - t')
                         + δ_i1 δ_j2 Δ(t' - t + T)
                         + δ_i2 δ_j1 Δ(t' - t - T)

where the two cross rules can be switched off independently: the first is
tied to alpha, the second to beta (removing a travel direction removes the
matching identification).
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Iterator

from .delta import DeltaFactor, DeltaProfile, Kronecker
from .scalars import QI, Monomial, Scalar, monomial_str

RULE_DIAG = "diag"
RULE_12 = "cross12"
RULE_21 = "cross21"

DEFAULT_SHIFT_WINDOW = 8


class ShiftWindowError(ValueError):
    """A factor's time shift left the configured window."""


@dataclass(frozen=True, order=True, slots=True)
class ModeOp:
    region: int
    dagger: bool
    shift: int = 0

    def __post_init__(self):
        if not isinstance(self.region, int) or self.region < 1:
            raise ValueError(f"region must be a positive integer, got {self.region!r}")
        if not isinstance(self.shift, int):
            raise TypeError("shifts are integers (units of T)")

    @property
    def normal_key(self) -> tuple[int, int, int]:
        return (0 if self.dagger else 1, self.region, self.shift)

    def shifted(self, k: int) -> "ModeOp":
        return ModeOp(self.region, self.dagger, self.shift + k)

    def adjoint(self) -> "ModeOp":
        return ModeOp(self.region, not self.dagger, self.shift)

    def to_json(self) -> dict:
        return {"region": self.region, "dagger": self.dagger, "shift": self.shift}

    @classmethod
    def from_json(cls, data: dict) -> "ModeOp":
        return cls(int(data["region"]), bool(data["dagger"]), int(data["shift"]))

    def __str__(self) -> str:
        return f"a{self.region}{'†' if self.dagger else ''}({time_label(self.shift)})"


def time_label(k: int) -> str:
    if k == 0:
        return "t"
    mag = "T" if abs(k) == 1 else f"{abs(k)}T"
    return f"t{'+' if k > 0 else '-'}{mag}"


def ann(region: int, shift: int = 0) -> ModeOp:
    return ModeOp(region, False, shift)


def cre(region: int, shift: int = 0) -> ModeOp:
    return ModeOp(region, True, shift)


@dataclass(frozen=True)
class AlgebraRules:
    """Which commutator rules are active, plus the shift window."""

    cross12: bool = True
    cross21: bool = True
    shift_window: int = DEFAULT_SHIFT_WINDOW


DEFAULT_RULES = AlgebraRules()


def contraction(a: ModeOp, b: ModeOp,
                rules: AlgebraRules = DEFAULT_RULES) -> tuple[str, DeltaFactor] | None:
    """The single delta produced by ``[a, b]`` for annihilator ``a``, creator ``b``.

    Returns ``(rule_name, delta)`` or None when the commutator vanishes.  At
    most one rule can fire for a given pair of regions.
    """
    if a.dagger or not b.dagger:
        raise ValueError(f"contraction needs (annihilator, creator), got ({a}, {b})")
    i, j = a.region, b.region
    t, tp = a.shift, b.shift
    if i == j:
        return RULE_DIAG, DeltaFactor.lit(t - tp)
    if i == 1 and j == 2 and rules.cross12:
        return RULE_12, DeltaFactor.lit(tp - t + 1)
    if i == 2 and j == 1 and rules.cross21:
        return RULE_21, DeltaFactor.lit(tp - t - 1)
    return None


def commutator(a: ModeOp, b: ModeOp, rules: AlgebraRules = DEFAULT_RULES) -> "OperatorSum":
    """``[a, b]`` for an annihilator ``a`` and a creator ``b``, as a scalar sum."""
    c = contraction(a, b, rules)
    if c is None:
        return OperatorSum()
    return OperatorSum([OperatorTerm(Scalar.const(1), (), (c[1],))])


TermKey = tuple[tuple[ModeOp, ...], tuple[DeltaFactor, ...]]


@dataclass(frozen=True)
class OperatorTerm:
    coeff: Scalar
    factors: tuple[ModeOp, ...] = ()
    deltas: tuple[DeltaFactor, ...] = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "factors", tuple(self.factors))
        object.__setattr__(self, "deltas", tuple(sorted(self.deltas)))

    @property
    def key(self) -> TermKey:
        return (self.factors, self.deltas)

    def is_normal(self) -> bool:
        return is_normal_word(self.factors)

    @property
    def creators(self) -> list[ModeOp]:
        return [f for f in self.factors if f.dagger]

    @property
    def annihilators(self) -> list[ModeOp]:
        return [f for f in self.factors if not f.dagger]

    def net_shift(self) -> int:
        """Time displacement carried by the term: creator shifts minus annihilator shifts."""
        return sum(f.shift if f.dagger else -f.shift for f in self.factors)

    def to_json(self) -> dict:
        return {
            "coeff": scalar_to_json(self.coeff),
            "deltas": [d.to_json() for d in self.deltas],
            "factors": [f.to_json() for f in self.factors],
        }

    @classmethod
    def from_json(cls, data: dict) -> "OperatorTerm":
        return cls(scalar_from_json(data["coeff"]),
                   tuple(ModeOp.from_json(f) for f in data["factors"]),
                   tuple(DeltaFactor.from_json(d) for d in data["deltas"]))

    def __str__(self) -> str:
        body = " ".join(str(f) for f in self.factors)
        body = " ".join([*(str(d) for d in self.deltas), body]).strip()
        coeff = str(self.coeff)
        if " " in coeff:
            coeff = f"({coeff})"
        if not body:
            return coeff
        return body if coeff == "1" else f"{coeff} {body}"


def scalar_to_json(s: Scalar) -> list[dict]:
    return [
        {
            "monomial": list(mono),
            "re": {"num": c.re.numerator, "den": c.re.denominator},
            "im": {"num": c.im.numerator, "den": c.im.denominator},
        }
        for mono, c in s.items()
    ]


def scalar_from_json(data: list[dict]) -> Scalar:
    from fractions import Fraction

    return Scalar({
        tuple(e["monomial"]): QI(Fraction(e["re"]["num"], e["re"]["den"]),
                                 Fraction(e["im"]["num"], e["im"]["den"]))
        for e in data
    })


def _term_sort_key(key: TermKey):
    factors, deltas = key
    return (len(factors), [f.normal_key for f in factors], deltas)


class OperatorSum:
    """Linear combination of operator words, merged by (factors, deltas)."""

    __slots__ = ("_terms",)

    def __init__(self, terms: Iterable[OperatorTerm] = ()):
        self._terms: dict[TermKey, Scalar] = {}
        for t in terms:
            self._add(t.key, t.coeff)

    def _add(self, key: TermKey, coeff: Scalar) -> None:
        total = self._terms.get(key)
        total = coeff if total is None else total + coeff
        if total.is_zero():
            self._terms.pop(key, None)
        else:
            self._terms[key] = total

    @classmethod
    def _from_dict(cls, terms: dict[TermKey, Scalar]) -> "OperatorSum":
        out = cls()
        out._terms = {k: v for k, v in terms.items() if not v.is_zero()}
        return out

    @classmethod
    def identity(cls, coeff=1) -> "OperatorSum":
        return cls([OperatorTerm(Scalar.const(coeff) if not isinstance(coeff, Scalar) else coeff)])

    @classmethod
    def word(cls, *ops: ModeOp, coeff=1) -> "OperatorSum":
        c = coeff if isinstance(coeff, Scalar) else Scalar.const(coeff)
        return cls([OperatorTerm(c, tuple(ops))])

    def __iter__(self) -> Iterator[OperatorTerm]:
        for key in sorted(self._terms, key=_term_sort_key):
            yield OperatorTerm(self._terms[key], *key)

    def __len__(self) -> int:
        return len(self._terms)

    def keys(self) -> list[TermKey]:
        return sorted(self._terms, key=_term_sort_key)

    def coefficient(self, factors: Iterable[ModeOp], deltas: Iterable[DeltaFactor] = ()) -> Scalar:
        return self._terms.get((tuple(factors), tuple(sorted(deltas))), Scalar())

    def is_zero(self) -> bool:
        return not self._terms

    def is_normal(self) -> bool:
        return all(is_normal_word(f) and list(f) == _sorted_normal(f) for f, _ in self._terms)

    def __add__(self, other: "OperatorSum") -> "OperatorSum":
        out = OperatorSum._from_dict(dict(self._terms))
        for key, c in other._terms.items():
            out._add(key, c)
        return out

    def __neg__(self) -> "OperatorSum":
        return OperatorSum._from_dict({k: -v for k, v in self._terms.items()})

    def __sub__(self, other: "OperatorSum") -> "OperatorSum":
        return self + (-other)

    def scale(self, c) -> "OperatorSum":
        c = c if isinstance(c, Scalar) else Scalar.const(c)
        return OperatorSum._from_dict({k: v * c for k, v in self._terms.items()})

    def __mul__(self, other) -> "OperatorSum":
        if isinstance(other, OperatorSum):
            return multiply(self, other)
        return self.scale(other)

    def __rmul__(self, other) -> "OperatorSum":
        return self.scale(other)

    def __eq__(self, other) -> bool:
        if not isinstance(other, OperatorSum):
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self):
        return hash(frozenset(self._terms.items()))

    def __repr__(self) -> str:
        return f"OperatorSum({self})"

    def __str__(self) -> str:
        if not self._terms:
            return "0"
        return " + ".join(str(t) for t in self).replace("+ -", "- ")

    def monomials(self) -> list[Monomial]:
        return sorted({m for c in self._terms.values() for m in c.monomials()})

    def group_by_monomial(self) -> dict[Monomial, "OperatorSum"]:
        """Split into pure-number coefficient sums, one per parameter monomial."""
        groups: dict[Monomial, dict[TermKey, Scalar]] = {}
        for key, c in self._terms.items():
            for mono, q in c.items():
                groups.setdefault(mono, {})[key] = Scalar.const(q)
        return {m: OperatorSum._from_dict(groups[m]) for m in sorted(groups)}

    def restrict_monomial(self, mono: Monomial) -> "OperatorSum":
        return self.group_by_monomial().get(tuple(mono), OperatorSum())

    def evaluate_deltas(self, profile: DeltaProfile | None = None, T: float = 1.0) -> "OperatorSum":
        """Replace every literal Δ(mT) by its value under ``profile``.

        State-dependent deltas (signed/abs) are kept.  With the Kronecker
        profile the result stays exact.
        """
        profile = profile or Kronecker()
        out = OperatorSum()
        for key, c in self._terms.items():
            factors, deltas = key
            w = 1
            kept = []
            for d in deltas:
                if d.kind == "lit":
                    w = w * d.weight(profile, T)
                else:
                    kept.append(d)
            if w == 0:
                continue
            out._add((factors, tuple(kept)), c * Scalar.const(w))
        return out

    def max_abs_shift(self) -> int:
        return max((abs(f.shift) for fs, _ in self._terms for f in fs), default=0)

    def adjoint(self) -> "OperatorSum":
        """Hermitian conjugate: reverse each word and flip daggers."""
        return OperatorSum(
            OperatorTerm(c.conjugate(), tuple(f.adjoint() for f in reversed(fs)), ds)
            for (fs, ds), c in self._terms.items()
        )

    def to_json(self) -> list[dict]:
        return [t.to_json() for t in self]

    @classmethod
    def from_json(cls, data: list[dict]) -> "OperatorSum":
        return cls(OperatorTerm.from_json(d) for d in data)


def is_normal_word(word: Iterable[ModeOp]) -> bool:
    seen_ann = False
    for f in word:
        if f.dagger and seen_ann:
            return False
        seen_ann = seen_ann or not f.dagger
    return True


def _sorted_normal(word: Iterable[ModeOp]) -> list[ModeOp]:
    return sorted(word, key=lambda f: f.normal_key)


def multiply(x: OperatorSum, y: OperatorSum) -> OperatorSum:
    """Concatenate words pairwise; the result is not normal-ordered."""
    out: dict[TermKey, Scalar] = {}
    for (fx, dx), cx in x._terms.items():
        for (fy, dy), cy in y._terms.items():
            key = (fx + fy, tuple(sorted(dx + dy)))
            c = cx * cy
            out[key] = out[key] + c if key in out else c
    return OperatorSum._from_dict(out)


# Each entry: (normal word, deltas, rules used) -> integer multiplicity.
_WordExpansion = tuple[tuple[tuple[tuple[ModeOp, ...], tuple[DeltaFactor, ...], tuple[str, ...]], int], ...]


@lru_cache(maxsize=None)
def _normal_word(word: tuple[ModeOp, ...], rules: AlgebraRules) -> _WordExpansion:
    for i in range(len(word) - 1):
        left, right = word[i], word[i + 1]
        if left.dagger or not right.dagger:
            continue
        out: Counter = Counter()
        swapped = word[:i] + (right, left) + word[i + 2:]
        for key, n in _normal_word(swapped, rules):
            out[key] += n
        c = contraction(left, right, rules)
        if c is not None:
            rule, delta = c
            for (w, ds, used), n in _normal_word(word[:i] + word[i + 2:], rules):
                out[(w, tuple(sorted(ds + (delta,))), tuple(sorted(used + (rule,))))] += n
        return tuple((k, n) for k, n in out.items() if n)
    return (((tuple(_sorted_normal(word)), (), ()), 1),)


def normal_order(s: OperatorSum, rules: AlgebraRules = DEFAULT_RULES,
                 trace: Counter | None = None) -> OperatorSum:
    """Rewrite ``s`` so every word has creators left of annihilators.

    Each swap of an adjacent (annihilator, creator) pair emits its commutator,
    so the inversion count strictly drops and the rewrite terminates.  Within
    each group factors are sorted by (region, shift).  If ``trace`` is given it
    accumulates how many contractions each commutator rule contributed to
    surviving terms.
    """
    out: dict[TermKey, Scalar] = {}
    for (factors, deltas), c in s._terms.items():
        for (w, ds, used), n in _normal_word(factors, rules):
            key = (w, tuple(sorted(deltas + ds)))
            val = c * Scalar.const(n)
            out[key] = out[key] + val if key in out else val
            if trace is not None:
                for rule in used:
                    trace[rule] += abs(n)
    return OperatorSum._from_dict(out)


@dataclass(frozen=True)
class Couplings:
    """Which couplings of the Hamiltonian are present (as symbols).

    Setting alpha (beta) to False also removes the matching cross rule from
    the commutators.
    """

    N: int = 3
    alpha: bool = True
    beta: bool = True
    g: bool = True
    shift_window: int = DEFAULT_SHIFT_WINDOW
    max_power: int = 4

    def __post_init__(self):
        if self.N < 3:
            raise ValueError("the model needs at least three regions (two mouths and the rest)")

    @property
    def rules(self) -> AlgebraRules:
        return AlgebraRules(cross12=self.alpha, cross21=self.beta, shift_window=self.shift_window)


def build_hamiltonian(couplings: Couplings = Couplings()) -> OperatorSum:
    """``α a1†(t+T) a2(t) + β a2†(t-T) a1(t) + g Σ_i ai†(t) ai(t)``."""
    terms = []
    if couplings.alpha:
        terms.append(OperatorTerm(Scalar.param("alpha"), (cre(1, 1), ann(2, 0))))
    if couplings.beta:
        terms.append(OperatorTerm(Scalar.param("beta"), (cre(2, -1), ann(1, 0))))
    if couplings.g:
        for i in range(1, couplings.N + 1):
            terms.append(OperatorTerm(Scalar.param("g"), (cre(i), ann(i))))
    return OperatorSum(terms)


def check_shift_window(s: OperatorSum, window: int) -> None:
    worst = s.max_abs_shift()
    if worst > window:
        raise ShiftWindowError(f"shift {worst} exceeds the window |k| <= {window}")


@lru_cache(maxsize=32)
def hamiltonian_power(k: int, couplings: Couplings = Couplings()) -> OperatorSum:
    """Normal-ordered ``H**k`` with exact coefficients and symbolic deltas."""
    if not isinstance(k, int) or k < 1:
        raise ValueError("power must be a positive integer")
    if k > couplings.max_power:
        raise ValueError(f"power {k} exceeds the configured maximum {couplings.max_power}")
    H = build_hamiltonian(couplings)
    if k == 1:
        return H
    prev = hamiltonian_power(k - 1, couplings)
    out = normal_order(multiply(prev, H), couplings.rules)
    check_shift_window(out, couplings.shift_window)
    return out


def heisenberg_eom(op: ModeOp, couplings: Couplings = Couplings(),
                   convention: str = "h_first", profile: DeltaProfile | None = None,
                   T: float = 1.0, collapse: bool = True) -> OperatorSum:
    """Right-hand side of ``i d/dt op``.

    ``convention="h_first"`` uses ``i d/dt a = [H, a]``, the sign choice of
    the model's equations of motion; ``"standard"`` uses ``[a, H]``.
    With ``collapse`` the literal deltas are evaluated under ``profile``
    (Kronecker by default).
    """
    if convention not in ("h_first", "standard"):
        raise ValueError(f"unknown convention {convention!r}")
    H = build_hamiltonian(couplings)
    X = OperatorSum.word(op)
    rules = couplings.rules
    comm = normal_order(multiply(H, X), rules) - normal_order(multiply(X, H), rules)
    if convention == "standard":
        comm = -comm
    if collapse:
        comm = comm.evaluate_deltas(profile, T)
    return comm


def format_grouped(s: OperatorSum) -> str:
    lines = []
    for mono, part in s.group_by_monomial().items():
        lines.append(f"[{monomial_str(mono)}]  {part}")
    return "\n".join(lines)
