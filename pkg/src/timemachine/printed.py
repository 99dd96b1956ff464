"""Transcriptions of the published closed-form results, kept verbatim for auditing.

Nothing here is derived; every formula is copied as printed, including
entries that disagree with the bosonic algebra.  The audit module compares
these against the engine.

Operator words in the H³ table use a small token language:

``c1+``  a1†(t+T)      ``c2-``  a2†(t-T)      ``c2``  a2†(t)
``a1``   a1(t)         ``cj``   aj†(t) with j a summed index
``n2``   a2†a2         ``1``    the identity

A token that cannot be read (the table has typos such as ``a_aa_1`` and a
free index ``a_i``) is written with a leading ``?`` and makes the entry
unparseable.
"""
from __future__ import annotations

import itertools
import re
from dataclasses import dataclass

from .scalars import QI_ONE, Monomial, Scalar
from .surd import Surd

ALPHA: Monomial = (1, 0, 0)
BETA: Monomial = (0, 1, 0)
G: Monomial = (0, 0, 1)


def mono(a: int = 0, b: int = 0, c: int = 0) -> Monomial:
    return (a, b, c)


# ---------------------------------------------------------------------------
# One- and two-body matrix elements
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PrintedElement:
    """One printed contribution: a target rule, a radicand and an offset.

    ``target(n)`` returns the outgoing occupation ``n'`` (or None when the
    Kronecker deltas cannot fire), ``value(n)`` the exact amplitude
    (without the coupling), ``offsets`` the time offsets ``m`` where the
    attached delta fires.
    """

    label: str
    monomial: Monomial
    target: object
    value: object
    offsets: tuple[int, ...]
    note: str = ""


def _hop(d1: int, d2: int):
    def target(n):
        out = list(n)
        out[0] += d1
        out[1] += d2
        if min(out) < 0:
            return None
        return tuple(out)
    return target


def _same(n):
    return tuple(n)


def _sqrt(f):
    return lambda n: Surd.sqrt(f(n))


def _const(f):
    return lambda n: Surd.sqrt(1, f(n))


def one_body() -> list[PrintedElement]:
    """``<n,t|H|n',t'>`` as printed."""
    return [
        PrintedElement("alpha hop", ALPHA, _hop(+1, -1),
                       _sqrt(lambda n: n[1] * (n[0] + 1)), (1,)),
        PrintedElement("beta hop", BETA, _hop(-1, +1),
                       _sqrt(lambda n: n[0] * n[1]), (-1,)),
        PrintedElement("g number", G, _same, _const(lambda n: sum(n)), (0,)),
    ]


def two_body() -> list[PrintedElement]:
    """``<n,t|H²|n',t'>`` as printed.

    Interpretations: the lower-case delta on the alpha-beta term is read as
    the same profile, so ``Δ(|t-t'|-T)`` fires at ``m = ±1``; that term
    carries no Kronecker delta on regions 1 and 2 and is read as diagonal;
    the ``+1`` inside the mixed terms is read as a diagonal entry at ``m=0``.
    """
    return [
        PrintedElement("alpha^2 double hop", mono(2), _hop(-2, +2),
                       _sqrt(lambda n: (n[0] - 2) * (n[0] - 3) * (n[1] + 1) * (n[1] + 2)), (-1,)),
        PrintedElement("alpha^2 single hop", mono(2), _hop(-1, +1),
                       _sqrt(lambda n: (n[0] - 1) * (n[1] + 1)), (-1,)),
        PrintedElement("beta^2 double hop", mono(0, 2), _hop(+2, -2),
                       _sqrt(lambda n: (n[0] + 3) * (n[0] + 4) * n[1] * (n[1] - 1)), (1,)),
        PrintedElement("beta^2 single hop", mono(0, 2), _hop(+1, -1),
                       _sqrt(lambda n: (n[0] - 1) * (n[1] + 1)), (1,),
                       note="radicand repeats the alpha^2 single-hop factor"),
        PrintedElement("g^2 diagonal", mono(0, 0, 2), _same,
                       _const(lambda n: sum(a * b for a, b in itertools.permutations(n, 2))
                              + sum(a * (a + 1) for a in n)), (0,)),
        PrintedElement("alpha beta diagonal", mono(1, 1), _same,
                       _const(lambda n: n[1] * (n[0] + 1) + n[0] * n[1]), (-1, 1),
                       note="lower-case delta read as the same profile"),
        PrintedElement("alpha g hop", mono(1, 0, 1), _hop(-1, +1),
                       lambda n: Surd.sqrt((n[0] - 1) * (n[1] + 1), sum(n)), (-1,)),
        PrintedElement("alpha g diagonal", mono(1, 0, 1), _same,
                       _const(lambda n: sum(n)), (0,), note="'+1' read as a diagonal entry"),
        PrintedElement("beta g hop", mono(0, 1, 1), _hop(+1, -1),
                       lambda n: Surd.sqrt((n[1] - 1) * (n[0] + 1), sum(n)), (1,)),
        PrintedElement("beta g diagonal", mono(0, 1, 1), _same,
                       _const(lambda n: sum(n)), (0,), note="'+1' read as a diagonal entry"),
    ]


def printed_elements(k: int) -> list[PrintedElement]:
    if k == 1:
        return one_body()
    if k == 2:
        return two_body()
    raise ValueError("printed matrix elements exist for k = 1 and k = 2 only")


def printed_kernel(k: int, basis) -> dict:
    """``{monomial: {(n, n'): {m: (Surd, [labels])}}}`` summed over printed terms."""
    out: dict = {}
    for el in printed_elements(k):
        table = out.setdefault(el.monomial, {})
        for n in basis:
            n2 = el.target(n)
            if n2 is None or n2 not in basis:
                continue
            v = el.value(n).scale(Scalar({el.monomial: QI_ONE}))
            if v.is_zero():
                continue
            for m in el.offsets:
                slot = table.setdefault((tuple(n), n2), {})
                prev, labels = slot.get(m, (Surd(), []))
                slot[m] = (prev + v, labels + [el.label])
    return out


# ---------------------------------------------------------------------------
# The H³ table
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TableEntry:
    coeff: int
    word: str
    sums: tuple[str, ...] = ()
    text: str = ""


def _e(coeff, word, sums="", text=""):
    return TableEntry(coeff, word, tuple(sums), text)


H3_TABLE: dict[Monomial, list[TableEntry]] = {
    mono(3): [
        _e(1, "c1+ c1+ c1+ a2 a2 a2"),
        _e(3, "c1+ c1+ a2 a2"),
        _e(1, "c1+ a2"),
    ],
    mono(0, 3): [
        _e(1, "a1 a1 a1 c2- c2- c2-"),
        _e(-6, "a1 a1 c2- c2-"),
        _e(7, "a1 c2-"),
    ],
    mono(0, 0, 3): [
        _e(1, "ci cj ck ai aj ak", "ijk"),
        _e(3, "ci cj ai aj", "ij"),
        _e(1, "ni", "i"),
    ],
    mono(2, 1): [
        _e(3, "c1+ c1+ a2 a2 a1 c2-"),
        _e(-3, "c1+ c1+ a2 a2"),
        _e(1, "c1+ a2 a1 c2-"),
        _e(-1, "c1+ a2"),
    ],
    mono(1, 2): [
        _e(3, "c1+ a2 a1 a1 c2- c2-"),
        _e(-9, "c1+ a2 a1 c2-"),
        _e(3, "c1+ a2"),
    ],
    mono(2, 0, 1): [
        _e(3, "c1+ c1+ cj a2 a2 aj", "j"),
        _e(3, "c1+ c1+ a2 a2"),
        _e(2, "c1+ cj aj a2", "j"),
        _e(3, "c1+ c2 a2 a2"),
        _e(1, "c1+ a2"),
        _e(1, "n2"),
    ],
    mono(1, 0, 2): [
        _e(3, "c1+ cj ck a2 ak", "jk"),
        _e(6, "c1+ cj a2 aj", "j"),
        _e(1, "c1+ a2"),
        _e(3, "c2 cj aj a2", "j"),
        _e(2, "n2"),
    ],
    mono(1, 1, 1): [
        _e(8, "c1+ cj a2 a1 aj c2-", "j"),
        _e(-9, "c1+ a2"),
        _e(-2, "c2 a1"),
        _e(-1, "n2"),
        _e(-9, "c1+ a2 a1 c2-"),
        _e(-3, "c1+ c1 a2 a2"),
        _e(1, "c2 a2 a2 c2-"),
        _e(-1, "c1+ cj aj a1", "j"),
        _e(2, "c2 a2 a1 c2-"),
        _e(-1, "c1 cj aj a2", "j"),
    ],
    mono(0, 2, 1): [
        _e(3, "cj a1 aj a1 c2- c2-", "j"),
        _e(-2, "c1 a1 a2 c2-"),
        _e(-9, "cj ?ai aj c2-", "j", text="free index a_i"),
        _e(3, "?aa a1 c2- c2-", text="a_aa_1"),
        _e(-10, "a1 c2-"),
        _e(4, "n1"),
        _e(3, "nj", "j"),
        _e(3, "1"),
    ],
    mono(0, 1, 2): [
        _e(2, "cj ck a1 aj ak c2-", "jk"),
        _e(-2, "cj c1 a1 aj", "j"),
        _e(5, "cj a1 aj c2-", "j"),
        _e(-1, "cj ck aj ak", "jk"),
        _e(-4, "nj", "j"),
        _e(-3, "n1"),
        _e(1, "a1 c2-"),
        _e(-1, "1"),
    ],
}

_TOKEN = re.compile(r"^([can])([0-9ijk])([+-]?)$")

Factor = tuple[int, bool, int]


class UnparseableEntry(ValueError):
    pass


def expand_entry(entry: TableEntry, N: int = 3) -> list[tuple[Factor, ...]]:
    """All factor words of an entry, one per assignment of the summed indices.

    Factors are ``(region, dagger, shift)``.  Raises :class:`UnparseableEntry`
    for typo tokens or indices that are not summed.
    """
    tokens = entry.word.split()
    if any(t.startswith("?") for t in tokens):
        raise UnparseableEntry(entry.text or entry.word)
    words = []
    for values in itertools.product(range(1, N + 1), repeat=len(entry.sums)):
        env = dict(zip(entry.sums, values))
        word: list[Factor] = []
        for tok in tokens:
            if tok == "1":
                continue
            m = _TOKEN.match(tok)
            if not m:
                raise UnparseableEntry(tok)
            kind, idx, sign = m.groups()
            if idx.isdigit():
                region = int(idx)
            elif idx in env:
                region = env[idx]
            else:
                raise UnparseableEntry(f"index {idx} is not summed in {entry.word!r}")
            shift = {"": 0, "+": 1, "-": -1}[sign]
            if kind == "n":
                word += [(region, True, shift), (region, False, shift)]
            else:
                word.append((region, kind == "c", shift))
        words.append(tuple(word))
    return words


def factor_multiset(word) -> tuple[Factor, ...]:
    """Order-free key of a word: creators first, each group sorted."""
    return tuple(sorted(word, key=lambda f: (0 if f[1] else 1, f[0], f[2])))


def printed_h3_multisets(mono_: Monomial, N: int = 3) -> tuple[dict, list[dict]]:
    """``({multiset: coefficient}, unparseable)`` for one row of the H³ table."""
    out: dict = {}
    bad = []
    for entry in H3_TABLE[mono_]:
        try:
            words = expand_entry(entry, N)
        except UnparseableEntry as exc:
            bad.append({"coeff": entry.coeff, "word": entry.word, "reason": str(exc)})
            continue
        for w in words:
            key = factor_multiset(w)
            out[key] = out.get(key, 0) + entry.coeff
    return {k: v for k, v in out.items() if v}, bad


# ---------------------------------------------------------------------------
# Worm-track tables (only counts and weights are legible)
# ---------------------------------------------------------------------------

# number of diagrams per row for H and H²
TRACK_COUNTS_K12: dict[Monomial, int] = {
    ALPHA: 1, BETA: 1, G: 2,
    mono(2): 2, mono(0, 2): 2, mono(0, 0, 2): 3,
    mono(1, 1): 1, mono(1, 0, 1): 2, mono(0, 1, 1): 2,
}

# integer weights in row order for H³; the alpha g² row is absent
TRACK_WEIGHTS_K3: dict[Monomial, list[int]] = {
    mono(3): [1, 3, 1],
    mono(0, 3): [1, -6, 7],
    mono(0, 0, 3): [1, 1, 1, 1, 4, 4, 4, 5, 5],
    mono(2, 1): [3, -3, 1, -1],
    mono(1, 2): [3, -9, 3],
    mono(2, 0, 1): [3, 3, 3, 9, 9, 10, 3, 3, 5],
    mono(1, 1, 1): [8, 8, 8, 7, 7, -2, 2, -9, 3, -1, -2, -1, -1, -1],
    mono(0, 2, 1): [3, 3, 6, -9, -9, -19, 7, 3],
    mono(0, 1, 2): [2, 2, 2, 7, 7, 8, -3, -3, -1, -10, -5],
}

