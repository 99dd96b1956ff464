"""Worm-track diagrams: a picture of a normal-ordered term.

Regions 1 and 2 are the two mouths.  Each creator is paired with an
annihilator: ``a_i†(t+kT) a_j(t)`` becomes an arrow ``j -> i`` carrying
shift ``k`` and a same-time, same-region pair becomes a loop (a number
operator).  Factors left over when the creator and annihilator counts
differ are drawn as dangling edges and the track is marked non-conserving.

Regions beyond 2 are never drawn.  Terms built only from them are dropped
from tables, and loops on them are kept so that distinct terms keep
distinct keys.
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from .delta import DeltaProfile, Kronecker
from .opalg import Couplings, ModeOp, OperatorSum, OperatorTerm, hamiltonian_power
from .scalars import Monomial, monomial_str

MOUTHS = (1, 2)


@dataclass(frozen=True, order=True)
class Edge:
    """``kind`` is ``arrow``, ``loop`` or ``dangling``.

    For arrows ``src -> dst`` with shift ``k``; loops use ``src`` only;
    dangling edges store the lone factor's region in ``src``, ``dagger`` and
    its shift in ``k``.
    """

    rank: int
    kind: str
    src: int
    dst: int = 0
    k: int = 0
    dagger: bool = False

    @classmethod
    def arrow(cls, src: int, dst: int, k: int) -> "Edge":
        return cls(0, "arrow", src, dst, k)

    @classmethod
    def loop(cls, region: int) -> "Edge":
        return cls(1, "loop", region)

    @classmethod
    def dangling(cls, op: ModeOp) -> "Edge":
        return cls(2, "dangling", op.region, 0, op.shift, op.dagger)

    def mirrored(self) -> "Edge":
        def swap(r):
            return {1: 2, 2: 1}.get(r, r)
        return Edge(self.rank, self.kind, swap(self.src), swap(self.dst) if self.dst else 0,
                    -self.k, self.dagger)

    def to_json(self) -> dict:
        if self.kind == "arrow":
            return {"kind": "arrow", "from": self.src, "to": self.dst, "shift": self.k}
        if self.kind == "loop":
            return {"kind": "loop", "region": self.src}
        return {"kind": "dangling", "region": self.src, "dagger": self.dagger, "shift": self.k}

    def render(self) -> str:
        if self.kind == "loop":
            return f"({self.src})●↺"
        if self.kind == "dangling":
            glyph = "<~~" if self.dagger else "~~>"
            return f"({self.src})●{glyph}[{_shift(self.k)}]"
        if self.src == self.dst:
            return f"({self.src})●↻[{_shift(self.k)}]"
        lo, hi = sorted((self.src, self.dst))
        if self.dst == lo:
            return f"({lo})●<--[{_shift(self.k)}]--●({hi})"
        return f"({lo})●--[{_shift(self.k)}]-->●({hi})"


def _shift(k: int) -> str:
    if k == 0:
        return "0"
    return f"{'+' if k > 0 else '-'}{'' if abs(k) == 1 else abs(k)}T"


@dataclass(frozen=True)
class WormTrack:
    edges: tuple[Edge, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "edges", tuple(sorted(self.edges)))

    @property
    def key(self) -> str:
        return " ".join(e.render() for e in self.edges) or "∅"

    @property
    def conserving(self) -> bool:
        return all(e.kind != "dangling" for e in self.edges)

    def mirrored(self) -> "WormTrack":
        return WormTrack(tuple(e.mirrored() for e in self.edges))

    def to_json(self) -> dict:
        return {"edges": [e.to_json() for e in self.edges], "conserving": self.conserving,
                "key": self.key}


def render(track: WormTrack) -> str:
    """Deterministic one-line picture; ``∅`` for the empty track."""
    text = track.key
    return text if track.conserving else text + "  (non-conserving)"


def _pair_score(c: ModeOp, a: ModeOp) -> int:
    if c.region == a.region and c.shift == a.shift:
        return 2
    if (a.region, c.region, c.shift - a.shift) in ((2, 1, 1), (1, 2, -1)):
        return 2
    if c.region == a.region:
        return 1
    if c.region in MOUTHS and a.region in MOUTHS:
        return 1
    return 0


def _edge(c: ModeOp, a: ModeOp) -> Edge:
    if c.region == a.region and c.shift == a.shift:
        return Edge.loop(c.region)
    return Edge.arrow(a.region, c.region, c.shift - a.shift)


def term_to_track(term: OperatorTerm) -> WormTrack | None:
    """Track of a normal-ordered term, or None if it has no mouth factor.

    The pairing maximizes the number of loops and canonical hops; ties are
    broken by the smallest canonical key, so the result does not depend on
    the order of commuting factors.
    """
    if not term.is_normal():
        raise ValueError(f"term is not normal-ordered: {term}")
    if term.factors and all(f.region not in MOUTHS for f in term.factors):
        return None
    creators = term.creators
    annihilators = term.annihilators
    small, large = (creators, annihilators) if len(creators) <= len(annihilators) else (annihilators, creators)
    best = None
    for chosen in itertools.permutations(range(len(large)), len(small)):
        edges = []
        score = 0
        for i, j in enumerate(chosen):
            c, a = (small[i], large[j]) if small is creators else (large[j], small[i])
            score += _pair_score(c, a)
            edges.append(_edge(c, a))
        used = set(chosen)
        edges += [Edge.dangling(large[j]) for j in range(len(large)) if j not in used]
        track = WormTrack(tuple(edges))
        cand = (-score, track.key)
        if best is None or cand < best[0]:
            best = (cand, track)
    return best[1] if best else WormTrack()


@dataclass
class TrackRow:
    monomial: Monomial
    tracks: list[tuple[WormTrack, Fraction]]

    @property
    def weights(self) -> list[Fraction]:
        return [w for _, w in self.tracks]


@dataclass
class TrackTable:
    k: int
    rows: dict[Monomial, TrackRow]
    excluded_terms: int = 0
    merged_terms: int = 0
    profile: dict = field(default_factory=dict)

    def row(self, mono: Monomial) -> TrackRow:
        return self.rows.get(mono, TrackRow(mono, []))

    def mirrored(self) -> "TrackTable":
        rows = {}
        for mono, row in self.rows.items():
            m2 = (mono[1], mono[0], mono[2])
            rows[m2] = TrackRow(m2, sorted(((t.mirrored(), w) for t, w in row.tracks),
                                           key=lambda tw: tw[0].key))
        return TrackTable(self.k, dict(sorted(rows.items(), key=lambda kv: _mono_order(kv[0]))),
                          self.excluded_terms, self.merged_terms, self.profile)

    def to_json(self) -> dict:
        return {
            "k": self.k,
            "profile": self.profile,
            "excluded_terms": self.excluded_terms,
            "merged_terms": self.merged_terms,
            "rows": [
                {"monomial": monomial_str(mono, ascii_only=True),
                 "tracks": [{**t.to_json(), "weight": _num(w)} for t, w in row.tracks]}
                for mono, row in self.rows.items()
            ],
        }

    def to_text(self) -> str:
        lines = [f"term    | worm tracks of H^{self.k} (weight x track)", "-" * 60]
        for mono, row in self.rows.items():
            label = monomial_str(mono)
            parts = [f"{_num(w)}x {render(t)}" for t, w in row.tracks]
            if not parts:
                lines.append(f"{label:<8}| (none)")
                continue
            lines.append(f"{label:<8}| {parts[0]}")
            lines += [f"{'':<8}| {p}" for p in parts[1:]]
        return "\n".join(lines) + "\n"


def _num(w: Fraction):
    w = Fraction(w)
    return w.numerator if w.denominator == 1 else f"{w.numerator}/{w.denominator}"


def _mono_order(mono: Monomial):
    """Mouth couplings first, then by degree pattern, matching the table layout."""
    a, b, c = mono
    return (c, -a, -b)


def tracks_of_sum(s: OperatorSum, k: int = 0, profile: DeltaProfile | None = None,
                  T: float = 1.0) -> TrackTable:
    """Tabulate an operator sum after evaluating its literal deltas."""
    profile = profile or Kronecker()
    s = s.evaluate_deltas(profile, T)
    rows: dict[Monomial, dict[WormTrack, Fraction]] = {}
    excluded = merged = 0
    for mono, part in s.group_by_monomial().items():
        bucket = rows.setdefault(mono, {})
        for term in part:
            track = term_to_track(term)
            if track is None:
                excluded += 1
                continue
            q = term.coeff.coefficient((0, 0, 0))
            if q.im:
                raise ValueError(f"complex weight for {term}")
            if track in bucket:
                merged += 1
                bucket[track] += q.re
            else:
                bucket[track] = q.re
    table_rows = {}
    for mono in sorted(rows, key=_mono_order):
        items = sorted(((t, w) for t, w in rows[mono].items() if w), key=lambda tw: tw[0].key)
        table_rows[mono] = TrackRow(mono, items)
    return TrackTable(k, table_rows, excluded, merged, profile.to_json())


def tabulate(k: int, couplings: Couplings = Couplings(), profile: DeltaProfile | None = None,
             T: float = 1.0) -> TrackTable:
    """Worm tracks of ``H**k`` grouped by coupling monomial."""
    if not 1 <= k <= couplings.max_power:
        raise ValueError(f"k must lie in 1..{couplings.max_power}")
    return tracks_of_sum(hamiltonian_power(k, couplings), k, profile, T)


def mirror_diff(table: TrackTable, mono: Monomial) -> dict:
    """Compare the mirror of row ``mono`` with the row of the swapped monomial."""
    target = (mono[1], mono[0], mono[2])
    mirrored = {t.key: w for t, w in table.mirrored().row(target).tracks}
    actual = {t.key: w for t, w in table.row(target).tracks}
    # the mirrored table row `target` holds the image of row `mono`
    only_mirror = sorted(set(mirrored) - set(actual))
    only_actual = sorted(set(actual) - set(mirrored))
    weight_diff = sorted(k for k in set(mirrored) & set(actual) if mirrored[k] != actual[k])
    return {"source": monomial_str(mono, ascii_only=True),
            "target": monomial_str(target, ascii_only=True),
            "only_in_mirror": only_mirror, "only_in_target": only_actual,
            "weight_mismatch": weight_diff,
            "empty": not (only_mirror or only_actual or weight_diff)}


def write_table(table: TrackTable, path_json=None, path_text=None) -> None:
    if path_json:
        Path(path_json).write_text(json.dumps(table.to_json(), indent=2, ensure_ascii=False) + "\n")
    if path_text:
        Path(path_text).write_text(table.to_text(), encoding="utf-8")

