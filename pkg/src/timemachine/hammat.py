"""Matrix elements on a truncated occupation basis and the truncated evolution series.

Conventions
-----------
A kernel entry ``K[n, n'][m]`` is the amplitude for the operator acting on
the ket ``|n>`` to produce ``|n'>`` together with a time offset ``t' - t = mT``.
This is the index order of the printed one-body matrix elements, e.g. the
alpha term has ``n' = n + e1 - e2``, weight ``sqrt(n2 (n1 + 1))`` and offset
``m = +1``.  A term's offset is its net shift (creator shifts minus annihilator
shifts); state-dependent deltas attached to a term multiply pointwise.

On the joint (occupation x time slot) space with slots ``-M..M`` the entry
connects row ``(n, s)`` to column ``(n', s + m)``.  Slots outside the window
are dropped (absorbing boundary).
"""
from __future__ import annotations

import csv
import itertools
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import sparse

from .delta import DeltaProfile, Kronecker
from .opalg import (Couplings, OperatorSum, OperatorTerm, build_hamiltonian,
                    hamiltonian_power)
from .scalars import Monomial, Scalar
from .surd import Surd

MAX_STATES = 10**6

FockIndex = tuple[int, ...]


@dataclass(frozen=True)
class ModelParams:
    alpha: float = 0.3
    beta: float = 0.3
    g: float = 1.0
    T: float = 1.0
    N: int = 3
    n_max: int = 1
    M: int = 4
    delta: DeltaProfile = field(default_factory=Kronecker)

    def __post_init__(self):
        if self.N < 3:
            raise ValueError("N must be at least 3")
        if self.n_max < 1:
            raise ValueError("n_max must be at least 1")
        if self.M < 1:
            raise ValueError("the time window half-width M must be at least 1")
        if not self.T > 0:
            raise ValueError("T must be positive")

    @property
    def couplings(self) -> Couplings:
        return Couplings(N=self.N, alpha=self.alpha != 0, beta=self.beta != 0, g=self.g != 0)

    def to_json(self) -> dict:
        return {"alpha": self.alpha, "beta": self.beta, "g": self.g, "T": self.T,
                "N": self.N, "n_max": self.n_max, "M": self.M, "delta": self.delta.to_json()}


def enumerate_basis(params: ModelParams) -> list[FockIndex]:
    """All occupation vectors with entries ``0..n_max``, in lexicographic order."""
    size = (params.n_max + 1) ** params.N
    if size > MAX_STATES:
        raise ValueError(f"basis of {size} states exceeds the limit of {MAX_STATES}")
    return list(itertools.product(range(params.n_max + 1), repeat=params.N))


@dataclass
class TruncationReport:
    dropped: int = 0
    examples: list = field(default_factory=list)

    def record(self, n, term: OperatorTerm) -> None:
        self.dropped += 1
        if len(self.examples) < 10:
            self.examples.append({"ket": list(n), "term": str(term)})

    def to_json(self) -> dict:
        return {"dropped": self.dropped, "examples": self.examples}


def apply_word(factors, n: FockIndex):
    """Act with a word on ``|n>``; returns ``(n', radicand)`` or None if it annihilates."""
    occ = list(n)
    rad = 1
    for f in reversed(factors):
        i = f.region - 1
        if i >= len(occ):
            raise ValueError(f"{f} acts on region {f.region} but the basis has {len(occ)} regions")
        if f.dagger:
            occ[i] += 1
            rad *= occ[i]
        else:
            if occ[i] == 0:
                return None
            rad *= occ[i]
            occ[i] -= 1
    return tuple(occ), rad


def _term_offsets(term: OperatorTerm, profile: DeltaProfile, T: float):
    """(offset, weight) pairs for a term's time kernel, literal deltas included."""
    lit = 1
    explicit = []
    for d in term.deltas:
        if d.kind == "lit":
            lit = lit * d.weight(profile, T)
        else:
            explicit.append(d)
    if lit == 0:
        return []
    m0 = term.net_shift()
    r = profile.support_radius(T)
    out = []
    for m in range(m0 - r, m0 + r + 1):
        w = lit * profile.at_lattice(m - m0, T)
        for d in explicit:
            w = w * d.weight(profile, T, offset=m)
        if w != 0:
            out.append((m, w))
    return out


def _iter_contributions(s: OperatorSum, basis, n_max: int, profile, T, report):
    for term in s:
        if not term.is_normal():
            raise ValueError(f"kernel_of expects a normal-ordered sum, got {term}")
        offsets = _term_offsets(term, profile, T)
        if not offsets:
            continue
        for n in basis:
            hit = apply_word(term.factors, n)
            if hit is None:
                continue
            n2, rad = hit
            if max(n2) > n_max:
                report.record(n, term)
                continue
            yield term, n, n2, rad, offsets


class MatrixElementKernel:
    """Numeric kernel: one sparse ``len(basis) x len(basis)`` block per offset."""

    def __init__(self, basis: list[FockIndex], blocks: dict[int, sparse.csr_matrix],
                 truncation: TruncationReport | None = None):
        self.basis = list(basis)
        self.index = {n: i for i, n in enumerate(self.basis)}
        self.blocks = {m: b.tocsr() for m, b in blocks.items() if b.nnz and abs(b).max() > 0}
        self.truncation = truncation or TruncationReport()

    @classmethod
    def identity(cls, basis) -> "MatrixElementKernel":
        return cls(basis, {0: sparse.identity(len(basis), dtype=complex, format="csr")})

    @property
    def offsets(self) -> list[int]:
        return sorted(self.blocks)

    def support_radius(self) -> int:
        return max((abs(m) for m in self.blocks), default=0)

    def entry(self, n: FockIndex, n2: FockIndex) -> dict[int, complex]:
        i, j = self.index[tuple(n)], self.index[tuple(n2)]
        out = {}
        for m in self.offsets:
            v = self.blocks[m][i, j]
            if v != 0:
                out[m] = complex(v)
        return out

    def __getitem__(self, key) -> dict[int, complex]:
        return self.entry(*key)

    def compose(self, other: "MatrixElementKernel") -> "MatrixElementKernel":
        """Kernel of the product: apply ``self`` then ``other`` (offsets add)."""
        if self.basis != other.basis:
            raise ValueError("kernels live on different bases")
        out: dict[int, sparse.csr_matrix] = {}
        for m1, b1 in self.blocks.items():
            for m2, b2 in other.blocks.items():
                prod = b1 @ b2
                out[m1 + m2] = out[m1 + m2] + prod if m1 + m2 in out else prod
        return MatrixElementKernel(self.basis, out)

    def joint_matrix(self, M: int) -> np.ndarray:
        """Dense realization on slots ``-M..M`` (absorbing boundary)."""
        nb = len(self.basis)
        size = (2 * M + 1) * nb
        H = np.zeros((size, size), dtype=complex)
        for m, block in self.blocks.items():
            dense = block.toarray()
            for s in range(-M, M + 1):
                s2 = s + m
                if -M <= s2 <= M:
                    r0, c0 = (s + M) * nb, (s2 + M) * nb
                    H[r0:r0 + nb, c0:c0 + nb] += dense
        return H

    def hermiticity_witnesses(self, tol: float = 1e-12) -> list[tuple]:
        """Entries with ``K[n,n'](m) != conj(K[n',n](-m))``."""
        out = []
        for m, block in self.blocks.items():
            other = self.blocks.get(-m)
            mirror = other.conj().T if other is not None else sparse.csr_matrix(block.shape)
            diff = (block - mirror).tocoo()
            for i, j, v in zip(diff.row, diff.col, diff.data):
                if abs(v) > tol:
                    out.append((self.basis[i], self.basis[j], m, complex(block[i, j])))
        return sorted(out, key=lambda w: (w[0], w[1], w[2]))

    def to_rows(self):
        for m in self.offsets:
            coo = self.blocks[m].tocoo()
            for i, j, v in sorted(zip(coo.row, coo.col, coo.data)):
                yield m, int(i), int(j), complex(v)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["offset", "row", "col", "re", "im"])
            for m, i, j, v in self.to_rows():
                w.writerow([m, i, j, repr(v.real), repr(v.imag)])

    def to_json(self) -> dict:
        return {
            "basis": [list(n) for n in self.basis],
            "entries": [{"offset": m, "row": i, "col": j, "re": v.real, "im": v.imag}
                        for m, i, j, v in self.to_rows()],
            "truncation": self.truncation.to_json(),
        }


def kernel_of(s: OperatorSum, params: ModelParams,
              basis: list[FockIndex] | None = None) -> MatrixElementKernel:
    """Numeric matrix-element kernel of a normal-ordered sum at the parameter values."""
    basis = basis or enumerate_basis(params)
    index = {n: i for i, n in enumerate(basis)}
    report = TruncationReport()
    profile = params.delta
    coeffs: dict = {}
    rows: dict[int, list] = {}
    for term, n, n2, rad, offsets in _iter_contributions(s, basis, params.n_max, profile, params.T, report):
        c = coeffs.get(term.key)
        if c is None:
            c = coeffs[term.key] = term.coeff.evaluate(params.alpha, params.beta, params.g)
        if c == 0:
            continue
        amp = c * math.sqrt(rad)
        for m, w in offsets:
            rows.setdefault(m, []).append((index[n], index[n2], amp * w))
    nb = len(basis)
    blocks = {}
    for m, entries in rows.items():
        i, j, v = zip(*entries)
        blocks[m] = sparse.coo_matrix((v, (i, j)), shape=(nb, nb), dtype=complex).tocsr()
    return MatrixElementKernel(basis, blocks, report)


def exact_kernel_of(s: OperatorSum, params: ModelParams,
                    basis: list[FockIndex] | None = None) -> tuple[dict, TruncationReport]:
    """Exact kernel ``{(n, n'): {m: Surd}}`` with symbolic parameter monomials.

    Only the Kronecker profile keeps weights exact; others are rejected.
    """
    if not isinstance(params.delta, Kronecker):
        raise ValueError("exact kernels need the Kronecker profile")
    basis = basis or enumerate_basis(params)
    report = TruncationReport()
    out: dict = {}
    for term, n, n2, rad, offsets in _iter_contributions(s, basis, params.n_max, params.delta, params.T, report):
        for m, w in offsets:
            val = Surd.sqrt(rad, term.coeff * Scalar.const(w))
            slot = out.setdefault((n, n2), {})
            slot[m] = slot[m] + val if m in slot else val
    cleaned = {}
    for key, kern in out.items():
        kern = {m: v for m, v in kern.items() if not v.is_zero()}
        if kern:
            cleaned[key] = kern
    return cleaned, report


def restrict_exact(kernel: dict, mono: Monomial) -> dict:
    out = {}
    for key, kern in kernel.items():
        part = {m: v.restrict_monomial(mono) for m, v in kern.items()}
        part = {m: v for m, v in part.items() if not v.is_zero()}
        if part:
            out[key] = part
    return out


def power_kernels(params: ModelParams, K: int, mode: str = "compose") -> list[MatrixElementKernel]:
    """Kernels of ``H**j`` for ``j = 0..K``.

    ``compose`` multiplies the one-body kernel on the truncated basis (the
    matrix power that the exponential series needs); ``symbolic`` evaluates
    the normal-ordered expansion of each power instead.
    """
    basis = enumerate_basis(params)
    couplings = params.couplings
    out = [MatrixElementKernel.identity(basis)]
    if K == 0:
        return out
    if mode == "compose":
        H = kernel_of(build_hamiltonian(couplings), params, basis)
        out.append(H)
        for _ in range(2, K + 1):
            out.append(out[-1].compose(H))
    elif mode == "symbolic":
        couplings = Couplings(N=couplings.N, alpha=couplings.alpha, beta=couplings.beta,
                              g=couplings.g, max_power=max(K, 1))
        for j in range(1, K + 1):
            out.append(kernel_of(hamiltonian_power(j, couplings), params, basis))
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return out


@dataclass
class EvolutionMatrix:
    U: np.ndarray
    basis: list[FockIndex]
    M: int
    K: int
    dt: float
    step_radius: int
    boundary: dict
    metadata: dict = field(default_factory=dict)

    @property
    def nb(self) -> int:
        return len(self.basis)

    def flat_index(self, n: FockIndex, s: int) -> int:
        return (s + self.M) * self.nb + self.basis.index(tuple(n))

    @property
    def interior_reach(self) -> int:
        return self.M - self.K * self.step_radius

    def interior_slots(self) -> list[int]:
        r = self.interior_reach
        return list(range(-r, r + 1)) if r >= 0 else []

    def slot_columns(self, slots) -> np.ndarray:
        return np.concatenate([np.arange((s + self.M) * self.nb, (s + self.M + 1) * self.nb)
                               for s in slots]) if slots else np.array([], dtype=int)

    def to_csv(self, path, tol: float = 0.0) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["row", "col", "re", "im"])
            rows, cols = np.nonzero(np.abs(self.U) > tol)
            for i, j in zip(rows, cols):
                v = self.U[i, j]
                w.writerow([int(i), int(j), repr(float(v.real)), repr(float(v.imag))])

    def to_json(self) -> dict:
        return {
            "M": self.M, "K": self.K, "dt": self.dt, "step_radius": self.step_radius,
            "basis": [list(n) for n in self.basis],
            "interior_slots": self.interior_slots(),
            "boundary": self.boundary,
            "metadata": self.metadata,
        }


def evolution_series(kernels: list[MatrixElementKernel], dt: float, K: int, M: int,
                     metadata: dict | None = None) -> EvolutionMatrix:
    """``U = sum_{j<=K} (-i dt)^j / j! H^j`` realized on slots ``-M..M``."""
    if len(kernels) < K + 1:
        raise ValueError(f"need kernels for powers 0..{K}, got {len(kernels)}")
    basis = kernels[0].basis
    nb = len(basis)
    size = (2 * M + 1) * nb
    U = np.zeros((size, size), dtype=complex)
    dropped_pairs = 0
    dropped_weight = 0.0
    for j in range(K + 1):
        c = (-1j * dt) ** j / math.factorial(j)
        if c == 0 and j > 0:
            continue
        for m, block in kernels[j].blocks.items():
            dense = block.toarray() * c
            norm = np.linalg.norm(dense)
            for s in range(-M, M + 1):
                s2 = s + m
                if -M <= s2 <= M:
                    r0, c0 = (s + M) * nb, (s2 + M) * nb
                    U[r0:r0 + nb, c0:c0 + nb] += dense
                elif norm > 0:
                    dropped_pairs += 1
                    dropped_weight += norm
    step = kernels[1].support_radius() if K >= 1 else 0
    boundary = {"dropped_slot_pairs": dropped_pairs, "dropped_weight": float(dropped_weight)}
    return EvolutionMatrix(U, basis, M, K, dt, step, boundary, dict(metadata or {}))


def evolve(params: ModelParams, dt: float, K: int, mode: str = "compose") -> EvolutionMatrix:
    """Convenience: kernels for ``params`` and the truncated series in one call."""
    kernels = power_kernels(params, K, mode)
    meta = {"params": params.to_json(), "mode": mode}
    U = evolution_series(kernels, dt, K, params.M, meta)
    U.metadata["truncation"] = kernels[1].truncation.to_json() if K >= 1 else {"dropped": 0}
    return U


def unitarity_defect(U: EvolutionMatrix, slots: list[int] | None = None,
                     norm: str = "fro") -> float:
    """``||U^† U - I||`` restricted to columns in ``slots`` (interior by default).

    Interior columns are those whose every series path stays inside the
    window, so the value does not depend on the boundary.
    """
    if U.interior_reach < 0:
        raise ValueError(f"window M={U.M} too small for series order K={U.K}")
    slots = U.interior_slots() if slots is None else list(slots)
    cols = U.slot_columns(slots)
    sub = U.U[:, cols]
    G = sub.conj().T @ sub - np.eye(len(cols))
    if norm == "fro":
        return float(np.linalg.norm(G))
    if norm == "spectral":
        return float(np.linalg.norm(G, 2))
    raise ValueError(f"unknown norm {norm!r}")


@dataclass
class FluxReport:
    before: list[float]
    after: list[float]
    change: list[float]
    total_change: float
    probability_leak: float

    def to_json(self) -> dict:
        return {"before": self.before, "after": self.after, "change": self.change,
                "total_change": self.total_change, "probability_leak": self.probability_leak}


def flux_asymmetry(U: EvolutionMatrix, initial: dict[FockIndex, float] | FockIndex,
                   slot: int = 0) -> FluxReport:
    """Expected occupation change per region under ``U`` for a start in ``slot``.

    ``initial`` maps occupation vectors to probabilities (or is a single
    vector).  The evolved state is renormalized before taking expectations;
    the change of its squared norm is reported as the probability leak.
    """
    if isinstance(initial, tuple) and initial and isinstance(initial[0], int):
        initial = {initial: 1.0}
    total = sum(initial.values())
    if abs(total - 1.0) > 1e-12:
        raise ValueError(f"initial distribution sums to {total}, not 1")
    if slot not in U.interior_slots():
        raise ValueError(f"start slot {slot} is not an interior slot")
    psi = np.zeros(U.U.shape[0], dtype=complex)
    for n, p in initial.items():
        psi[U.flat_index(n, slot)] = math.sqrt(p)
    occ = np.array([U.basis[k % U.nb] for k in range(U.U.shape[0])], dtype=float)
    before = (np.abs(psi) ** 2) @ occ
    out = U.U @ psi
    weight = float(np.sum(np.abs(out) ** 2))
    after = (np.abs(out) ** 2) @ occ / weight
    change = after - before
    return FluxReport([float(x) for x in before], [float(x) for x in after],
                      [float(x) for x in change], float(change.sum()), weight - 1.0)


def series_remainder_bound(norm_h: float, dt: float, K: int, terms: int = 60) -> float:
    """Tail bound ``sum_{j>K} (||H|| dt)^j / j!`` on the truncation error."""
    x = norm_h * dt
    return sum(x**j / math.factorial(j) for j in range(K + 1, K + 1 + terms))


def write_json(path, data) -> None:
    Path(path).write_text(json.dumps(data, indent=2, sort_keys=False, default=str) + "\n")
