"""Independent reference implementations used to cross-check the engine.

Nothing here imports the rewrite engine or the kernel builder; the commutator
table and the one-body matrix elements are transcribed again from scratch.

* :func:`wick_expand` enumerates every set of disjoint (annihilator, later
  creator) contractions of a word (Wick's theorem for c-number commutators).
* :func:`dense_hamiltonian` assembles the joint (occupation x slot) matrix of
  the Hamiltonian entry by entry, and :func:`dense_series` sums the truncated
  exponential with plain dense matrix powers.
"""
from __future__ import annotations

import itertools
import math
from collections import Counter

import numpy as np

# A factor is (region, dagger, shift); deltas are ("lit", |m|).


def commutator_value(i: int, ti: int, j: int, tj: int, cross12: bool = True, cross21: bool = True):
    """``[a_i(ti T), a_j†(tj T)]`` as a list of literal delta offsets."""
    out = []
    if i == j:
        out.append(abs(ti - tj))
    if i == 1 and j == 2 and cross12:
        out.append(abs(tj - ti + 1))
    if i == 2 and j == 1 and cross21:
        out.append(abs(tj - ti - 1))
    return out


def _matchings(word, start, used):
    """Yield lists of contracted index pairs (i < j, i annihilator, j creator)."""
    for i in range(start, len(word)):
        if i in used or word[i][1]:
            continue
        # either i stays uncontracted ...
        yield from _matchings(word, i + 1, used)
        # ... or it is contracted with a later creator
        for j in range(i + 1, len(word)):
            if j not in used and word[j][1]:
                for rest in _matchings(word, i + 1, used | {i, j}):
                    yield [(i, j)] + rest
        return
    yield []


def wick_expand(word, cross12: bool = True, cross21: bool = True) -> Counter:
    """Normal-ordered expansion of a word as ``{(sorted factors, deltas): count}``.

    Factors are tuples ``(region, dagger, shift)``; the normal form puts
    creators first, each group sorted by (region, shift).
    """
    word = [tuple(w) for w in word]
    out: Counter = Counter()
    for pairs in _matchings(word, 0, frozenset()):
        deltas = []
        ok = True
        for i, j in pairs:
            vals = commutator_value(word[i][0], word[i][2], word[j][0], word[j][2], cross12, cross21)
            if not vals:
                ok = False
                break
            (d,) = vals
            deltas.append(("lit", d))
        if not ok:
            continue
        hit = {k for p in pairs for k in p}
        rest = [word[k] for k in range(len(word)) if k not in hit]
        creators = sorted((f for f in rest if f[1]), key=lambda f: (f[0], f[2]))
        annihilators = sorted((f for f in rest if not f[1]), key=lambda f: (f[0], f[2]))
        out[(tuple(creators + annihilators), tuple(sorted(deltas)))] += 1
    return Counter({k: v for k, v in out.items() if v})


def wick_expand_sum(words: dict, cross12: bool = True, cross21: bool = True) -> dict:
    """Expand ``{word: coefficient}`` (coefficients in any ring supporting * int)."""
    out: dict = {}
    for word, coeff in words.items():
        for key, n in wick_expand(word, cross12, cross21).items():
            val = coeff * n
            out[key] = out[key] + val if key in out else val
    return out


def basis_states(N: int, n_max: int):
    return list(itertools.product(range(n_max + 1), repeat=N))


def one_body_elements(n, alpha, beta, g, n_max):
    """Transitions of ``|n>`` under the Hamiltonian: ``[(n', amplitude, offset)]``."""
    out = []
    n1, n2 = n[0], n[1]
    # alpha: a particle leaves region 2 and appears in region 1 one step later
    if n2 >= 1 and n1 + 1 <= n_max and alpha != 0:
        m = list(n)
        m[0] += 1
        m[1] -= 1
        out.append((tuple(m), alpha * math.sqrt(n2 * (n1 + 1)), 1))
    if n1 >= 1 and n2 + 1 <= n_max and beta != 0:
        m = list(n)
        m[0] -= 1
        m[1] += 1
        out.append((tuple(m), beta * math.sqrt(n1 * (n2 + 1)), -1))
    if g != 0:
        out.append((tuple(n), g * sum(n), 0))
    return out


def dense_hamiltonian(alpha, beta, g, N, n_max, M, profile=None, T=1.0) -> np.ndarray:
    """Joint-space Hamiltonian: row (n, s), column (n', s'), brute force.

    ``profile`` is a callable ``Δ(x)``; the default is the Kronecker delta.
    Every slot pair is visited, so smeared profiles need no support cutoff.
    """
    if profile is None:
        def profile(x):
            return 1.0 if abs(x) < 1e-12 else 0.0
    states = basis_states(N, n_max)
    nb = len(states)
    index = {n: i for i, n in enumerate(states)}
    slots = range(-M, M + 1)
    H = np.zeros(((2 * M + 1) * nb, (2 * M + 1) * nb), dtype=complex)
    for n in states:
        for n2, amp, m0 in one_body_elements(n, alpha, beta, g, n_max):
            for s in slots:
                for s2 in slots:
                    w = profile((s2 - s - m0) * T)
                    if w:
                        H[(s + M) * nb + index[n], (s2 + M) * nb + index[n2]] += amp * w
    return H


def dense_series(H: np.ndarray, dt: float, K: int) -> np.ndarray:
    U = np.zeros_like(H)
    P = np.eye(H.shape[0], dtype=complex)
    for j in range(K + 1):
        U += (-1j * dt) ** j / math.factorial(j) * P
        P = P @ H
    return U


def dense_defect(U: np.ndarray, nb: int, M: int, slots) -> float:
    cols = np.concatenate([np.arange((s + M) * nb, (s + M + 1) * nb) for s in slots])
    sub = U[:, cols]
    return float(np.linalg.norm(sub.conj().T @ sub - np.eye(len(cols))))


def dense_flux(U: np.ndarray, N: int, n_max: int, M: int, start: dict, slot: int = 0):
    """Per-region occupation change (renormalized) for a start distribution at ``slot``."""
    states = basis_states(N, n_max)
    nb = len(states)
    psi = np.zeros(U.shape[0], dtype=complex)
    for n, p in start.items():
        psi[(slot + M) * nb + states.index(tuple(n))] = math.sqrt(p)
    out = U @ psi
    probs_in = np.abs(psi) ** 2
    probs_out = np.abs(out) ** 2
    occ = np.array([states[k % nb] for k in range(U.shape[0])], dtype=float)
    before = probs_in @ occ
    after = probs_out @ occ / probs_out.sum()
    return after - before


def hamiltonian_words(N: int = 3, alpha: bool = True, beta: bool = True, g: bool = True) -> dict:
    """``{word: (a, b, c)}``: each word of H with the exponents of its coupling."""
    out = {}
    if alpha:
        out[((1, True, 1), (2, False, 0))] = (1, 0, 0)
    if beta:
        out[((2, True, -1), (1, False, 0))] = (0, 1, 0)
    if g:
        for i in range(1, N + 1):
            out[((i, True, 0), (i, False, 0))] = (0, 0, 1)
    return out


def power_by_wick(k: int, N: int = 3, alpha: bool = True, beta: bool = True, g: bool = True) -> dict:
    """Normal-ordered ``H**k`` as ``{(factors, deltas): {monomial: int}}``.

    Expands the product word by word, then contracts each full word with
    :func:`wick_expand`.
    """
    words = hamiltonian_words(N, alpha, beta, g)
    out: dict = {}
    for combo in itertools.product(words.items(), repeat=k):
        word = tuple(f for w, _ in combo for f in w)
        mono = tuple(sum(m[i] for _, m in combo) for i in range(3))
        for key, n in wick_expand(word, alpha, beta).items():
            bucket = out.setdefault(key, {})
            bucket[mono] = bucket.get(mono, 0) + n
    return {k2: {m: c for m, c in v.items() if c} for k2, v in out.items()
            if any(v.values())}


def act(word, n):
    """Bosonic action of a word (rightmost factor first) on ``|n>``: ``(n', radicand)``."""
    occ = list(n)
    rad = 1
    for region, dagger, _ in reversed(word):
        if dagger:
            occ[region - 1] += 1
            rad *= occ[region - 1]
        else:
            if occ[region - 1] == 0:
                return None
            rad *= occ[region - 1]
            occ[region - 1] -= 1
    return tuple(occ), rad


def kernel_from_wick(k: int, basis, N: int = 3) -> dict:
    """``{mono: {(n, n'): {m: float}}}`` of the Wick-expanded ``H**k`` at the Kronecker profile."""
    out: dict = {}
    for (factors, deltas), coeffs in power_by_wick(k, N).items():
        if any(m != 0 for _, m in deltas):
            continue
        m = sum(s if d else -s for _, d, s in factors)
        for n in basis:
            hit = act(factors, n)
            if hit is None:
                continue
            n2, rad = hit
            for mono, c in coeffs.items():
                slot = out.setdefault(mono, {}).setdefault((tuple(n), n2), {})
                slot[m] = slot.get(m, 0.0) + c * math.sqrt(rad)
    return out
