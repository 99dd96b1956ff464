"""Zeta-regularized occupation sums and the first-order entropy of the machine.

All occupation sums run over ``n = 0, 1, 2, ...``.  A factor ``(n + a)**k``
summed over its index is replaced by the Hurwitz value ``zeta(-k, a)``
(``a = 0`` is read as ``a = 1`` since the ``n = 0`` term vanishes for
``k >= 1``).  Regularization is not shift invariant, so sums must be given
in factored form: expanding ``n2 (n1 + 1)`` first would change the result.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from pathlib import Path

import sympy

from .delta import DeltaProfile, Kronecker

DEFAULT_INDICES = ("n1", "n2")
CUTOFFS = (10, 100, 1000)
FIRST_ORDER_SUM = "n2*(n1 + 1) + n1*n2"


def exact(x) -> Fraction:
    """Exact rational from an int, Fraction, decimal string or float (via its repr)."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, float):
        if not math.isfinite(x):
            raise ValueError("non-finite value")
        return Fraction(repr(x))
    return Fraction(str(x))


@lru_cache(maxsize=None)
def bernoulli(n: int) -> Fraction:
    """Bernoulli number ``B_n`` with ``B_1 = -1/2``."""
    if n < 0:
        raise ValueError("n must be non-negative")
    if n == 0:
        return Fraction(1)
    if n > 1 and n % 2:
        return Fraction(0)
    # sum_{k<=n} C(n+1, k) B_k = 0
    s = sum(math.comb(n + 1, k) * bernoulli(k) for k in range(n))
    return -s / (n + 1)


def bernoulli_poly(n: int, x) -> Fraction:
    x = exact(x)
    return sum((math.comb(n, k) * bernoulli(k) * x ** (n - k) for k in range(n + 1)), Fraction(0))


def hurwitz_zeta_neg(n: int, a=1) -> Fraction:
    """``zeta(-n, a) = -B_{n+1}(a) / (n + 1)`` for a non-negative integer ``n``."""
    if not isinstance(n, int) or n < 0:
        raise ValueError("only s = -n with n a non-negative integer is supported")
    a = exact(a)
    if a <= 0:
        raise ValueError("the Hurwitz offset a must be positive")
    return -bernoulli_poly(n + 1, a) / (n + 1)


def riemann_zeta_neg(n: int) -> Fraction:
    return hurwitz_zeta_neg(n, 1)


# ---------------------------------------------------------------------------
# Factored occupation sums
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class IndexFactor:
    """``(index + offset) ** power`` summed over ``index = 0..``."""

    index: str
    offset: Fraction
    power: int

    def regularized(self) -> Fraction:
        if self.power == 0:
            return hurwitz_zeta_neg(0, 1)
        if self.offset == 0:
            return hurwitz_zeta_neg(self.power, 1)
        if self.offset < 0:
            raise ValueError(f"negative offset in ({self}) has no Hurwitz continuation")
        return hurwitz_zeta_neg(self.power, self.offset)

    def partial(self, cutoff: int) -> int | Fraction:
        return sum((n + self.offset) ** self.power for n in range(cutoff))

    def __str__(self) -> str:
        sign = "+" if self.offset > 0 else "-"
        base = self.index if self.offset == 0 else f"({self.index}{sign}{abs(self.offset)})"
        return base if self.power == 1 else f"{base}^{self.power}"


@dataclass(frozen=True)
class ProductTerm:
    coeff: Fraction
    factors: tuple[IndexFactor, ...]

    def regularized(self) -> Fraction:
        out = self.coeff
        for f in self.factors:
            out *= f.regularized()
        return out

    def partial(self, cutoff: int) -> Fraction:
        out = Fraction(self.coeff)
        for f in self.factors:
            out *= f.partial(cutoff)
        return out


@dataclass
class RegularizedSum:
    expression: str
    indices: tuple[str, ...]
    terms: list[ProductTerm]
    value: Fraction

    def partial_sum(self, cutoff: int) -> Fraction:
        """Plain sum with every index running over ``0..cutoff-1``."""
        return sum((t.partial(cutoff) for t in self.terms), Fraction(0))

    def to_json(self) -> dict:
        return {
            "expression": self.expression,
            "indices": list(self.indices),
            "terms": [{"coeff": str(t.coeff), "factors": [str(f) for f in t.factors]} for t in self.terms],
            "value": str(self.value),
        }


class NonFactorableError(ValueError):
    """A product term couples indices (or repeats one) and has no factored form."""


def _linear_in_one(expr, symbols) -> tuple[str, Fraction]:
    free = [s for s in expr.free_symbols if s in symbols]
    if len(free) != 1 or expr.free_symbols - set(free):
        raise NonFactorableError(f"factor {expr} is not linear in a single index")
    s = free[0]
    poly = sympy.Poly(sympy.expand(expr), s)
    if poly.degree() != 1 or poly.coeff_monomial(s) != 1:
        raise NonFactorableError(f"factor {expr} is not of the form (n + a)")
    return s.name, Fraction(str(poly.coeff_monomial(1)))


def _product_term(term, symbols) -> tuple[Fraction, list[IndexFactor]]:
    coeff = Fraction(1)
    factors: list[IndexFactor] = []
    for f in sympy.Mul.make_args(term):
        if f.is_number:
            coeff *= Fraction(str(sympy.nsimplify(f)))
            continue
        base, power = (f.base, f.exp) if isinstance(f, sympy.Pow) else (f, sympy.Integer(1))
        if not (power.is_integer and power >= 0):
            raise NonFactorableError(f"power {power} in {f} is not a non-negative integer")
        if isinstance(base, sympy.Add) and all(a.is_number for a in base.args):
            coeff *= Fraction(str(sympy.nsimplify(base))) ** int(power)
            continue
        idx, off = _linear_in_one(base, symbols)
        factors.append(IndexFactor(idx, off, int(power)))
    seen = [f.index for f in factors]
    dup = {i for i in seen if seen.count(i) > 1}
    if dup:
        raise NonFactorableError(f"index {sorted(dup)[0]} appears in more than one factor of {term}")
    return coeff, factors


def parse_sum(expr, indices=DEFAULT_INDICES) -> RegularizedSum:
    """Parse a factored occupation polynomial and regularize every index sum."""
    symbols = {sympy.Symbol(i) for i in indices}
    text = expr if isinstance(expr, str) else str(expr)
    tree = sympy.parse_expr(text, local_dict={i: sympy.Symbol(i) for i in indices},
                            evaluate=False) if isinstance(expr, str) else expr
    unknown = {s.name for s in tree.free_symbols} - set(indices)
    if unknown:
        raise ValueError(f"unknown summation indices {sorted(unknown)}")
    terms = []
    for t in sympy.Add.make_args(tree):
        if t == 0:
            continue
        coeff, factors = _product_term(t, symbols)
        present = {f.index for f in factors}
        # an index missing from a term still runs: it contributes sum_n 1
        factors += [IndexFactor(i, Fraction(1), 0) for i in indices if i not in present]
        if coeff:
            terms.append(ProductTerm(coeff, tuple(sorted(factors, key=lambda f: f.index))))
    value = sum((t.regularized() for t in terms), Fraction(0))
    return RegularizedSum(text, tuple(indices), terms, value)


def regularize_product_sum(expr, indices=DEFAULT_INDICES) -> Fraction:
    """Zeta-regularized value of ``sum_{indices >= 0} expr`` (factored form required)."""
    return parse_sum(expr, indices).value


# ---------------------------------------------------------------------------
# Entropy
# ---------------------------------------------------------------------------

def delta_weight(profile: DeltaProfile, x: Fraction):
    """``Δ(x)``: exact 0/1 for Kronecker, float otherwise."""
    if isinstance(profile, Kronecker):
        return Fraction(1 if x == 0 else 0)
    return profile(float(x))


def _num(v):
    return str(v) if isinstance(v, Fraction) else float(v)


@dataclass
class EntropyReport:
    alpha: Fraction
    beta: Fraction
    dt: Fraction
    T: Fraction
    m: int
    profile: dict
    regularized_sum: Fraction
    delta: object
    value: object
    partial_sums: dict[int, Fraction]
    defaults: dict = field(default_factory=dict)

    @property
    def positive(self) -> bool:
        return self.value > 0

    def to_json(self) -> dict:
        return {
            "parameters": {"alpha": str(self.alpha), "beta": str(self.beta), "dt": str(self.dt),
                           "T": str(self.T), "m": self.m, "delta": self.profile},
            "sum": FIRST_ORDER_SUM,
            "regularized_sum": str(self.regularized_sum),
            "delta_weight": _num(self.delta),
            "value": _num(self.value),
            "value_float": float(self.value),
            "positive": self.positive,
            "partial_sums": {str(k): str(v) for k, v in self.partial_sums.items()},
            "defaults": self.defaults,
        }


def entropy_first_order(alpha=1, beta=1, dt=1, T=1, profile: DeltaProfile | None = None,
                        m: int = 1, cutoffs=CUTOFFS) -> EntropyReport:
    """``dt * alpha * beta * Δ(|dt| - mT) * sum_{n1,n2} (n2 (n1+1) + n1 n2)``, regularized.

    The regularized double sum is ``1/72``.  The partial sums of the plain
    double sum at each cutoff are reported to show that it diverges.
    """
    profile = profile or Kronecker()
    alpha, beta, dt, T = exact(alpha), exact(beta), exact(dt), exact(T)
    if T <= 0:
        raise ValueError("T must be positive")
    reg = parse_sum(FIRST_ORDER_SUM)
    w = delta_weight(profile, abs(dt) - m * T)
    value = reg.value * dt * alpha * beta * w
    partial = {c: reg.partial_sum(c) for c in cutoffs}
    return EntropyReport(alpha, beta, dt, T, m, profile.to_json(), reg.value, w, value, partial)


def trace_UH_first_terms(alpha=1, beta=1, g=1, dt=1, T=1, profile: DeltaProfile | None = None) -> dict:
    """The three lowest terms of ``Tr(U H)``, sums kept symbolic and regularized.

    The alpha-beta term is reported with the positive orientation of the
    surviving first-order contribution; its sign inside the trace expansion
    is recorded separately as ``sign_in_trace``.  The g terms are free-field
    terms and are excluded from the entropy.
    """
    profile = profile or Kronecker()
    alpha, beta, g, dt, T = (exact(x) for x in (alpha, beta, g, dt, T))
    d0 = delta_weight(profile, dt)
    d1 = delta_weight(profile, abs(dt) - T)
    sum_n = parse_sum("n", ("n",))
    sum_nn = parse_sum("ni*nj", ("ni", "nj"))
    sum_ab = parse_sum(FIRST_ORDER_SUM)
    terms = [
        {"name": "g", "coefficient": "g*Δ(t-t')", "sum": "Σ_n n",
         "regularized_sum": sum_n.value, "value": g * d0 * sum_n.value,
         "sign_in_trace": 1, "in_entropy": False},
        {"name": "g^2", "coefficient": "(t-t')*g^2*Δ(t-t')", "sum": "Σ_{ni,nj} ni*nj",
         "regularized_sum": sum_nn.value, "value": dt * g * g * d0 * sum_nn.value,
         "sign_in_trace": -1, "in_entropy": False},
        {"name": "alpha*beta", "coefficient": "(t-t')*alpha*beta*Δ(|t-t'|-T)",
         "sum": "Σ_{n1,n2} (n2*(n1+1) + n1*n2)", "regularized_sum": sum_ab.value,
         "value": dt * alpha * beta * d1 * sum_ab.value, "sign_in_trace": -1, "in_entropy": True},
    ]
    for t in terms:
        t["regularized_sum"] = str(t["regularized_sum"])
        t["value"] = _num(t["value"])
    return {"dt": str(dt), "T": str(T), "delta": profile.to_json(), "terms": terms}


def derivation_lines(report: EntropyReport) -> list[str]:
    """Human-readable chain from the trace to the regularized value."""
    zeta1 = riemann_zeta_neg(1)
    zeta11 = hurwitz_zeta_neg(1, 1)
    return [
        "Tr(U H) = g Δ(t-t') Σ n - (t-t') [ g² Δ(t-t') Σ ni nj + αβ Δ(|t-t'|-T) Σ (n2(n1+1) + n1 n2) + ... ]",
        "g terms are free-field terms and drop out of the entropy",
        "surviving term: (t-t') αβ Δ(|t-t'|-T) Σ_{n1,n2} (n2(n1+1) + n1 n2)",
        f"Σ n -> ζ(-1) = {zeta1};  Σ (n+1) -> ζ(-1,1) = {zeta11}",
        f"Σ n2 (n1+1) + Σ n1 n2 -> ({zeta11})({zeta1}) + ({zeta1})({zeta1}) = {report.regularized_sum}",
        f"Δ(|{report.dt}| - {report.m}T) = {_num(report.delta)} with T = {report.T}",
        f"value = {report.regularized_sum} * {report.dt} * {report.alpha} * {report.beta} * "
        f"{_num(report.delta)} = {_num(report.value)}",
        "partial sums of the plain double sum: "
        + ", ".join(f"L={k}: {v}" for k, v in report.partial_sums.items()),
        f"positive: {report.positive}",
    ]


def write_report(report: EntropyReport, path) -> None:
    Path(path).write_text(json.dumps(report.to_json(), indent=2, ensure_ascii=False) + "\n")

