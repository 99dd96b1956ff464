"""Temporal coincidence profiles (the smeared delta) and symbolic delta factors.

Time differences that enter the commutators are always integer multiples of
the machine time step T.  Three symbolic forms are kept:

``lit(m)``       Δ(mT), a number once the profile is fixed
``signed(m)``    Δ(t' - t - mT), a constraint on the offset between two states
``abs(m)``       Δ(|t - t'| - mT)

The profile is even, so ``lit(-m)`` is stored as ``lit(m)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

KINDS = ("lit", "signed", "abs")

# weights below this are treated as outside the support of a smeared profile
SUPPORT_CUTOFF = 1e-16


@dataclass(frozen=True, order=True, slots=True)
class DeltaFactor:
    kind: str
    m: int

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown delta kind {self.kind!r}")
        if not isinstance(self.m, int):
            raise TypeError("delta offsets are integers (units of T)")

    @classmethod
    def lit(cls, m: int) -> "DeltaFactor":
        return cls("lit", abs(m))

    @classmethod
    def signed(cls, m: int) -> "DeltaFactor":
        return cls("signed", m)

    @classmethod
    def absolute(cls, m: int) -> "DeltaFactor":
        return cls("abs", m)

    def weight(self, profile: "DeltaProfile", T: float, offset: int | None = None):
        """Value of the factor; ``offset`` is (t' - t)/T for state-dependent kinds."""
        if self.kind == "lit":
            return profile.at_lattice(self.m, T)
        if offset is None:
            raise ValueError(f"{self} needs a state time offset")
        if self.kind == "signed":
            return profile.at_lattice(offset - self.m, T)
        return profile.at_lattice(abs(offset) - self.m, T)

    def to_json(self) -> dict:
        return {"kind": self.kind, "m": self.m}

    @classmethod
    def from_json(cls, data: dict) -> "DeltaFactor":
        return cls(data["kind"], int(data["m"]))

    def __str__(self) -> str:
        if self.kind == "lit":
            return "Δ(0)" if self.m == 0 else f"Δ({_tmul(self.m)})"
        if self.kind == "signed":
            if self.m == 0:
                return "Δ(t'-t)"
            return f"Δ(t'-t{'-' if self.m > 0 else '+'}{_tmul(abs(self.m))})"
        return f"Δ(|t-t'|-{_tmul(self.m)})"


def _tmul(m: int) -> str:
    return "T" if m == 1 else f"{m}T"


class DeltaProfile:
    """Base class; subclasses evaluate Δ at a real time difference."""

    name = "profile"

    def __call__(self, x: float):
        raise NotImplementedError

    def at_lattice(self, m: int, T: float):
        return self(m * T)

    def support_radius(self, T: float) -> int:
        """Largest |m| with a non-negligible weight Δ(mT)."""
        raise NotImplementedError

    def to_json(self) -> dict:
        raise NotImplementedError


class Kronecker(DeltaProfile):
    """Δ(x) = 1 iff x = 0.  Exact on the lattice of multiples of T."""

    name = "kronecker"

    def __call__(self, x):
        if isinstance(x, (int, Fraction)):
            return 1 if x == 0 else 0
        return 1 if abs(x) < 1e-12 else 0

    def at_lattice(self, m: int, T: float):
        return 1 if m == 0 else 0

    def support_radius(self, T: float) -> int:
        return 0

    def to_json(self) -> dict:
        return {"name": "kronecker"}

    def __eq__(self, other):
        return isinstance(other, Kronecker)

    def __hash__(self):
        return hash("kronecker")

    def __repr__(self):
        return "Kronecker()"


class Gaussian(DeltaProfile):
    """Δ(x) = exp(-x² / 2σ²), normalized to Δ(0) = 1."""

    name = "gaussian"

    def __init__(self, sigma: float):
        if not sigma > 0:
            raise ValueError("gaussian width must be positive")
        self.sigma = float(sigma)

    def __call__(self, x):
        return math.exp(-float(x) ** 2 / (2.0 * self.sigma**2))

    def support_radius(self, T: float) -> int:
        reach = self.sigma * math.sqrt(2.0 * math.log(1.0 / SUPPORT_CUTOFF))
        return int(math.floor(reach / T))

    def to_json(self) -> dict:
        return {"name": "gaussian", "sigma": self.sigma}

    def __eq__(self, other):
        return isinstance(other, Gaussian) and other.sigma == self.sigma

    def __hash__(self):
        return hash(("gaussian", self.sigma))

    def __repr__(self):
        return f"Gaussian({self.sigma})"


def parse_profile(text: str) -> DeltaProfile:
    """Parse ``kronecker`` or ``gaussian:<sigma>``."""
    text = text.strip().lower()
    if text == "kronecker":
        return Kronecker()
    if text.startswith("gaussian:"):
        return Gaussian(float(text.split(":", 1)[1]))
    raise ValueError(f"unknown delta profile {text!r}; use kronecker or gaussian:<sigma>")


def profile_from_json(data: dict) -> DeltaProfile:
    if data["name"] == "kronecker":
        return Kronecker()
    return Gaussian(data["sigma"])
