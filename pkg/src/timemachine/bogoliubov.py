"""Generalized Bogoliubov transformation of the two mouth modes.

The new creators are

    b1†(t) = U11(t) a1†(t)   + U12(t) a2†(t-T)
    b2†(t) = U21(t) a1†(t+T) + U22(t) a2†(t)

and each row ``u = (U_i1, U_i2)`` obeys ``i du/dt = A_i u`` with

    A_i = [[w_i - g, -alpha], [-beta, w_i - g]].

Writing ``A_i = (w_i - g) I + B`` with ``B = [[0, -alpha], [-beta, 0]]`` and
``B² = alpha beta I`` gives the closed form

    exp(-i A_i t) = exp(-i (w_i - g) t) (cos(s t) I - i sin(s t)/s B),  s = sqrt(alpha beta),

which stays valid at ``s = 0`` (the Jordan case ``alpha beta = 0``) through
the limit ``sin(s t)/s -> t``.  Nothing here depends on the time shift T.
"""
from __future__ import annotations

import cmath
import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.integrate import solve_ivp

from .opalg import Couplings, cre, heisenberg_eom

DEFAULT_TIMES = np.linspace(0.0, 10.0, 201)

# the two mode bases: b1 mixes a1†(t), a2†(t-T); b2 mixes a1†(t+T), a2†(t)
ROW_BASES = {1: ((1, 0), (2, -1)), 2: ((1, 1), (2, 0))}


@dataclass(frozen=True)
class BogoSystem:
    omega1: complex
    omega2: complex
    alpha: float
    beta: float
    g: float

    def omega(self, i: int) -> complex:
        if i not in (1, 2):
            raise ValueError("row index must be 1 or 2")
        return self.omega1 if i == 1 else self.omega2

    def matrix(self, i: int) -> np.ndarray:
        d = self.omega(i) - self.g
        return np.array([[d, -self.alpha], [-self.beta, d]], dtype=complex)

    @property
    def s(self) -> complex:
        """``sqrt(alpha beta)``; imaginary when ``alpha beta < 0``."""
        return cmath.sqrt(self.alpha * self.beta)

    @property
    def flags(self) -> list[str]:
        out = []
        if self.alpha * self.beta < 0:
            out.append("alpha*beta < 0: complex eigenvalues")
        if self.alpha * self.beta == 0 and self.alpha != self.beta:
            out.append("alpha*beta = 0 with alpha != beta: defective (Jordan) matrix")
        if any(abs(complex(w).imag) > 0 for w in (self.omega1, self.omega2)):
            out.append("complex energy")
        return out

    def eigenvalues(self, i: int) -> tuple[complex, complex]:
        """``(w_i - g) - sqrt(alpha beta)`` and ``(w_i - g) + sqrt(alpha beta)``."""
        d = self.omega(i) - self.g
        return (d - self.s, d + self.s)

    def to_json(self) -> dict:
        return {"omega1": _cjson(self.omega1), "omega2": _cjson(self.omega2),
                "alpha": self.alpha, "beta": self.beta, "g": self.g, "flags": self.flags}


def _cjson(z):
    z = complex(z)
    return z.real if z.imag == 0 else {"re": z.real, "im": z.imag}


def build_system(alpha: float, beta: float, g: float, omega1, omega2) -> BogoSystem:
    return BogoSystem(omega1, omega2, float(alpha), float(beta), float(g))


def omega_choices(alpha: float, beta: float, g: float) -> tuple[complex, complex]:
    """Energies with ``det A = 0``: ``g - sqrt(alpha beta)`` and ``g + sqrt(alpha beta)``.

    For these values one eigenvector of ``A`` gives a time-independent
    transformation.
    """
    s = cmath.sqrt(alpha * beta)
    out = (g - s, g + s)
    return tuple(w.real if w.imag == 0 else w for w in out)


def propagator(system: BogoSystem, i: int, t: float) -> np.ndarray:
    """``exp(-i A_i t)`` in closed form."""
    d = system.omega(i) - system.g
    s = system.s
    st = s * t
    if abs(st) < 1e-4:
        # series keeps full accuracy near the Jordan point
        sinc = t * (1 - st * st / 6 + st**4 / 120)
    else:
        sinc = cmath.sin(st) / s
    B = np.array([[0, -system.alpha], [-system.beta, 0]], dtype=complex)
    return cmath.exp(-1j * d * t) * (cmath.cos(st) * np.eye(2) - 1j * sinc * B)


@dataclass
class BogoSolution:
    system: BogoSystem
    times: np.ndarray
    rows: dict[int, np.ndarray]          # i -> array (len(times), 2)
    initial: dict[int, np.ndarray] = field(default_factory=dict)

    def row(self, i: int) -> np.ndarray:
        return self.rows[i]

    def at(self, i: int, t: float) -> np.ndarray:
        return propagator(self.system, i, t) @ self.initial[i]

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t", "re_U11", "im_U11", "re_U12", "im_U12",
                        "re_U21", "im_U21", "re_U22", "im_U22"])
            for k, t in enumerate(self.times):
                vals = [float(t)]
                for i in (1, 2):
                    for z in self.rows[i][k]:
                        vals += [float(z.real), float(z.imag)]
                w.writerow([repr(v) for v in vals])


def solve(system: BogoSystem, times=DEFAULT_TIMES, initial: dict | None = None) -> BogoSolution:
    """Propagate both rows from ``initial`` (default: ``b_i† = a_i†`` at ``t = 0``)."""
    times = np.atleast_1d(np.asarray(times, dtype=float))
    initial = initial or {1: (1, 0), 2: (0, 1)}
    init = {i: np.asarray(initial[i], dtype=complex) for i in (1, 2)}
    rows = {i: np.array([propagator(system, i, t) @ init[i] for t in times]) for i in (1, 2)}
    return BogoSolution(system, times, rows, init)


# ---------------------------------------------------------------------------
# Checks
# ---------------------------------------------------------------------------

_FD8 = np.array([1 / 280, -4 / 105, 1 / 5, -4 / 5, 0, 4 / 5, -1 / 5, 4 / 105, -1 / 280])


def derivative(sol: BogoSolution, i: int, h: float = 1e-3) -> np.ndarray:
    """``du/dt`` of the closed form on the grid by an eighth-order central difference."""
    out = []
    for t in sol.times:
        pts = [sol.at(i, t + k * h) for k in range(-4, 5)]
        out.append(sum(c * p for c, p in zip(_FD8, pts)) / h)
    return np.array(out)


def ode_residual(sol: BogoSolution) -> float:
    """``max_t || i du/dt - A_i u ||`` over both rows."""
    worst = 0.0
    for i in (1, 2):
        du = derivative(sol, i)
        A = sol.system.matrix(i)
        r = 1j * du - sol.rows[i] @ A.T
        worst = max(worst, float(np.max(np.linalg.norm(r, axis=1))))
    return worst


def integrate(system: BogoSystem, times=DEFAULT_TIMES, initial: dict | None = None,
              rtol: float = 1e-13, atol: float = 1e-14) -> dict[int, np.ndarray]:
    """Reference rows from an adaptive eighth-order Runge-Kutta integrator."""
    times = np.asarray(times, dtype=float)
    initial = initial or {1: (1, 0), 2: (0, 1)}
    out = {}
    for i in (1, 2):
        A = system.matrix(i)

        def rhs(_t, y):
            u = y[:2] + 1j * y[2:]
            du = -1j * (A @ u)
            return np.concatenate([du.real, du.imag])

        u0 = np.asarray(initial[i], dtype=complex)
        res = solve_ivp(rhs, (times[0], times[-1]), np.concatenate([u0.real, u0.imag]),
                        method="DOP853", t_eval=times, rtol=rtol, atol=atol)
        if not res.success:
            raise RuntimeError(res.message)
        out[i] = (res.y[:2] + 1j * res.y[2:]).T
    return out


def eom_matrix(i: int, alpha: float, beta: float, g: float) -> np.ndarray:
    """``E`` with ``i d/dt x_b = sum_c E[b, c] x_c`` on the mode basis of row ``i``.

    Built from the symbolic equations of motion of ``a1†`` and ``a2†``,
    shifted to the basis times.
    """
    basis = ROW_BASES[i]
    couplings = Couplings(alpha=alpha != 0, beta=beta != 0, g=g != 0)
    E = np.zeros((2, 2), dtype=complex)
    for b, (region, shift) in enumerate(basis):
        rhs = heisenberg_eom(cre(region, 0), couplings)
        for term in rhs:
            (f,) = term.factors
            target = (f.region, f.shift + shift)
            if not f.dagger or target not in basis:
                raise ValueError(f"equation of motion leaves the mode basis: {term}")
            E[b, basis.index(target)] += term.coeff.evaluate(alpha, beta, g)
    return E


def normal_mode_residual(sol: BogoSolution, omega_check: dict | None = None) -> float:
    """``max_t || d/dt b_i† + i w_i b_i† ||`` as coefficient vectors on the mode basis.

    ``omega_check`` overrides the energies used in ``+ i w b`` (defaults to
    the system's own); a mismatch measures how far ``b_i†`` is from a
    normal mode of that energy.
    """
    s = sol.system
    omega_check = omega_check or {1: s.omega1, 2: s.omega2}
    worst = 0.0
    for i in (1, 2):
        E = eom_matrix(i, s.alpha, s.beta, s.g)
        U = sol.rows[i]
        dU = derivative(sol, i)
        R = dU - 1j * U @ E + 1j * omega_check[i] * U
        worst = max(worst, float(np.max(np.linalg.norm(R, axis=1))))
    return worst


def hermiticity_gap(sol: BogoSolution) -> dict:
    """How far the new modes are from the old ones.

    ``coefficient_distance`` is ``max_t ||(U11 - 1, U12)||`` (row 2:
    ``(U21, U22 - 1)``).  ``energy_gap`` compares ``w_i`` with the energy of
    the quanta created by ``a_i†``, which is ``beta + g`` for region 1 and
    ``alpha + g`` for region 2.  The gaps against ``-(beta + g)`` and
    ``-(alpha + g)`` (the annihilator energies) are reported as well.
    """
    s = sol.system
    target = {1: np.array([1, 0]), 2: np.array([0, 1])}
    creator_energy = {1: s.beta + s.g, 2: s.alpha + s.g}
    rows = {}
    for i in (1, 2):
        dist = float(np.max(np.linalg.norm(sol.rows[i] - target[i], axis=1)))
        w = s.omega(i)
        rows[i] = {
            "coefficient_distance": dist,
            "energy_gap": float(abs(w - creator_energy[i])),
            "annihilator_energy_gap": float(abs(w + creator_energy[i])),
        }
    gap = max(max(r["coefficient_distance"], r["energy_gap"]) for r in rows.values())
    return {"rows": {str(i): r for i, r in rows.items()}, "gap": gap,
            "t_max": float(sol.times[-1]), "flags": s.flags}


def report(sol: BogoSolution, omega_offset: float = 0.5) -> dict:
    """Residuals, eigenvalues, integrator comparison and hermiticity gap."""
    s = sol.system
    ref = integrate(s, sol.times, {i: sol.initial[i] for i in (1, 2)})
    integ = max(float(np.max(np.abs(ref[i] - sol.rows[i]))) for i in (1, 2))
    eig = {}
    for i in (1, 2):
        num = list(np.linalg.eigvals(s.matrix(i)))
        closed = [complex(z) for z in s.eigenvalues(i)]
        diff = min(max(abs(num[0] - closed[0]), abs(num[1] - closed[1])),
                   max(abs(num[1] - closed[0]), abs(num[0] - closed[1])))
        eig[str(i)] = {"numeric": [_cjson(z) for z in num], "closed_form": [_cjson(z) for z in closed],
                       "max_diff": float(diff)}
    shifted = {1: s.omega1 + omega_offset, 2: s.omega2 + omega_offset}
    return {
        "system": s.to_json(),
        "t_grid": {"start": float(sol.times[0]), "stop": float(sol.times[-1]), "points": len(sol.times)},
        "ode_residual": ode_residual(sol),
        "integrator_max_diff": integ,
        "eigenvalues": eig,
        "normal_mode_residual": normal_mode_residual(sol),
        "normal_mode_residual_offset": {"offset": omega_offset,
                                        "value": normal_mode_residual(sol, shifted)},
        "hermiticity": hermiticity_gap(sol),
    }


def write_report(data: dict, path) -> None:
    Path(path).write_text(json.dumps(data, indent=2) + "\n")
