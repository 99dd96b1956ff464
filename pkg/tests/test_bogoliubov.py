import cmath
import csv
import inspect

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from timemachine import bogoliubov
from timemachine.bogoliubov import (BogoSystem, build_system, eom_matrix, hermiticity_gap,
                                    integrate, normal_mode_residual, ode_residual, omega_choices,
                                    propagator, report, solve)

couplings = st.floats(0.0, 2.0)


def test_matrix_layout():
    s = build_system(0.3, 0.2, 1.0, 1.5, 0.7)
    assert np.array_equal(s.matrix(1), np.array([[0.5, -0.3], [-0.2, 0.5]]))
    assert np.allclose(s.matrix(2), [[-0.3, -0.3], [-0.2, -0.3]], atol=1e-15)
    assert np.array_equal(build_system(0, 0, 1.0, 3.0, 2.0).matrix(1), np.diag([2.0, 2.0]))
    assert np.array_equal(build_system(0.3, 0.2, 1.0, 1.0, 1.0).matrix(1), [[0, -0.3], [-0.2, 0]])
    with pytest.raises(ValueError):
        s.matrix(3)


def test_no_time_shift_parameter():
    assert "T" not in inspect.signature(BogoSystem).parameters
    assert "T" not in inspect.signature(build_system).parameters


def test_decoupled_solution():
    s = build_system(0.0, 0.0, 1.0, 2.5, 1.0)
    sol = solve(s, [0.0, 1.0, 3.0])
    for t, u in zip(sol.times, sol.row(1)):
        assert u == pytest.approx([cmath.exp(-1.5j * t), 0.0], abs=1e-15)


def test_eigenvalue_example():
    s = build_system(1.0, 1.0, 0.0, 2.0, 2.0)
    assert sorted(np.linalg.eigvals(s.matrix(1)).real) == pytest.approx([1.0, 3.0], abs=1e-12)
    assert [z.real for z in s.eigenvalues(1)] == [1.0, 3.0]


@settings(max_examples=100, deadline=None)
@given(couplings, couplings, st.floats(-2, 2), st.floats(-2, 2))
def test_eigenvalue_relation(alpha, beta, g, w):
    s = build_system(alpha, beta, g, w, w)
    for lam in s.eigenvalues(1):
        assert abs((w - g - lam) ** 2 - alpha * beta) < 1e-12 * max(1.0, abs(w - g) ** 2)
    if alpha * beta < 1e-3:
        # near the Jordan point the numeric eigensolver loses about half the digits
        return
    num = sorted(np.linalg.eigvals(s.matrix(1)), key=lambda z: (z.real, z.imag))
    closed = sorted(s.eigenvalues(1), key=lambda z: (z.real, z.imag))
    assert np.max(np.abs(np.array(num) - np.array(closed))) < 1e-12 * max(1.0, abs(w - g) + alpha + beta)


@pytest.mark.parametrize("alpha,beta", [(0.3, 0.3), (0.5, 0.1), (1.0, 0.0), (0.0, 1.0), (0.0, 0.0)])
def test_ode_residual_and_integrator(alpha, beta):
    s = build_system(alpha, beta, 1.0, *omega_choices(alpha, beta, 1.0))
    sol = solve(s)
    assert ode_residual(sol) < 1e-10
    ref = integrate(s, sol.times)
    for i in (1, 2):
        assert np.max(np.abs(ref[i] - sol.row(i))) < 1e-9


def test_propagator_is_matrix_exponential():
    from scipy.linalg import expm

    s = build_system(0.4, 0.9, 0.3, 1.7, -0.2)
    for t in (0.0, 0.3, 4.0):
        for i in (1, 2):
            assert np.allclose(propagator(s, i, t), expm(-1j * s.matrix(i) * t), atol=1e-13)


def test_jordan_case_grows_linearly():
    sol = solve(build_system(0.0, 1.0, 1.0, 1.0, 1.0), [0.0, 2.0, 5.0])
    assert np.abs(sol.row(1)[:, 1]) == pytest.approx([0.0, 2.0, 5.0])
    sol = solve(build_system(1.0, 0.0, 1.0, 1.0, 1.0), [0.0, 2.0, 5.0])
    assert np.abs(sol.row(2)[:, 0]) == pytest.approx([0.0, 2.0, 5.0])
    assert np.all(sol.row(1)[:, 1] == 0)
    assert "defective" in build_system(1.0, 0.0, 1.0, 1.0, 1.0).flags[0]


def test_small_coupling_series_branch_is_continuous():
    a = build_system(1e-9, 1e-9, 1.0, 1.0, 1.0)
    b = build_system(1e-3, 1e-3, 1.0, 1.0, 1.0)
    for s in (a, b):
        assert ode_residual(solve(s, np.linspace(0, 10, 11))) < 1e-10


def test_eom_matrix_from_symbolic_equations():
    assert np.array_equal(eom_matrix(1, 0.3, 0.2, 1.0), [[1.0, 0.2], [0.3, 1.0]])
    assert np.array_equal(eom_matrix(2, 0.3, 0.2, 1.0), [[1.0, 0.2], [0.3, 1.0]])


@pytest.mark.parametrize("alpha,beta", [(0.3, 0.3), (0.5, 0.1), (0.0, 0.0)])
def test_normal_mode_residual_with_eigen_energies(alpha, beta):
    s = build_system(alpha, beta, 1.0, *omega_choices(alpha, beta, 1.0))
    sol = solve(s)
    assert normal_mode_residual(sol) < 1e-9
    shifted = {1: s.omega1 + 0.5, 2: s.omega2 + 0.5}
    assert normal_mode_residual(sol, shifted) > 0.1


def test_normal_mode_residual_for_arbitrary_energy():
    sol = solve(build_system(0.3, 0.3, 1.0, 2.7, -0.4))
    assert normal_mode_residual(sol) < 1e-9


def test_hermiticity_gap():
    assert hermiticity_gap(solve(build_system(0, 0, 1.0, 1.0, 1.0)))["gap"] == 0.0
    w = omega_choices(0.3, 0.3, 1.0)[1]
    assert hermiticity_gap(solve(build_system(0.3, 0.3, 1.0, w, w)))["gap"] > 0.1
    eps = 1e-6
    small = hermiticity_gap(solve(build_system(eps, eps, 1.0, 1.0 + eps, 1.0 + eps)))
    assert small["gap"] < 1e-3


def test_complex_energies_flagged():
    s = build_system(-0.3, 0.3, 1.0, *omega_choices(-0.3, 0.3, 1.0))
    assert "alpha*beta < 0: complex eigenvalues" in s.flags
    assert ode_residual(solve(s)) < 1e-9


def test_report_and_exports(tmp_path):
    s = build_system(0.3, 0.3, 1.0, *omega_choices(0.3, 0.3, 1.0))
    sol = solve(s)
    rep = report(sol)
    assert rep["normal_mode_residual_offset"]["value"] == pytest.approx(0.5, abs=1e-9)
    assert max(e["max_diff"] for e in rep["eigenvalues"].values()) < 1e-12
    bogoliubov.write_report(rep, tmp_path / "b.json")
    sol.to_csv(tmp_path / "b.csv")
    rows = list(csv.reader(open(tmp_path / "b.csv")))
    assert rows[0][0] == "t" and len(rows) == len(sol.times) + 1
