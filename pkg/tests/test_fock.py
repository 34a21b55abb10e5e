import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from psslab.fock import (
    Modulation,
    StructureFunction,
    StructureFunctionError,
    TrustedWindow,
    alpha_to_kappa,
    build_fock_algebra,
    build_T_and_projectors,
    kappa_to_alpha,
    projector,
    projectors_from_T,
    structure_g,
    windowed_residual,
)

alpha0s = st.floats(-0.95, 3.0)


@st.composite
def admissible_alphas(draw):
    a0 = draw(alpha0s)
    a1 = draw(st.floats(-1.95 - a0, 3.0))
    return a0, a1


def test_number_operator():
    alg = build_fock_algebra(StructureFunction.standard(), 4)
    assert np.allclose(alg.a_dag @ alg.a, np.diag([0, 1, 2, 3]), atol=1e-15)


def test_c3_zero_is_standard():
    std = build_fock_algebra(StructureFunction.standard(), 12)
    c3 = build_fock_algebra(StructureFunction.c3(0.0, 0.0), 12)
    assert np.array_equal(std.a, c3.a) and np.array_equal(std.a_dag, c3.a_dag)


def test_c3_values_by_hand():
    # F(n) = n + beta_{n mod 3}, beta = (0, alpha0, alpha0 + alpha1)
    F = StructureFunction.c3(1.0, 0.0)
    assert np.array_equal(F(np.arange(6)), [0, 2, 3, 3, 5, 6])


def test_structure_g_examples():
    assert np.array_equal(structure_g(StructureFunction.standard(), np.arange(5)), np.ones(5))
    assert np.array_equal(structure_g(StructureFunction.c3(1.0, 0.0), np.arange(3)), [2, 1, 0])
    assert np.array_equal(structure_g(StructureFunction.from_table([0, 1, 4, 9]), np.arange(3)), [1, 3, 5])


def test_positivity_constraints():
    with pytest.raises(StructureFunctionError, match="positivity"):
        StructureFunction.c3(-1.5, 0.0)
    with pytest.raises(StructureFunctionError, match="positivity"):
        StructureFunction.c3(0.5, -2.6)
    with pytest.raises(StructureFunctionError):
        StructureFunction.from_table([1.0, 2.0])
    with pytest.raises(StructureFunctionError):
        build_fock_algebra(StructureFunction.from_table([0, 1, -1, 2, 3, 4, 5]), 4)
    with pytest.raises(StructureFunctionError):
        build_fock_algebra(StructureFunction.from_table([0, 1, 2]), 4)


@given(admissible_alphas())
def test_c3_fock_positive(alphas):
    F = StructureFunction.c3(*alphas)
    assert np.all(F(np.arange(1, 60)) > 0)
    assert F(0) == 0


@given(admissible_alphas())
def test_kappa_round_trip(alphas):
    back = kappa_to_alpha(alpha_to_kappa(*alphas))
    assert np.allclose(back, alphas, atol=1e-12)


@given(admissible_alphas())
def test_gdoa_commutators(alphas):
    """``[N, a^dag] = a^dag`` and ``[a, a^dag] = G(N)`` on the trusted window."""
    alg = build_fock_algebra(StructureFunction.c3(*alphas), 24)
    w = alg.window(2)
    assert windowed_residual(alg.N @ alg.a_dag - alg.a_dag @ alg.N, alg.a_dag, w) <= 1e-13
    G = np.diag(structure_g(alg.F, alg.n))
    scale = max(1.0, float(np.abs(G).max()))
    assert windowed_residual(alg.a @ alg.a_dag - alg.a_dag @ alg.a, G, w) <= 1e-13 * scale
    assert windowed_residual(alg.a_dag @ alg.a, alg.F_op(), TrustedWindow(24, 0)) <= 1e-12 * 24


def test_window_excludes_corner():
    alg = build_fock_algebra(StructureFunction.standard(), 16)
    G = np.eye(16)
    full = np.linalg.norm(alg.a @ alg.a_dag - alg.a_dag @ alg.a - G)
    assert full > 10
    assert windowed_residual(alg.a @ alg.a_dag - alg.a_dag @ alg.a, G, alg.window(2)) <= 1e-13


def test_degenerate_window():
    A, B = np.diag([1.0, 5.0]), np.diag([3.0, 0.0])
    assert windowed_residual(A, B, TrustedWindow(2, 1)) == 2.0
    with pytest.raises(ValueError):
        TrustedWindow(4, 4)


def test_projectors():
    alg = build_fock_algebra(StructureFunction.standard(), 6)
    T, P0, P1, P2 = build_T_and_projectors(alg)
    assert np.array_equal(np.diag(P0).real, [1, 0, 0, 1, 0, 0])
    assert np.array_equal(P0 + P1 + P2, np.eye(6))
    for P, Q in zip((P0, P1, P2), projectors_from_T(T)):
        assert np.allclose(P, Q, atol=1e-15)
    assert np.allclose(np.linalg.matrix_power(T, 3), np.eye(6), atol=1e-15)


@given(admissible_alphas(), st.integers(0, 2))
def test_projector_shift(alphas, mu):
    alg = build_fock_algebra(StructureFunction.c3(*alphas), 18)
    lhs = alg.a_dag @ projector(alg, mu)
    rhs = projector(alg, mu + 1) @ alg.a_dag
    assert windowed_residual(lhs, rhs, alg.window(1)) == 0.0


def test_modulation():
    f = Modulation(coeffs=[1.0, 2.0])
    assert np.array_equal(f(np.arange(3)), [1, 3, 5])
    t = Modulation(table=[1.0, 4.0])
    assert np.array_equal(t.at_or_zero(np.array([-1, 0, 1, 2])), [0, 1, 4, 0])
    with pytest.raises(IndexError):
        t(np.array([2]))
    assert Modulation.from_config(f.to_config())(5) == 11
    with pytest.raises(ValueError):
        Modulation()


def test_structure_function_config_round_trip():
    for F in (StructureFunction.standard(), StructureFunction.c3(0.3, 0.1),
              StructureFunction.from_table([0, 1, 2, 3])):
        assert StructureFunction.from_config(F.to_config()) == F
