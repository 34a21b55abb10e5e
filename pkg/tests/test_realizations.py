import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from psslab.fixed import B_PSEUDO
from psslab.fock import Modulation, StructureFunction, build_fock_algebra
from psslab.grid import Grid
from psslab.linalg_core import BlockOperator
from psslab.realizations import (
    ConstraintError,
    as_position_space,
    build_bosonized_a,
    build_bosonized_b,
    build_gdoa_realization_A,
    build_gdoa_realization_B,
    build_oscillator,
    build_ossqm_khare,
    build_sec2_charges,
    build_superpotential_realization,
    combine_charges,
    reduce_via_U4,
    sec2_bundle,
    standard_algebra,
)
from psslab.superpotential import Superpotential
from psslab.verify import all_passed, check_ossqm, check_psssqm, metric_for

D, M = 40, 4
KEEP = np.arange(D - M)


def window(block: np.ndarray) -> np.ndarray:
    return block[np.ix_(KEEP, KEEP)]


@st.composite
def c3_params(draw):
    a0 = draw(st.floats(-0.9, 2.0))
    a1 = draw(st.floats(-1.9 - a0, 2.0))
    coeffs = st.lists(st.floats(-1, 1), min_size=1, max_size=3)
    return a0, a1, Modulation(coeffs=draw(coeffs)), Modulation(coeffs=draw(coeffs))


def test_sec2_charge_is_b_times_a_dag():
    omega = 1.7
    alg = standard_algebra(D)
    b = sec2_bundle(alg, omega, c=0.5)
    expected = BlockOperator.kron(np.sqrt(omega) * B_PSEUDO, alg.a_dag)
    assert np.allclose(b.Q.full(), expected.full(), atol=1e-13)


def test_sec2_rejects_bad_input():
    with pytest.raises(ValueError):
        build_sec2_charges(standard_algebra(8), 0.0)
    with pytest.raises(ValueError):
        build_sec2_charges(build_fock_algebra(StructureFunction.c3(0.5, 0.0), 8), 1.0)


OFFSETS = {1: (-1, 1, 3), 2: (-1, 1, 0), 3: (1, -1, 1)}


@pytest.mark.parametrize("k", [1, 2, 3])
def test_equal_oscillators_diagonalize(k):
    _, primed = build_oscillator(k, standard_algebra(D))
    n = np.arange(D - M)
    for i in range(3):
        expected = np.diag(n + 0.5 + OFFSETS[k][i] / 2)
        assert np.allclose(window(primed.H.block(i, i)), expected, atol=1e-12)
        for j in range(3):
            if j != i:
                assert np.abs(window(primed.H.block(i, j))).max() <= 1e-12


def test_opposite_oscillator():
    b, primed = build_oscillator(4, standard_algebra(D))
    assert b.H.is_zero_block(0, 1) or np.abs(b.H.block(0, 1)).max() == 0.0
    n = np.arange(D - M)
    for i, off in enumerate((-0.5, 0.5, 1.5)):
        assert np.allclose(np.diag(window(primed.H.block(i, i))), n + off, atol=1e-12)


def test_oscillator_index_checked():
    with pytest.raises(ValueError):
        build_oscillator(5, standard_algebra(8))


def test_zero_superpotential_nilpotent():
    W = Superpotential.polynomial([0])
    b = build_superpotential_realization(W, W, "zero", Grid(-3.0, 3.0, 60), 0.5)
    assert np.abs((b.Q @ b.Q).full()).max() == 0.0


def test_unequal_realization_is_pseudosupersymmetric():
    W1, W2 = Superpotential.polynomial([0, 1]), Superpotential.polynomial([1, -1, 0.3])
    b = build_superpotential_realization(W1, W2, "zero", Grid(-5.0, 5.0, 400), 0.5)
    assert not b.meta["equal"]
    assert all_passed(check_psssqm(b))


def test_gdoa_a_reproduces_oscillator_blocks():
    alg = standard_algebra(D)
    h0 = Modulation(coeffs=[0.5, 1.0])
    b = build_gdoa_realization_A(alg, Modulation.constant(), h0, 0.5)
    assert np.allclose(window(b.H.block(0, 0)), window(alg.a_dag @ alg.a))
    assert np.allclose(window(b.H.block(1, 1)), window(alg.a @ alg.a_dag))
    assert np.allclose(np.diag(b.H.block(2, 2)), h0(alg.n))


def test_gdoa_a_nonlinear_spectrum():
    alg = standard_algebra(D)
    b = build_gdoa_realization_A(alg, Modulation(coeffs=[1, 1]), Modulation.constant(), 0.5)
    n = alg.n
    assert np.allclose(np.diag(b.H.block(0, 0)).real, n * (1 + n) ** 2)


@given(c3_params())
def test_gdoa_a_shifted_blocks(params):
    a0, a1, f, h = params
    alg = build_fock_algebra(StructureFunction.c3(a0, a1), 24)
    b = build_gdoa_realization_A(alg, f, h, 0.5)
    h1, h2 = np.diag(b.H.block(0, 0)), np.diag(b.H.block(1, 1))
    assert np.allclose(h2[:-1], h1[1:], atol=1e-12 * max(1.0, np.abs(h1).max()))


def test_gdoa_b_standard_reduction():
    alg = standard_algebra(D)
    one = Modulation.constant()
    b = build_gdoa_realization_B(alg, one, one, 0.5)
    n = alg.n
    for i, off in enumerate((-0.5, 0.5, 1.5)):
        assert np.allclose(np.diag(b.H.block(i, i)).real, n + off)
    zero = build_gdoa_realization_B(alg, one, one, 0.5, boundary="zero")
    assert zero.H.block(0, 0)[0, 0] == 0.0
    assert np.array_equal(zero.H.block(0, 0)[1:, 1:], b.H.block(0, 0)[1:, 1:])
    assert all_passed(check_psssqm(zero))


def test_gdoa_b_degeneracy_pattern():
    alg = build_fock_algebra(StructureFunction.c3(0.4, -0.2), 30)
    b = build_gdoa_realization_B(alg, Modulation(coeffs=[1, 0.1]), Modulation(coeffs=[0.7, 0.05]), 0.5)
    H = np.concatenate([np.diag(b.H.block(i, i)).real for i in range(3)])
    vals, counts = np.unique(np.round(H, 9), return_counts=True)
    # within the bulk every level appears once per block
    assert list(counts[:6]) == [1, 2, 3, 3, 3, 3]


def test_gdoa_b_rejects_unknown_boundary():
    with pytest.raises(ValueError):
        build_gdoa_realization_B(standard_algebra(8), Modulation.constant(), Modulation.constant(),
                                 0.5, boundary="mirror")


@given(c3_params(), st.integers(0, 2))
def test_bosonized_match_reduction(params, mu):
    a0, a1, f, h = params
    alg = build_fock_algebra(StructureFunction.c3(a0, a1), 24)
    for bundle, direct in (
        (build_gdoa_realization_A(alg, f, h, 0.5), build_bosonized_a(alg, f, h, 0.5, mu)),
        (build_gdoa_realization_B(alg, f, h, 0.5), build_bosonized_b(alg, f, h, 0.5, mu)),
    ):
        red = reduce_via_U4(bundle)
        assert red.offdiag_norm <= 1e-11
        comp = red.components[mu]
        for key in ("Q", "Q_dag", "H"):
            A, B = getattr(comp, key).full(), getattr(direct, key).full()
            assert np.abs(A - B).max() <= 1e-12 * max(1.0, np.abs(A).max())


def test_bosonized_b_dagger_formula():
    alg = build_fock_algebra(StructureFunction.c3(0.3, 0.2), 24)
    f1, f2 = Modulation(coeffs=[1, 0.2]), Modulation(coeffs=[0.5, -0.1, 0.02])
    for mu in range(3):
        b = build_bosonized_b(alg, f1, f2, 0.5, mu)
        assert np.allclose(b.Q_dag.full(), b.Q.full().conj().T, atol=1e-13)


def test_reduction_needs_fock_bundle():
    W = Superpotential.polynomial([0, 1])
    b = build_superpotential_realization(W, W, "zero", Grid(-3.0, 3.0, 30), 0.5)
    with pytest.raises(ValueError):
        reduce_via_U4(b)


def test_khare_on_fock_equal_superpotentials():
    alg = standard_algebra(D)
    W = Superpotential.polynomial([0, 1])
    k = build_ossqm_khare(W, W, alg, 0.5)
    assert k.constraint_residual <= 1e-14
    assert all_passed(check_ossqm(k.QK, k.HK, metric_for(k.tilde)))
    ps = build_superpotential_realization(W, W, "zero", as_position_space(alg), 0.5)
    for key in ("Q", "Q_dag", "H"):
        assert np.allclose(getattr(k.mapped, key).full(), getattr(ps, key).full(), atol=1e-12)
    Hm = k.mapped.H
    assert all(Hm.is_zero_block(i, j) or np.abs(Hm.block(i, j)).max() == 0.0
               for i in range(3) for j in range(3) if i != j)


def test_khare_rejects_constraint_violation():
    with pytest.raises(ConstraintError):
        build_ossqm_khare(Superpotential.polynomial([0, 1]), Superpotential.polynomial([0, -1]),
                          Grid(-3.0, 3.0, 40), 0.5)


def test_khare_custom_coefficients():
    W = Superpotential.polynomial([0, 1])
    c = 0.5
    zeta, rho = c * np.exp(0.3j), c * np.exp(-1.1j)
    k = build_ossqm_khare(W, W, standard_algebra(24), c, zeta, rho)
    assert all_passed(check_psssqm(k.tilde))


def test_combine_charges_normalization():
    Q = [BlockOperator.diag([np.eye(2)] * 3)] * 2
    with pytest.raises(ValueError):
        combine_charges(Q, [1.0, 1.0], 0.5)
    with pytest.raises(ValueError):
        combine_charges(Q, [0.5], 0.5)
