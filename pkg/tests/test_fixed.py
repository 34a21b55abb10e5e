import numpy as np
import pytest
import sympy as sp
from hypothesis import given
from hypothesis import strategies as st

from psslab.fixed import (
    A_CAL,
    B_CAL,
    B_PSEUDO,
    B_PSEUDO_DAG,
    ETA,
    U3,
    XI,
    fermion,
    orthofermions,
    parafermion_order2,
    pseudofermion_from_orthofermions,
)
from psslab.realizations import build_order_p_combination
from psslab.verify import all_passed, check_orthofermion, check_pseudofermion


def test_pseudofermion_exact():
    reps = check_pseudofermion(B_PSEUDO, B_PSEUDO_DAG)
    assert all(r.residual == 0.0 for r in reps)


def test_pseudofermion_symbolic():
    b = sp.Matrix([[0, 0, 1 + sp.I], [0, 0, -1 + sp.I], [0, 0, 0]]) / 2
    assert sp.simplify(b * b) == sp.zeros(3)
    assert sp.simplify(b * b.H * b - b) == sp.zeros(3)
    assert np.array_equal(np.array(b.evalf(), dtype=complex), B_PSEUDO)


def test_fermion_satisfies_relations():
    assert all_passed(check_pseudofermion(*fermion()))


def test_parafermion_fails():
    b, bd = parafermion_order2()
    reps = {r.relation: r for r in check_pseudofermion(b, bd)}
    assert not reps["b b^dag b = b"].passed
    # it is an order-2 parafermion: [[b^dag, b], b] = -2b
    assert np.allclose((bd @ b - b @ bd) @ b - b @ (bd @ b - b @ bd), -2 * b)


@pytest.mark.parametrize("p", [1, 2, 3, 5])
def test_orthofermions_exact(p):
    c, _ = orthofermions(p)
    reps = check_orthofermion(c, p)
    assert all(r.residual == 0.0 for r in reps)


def test_u3_maps_combination_onto_b():
    bt, btd = pseudofermion_from_orthofermions([XI, ETA])
    assert np.array_equal(U3 @ bt @ U3.conj().T, B_PSEUDO)
    assert np.array_equal(U3 @ btd @ U3.conj().T, B_PSEUDO_DAG)


def test_basis_combination():
    bt, btd = build_order_p_combination(3, [1, 0, 0])
    assert np.count_nonzero(bt) == 1
    assert all_passed(check_pseudofermion(bt, btd))


@given(st.floats(0, 2 * np.pi), st.floats(0, 2 * np.pi), st.floats(0, np.pi / 2))
def test_any_normalized_combination(phi1, phi2, theta):
    xi = [np.cos(theta) * np.exp(1j * phi1), np.sin(theta) * np.exp(1j * phi2)]
    bt, btd = build_order_p_combination(2, xi)
    assert all_passed(check_pseudofermion(bt, btd, tol=1e-14))


def test_unnormalized_combination_rejected():
    with pytest.raises(ValueError):
        pseudofermion_from_orthofermions([1, 1])


def test_odd_matrices_hermitian():
    for M in (A_CAL, B_CAL):
        assert np.allclose(M, M.conj().T)
