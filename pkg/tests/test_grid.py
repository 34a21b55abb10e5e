import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from psslab.grid import (
    Grid,
    GridError,
    TestBank,
    build_grid_operators,
    convergence_order,
    multiplication_operator,
)


def test_derivative_of_sine():
    g = Grid(-3.0, 3.0, 301)
    ops = build_grid_operators(g)
    # P = -i d/dx, so i P sin = cos
    d = (1j * ops.P @ np.sin(g.x)).real
    err = np.abs(d - np.cos(g.x))[1:-1].max()
    assert err <= g.h**2 / 6 * 1.0001


def test_xp_commutator_converges_to_i():
    errs = []
    for n in (101, 201, 401):
        g = Grid(-1.0, 1.0, n)
        ops = build_grid_operators(g)
        C = ops.X @ ops.P - ops.P @ ops.X - 1j * np.eye(n)
        v = np.exp(-4 * g.x**2)
        errs.append(np.abs(C @ v)[2:-2].max())
    rates = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert np.all(np.abs(rates - 2) < 0.1)


def test_position_operator():
    g = Grid(-1.0, 1.0, 8)
    X = build_grid_operators(g).X
    assert np.array_equal(np.diag(X).real, g.x)
    three = Grid(-1.0, 1.0, 8)
    assert np.allclose(multiplication_operator(three, lambda x: x**2), np.diag(three.x**2))


def test_multiplication_operator_cases():
    g = Grid(-1.0, 1.0, 9)
    assert np.array_equal(multiplication_operator(g, lambda x: 1.0), np.eye(9))
    # H4 = i W''/(4W) vanishes for W = x away from x = 0
    g_even = Grid(-1.0, 1.0, 10)
    assert not np.any(multiplication_operator(g_even, lambda x: 0.0 / (4 * x)))
    with pytest.raises(GridError), np.errstate(divide="ignore"):
        multiplication_operator(g, lambda x: 1 / x)
    with pytest.raises(GridError):
        multiplication_operator(g, np.ones(3))


def test_grid_validation():
    with pytest.raises(GridError):
        Grid(0.0, 1.0, 4)
    with pytest.raises(GridError):
        Grid(1.0, 0.0, 10)
    g = Grid(-2.0, 2.0, 10)
    assert Grid.from_config(g.to_config()) == g
    assert g.refined().n_points == 20


def test_kinetic_operator_is_hermitian_and_positive():
    ops = build_grid_operators(Grid(-5.0, 5.0, 200))
    assert np.allclose(ops.K, ops.K.conj().T)
    assert np.linalg.eigvalsh(ops.K).min() > 0


def test_harmonic_spectrum_on_grid():
    g = Grid(-10.0, 10.0, 1000)
    ops = build_grid_operators(g)
    H = 0.5 * ops.K + 0.5 * np.diag(g.x**2)
    w = np.linalg.eigvalsh(H)[:5]
    assert np.allclose(w, np.arange(5) + 0.5, atol=5 * g.h**2)


@pytest.mark.parametrize("p", [2.0, 1.0])
def test_convergence_order_synthetic(p):
    est = convergence_order(lambda g: 3.0 * g.h**p, Grid(-1.0, 1.0, 50))
    assert abs(est.order - p) < 0.05
    assert len(est.residuals) == 3


def test_convergence_order_saturated():
    est = convergence_order(lambda g: 0.0, Grid(-1.0, 1.0, 50))
    assert est.saturated and est.order is None and np.isnan(float(est))


@given(st.integers(40, 200))
def test_bank_residual_is_relative(n):
    g = Grid(-6.0, 6.0, n)
    bank = TestBank(g, block_dim=2)
    assert bank.residual(lambda V: 0 * V) == 0.0
    assert bank.operator_norm(lambda V: 2 * V) == pytest.approx(2.0)
    assert bank.residual(lambda V: V) <= 1.0
