import csv
import io

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from psslab.fixed import U1, U2
from psslab.fock import Modulation, StructureFunction, build_fock_algebra
from psslab.grid import Grid
from psslab.realizations import (
    build_bosonized_b,
    build_gdoa_realization_B,
    build_superpotential_realization,
    standard_algebra,
)
from psslab.spectra import (
    C3SpectrumParams,
    closed_form_spectrum_A,
    closed_form_spectrum_B,
    cluster_levels,
    compare_levels,
    relativistic_energies,
    spectrum_of,
)
from psslab.superpotential import Superpotential

ONE = Modulation.constant()


def test_cluster_examples():
    levels, tol = cluster_levels([2.0, 0.0, 1.0, 1.0 + 1e-12, 2.0])
    assert levels == [(0.0, 1), (1.0 + 5e-13, 2), (2.0, 2)]
    assert tol == pytest.approx(2e-8)
    assert cluster_levels([])[0] == []


@given(st.lists(st.floats(-100, 100), min_size=1, max_size=40))
def test_cluster_properties(values):
    levels, tol = cluster_levels(values)
    assert sum(m for _, m in levels) == len(values)
    energies = [e for e, _ in levels]
    assert energies == sorted(energies)
    assert all(b - a > tol for a, b in zip(energies, energies[1:]))


def test_closed_form_a_examples():
    # mu = 0, standard algebra, f = 1: E_{3k} = 3k, E_{3k+2} = E_{3k+3} = 3k + 3
    cf = closed_form_spectrum_A(C3SpectrumParams(0.0, 0.0, 0, 5, f=ONE, h3bar=Modulation.constant(7.5)))
    E = cf.energies
    for k in range(4):
        assert E[3 * k] == 3 * k and E[3 * k + 2] == 3 * k + 3 and E[3 * k + 3] == 3 * k + 3
        assert E[3 * k + 1] == 7.5 and cf.provenance[3 * k + 1] == "H3bar"
    # mu = 1, alpha0 = 1: gamma0 = 1/2 so E_{3k} = E_{3k+1} = 3k + 2
    E = closed_form_spectrum_A(C3SpectrumParams(1.0, 0.0, 1, 4, f=ONE, h3bar=ONE)).energies
    for k in range(4):
        assert E[3 * k] == E[3 * k + 1] == 3 * k + 2


def test_closed_form_b_examples():
    for boundary, ground in (("continued", -0.5), ("zero", 0.0)):
        E = closed_form_spectrum_B(C3SpectrumParams(0.0, 0.0, 0, 4, f1=ONE, f2=ONE, boundary=boundary)).energies
        assert E[0] == ground
        assert list(E[1:]) == ([2.5] * 3 + [5.5] * 3 + [8.5] * 3 + [11.5] * 3)[:len(E) - 1]
    E1 = closed_form_spectrum_B(C3SpectrumParams(0.0, 0.0, 1, 3, f1=ONE, f2=ONE)).energies
    assert list(E1) == [0.5, 0.5, 3.5, 3.5, 3.5, 6.5, 6.5, 6.5, 9.5]
    E2 = closed_form_spectrum_B(C3SpectrumParams(0.0, 0.0, 2, 3, f1=ONE, f2=ONE)).energies
    assert list(E2) == [1.5] * 3 + [4.5] * 3 + [7.5] * 3


@pytest.mark.parametrize("boundary", ["continued", "zero"])
@pytest.mark.parametrize("alphas", [(0.0, 0.0), (0.7, -0.4), (1.5, 0.5)])
def test_boundary_slot_matches_brute_force(boundary, alphas):
    alg = build_fock_algebra(StructureFunction.c3(*alphas), 30)
    f1, f2 = Modulation(coeffs=[1, 0.1]), Modulation(coeffs=[0.6, 0.2])
    for mu in range(3):
        rep = spectrum_of(build_bosonized_b(alg, f1, f2, 0.5, mu, boundary=boundary))
        cf = closed_form_spectrum_B(C3SpectrumParams(*alphas, mu, 10, f1=f1, f2=f2, boundary=boundary))
        cf = cf.first(rep.eigenvalues.size)
        assert compare_levels(rep, cf.energies, 1e-10, cf.formula_mask).passed


def test_ground_state_sign_freedom():
    f1, f2 = Modulation(coeffs=[1, 0.1]), Modulation(coeffs=[1, 0.2])
    lows = []
    for alphas in ((0.0, 0.0), (1.5, 0.5)):
        b = build_gdoa_realization_B(build_fock_algebra(StructureFunction.c3(*alphas), 30), f1, f2, 0.5)
        lows.append(spectrum_of(b).energies[0])
    assert lows[0] < 0 < lows[1]


def test_closed_form_params_checked():
    with pytest.raises(ValueError):
        C3SpectrumParams(0.0, 0.0, 3, 2)
    with pytest.raises(ValueError):
        closed_form_spectrum_A(C3SpectrumParams(0.0, 0.0, 0, 2))
    with pytest.raises(ValueError):
        closed_form_spectrum_B(C3SpectrumParams(0.0, 0.0, 0, 2, f=ONE))


def test_compare_levels_detects_mismatch():
    b = build_gdoa_realization_B(standard_algebra(20), ONE, ONE, 0.5)
    rep = spectrum_of(b)
    good = np.sort(rep.eigenvalues)
    assert compare_levels(rep, good, 1e-12).passed
    assert not compare_levels(rep, good + 1e-6, 1e-9).passed


def test_csv_export():
    b = build_gdoa_realization_B(standard_algebra(20), ONE, ONE, 0.5)
    rep = spectrum_of(b, n_levels=4)
    compare_levels(rep, [-0.5, 0.5, 0.5, 1.5, 1.5, 1.5, 2.5, 2.5, 2.5], 1e-12)
    rows = list(csv.reader(io.StringIO(rep.to_csv())))
    assert rows[0] == ["energy", "multiplicity", "source", "expected", "deviation"]
    assert [float(r[0]) for r in rows[1:]] == [-0.5, 0.5, 1.5, 2.5]
    assert [int(r[1]) for r in rows[1:]] == [1, 2, 3, 3]
    assert all(float(r[4]) == 0.0 for r in rows[1:])


def _grid_spectrum(W1, W2, h4, U, n_values=9):
    b = build_superpotential_realization(Superpotential.polynomial(W1), Superpotential.polynomial(W2),
                                         h4, Grid(-8.0, 8.0, 500), 0.5)
    primed = b.conjugated(U)
    return np.sort(spectrum_of(primed).eigenvalues)[:n_values]


def test_grid_oscillator_spectra():
    got = _grid_spectrum([0, 1], [0, 1], "iWprime", U1)
    assert np.allclose(got, [0, 1, 1, 2, 2, 2, 3, 3, 3], atol=0.02)
    got = _grid_spectrum([0, 1], [0, -1], "zero", U2)
    assert np.allclose(got, [-0.5, 0.5, 0.5, 1.5, 1.5, 1.5, 2.5, 2.5, 2.5], atol=0.02)


def test_grid_energy_cutoff():
    W = Superpotential.polynomial([0, 1])
    b = build_superpotential_realization(W, W, "zero", Grid(-8.0, 8.0, 200), 0.5)
    assert spectrum_of(b).eigenvalues.max() <= 8.0
    assert spectrum_of(b, e_max=3.0).eigenvalues.max() <= 3.0


def test_relativistic_examples():
    by_key = {(e.n, e.s): e for e in relativistic_energies(1.5, 0.0, 3)}
    assert by_key[(0, 1)].E2 == -0.5 and by_key[(0, 1)].complex_energy
    assert by_key[(0, 1)].to_dict()["complex"] is True
    by_key = {(e.n, e.s): e for e in relativistic_energies(1.0, 1.0, 3)}
    assert by_key[(2, 0)].E2 == 7.0
    with pytest.raises(ValueError):
        relativistic_energies(0.0, 1.0, 3)


@given(st.floats(0.01, 50), st.floats(1, 5), st.integers(0, 30))
def test_relativistic_real_for_large_lambda(omega, lam, n_max):
    assert all(not e.complex_energy for e in relativistic_energies(omega, lam, n_max))
