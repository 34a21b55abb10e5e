"""Eigenvalues, degeneracy clustering, closed-form C3 spectra and the relativistic formula."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .fock import Modulation, StructureFunction
from .linalg_core import hermitian_eigs


def cluster_levels(eigs, tol: float | None = None) -> tuple[list[tuple[float, int]], float]:
    """Group sorted eigenvalues into ``(energy, multiplicity)`` levels.

    A new level starts wherever consecutive eigenvalues differ by more than
    ``tol`` (default ``1e-8 * max(1, |E_max|)``).  Level energies are means.
    """
    w = np.sort(np.asarray(eigs, dtype=float))
    if tol is None:
        tol = 1e-8 * max(1.0, float(np.max(np.abs(w), initial=0.0)))
    if w.size == 0:
        return [], tol
    breaks = np.nonzero(np.diff(w) > tol)[0] + 1
    groups = np.split(w, breaks)
    return [(float(g.mean()), int(g.size)) for g in groups], tol


@dataclass
class Comparison:
    expected: list[float]
    max_deviation: float
    tol: float
    passed: bool
    formula_deviation: float | None = None


@dataclass
class SpectrumReport:
    levels: list[tuple[float, int]]
    cluster_tol: float
    source: str
    eigenvalues: np.ndarray = field(repr=False)
    comparison: Comparison | None = None

    @property
    def energies(self) -> list[float]:
        return [e for e, _ in self.levels]

    @property
    def multiplicities(self) -> list[int]:
        return [m for _, m in self.levels]

    def to_dict(self) -> dict:
        d = {
            "source": self.source,
            "cluster_tol": self.cluster_tol,
            "levels": [{"energy": e, "multiplicity": m} for e, m in self.levels],
        }
        if self.comparison is not None:
            c = self.comparison
            d["comparison"] = {"max_deviation": c.max_deviation, "tol": c.tol, "pass": c.passed,
                               "formula_deviation": c.formula_deviation,
                               "expected": list(c.expected)}
        return d

    def to_csv(self) -> str:
        """Rows of ``energy, multiplicity, source, expected, deviation``."""
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["energy", "multiplicity", "source", "expected", "deviation"])
        expected = None
        if self.comparison is not None:
            expected, _ = cluster_levels(self.comparison.expected, self.cluster_tol)
        for i, (e, m) in enumerate(self.levels):
            if expected is not None and i < len(expected):
                ex = expected[i][0]
                writer.writerow([repr(e), m, self.source, repr(ex), repr(abs(e - ex))])
            else:
                writer.writerow([repr(e), m, self.source, "", ""])
        return buf.getvalue()


def retained_eigenvalues(bundle, margin: int | None = None, e_max: float | None = None) -> np.ndarray:
    """Eigenvalues of ``H`` that the truncation can be trusted with.

    Fock bundles: the principal submatrix on the trusted window of every
    block.  Grid bundles: the full matrix, keeping energies below
    ``x_max^2 / 8`` unless ``e_max`` is given.
    """
    H = bundle.H.full()
    if bundle.space == "fock":
        m = bundle.margin if margin is None else margin
        inner = bundle.H.inner_dim
        keep = np.concatenate([b * inner + np.arange(inner - m) for b in range(bundle.H.block_dim)])
        H = H[np.ix_(keep, keep)]
    elif e_max is None:
        g = bundle.grid
        e_max = max(abs(g.x_min), abs(g.x_max)) ** 2 / 8
    w, _ = hermitian_eigs(H, tol=1e-10 * max(1.0, float(np.linalg.norm(H))))
    if e_max is not None:
        w = w[w <= e_max]
    return w


def spectrum_of(bundle, margin: int | None = None, e_max: float | None = None,
                cluster_tol: float | None = None, n_levels: int | None = None) -> SpectrumReport:
    w = retained_eigenvalues(bundle, margin, e_max)
    levels, tol = cluster_levels(w, cluster_tol)
    if n_levels is not None:
        levels = levels[:n_levels]
        w = w[:sum(m for _, m in levels)]
    return SpectrumReport(levels, tol, bundle.name, w)


def compare_levels(report: SpectrumReport, expected: Sequence[float], tol: float = 1e-9,
                   formula_mask: Sequence[bool] | None = None) -> Comparison:
    """Sorted-multiset comparison of retained eigenvalues with ``expected``.

    Only the first ``min(len)`` values are compared.  With ``formula_mask``
    the deviation restricted to formula-backed slots (nearest computed
    eigenvalue) is reported separately.
    """
    got = np.sort(np.asarray(report.eigenvalues, dtype=float))
    exp_all = np.asarray(expected, dtype=float)
    exp = np.sort(exp_all)
    n = min(got.size, exp.size)
    dev = float(np.max(np.abs(got[:n] - exp[:n]), initial=0.0))
    fdev = None
    if formula_mask is not None:
        mask = np.asarray(formula_mask, dtype=bool)
        sel = exp_all[mask]
        if sel.size and got.size:
            fdev = float(np.max(np.min(np.abs(sel[:, None] - got[None, :]), axis=1)))
    passed = dev <= tol and n > 0 and (fdev is None or fdev <= tol)
    report.comparison = Comparison(list(exp[:n]), dev, tol, passed, fdev)
    return report.comparison


# closed-form C3 spectra


@dataclass
class C3SpectrumParams:
    """Parameters of a bosonized C3 component ``mu``.

    ``gamma_mu = (beta_mu + beta_{mu+1}) / 2`` follow from ``alpha0, alpha1``.
    """

    alpha0: float
    alpha1: float
    mu: int
    k_max: int
    f: Modulation | None = None
    h3bar: Modulation | None = None
    f1: Modulation | None = None
    f2: Modulation | None = None
    boundary: str = "continued"

    def __post_init__(self):
        if self.mu not in (0, 1, 2):
            raise ValueError(f"mu must be 0, 1 or 2, got {self.mu}")
        if self.k_max < 1:
            raise ValueError("k_max must be positive")
        self.structure = StructureFunction.c3(self.alpha0, self.alpha1)

    @property
    def gamma(self) -> tuple[float, float, float]:
        return self.structure.gammas


@dataclass
class ClosedFormSpectrum:
    """Energies by Fock slot ``n`` with their provenance (``"formula"`` or ``"H3bar"``)."""

    energies: np.ndarray
    provenance: list[str]

    @property
    def formula_mask(self) -> np.ndarray:
        return np.array([p == "formula" for p in self.provenance])

    def first(self, n: int) -> "ClosedFormSpectrum":
        return ClosedFormSpectrum(self.energies[:n], self.provenance[:n])


def closed_form_spectrum_A(p: C3SpectrumParams) -> ClosedFormSpectrum:
    """Family-A energies for slots ``n = 0 .. 3 k_max - 1``."""
    if p.f is None or p.h3bar is None:
        raise ValueError("family A needs f and h3bar")
    g0, _, g2 = p.gamma
    f, h = p.f, p.h3bar
    E, prov = [], []
    for k in range(p.k_max):
        n = 3 * k
        if p.mu == 0:
            top = (n + 3) * f(n + 3) ** 2
            slots = [(n * f(n) ** 2, "formula"), (h(n + 1), "H3bar"), (top, "formula")]
        elif p.mu == 1:
            e = (n + 1 + 2 * g0) * f(n + 1) ** 2
            slots = [(e, "formula"), (e, "formula"), (h(n + 2), "H3bar")]
        else:
            e = (n + 2 + 2 * g2) * f(n + 2) ** 2
            slots = [(h(n), "H3bar"), (e, "formula"), (e, "formula")]
        for v, s in slots:
            E.append(float(v))
            prov.append(s)
    return ClosedFormSpectrum(np.array(E), prov)


def closed_form_spectrum_B(p: C3SpectrumParams) -> ClosedFormSpectrum:
    """Family-B energies for slots ``n = 0 .. 3 k_max - 1``.

    The ``k = 0`` slot of ``mu = 0`` involves ``f2^2(-1) F(-1)``; with
    ``boundary="continued"`` the formula applies unchanged, with ``"zero"``
    that term is dropped.
    """
    if p.f1 is None or p.f2 is None:
        raise ValueError("family B needs f1 and f2")
    g0, _, g2 = p.gamma
    f1, f2 = p.f1, p.f2

    def e0(k):
        n = 3 * k
        low = (n - 1 + 2 * g2) * f2.at_or_zero(n - 1) ** 2
        if n == 0 and p.boundary == "zero":
            low = 0.0
        return 0.5 * (n * f1(n) ** 2 + low)

    def e1(k):
        n = 3 * k
        return 0.5 * ((n + 1 + 2 * g0) * f1(n + 1) ** 2 + n * f2(n) ** 2)

    def e2(k):
        n = 3 * k
        return 0.5 * ((n + 2 + 2 * g2) * f1(n + 2) ** 2 + (n + 1 + 2 * g0) * f2(n + 1) ** 2)

    E = []
    for k in range(p.k_max):
        if p.mu == 0:
            E += [e0(k), e0(k + 1), e0(k + 1)]
        elif p.mu == 1:
            E += [e1(k), e1(k), e1(k + 1)]
        else:
            E += [e2(k)] * 3
    return ClosedFormSpectrum(np.array(E, dtype=float), ["formula"] * len(E))


# relativistic energies


@dataclass
class RelativisticEnergy:
    n: int
    s: int
    E2: float

    @property
    def complex_energy(self) -> bool:
        return self.E2 < 0

    def to_dict(self) -> dict:
        return {"n": self.n, "s": self.s, "E2": self.E2, "complex": self.complex_energy}


def relativistic_energies(omega: float, lam: float, n_max: int) -> list[RelativisticEnergy]:
    """``E^2 = 1 + 2 omega [n + (lambda + 1)/2 - s]`` for ``n <= n_max``, ``s in {-1, 0, 1}``."""
    if not omega > 0:
        raise ValueError(f"omega must be positive, got {omega}")
    return [RelativisticEnergy(n, s, 1 + 2 * omega * (n + 0.5 * (lam + 1) - s))
            for n in range(n_max + 1) for s in (-1, 0, 1)]
