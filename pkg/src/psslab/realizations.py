"""Assembly of every (Q, Q^dag, H) triple as 3x3 block operators.

Position-space realizations run either on a finite-difference grid or on a
truncated standard Fock space, where ``x = (a + a^dag)/sqrt(2)`` and
``P = i (a^dag - a)/sqrt(2)``.  GDOA realizations and their bosonized
components live on a Fock space of any structure function.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import fixed
from .fock import (
    FockAlgebra,
    Modulation,
    StructureFunction,
    build_fock_algebra,
    projector,
)
from .grid import Grid, build_grid_operators
from .linalg_core import (
    BlockOperator,
    DimensionError,
    conjugate_by_unitary,
    hermitian_eigs,
)
from .superpotential import (
    DEFAULT_DELTA,
    Superpotential,
    equal_case_components,
    ossqm_constraint_residual,
    solve_unequal_case,
)

_S2 = np.sqrt(2.0)

SELECTORS = ("sec2_charges", "superpotential", "gdoa_a", "gdoa_b", "ossqm_khare",
             "bosonized_a", "bosonized_b", "oscillator")


@dataclass(frozen=True, eq=False)
class RealizationBundle:
    """A pseudosupersymmetric triple with its coupling and verification window.

    ``space`` is ``"fock"`` or ``"grid"``; ``margin`` is the number of
    boundary states (Fock) or nodes (grid) excluded from residuals.
    """

    name: str
    Q: BlockOperator
    Q_dag: BlockOperator
    H: BlockOperator
    c: float
    space: str
    margin: int = 4
    algebra: FockAlgebra | None = field(default=None, repr=False)
    grid: Grid | None = None
    meta: dict = field(default_factory=dict, repr=False)

    @property
    def block_dim(self) -> int:
        return self.H.block_dim

    @property
    def inner_dim(self) -> int:
        return self.H.inner_dim

    def conjugated(self, U, name: str | None = None) -> "RealizationBundle":
        """``U X U^dag`` for ``X`` in ``(Q, Q^dag, H)``."""
        return RealizationBundle(
            name or f"{self.name}'", conjugate_by_unitary(self.Q, U),
            conjugate_by_unitary(self.Q_dag, U), conjugate_by_unitary(self.H, U),
            self.c, self.space, self.margin, self.algebra, self.grid, dict(self.meta),
        )

    def with_H(self, H: BlockOperator, name: str | None = None) -> "RealizationBundle":
        return RealizationBundle(name or self.name, self.Q, self.Q_dag, H, self.c, self.space,
                                 self.margin, self.algebra, self.grid, dict(self.meta))


def _bundle(name, Q, H, c, space, margin, algebra=None, grid=None, **meta) -> RealizationBundle:
    return RealizationBundle(name, Q, Q.dagger(), H, float(c), space, margin, algebra, grid, meta)


# position spaces


@dataclass(frozen=True, eq=False)
class PositionSpace:
    """Where functions of ``x`` become matrices.

    ``nodes`` are the points at which superpotentials are sampled; ``func``
    turns samples into the matching operator.  ``K`` discretizes ``P^2``.
    """

    kind: str
    nodes: np.ndarray = field(repr=False)
    P: np.ndarray = field(repr=False)
    K: np.ndarray = field(repr=False)
    basis: np.ndarray | None = field(default=None, repr=False)
    algebra: FockAlgebra | None = field(default=None, repr=False)
    grid: Grid | None = None

    @property
    def dim(self) -> int:
        return self.nodes.size

    def func(self, values) -> np.ndarray:
        values = np.asarray(values, dtype=complex)
        if self.basis is None:
            return np.diag(values)
        V = self.basis
        return (V * values) @ V.conj().T

    def identity(self) -> np.ndarray:
        return np.eye(self.dim, dtype=complex)


def grid_space(g: Grid) -> PositionSpace:
    ops = build_grid_operators(g)
    return PositionSpace("grid", g.x, ops.P, ops.K, grid=g)


def fock_space(alg: FockAlgebra) -> PositionSpace:
    """Position and momentum from the ladder operators of ``alg``.

    Functions of ``x`` act through the eigenbasis of the truncated ``x``,
    so polynomials of low degree are exact inside the trusted window.
    """
    X = (alg.a + alg.a_dag) / _S2
    P = 1j * (alg.a_dag - alg.a) / _S2
    nodes, V = hermitian_eigs(X)
    return PositionSpace("fock", nodes, P, P @ P, basis=V, algebra=alg)


def as_position_space(space) -> PositionSpace:
    if isinstance(space, PositionSpace):
        return space
    if isinstance(space, Grid):
        return grid_space(space)
    if isinstance(space, FockAlgebra):
        return fock_space(space)
    raise TypeError(f"cannot use {type(space).__name__} as a position space")


# section 2 charges


@dataclass(frozen=True, eq=False)
class Sec2Charges:
    Q1: BlockOperator
    Q2: BlockOperator
    H: BlockOperator
    omega: float


def build_sec2_charges(alg: FockAlgebra, omega: float) -> Sec2Charges:
    """``Q1 = A Pi1 + B Pi2``, ``Q2 = -B Pi1 + A Pi2`` and the oscillator Hamiltonian.

    ``Pi1, Pi2`` come from inverting ``a = (Pi1 + i Pi2) / sqrt(2 omega)``.
    The spin part of the Hamiltonian is ``U1^dag diag(-1, 1, 3) U1 / 2``, the
    frame in which ``A`` and ``B`` are written; conjugating by ``U1`` gives
    the familiar ``diag(-1, 1, 3) / 2`` form.
    """
    if not omega > 0:
        raise ValueError(f"omega must be positive, got {omega}")
    if alg.F.kind != "standard":
        raise ValueError("the section-2 charges need the standard oscillator (F(n) = n)")
    a, ad = alg.a, alg.a_dag
    Pi1 = np.sqrt(omega / 2) * (a + ad)
    Pi2 = -1j * np.sqrt(omega / 2) * (a - ad)
    Q1 = BlockOperator.kron(fixed.A_CAL, Pi1) + BlockOperator.kron(fixed.B_CAL, Pi2)
    Q2 = BlockOperator.kron(-fixed.B_CAL, Pi1) + BlockOperator.kron(fixed.A_CAL, Pi2)
    spin = fixed.U1.conj().T @ np.diag([-1.0, 1.0, 3.0]) @ fixed.U1
    I = alg.identity()
    H = omega * (BlockOperator.kron(np.eye(3), 0.5 * (a @ ad + ad @ a))
                 + BlockOperator.kron(0.5 * spin, I))
    return Sec2Charges(Q1, Q2, H, float(omega))


def sec2_bundle(alg: FockAlgebra, omega: float, c: float = 0.5, margin: int = 4) -> RealizationBundle:
    """``Q = c (Q1 - i Q2)`` with the section-2 Hamiltonian."""
    s = build_sec2_charges(alg, omega)
    Q = c * (s.Q1 - 1j * s.Q2)
    return _bundle("sec2_charges", Q, s.H, c, "fock", margin, algebra=alg, omega=omega)


# superpotential realizations


def build_superpotential_realization(W1: Superpotential, W2: Superpotential, h4_choice, space,
                                     c: float, margin: int = 4,
                                     delta: float = DEFAULT_DELTA) -> RealizationBundle:
    """Charges ``(c/sqrt2)(1 -+ i)(P + i W_{1,2})`` and the matching Hamiltonian.

    Equal superpotentials use ``h4_choice``; unequal ones take ``V1, V2, H4``
    from the closed-form solution and ignore ``h4_choice``.
    """
    sp = as_position_space(space)
    x = sp.nodes
    w1, d1, _ = W1.evaluate(x)
    w2, d2, _ = W2.evaluate(x)
    P, K = sp.P, sp.K
    equal = W1.same_as(W2, x)
    if equal:
        sol = equal_case_components(W1, h4_choice, x)
        V1, V2, h4 = sol.v1, sol.v2, sol.h4
    else:
        sol = solve_unequal_case(W1, W2, x, delta)
        V1, V2, h4 = sol.V1, sol.V2, sol.H4
    H1 = 0.5 * K + sp.func(V1)
    H2 = 0.5 * K + sp.func(V2)
    H3 = 0.5 * K + sp.func(0.25 * (w1**2 + w2**2 + d1 + d2))
    H4 = sp.func(h4)
    H = BlockOperator([[H1, H4, None], [H4.conj().T, H2, None], [None, None, H3]])
    k = c / _S2
    Q = BlockOperator([
        [None, None, k * (1 - 1j) * (P + 1j * sp.func(w1))],
        [None, None, k * (1 + 1j) * (P + 1j * sp.func(w2))],
        [None, None, None],
    ])
    return _bundle("superpotential", Q, H, c, sp.kind, margin, algebra=sp.algebra, grid=sp.grid,
                   equal=bool(equal), h4_max=float(np.max(np.abs(h4), initial=0.0)))


OSCILLATORS = {
    # k: (W1 coeffs, W2 coeffs, H4 choice, diagonalizing unitary)
    1: ([0, 1], [0, 1], "iWprime", fixed.U1),
    2: ([0, 1], [0, 1], [0.25], fixed.U1),
    3: ([0, -1], [0, -1], "zero", fixed.U1),
    4: ([0, 1], [0, -1], "zero", fixed.U2),
}


def build_oscillator(k: int, space, c: float = 0.5, margin: int = 4) -> tuple[RealizationBundle, RealizationBundle]:
    """Oscillator ``k`` in 1..4 and its diagonal form after ``U1`` or ``U2``."""
    if k not in OSCILLATORS:
        raise ValueError(f"oscillator index must be 1..4, got {k}")
    c1, c2, h4, U = OSCILLATORS[k]
    b = build_superpotential_realization(Superpotential.polynomial(c1), Superpotential.polynomial(c2),
                                         h4, space, c, margin)
    b = RealizationBundle(f"oscillator_{k}", b.Q, b.Q_dag, b.H, b.c, b.space, b.margin,
                          b.algebra, b.grid, b.meta)
    return b, b.conjugated(U, f"oscillator_{k}'")


# GDOA realizations


def _F_ext(F: StructureFunction, n: np.ndarray, boundary: str) -> np.ndarray:
    """``F`` at possibly negative arguments.

    ``boundary="continued"`` uses the analytic form (``F(-1) = -1 + alpha0 +
    alpha1``); tables have no continuation and ``"zero"`` forces 0.
    """
    n = np.asarray(n)
    neg = n < 0
    out = np.zeros(n.shape)
    if boundary == "continued" and F.kind != "custom_table":
        out[neg] = F(n[neg])
    elif boundary not in ("continued", "zero"):
        raise ValueError(f"unknown boundary convention {boundary!r}")
    out[~neg] = F(n[~neg])
    return out


def _mod_ext(f: Modulation, n: np.ndarray) -> np.ndarray:
    return f.at_or_zero(np.asarray(n))


def gdoa_a_g(alg: FockAlgebra, f: Modulation, h3bar: Modulation) -> list[np.ndarray]:
    """Diagonals ``g_0, g_1, g_2`` of the family-A Hamiltonian blocks."""
    n = alg.n
    return [f(n) ** 2 * alg.F(n), f(n + 1) ** 2 * alg.F(n + 1), np.asarray(h3bar(n), dtype=float)]


def gdoa_b_g(alg: FockAlgebra, f1: Modulation, f2: Modulation, boundary: str = "continued") -> list[np.ndarray]:
    """``g_nu(n) = [f1^2(n+nu) F(n+nu) + f2^2(n+nu-1) F(n+nu-1)] / 2``."""
    n = alg.n
    out = []
    for nu in range(3):
        m = n + nu
        first = f1(m) ** 2 * alg.F(m)
        second = _mod_ext(f2, m - 1) ** 2 * _F_ext(alg.F, m - 1, boundary)
        out.append(0.5 * (first + second))
    return out


def _diag(values) -> np.ndarray:
    return np.diag(np.asarray(values, dtype=complex))


def build_gdoa_realization_A(alg: FockAlgebra, f: Modulation, h3bar: Modulation, c: float,
                             margin: int = 4) -> RealizationBundle:
    """``Q = 2c f(N) a^dag`` in block (0, 1), ``H = diag(f^2(N) F(N), f^2(N+1) F(N+1), H3bar(N))``."""
    g = gdoa_a_g(alg, f, h3bar)
    Q = BlockOperator([[None, 2 * c * alg.func(f) @ alg.a_dag, None],
                       [None, None, None], [None, None, None]], alg.dim)
    H = BlockOperator.diag([_diag(v) for v in g])
    return _bundle("gdoa_a", Q, H, c, "fock", margin, algebra=alg, f=f, h3bar=h3bar)


def build_gdoa_realization_B(alg: FockAlgebra, f1: Modulation, f2: Modulation, c: float,
                             margin: int = 4, boundary: str = "continued") -> RealizationBundle:
    """``Q`` with ``f1(N) a^dag`` in block (0, 1) and ``i f2(N+1) a`` in block (2, 1), times ``c sqrt2``.

    The lowest entry of ``H1`` contains ``f2^2(-1) F(-1)``; see
    :func:`_F_ext` for the ``boundary`` conventions.  The defining relations
    never involve that entry.
    """
    g = gdoa_b_g(alg, f1, f2, boundary)
    k = c * _S2
    Q = BlockOperator([
        [None, k * alg.func(f1) @ alg.a_dag, None],
        [None, None, None],
        [None, 1j * k * alg.func(f2, 1) @ alg.a, None],
    ], alg.dim)
    H = BlockOperator.diag([_diag(v) for v in g])
    return _bundle("gdoa_b", Q, H, c, "fock", margin, algebra=alg, f1=f1, f2=f2, boundary=boundary)


# reduction and bosonization


def build_U4(alg: FockAlgebra) -> BlockOperator:
    """Block ``(i, j)`` is ``P_{(i - j) mod 3}``."""
    Ps = [projector(alg, mu) for mu in range(3)]
    return BlockOperator([[Ps[(i - j) % 3] for j in range(3)] for i in range(3)])


@dataclass(frozen=True, eq=False)
class Reduction:
    components: list[RealizationBundle]
    offdiag_norm: float
    U4: BlockOperator = field(repr=False)
    conjugated: RealizationBundle = field(repr=False)


def _offdiag_norm(M: BlockOperator, keep: np.ndarray) -> float:
    total = 0.0
    for i in range(3):
        for j in range(3):
            if i != j and M.blocks[i][j] is not None:
                total += float(np.linalg.norm(M.blocks[i][j][np.ix_(keep, keep)])) ** 2
    return float(np.sqrt(total))


def reduce_via_U4(bundle: RealizationBundle) -> Reduction:
    """Conjugate by ``U4`` and split into three scalar PsSSQM components."""
    if bundle.space != "fock" or bundle.algebra is None:
        raise ValueError("U4 reduction needs a Fock-space bundle")
    if bundle.block_dim != 3:
        raise DimensionError("U4 reduction needs a 3x3 block bundle")
    alg = bundle.algebra
    U4 = build_U4(alg)
    conj = bundle.conjugated(U4, f"{bundle.name}/U4")
    keep = np.arange(alg.dim - bundle.margin)
    off = np.sqrt(sum(_offdiag_norm(M, keep) ** 2 for M in (conj.Q, conj.Q_dag, conj.H)))
    family = {"gdoa_a": "bosonized_a", "gdoa_b": "bosonized_b"}.get(bundle.name, bundle.name)
    comps = []
    for mu in range(3):
        comps.append(RealizationBundle(
            f"{family}:{mu}", BlockOperator([[conj.Q.block(mu, mu)]]),
            BlockOperator([[conj.Q_dag.block(mu, mu)]]), BlockOperator([[conj.H.block(mu, mu)]]),
            bundle.c, "fock", bundle.margin, alg, None, dict(bundle.meta, mu=mu),
        ))
    return Reduction(comps, float(off), U4, conj)


def _mu_H(alg: FockAlgebra, g: list[np.ndarray], mu: int) -> np.ndarray:
    # sum_nu g_nu(N) P_{mu + 3 - nu}
    return sum(_diag(g[nu]) @ projector(alg, mu + 3 - nu) for nu in range(3))


def build_bosonized_a(alg: FockAlgebra, f: Modulation, h3bar: Modulation, c: float, mu: int,
                      margin: int = 4) -> RealizationBundle:
    """``Q_mu = 2c f(N) a^dag P_{mu+2}``, ``Q_mu^dag = 2c f(N+1) a P_mu``."""
    Q = 2 * c * alg.func(f) @ alg.a_dag @ projector(alg, mu + 2)
    Qd = 2 * c * alg.func(f, 1) @ alg.a @ projector(alg, mu)
    H = _mu_H(alg, gdoa_a_g(alg, f, h3bar), mu)
    return RealizationBundle(f"bosonized_a:{mu}", BlockOperator([[Q]]), BlockOperator([[Qd]]),
                             BlockOperator([[H]]), float(c), "fock", margin, alg, None,
                             {"f": f, "h3bar": h3bar, "mu": mu})


def build_bosonized_b(alg: FockAlgebra, f1: Modulation, f2: Modulation, c: float, mu: int,
                      margin: int = 4, boundary: str = "continued") -> RealizationBundle:
    """``Q_mu = c sqrt2 [f1(N) a^dag + i f2(N+1) a] P_{mu+2}``."""
    k = c * _S2
    # same factor order as realization B, so both round identically
    Q = (k * alg.func(f1) @ alg.a_dag + 1j * k * alg.func(f2, 1) @ alg.a) @ projector(alg, mu + 2)
    Qd = (k * alg.func(f1, 1) @ alg.a @ projector(alg, mu)
          - 1j * k * alg.func(f2) @ alg.a_dag @ projector(alg, mu + 1))
    H = _mu_H(alg, gdoa_b_g(alg, f1, f2, boundary), mu)
    return RealizationBundle(f"bosonized_b:{mu}", BlockOperator([[Q]]), BlockOperator([[Qd]]),
                             BlockOperator([[H]]), float(c), "fock", margin, alg, None,
                             {"f1": f1, "f2": f2, "mu": mu, "boundary": boundary})


# orthosupersymmetry


def combine_charges(QK: Sequence[BlockOperator], zetas: Sequence[complex], c: float,
                    tol: float = 1e-12) -> tuple[BlockOperator, BlockOperator]:
    """``Q~ = sum zeta_alpha (Q_alpha)^dag`` with ``sum |zeta|^2 = 2 c^2``."""
    zetas = np.asarray(zetas, dtype=complex)
    if zetas.size != len(QK):
        raise ValueError(f"{len(QK)} charges but {zetas.size} coefficients")
    norm = float(np.sum(np.abs(zetas) ** 2))
    if abs(norm - 2 * c * c) > tol * max(1.0, 2 * c * c):
        raise ValueError(f"coefficients must satisfy sum |zeta|^2 = 2c^2 = {2 * c * c:.15g}, got {norm:.15g}")
    Qt = None
    for z, q in zip(zetas, QK):
        term = z * q.dagger()
        Qt = term if Qt is None else Qt + term
    return Qt, Qt.dagger()


def build_order_p_combination(p: int, xi: Sequence[complex]) -> tuple[np.ndarray, np.ndarray]:
    """``b~ = sum xi_alpha c_alpha^dag`` on the ``(p+1)``-dim orthofermion rep."""
    if p < 2:
        raise ValueError("order p must be at least 2")
    if len(xi) != p:
        raise ValueError(f"need {p} coefficients, got {len(xi)}")
    return fixed.pseudofermion_from_orthofermions(xi)


class ConstraintError(ValueError):
    def __init__(self, residual: float, tol: float):
        self.residual = residual
        super().__init__(
            f"superpotentials violate (W1)^2 + W1' = (W2)^2 + W2': residual {residual:.3e} > {tol:.1e}"
        )


@dataclass(frozen=True, eq=False)
class KhareRealization:
    QK: list[BlockOperator]
    HK: BlockOperator
    tilde: RealizationBundle
    mapped: RealizationBundle
    constraint_residual: float
    zeta: complex
    rho: complex
    margin: int
    grid: Grid | None = None
    algebra: FockAlgebra | None = field(default=None, repr=False)


def build_ossqm_khare(W1K: Superpotential, W2K: Superpotential, space, c: float = 0.5,
                      zeta: complex | None = None, rho: complex | None = None, margin: int = 4,
                      tol: float = 1e-6) -> KhareRealization:
    """Order-two orthosupercharges ``Q_alpha = |0><alpha| (P - i W_alpha)`` and ``H = diag(h1, h2, h3)``.

    The pseudosupercharge ``Q~ = zeta Q_1^dag + rho Q_2^dag`` is then
    conjugated by ``U3`` into the standard block pattern.  Defaults are
    ``zeta, rho = c (1 -+ i) / sqrt2``.
    """
    sp = as_position_space(space)
    x = sp.nodes
    res = ossqm_constraint_residual(W1K, W2K, x)
    if res > tol:
        raise ConstraintError(res, tol)
    if zeta is None:
        zeta = c * (1 - 1j) / _S2
    if rho is None:
        rho = c * (1 + 1j) / _S2
    w1, d1, _ = W1K.evaluate(x)
    w2, d2, _ = W2K.evaluate(x)
    P, K = sp.P, sp.K
    Q1 = BlockOperator([[None, P - 1j * sp.func(w1), None], [None, None, None], [None, None, None]])
    Q2 = BlockOperator([[None, None, P - 1j * sp.func(w2)], [None, None, None], [None, None, None]])
    h1 = 0.5 * (K + sp.func(w1**2 + d1))
    h2 = 0.5 * (K + sp.func(w1**2 - d1))
    h3 = 0.5 * (K + sp.func(w2**2 - d2))
    HK = BlockOperator.diag([h1, h2, h3])
    Qt, _ = combine_charges([Q1, Q2], [zeta, rho], c)
    tilde = _bundle("ossqm_khare~", Qt, HK, c, sp.kind, margin, algebra=sp.algebra, grid=sp.grid)
    mapped = tilde.conjugated(fixed.U3, "ossqm_khare")
    return KhareRealization([Q1, Q2], HK, tilde, mapped, res, complex(zeta), complex(rho), margin,
                            sp.grid, sp.algebra)


def standard_algebra(dim: int) -> FockAlgebra:
    return build_fock_algebra(StructureFunction.standard(), dim)
