"""Truncated Fock-space representations of generalized deformed oscillator algebras.

A structure function ``F`` fixes the algebra through ``a^dag a = F(N)`` and
``a a^dag = F(N+1)``.  On a ``D``-dimensional truncation the ladder matrices
are exact except in the top corner, so identities are compared inside a
trusted window that drops the last ``margin`` basis states.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

_OMEGA3 = np.exp(2j * np.pi / 3)

KINDS = ("standard", "c3_extended", "custom_table")


class StructureFunctionError(ValueError):
    """Structure function violates ``F(0) = 0`` or Fock positivity."""


@dataclass(frozen=True)
class StructureFunction:
    """``n -> F(n)`` for a GDOA with a bosonic Fock representation.

    ``kind`` is ``"standard"`` (``F(n) = n``), ``"c3_extended"``
    (``F(n) = n + beta_{n mod 3}``) or ``"custom_table"``.
    """

    kind: str = "standard"
    alpha0: float = 0.0
    alpha1: float = 0.0
    table: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise StructureFunctionError(f"unknown structure function kind {self.kind!r}")
        if self.kind == "c3_extended":
            if not self.alpha0 > -1:
                raise StructureFunctionError(
                    f"C3 parameters violate the Fock positivity constraint alpha0 > -1 "
                    f"(alpha0 = {self.alpha0})"
                )
            if not self.alpha0 + self.alpha1 > -2:
                raise StructureFunctionError(
                    f"C3 parameters violate the Fock positivity constraint alpha0 + alpha1 > -2 "
                    f"(alpha0 + alpha1 = {self.alpha0 + self.alpha1})"
                )
        if self.kind == "custom_table":
            if not self.table:
                raise StructureFunctionError("custom_table structure function needs values")
            object.__setattr__(self, "table", tuple(float(v) for v in self.table))
            if self.table[0] != 0.0:
                raise StructureFunctionError(f"F(0) must be 0, got {self.table[0]}")

    @classmethod
    def standard(cls) -> "StructureFunction":
        return cls("standard")

    @classmethod
    def c3(cls, alpha0: float, alpha1: float) -> "StructureFunction":
        return cls("c3_extended", float(alpha0), float(alpha1))

    @classmethod
    def from_table(cls, values: Sequence[float]) -> "StructureFunction":
        return cls("custom_table", table=tuple(values))

    @classmethod
    def from_kappa(cls, kappa1: complex) -> "StructureFunction":
        a0, a1 = kappa_to_alpha(kappa1)
        return cls.c3(a0, a1)

    # C3 parameters

    @property
    def alphas(self) -> tuple[float, float, float]:
        return (self.alpha0, self.alpha1, -self.alpha0 - self.alpha1)

    @property
    def betas(self) -> tuple[float, float, float]:
        return (0.0, self.alpha0, self.alpha0 + self.alpha1)

    @property
    def gammas(self) -> tuple[float, float, float]:
        """``gamma_mu = (beta_mu + beta_{mu+1}) / 2`` with ``beta_3 = beta_0``."""
        b = self.betas
        return tuple(0.5 * (b[mu] + b[(mu + 1) % 3]) for mu in range(3))

    @property
    def kappas(self) -> tuple[complex, complex]:
        k1 = alpha_to_kappa(self.alpha0, self.alpha1)
        return (k1, np.conj(k1))

    @property
    def length(self) -> int | None:
        """Number of tabulated values, ``None`` for analytic kinds."""
        return None if self.table is None else len(self.table)

    def __call__(self, n) -> np.ndarray:
        """Evaluate ``F`` at integer arguments.

        Analytic kinds accept negative arguments (``F(-1) = -1 + alpha0 +
        alpha1`` for the C3 family); tables only cover ``0 .. len - 1``.
        """
        n = np.asarray(n)
        if self.kind == "standard":
            return n.astype(float)
        if self.kind == "c3_extended":
            return n + np.asarray(self.betas)[np.mod(n, 3)]
        if np.any(n < 0) or np.any(n >= len(self.table)):
            raise IndexError(f"structure function table covers 0..{len(self.table) - 1}")
        return np.asarray(self.table)[n]

    def to_config(self) -> dict:
        if self.kind == "standard":
            return {"type": "standard"}
        if self.kind == "c3_extended":
            return {"type": "c3", "alpha0": self.alpha0, "alpha1": self.alpha1}
        return {"type": "table", "values": list(self.table)}

    @classmethod
    def from_config(cls, cfg: dict) -> "StructureFunction":
        kind = cfg.get("type")
        if kind == "standard":
            return cls.standard()
        if kind == "c3":
            return cls.c3(cfg["alpha0"], cfg["alpha1"])
        if kind == "table":
            return cls.from_table(cfg["values"])
        raise StructureFunctionError(f"unknown structure function type {kind!r}")


def alpha_to_kappa(alpha0: float, alpha1: float) -> complex:
    """``kappa_1`` such that ``alpha_mu = sum_nu exp(2 pi i mu nu / 3) kappa_nu``."""
    alphas = np.array([alpha0, alpha1, -alpha0 - alpha1])
    mu = np.arange(3)
    return complex(np.sum(alphas * _OMEGA3 ** (-mu)) / 3)


def kappa_to_alpha(kappa1: complex) -> tuple[float, float]:
    k = np.array([kappa1, np.conj(kappa1)])
    nu = np.array([1, 2])
    alphas = [np.sum(_OMEGA3 ** (mu * nu) * k) for mu in range(2)]
    return (float(alphas[0].real), float(alphas[1].real))


def structure_g(F: StructureFunction, n) -> np.ndarray:
    """``G(n) = F(n+1) - F(n)``."""
    n = np.asarray(n)
    if np.any(n < 0):
        raise IndexError("G(n) is defined for n >= 0")
    if F.length is not None and np.any(n + 1 >= F.length):
        raise IndexError(f"G(n) needs F(n+1); table covers 0..{F.length - 1}")
    return F(n + 1) - F(n)


class Modulation:
    """A real function of ``N``: a polynomial or an explicit table.

    Polynomial coefficients are in ascending powers.  A table starting at
    ``n = 0`` has no value at ``n = -1``; :meth:`at_or_zero` returns 0 there.
    """

    def __init__(self, coeffs: Sequence[float] | None = None, table: Sequence[float] | None = None):
        if (coeffs is None) == (table is None):
            raise ValueError("give exactly one of coeffs or table")
        self.coeffs = None if coeffs is None else np.asarray(coeffs, dtype=float)
        self.table = None if table is None else np.asarray(table, dtype=float)

    @classmethod
    def constant(cls, value: float = 1.0) -> "Modulation":
        return cls(coeffs=[value])

    def __call__(self, n) -> np.ndarray:
        n = np.asarray(n)
        if self.coeffs is not None:
            return np.polynomial.polynomial.polyval(n.astype(float), self.coeffs)
        if np.any(n < 0) or np.any(n >= len(self.table)):
            raise IndexError(f"modulation table covers 0..{len(self.table) - 1}")
        return self.table[n]

    def at_or_zero(self, n) -> np.ndarray:
        n = np.asarray(n)
        if self.coeffs is not None:
            return self(n)
        out = np.zeros(n.shape)
        ok = (n >= 0) & (n < len(self.table))
        out[ok] = self.table[n[ok]]
        return out

    def to_config(self) -> dict:
        if self.coeffs is not None:
            return {"type": "poly", "coeffs": self.coeffs.tolist()}
        return {"type": "table", "values": self.table.tolist()}

    @classmethod
    def from_config(cls, cfg: dict) -> "Modulation":
        if cfg["type"] == "poly":
            return cls(coeffs=cfg["coeffs"])
        return cls(table=cfg["values"])

    def __repr__(self) -> str:
        if self.coeffs is not None:
            return f"Modulation(coeffs={self.coeffs.tolist()})"
        return f"Modulation(table=<{len(self.table)} values>)"


@dataclass(frozen=True)
class TrustedWindow:
    """Keep basis states ``|0> .. |dim - 1 - margin>`` of every block."""

    dim: int
    margin: int = 4

    def __post_init__(self):
        if self.margin < 0:
            raise ValueError("margin must be non-negative")
        if self.margin >= self.dim:
            raise ValueError(f"margin {self.margin} leaves no states in a {self.dim}-dim space")

    @property
    def size(self) -> int:
        return self.dim - self.margin

    def indices(self, block_dim: int = 1) -> np.ndarray:
        keep = np.arange(self.size)
        return np.concatenate([b * self.dim + keep for b in range(block_dim)])

    def project(self, M: np.ndarray, block_dim: int = 1) -> np.ndarray:
        idx = self.indices(block_dim)
        return np.asarray(M)[np.ix_(idx, idx)]


@dataclass(frozen=True, eq=False)
class FockAlgebra:
    dim: int
    F: StructureFunction
    N: np.ndarray = field(repr=False)
    a: np.ndarray = field(repr=False)
    a_dag: np.ndarray = field(repr=False)

    @property
    def n(self) -> np.ndarray:
        return np.arange(self.dim)

    def func(self, g, shift: int = 0) -> np.ndarray:
        """Diagonal operator ``g(N + shift)``."""
        return np.diag(np.asarray(g(self.n + shift), dtype=complex))

    def F_op(self, shift: int = 0) -> np.ndarray:
        return self.func(self.F, shift)

    def identity(self) -> np.ndarray:
        return np.eye(self.dim, dtype=complex)

    def window(self, margin: int = 4) -> TrustedWindow:
        return TrustedWindow(self.dim, margin)


def build_fock_algebra(F: StructureFunction, dim: int) -> FockAlgebra:
    """Ladder matrices with ``a^dag |n> = sqrt(F(n+1)) |n+1>``.

    Rejects ``F`` if ``F(n) <= 0`` for some ``1 <= n <= dim``.  Tables must
    cover ``0 .. dim + 2`` because realization B reads ``F(N+2)``.
    """
    if dim < 1:
        raise ValueError("dim must be positive")
    if F.length is not None and F.length < dim + 3:
        raise StructureFunctionError(
            f"custom_table needs at least dim + 3 = {dim + 3} values, got {F.length}"
        )
    n = np.arange(1, dim + 1)
    values = F(n)
    bad = np.nonzero(values <= 0)[0]
    if bad.size:
        k = int(n[bad[0]])
        raise StructureFunctionError(f"F({k}) = {values[bad[0]]} <= 0; no Fock representation")
    N = np.diag(np.arange(dim, dtype=complex))
    a_dag = np.diag(np.sqrt(values[:-1]).astype(complex), -1)
    a = a_dag.conj().T.copy()
    return FockAlgebra(dim, F, N, a, a_dag)


def build_T_and_projectors(alg: FockAlgebra):
    """``T = exp(2 pi i N / 3)`` and the residue-class projectors ``P_0, P_1, P_2``."""
    n = alg.n
    # the same three roots reused for every n keeps T^3 = I to rounding
    T = np.diag(np.array([1.0, _OMEGA3, _OMEGA3 ** 2])[n % 3])
    Ps = [np.diag((n % 3 == mu).astype(complex)) for mu in range(3)]
    return T, Ps[0], Ps[1], Ps[2]


def projector(alg: FockAlgebra, mu: int) -> np.ndarray:
    return np.diag((alg.n % 3 == mu % 3).astype(complex))


def projectors_from_T(T: np.ndarray) -> list[np.ndarray]:
    """``P_mu = (1/3) sum_nu exp(-2 pi i mu nu / 3) T^nu``."""
    I = np.eye(T.shape[0], dtype=complex)
    powers = [I, T, T @ T]
    return [sum(np.exp(-2j * np.pi * mu * nu / 3) * powers[nu] for nu in range(3)) / 3
            for mu in range(3)]


def windowed_residual(LHS, RHS, w: TrustedWindow, block_dim: int = 1) -> float:
    """``||Pi (LHS - RHS) Pi||_F`` with ``Pi`` the window projector."""
    L, R = np.asarray(LHS), np.asarray(RHS)
    if L.shape != R.shape:
        raise ValueError(f"dimension mismatch: {L.shape} vs {R.shape}")
    if L.shape[0] != w.dim * block_dim:
        raise ValueError(f"window is for {block_dim} blocks of {w.dim}, matrix is {L.shape[0]}")
    return float(np.linalg.norm(w.project(L - R, block_dim)))
