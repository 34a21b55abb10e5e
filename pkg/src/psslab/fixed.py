"""Fixed small matrices: pseudofermions, orthofermions, the odd matrices A and B,
spin matrices and the unitaries ``U1, U2, U3``.

All entries are exact binary fractions or ``1/sqrt(2)`` multiples so the
algebraic identities hold to rounding.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

_S2 = np.sqrt(2.0)


def _E(i: int, j: int, n: int = 3) -> np.ndarray:
    M = np.zeros((n, n), dtype=complex)
    M[i, j] = 1.0
    return M


A_CAL = np.array([
    [0, 0, 1 + 1j],
    [0, 0, -1 + 1j],
    [1 - 1j, -1 - 1j, 0],
], dtype=complex) / (2 * _S2)

B_CAL = np.array([
    [0, 0, 1 - 1j],
    [0, 0, 1 + 1j],
    [1 + 1j, 1 - 1j, 0],
], dtype=complex) / (2 * _S2)

B_PSEUDO = 0.5 * np.array([
    [0, 0, 1 + 1j],
    [0, 0, -1 + 1j],
    [0, 0, 0],
], dtype=complex)
B_PSEUDO_DAG = B_PSEUDO.conj().T

S3 = np.diag([1.0, 0.0, -1.0]).astype(complex)
SIGMA3 = np.kron(np.eye(2), S3)

U1 = np.array([
    [(1 - 1j) / 2, -(1 + 1j) / 2, 0],
    [0, 0, 1],
    [1 / _S2, 1j / _S2, 0],
], dtype=complex)

U2 = np.array([
    [1, 0, 0],
    [0, 0, 1],
    [0, 1, 0],
], dtype=complex)

U3 = np.array([
    [0, 1, 0],
    [0, 0, 1],
    [1, 0, 0],
], dtype=complex)

XI = (1 + 1j) / 2
ETA = (-1 + 1j) / 2


def orthofermions(p: int = 2) -> tuple[list[np.ndarray], list[np.ndarray]]:
    """Standard ``(p+1)``-dimensional rep: ``c_alpha = |0><alpha|``.

    Returns ``(c, c_dag)`` as lists indexed ``alpha = 1 .. p`` (0-based).
    """
    if p < 1:
        raise ValueError("orthofermion order must be at least 1")
    c = [_E(0, alpha, p + 1) for alpha in range(1, p + 1)]
    return c, [m.conj().T for m in c]


def pseudofermion_from_orthofermions(xi: Sequence[complex], tol: float = 1e-12):
    """``b~ = sum xi_alpha c_alpha^dag`` for normalized ``xi``."""
    xi = np.asarray(xi, dtype=complex)
    if xi.ndim != 1 or xi.size < 1:
        raise ValueError("xi must be a non-empty list of coefficients")
    norm = float(np.sum(np.abs(xi) ** 2))
    if abs(norm - 1.0) > tol:
        raise ValueError(f"coefficients must satisfy sum |xi|^2 = 1, got {norm:.15g}")
    _, c_dag = orthofermions(xi.size)
    bt = sum(x * m for x, m in zip(xi, c_dag))
    return bt, bt.conj().T


def parafermion_order2() -> tuple[np.ndarray, np.ndarray]:
    """Standard 3-dim order-2 parafermion: ``b = sqrt(2) (|0><1| + |1><2|)``.

    Satisfies ``[[b^dag, b], b] = -2 b`` but not ``b b^dag b = b``.
    """
    b = _S2 * (_E(0, 1) + _E(1, 2))
    return b, b.conj().T


def fermion() -> tuple[np.ndarray, np.ndarray]:
    b = _E(0, 1, 2)
    return b, b.conj().T
