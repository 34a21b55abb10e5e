"""Dense complex operator arithmetic shared by every other module.

Operators are plain square ``numpy`` arrays of dtype ``complex128``.  A
:class:`BlockOperator` groups them into the 3x3 block matrices used for
charges and Hamiltonians; zero blocks may be stored as ``None`` so that
grid-sized blocks are not materialised needlessly.
"""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np


class DimensionError(ValueError):
    """Operands have incompatible shapes."""


class NotHermitianError(ValueError):
    def __init__(self, asymmetry: float, tol: float):
        self.asymmetry = asymmetry
        super().__init__(
            f"matrix is not Hermitian: ||M - M^dag||_F = {asymmetry:.3e} > tol = {tol:.3e}"
        )


class NotUnitaryError(ValueError):
    def __init__(self, deviation: float, tol: float):
        self.deviation = deviation
        super().__init__(
            f"matrix is not unitary: ||U U^dag - I||_F = {deviation:.3e} > tol = {tol:.3e}"
        )


def as_operator(M) -> np.ndarray:
    """Return ``M`` as a square complex array, rejecting anything else."""
    A = np.asarray(M, dtype=complex)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {A.shape}")
    return A


def _same_dim(A: np.ndarray, B: np.ndarray) -> None:
    if A.shape != B.shape:
        raise DimensionError(f"dimension mismatch: {A.shape} vs {B.shape}")


def matmul(A, B) -> np.ndarray:
    A, B = as_operator(A), as_operator(B)
    _same_dim(A, B)
    return A @ B


def commutator(A, B) -> np.ndarray:
    """``AB - BA``."""
    A, B = as_operator(A), as_operator(B)
    _same_dim(A, B)
    return A @ B - B @ A


def anticommutator(A, B) -> np.ndarray:
    """``AB + BA``."""
    A, B = as_operator(A), as_operator(B)
    _same_dim(A, B)
    return A @ B + B @ A


def dagger(M) -> np.ndarray:
    return np.conj(np.asarray(M)).T


def frobenius(M) -> float:
    return float(np.linalg.norm(np.asarray(M)))


def hermiticity_defect(M) -> float:
    """``||M - M^dag||_F``."""
    M = as_operator(M)
    return frobenius(M - M.conj().T)


def is_hermitian(M, tol: float = 1e-12) -> bool:
    return hermiticity_defect(M) <= tol


def unitarity_defect(U) -> float:
    """``||U U^dag - I||_F``."""
    U = as_operator(U)
    return frobenius(U @ U.conj().T - np.eye(U.shape[0]))


def hermitian_eigs(M, tol: float | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (ascending) and orthonormal eigenvectors of a Hermitian matrix.

    Parameters
    ----------
    M : array_like
        Square matrix; must satisfy ``||M - M^dag||_F <= tol``.
    tol : float, optional
        Hermiticity tolerance.  Defaults to ``1e-12 * max(1, ||M||_F)``.

    Returns
    -------
    w : ndarray
        Real eigenvalues in ascending order.  Ties keep LAPACK's order,
        which is deterministic for identical input.
    V : ndarray
        Columns are the matching eigenvectors.
    """
    M = as_operator(M)
    if tol is None:
        tol = 1e-12 * max(1.0, frobenius(M))
    defect = hermiticity_defect(M)
    if defect > tol:
        raise NotHermitianError(defect, tol)
    w, V = np.linalg.eigh(0.5 * (M + M.conj().T))
    order = np.argsort(w, kind="stable")
    return w[order], V[:, order]


class BlockOperator:
    """An ``n x n`` arrangement of equally sized square blocks.

    ``blocks[i][j]`` is either an ``inner_dim x inner_dim`` complex array or
    ``None`` for an identically zero block.
    """

    def __init__(self, blocks: Sequence[Sequence[np.ndarray | None]], inner_dim: int | None = None):
        n = len(blocks)
        if n == 0 or any(len(row) != n for row in blocks):
            raise DimensionError("block layout must be square")
        stored = [[None if b is None else as_operator(b) for b in row] for row in blocks]
        dims = {b.shape[0] for row in stored for b in row if b is not None}
        if inner_dim is None:
            if len(dims) != 1:
                raise DimensionError(f"cannot infer a common inner dimension from {sorted(dims)}")
            inner_dim = dims.pop()
        elif dims and dims != {inner_dim}:
            raise DimensionError(f"blocks must all be {inner_dim}x{inner_dim}, got {sorted(dims)}")
        self.block_dim = n
        self.inner_dim = int(inner_dim)
        self.blocks = stored

    # construction helpers

    @classmethod
    def zeros(cls, block_dim: int, inner_dim: int) -> "BlockOperator":
        return cls([[None] * block_dim for _ in range(block_dim)], inner_dim)

    @classmethod
    def diag(cls, diagonal: Sequence[np.ndarray]) -> "BlockOperator":
        n = len(diagonal)
        blocks = [[diagonal[i] if i == j else None for j in range(n)] for i in range(n)]
        return cls(blocks)

    @classmethod
    def kron(cls, small, inner) -> "BlockOperator":
        """``small (x) inner`` with ``small`` a scalar ``n x n`` matrix."""
        small = as_operator(small)
        inner = as_operator(inner)
        n = small.shape[0]
        blocks = [
            [None if small[i, j] == 0 else small[i, j] * inner for j in range(n)]
            for i in range(n)
        ]
        return cls(blocks, inner.shape[0])

    @classmethod
    def from_full(cls, M, block_dim: int = 3) -> "BlockOperator":
        M = as_operator(M)
        if M.shape[0] % block_dim:
            raise DimensionError(f"size {M.shape[0]} is not divisible by {block_dim}")
        d = M.shape[0] // block_dim
        blocks = [[M[i * d:(i + 1) * d, j * d:(j + 1) * d].copy() for j in range(block_dim)]
                  for i in range(block_dim)]
        return cls(blocks, d)

    # access

    @property
    def dim(self) -> int:
        return self.block_dim * self.inner_dim

    def block(self, i: int, j: int) -> np.ndarray:
        b = self.blocks[i][j]
        return np.zeros((self.inner_dim, self.inner_dim), dtype=complex) if b is None else b

    def full(self) -> np.ndarray:
        return np.block([[self.block(i, j) for j in range(self.block_dim)]
                         for i in range(self.block_dim)])

    # algebra

    def _check(self, other: "BlockOperator") -> None:
        if (self.block_dim, self.inner_dim) != (other.block_dim, other.inner_dim):
            raise DimensionError(
                f"block layout mismatch: {self.block_dim}x{self.inner_dim} "
                f"vs {other.block_dim}x{other.inner_dim}"
            )

    def dagger(self) -> "BlockOperator":
        n = self.block_dim
        return BlockOperator(
            [[None if self.blocks[j][i] is None else self.blocks[j][i].conj().T for j in range(n)]
             for i in range(n)],
            self.inner_dim,
        )

    def __matmul__(self, other):
        if isinstance(other, BlockOperator):
            self._check(other)
            n = self.block_dim
            out = []
            for i in range(n):
                row = []
                for k in range(n):
                    acc = None
                    for j in range(n):
                        a, b = self.blocks[i][j], other.blocks[j][k]
                        if a is None or b is None:
                            continue
                        acc = a @ b if acc is None else acc + a @ b
                    row.append(acc)
                out.append(row)
            return BlockOperator(out, self.inner_dim)
        return self.matvec(other)

    def _combine(self, other: "BlockOperator", sign: float) -> "BlockOperator":
        self._check(other)
        n = self.block_dim
        out = []
        for i in range(n):
            row = []
            for j in range(n):
                a, b = self.blocks[i][j], other.blocks[i][j]
                if a is None and b is None:
                    row.append(None)
                elif b is None:
                    row.append(a.copy())
                elif a is None:
                    row.append(sign * b)
                else:
                    row.append(a + sign * b)
            out.append(row)
        return BlockOperator(out, self.inner_dim)

    def __add__(self, other: "BlockOperator") -> "BlockOperator":
        return self._combine(other, 1.0)

    def __sub__(self, other: "BlockOperator") -> "BlockOperator":
        return self._combine(other, -1.0)

    def __mul__(self, scalar) -> "BlockOperator":
        n = self.block_dim
        return BlockOperator(
            [[None if b is None else scalar * b for b in row] for row in self.blocks],
            self.inner_dim,
        )

    __rmul__ = __mul__

    def __neg__(self) -> "BlockOperator":
        return self * -1.0

    def matvec(self, v) -> np.ndarray:
        """Apply to a vector of length ``dim`` (or a ``dim x k`` stack)."""
        v = np.asarray(v, dtype=complex)
        if v.shape[0] != self.dim:
            raise DimensionError(f"vector length {v.shape[0]} != operator dim {self.dim}")
        d = self.inner_dim
        out = np.zeros_like(v)
        for i in range(self.block_dim):
            for j in range(self.block_dim):
                b = self.blocks[i][j]
                if b is not None:
                    out[i * d:(i + 1) * d] += b @ v[j * d:(j + 1) * d]
        return out

    def is_zero_block(self, i: int, j: int) -> bool:
        b = self.blocks[i][j]
        return b is None or not np.any(b)

    def __repr__(self) -> str:
        return f"BlockOperator({self.block_dim}x{self.block_dim} blocks of {self.inner_dim})"


def _scalar_conjugate(M: BlockOperator, U: np.ndarray) -> BlockOperator:
    # (U (x) I) M (U (x) I)^dag, computed blockwise without forming U (x) I
    n = M.block_dim
    out = []
    for i in range(n):
        row = []
        for k in range(n):
            acc = None
            for j in range(n):
                if U[i, j] == 0:
                    continue
                for l in range(n):
                    b = M.blocks[j][l]
                    w = U[i, j] * np.conj(U[k, l])
                    if b is None or w == 0:
                        continue
                    acc = w * b if acc is None else acc + w * b
            row.append(acc)
        out.append(row)
    return BlockOperator(out, M.inner_dim)


def conjugate_by_unitary(M: BlockOperator, U, tol: float = 1e-12) -> BlockOperator:
    """Return ``U M U^dag``.

    ``U`` is either a :class:`BlockOperator` with the same layout as ``M`` or
    a small scalar matrix acting on the block index only (``U (x) I``).
    """
    if isinstance(U, BlockOperator):
        M._check(U)
        dev = unitarity_defect(U.full())
        if dev > tol * max(1.0, np.sqrt(U.dim)):
            raise NotUnitaryError(dev, tol)
        return U @ M @ U.dagger()
    U = as_operator(U)
    if U.shape[0] != M.block_dim:
        raise DimensionError(f"scalar unitary is {U.shape[0]}x{U.shape[0]}, need {M.block_dim}")
    dev = unitarity_defect(U)
    if dev > tol:
        raise NotUnitaryError(dev, tol)
    return _scalar_conjugate(M, U)


def conjugate_matrix(M, U, tol: float = 1e-12) -> np.ndarray:
    """``U M U^dag`` for plain matrices, with the same unitarity guard."""
    M, U = as_operator(M), as_operator(U)
    _same_dim(M, U)
    dev = unitarity_defect(U)
    if dev > tol * max(1.0, np.sqrt(U.shape[0])):
        raise NotUnitaryError(dev, tol)
    return U @ M @ U.conj().T


def operator_product(ops: Iterable) -> np.ndarray:
    """Left-to-right product of full matrices or block operators."""
    result = None
    for op in ops:
        m = op.full() if isinstance(op, BlockOperator) else as_operator(op)
        result = m if result is None else result @ m
    if result is None:
        raise ValueError("empty product")
    return result
