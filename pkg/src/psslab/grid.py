"""Position-grid discretization with Dirichlet boundaries.

Momentum is the 3-point central difference ``-i d/dx``; the kinetic operator
``-d^2/dx^2`` uses the compact 3-point stencil.  Relation residuals on a grid
are measured on a bank of smooth test vectors (see :class:`TestBank`) because
the discrete identities only hold to ``O(h^2)`` on smooth functions, never in
operator norm.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.special import eval_hermite


class GridError(ValueError):
    pass


@dataclass(frozen=True)
class Grid:
    x_min: float
    x_max: float
    n_points: int

    def __post_init__(self):
        if self.n_points < 8:
            raise GridError(f"a grid needs at least 8 points, got {self.n_points}")
        if not self.x_max > self.x_min:
            raise GridError("x_max must exceed x_min")

    @property
    def h(self) -> float:
        return (self.x_max - self.x_min) / (self.n_points - 1)

    @property
    def x(self) -> np.ndarray:
        return np.linspace(self.x_min, self.x_max, self.n_points)

    def refined(self, factor: int = 2) -> "Grid":
        return Grid(self.x_min, self.x_max, self.n_points * factor)

    def to_config(self) -> dict:
        return {"x_min": self.x_min, "x_max": self.x_max, "n_points": self.n_points}

    @classmethod
    def from_config(cls, cfg: dict) -> "Grid":
        return cls(float(cfg["x_min"]), float(cfg["x_max"]), int(cfg["n_points"]))


@dataclass(frozen=True, eq=False)
class GridOperatorSet:
    grid: Grid
    P: np.ndarray = field(repr=False)
    X: np.ndarray = field(repr=False)
    K: np.ndarray = field(repr=False)
    boundary: str = "dirichlet"


def build_grid_operators(g: Grid) -> GridOperatorSet:
    n, h = g.n_points, g.h
    i = np.arange(n - 1)
    P = np.zeros((n, n), dtype=complex)
    P[i, i + 1] = -1j / (2 * h)
    P[i + 1, i] = 1j / (2 * h)
    K = np.zeros((n, n), dtype=complex)
    K[np.arange(n), np.arange(n)] = 2.0 / h**2
    K[i, i + 1] = -1.0 / h**2
    K[i + 1, i] = -1.0 / h**2
    X = np.diag(g.x.astype(complex))
    return GridOperatorSet(g, P, X, K)


def multiplication_operator(g: Grid, f: Callable | Sequence[float]) -> np.ndarray:
    """``diag(f(x_i))``; ``f`` is a callable or the sampled values."""
    x = g.x
    values = np.asarray(f(x) if callable(f) else f, dtype=complex)
    if values.shape == ():
        values = np.full(x.shape, values)
    if values.shape != x.shape:
        raise GridError(f"expected {x.size} samples, got {values.shape}")
    bad = np.nonzero(~np.isfinite(values))[0]
    if bad.size:
        raise GridError(f"non-finite value at node {bad[0]} (x = {x[bad[0]]:.6g})")
    return np.diag(values)


class TestBank:
    """Smooth block test vectors for grid relation residuals.

    Hermite functions ``H_k(x/s) exp(-x^2 / 2s^2)``, ``k < n_functions``, are
    placed in each of ``block_dim`` components.  Rows within ``margin`` nodes
    of either boundary, or where the bank envelope falls below
    ``decay * peak``, are excluded from the residual.
    """

    __test__ = False  # not a pytest class

    def __init__(self, g: Grid, block_dim: int = 3, n_functions: int = 4, width: float = 1.0,
                 margin: int = 4, decay: float = 1e-8):
        self.grid = g
        self.block_dim = block_dim
        self.margin = margin
        x = g.x / width
        funcs = [eval_hermite(k, x) * np.exp(-x**2 / 2) for k in range(n_functions)]
        envelope = np.max(np.abs(funcs), axis=0)
        rows = envelope >= decay * envelope.max()
        rows[:margin] = False
        rows[g.n_points - margin:] = False
        self.row_mask = np.tile(rows, block_dim)
        n = g.n_points
        vecs = []
        for phi in funcs:
            for b in range(block_dim):
                v = np.zeros(block_dim * n, dtype=complex)
                v[b * n:(b + 1) * n] = phi
                vecs.append(v)
        self.vectors = np.array(vecs).T  # columns are test vectors
        self.norms = np.linalg.norm(self.vectors, axis=0)

    def residual(self, apply_difference: Callable[[np.ndarray], np.ndarray]) -> float:
        """``max_j ||mask * D psi_j|| / ||psi_j||`` for the operator difference ``D``."""
        out = apply_difference(self.vectors)
        return float(np.max(np.linalg.norm(out[self.row_mask], axis=0) / self.norms))

    def operator_norm(self, apply: Callable[[np.ndarray], np.ndarray]) -> float:
        out = apply(self.vectors)
        return float(np.max(np.linalg.norm(out, axis=0) / self.norms))


@dataclass
class ConvergenceEstimate:
    order: float | None
    h: list[float]
    residuals: list[float]
    saturated: bool = False

    def __float__(self) -> float:
        return float("nan") if self.order is None else float(self.order)


def convergence_order(residual_fn: Callable[[Grid], float], g0: Grid, refinements: int = 2,
                      floor: float = 1e-13) -> ConvergenceEstimate:
    """Least-squares slope of ``log(residual)`` against ``log(h)``.

    The grid is refined ``refinements`` times by doubling ``n_points``.  If
    the coarsest residual is already below ``floor`` there is nothing to
    measure and the estimate is flagged ``saturated``.
    """
    if refinements < 2:
        raise ValueError("need at least 2 refinements")
    grids = [g0]
    for _ in range(refinements):
        grids.append(grids[-1].refined())
    first = float(residual_fn(grids[0]))
    if first < floor:
        return ConvergenceEstimate(None, [g0.h], [first], saturated=True)
    hs, rs = [g0.h], [first]
    for g in grids[1:]:
        hs.append(g.h)
        rs.append(float(residual_fn(g)))
    if min(rs) <= 0:
        raise ValueError("residuals must be positive to measure an order")
    slope = np.polyfit(np.log(hs), np.log(rs), 1)[0]
    return ConvergenceEstimate(float(slope), hs, rs)
