"""Superpotentials and the closed-form solutions that are statements about functions of x.

Everything here is pointwise: a :class:`Superpotential` returns ``W, W', W''``
at requested points and the solvers return arrays evaluated there.  Sampled
superpotentials carry analytic derivative tables; nothing in this module
differentiates numerically.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from numpy.polynomial import polynomial as npoly
from scipy.integrate import cumulative_trapezoid, solve_ivp

DEFAULT_DELTA = 1e-8


class SingularPointError(ValueError):
    """``|W1 - W2|`` too small at a requested point."""


class DiagonalPairError(ValueError):
    def __init__(self, residual: float, tol: float):
        self.residual = residual
        super().__init__(f"diagonal pair verification failed: residual {residual:.3e} > {tol:.1e}")


class Superpotential:
    """``W(x)`` with its first two derivatives.

    Use :meth:`polynomial` (coefficients in ascending powers) or
    :meth:`sampled` (values plus analytic ``W'``, ``W''`` on fixed nodes).
    """

    def __init__(self, coeffs=None, nodes=None, values=None, d1=None, d2=None):
        if coeffs is not None:
            self.coeffs = np.trim_zeros(np.asarray(coeffs, dtype=float), "b")
            if self.coeffs.size == 0:
                self.coeffs = np.zeros(1)
            self.nodes = None
        else:
            self.coeffs = None
            self.nodes = np.asarray(nodes, dtype=float)
            self._tables = tuple(np.asarray(t, dtype=float) for t in (values, d1, d2))
            if any(t.shape != self.nodes.shape for t in self._tables):
                raise ValueError("sampled superpotential tables must match the nodes")

    @classmethod
    def polynomial(cls, coeffs: Sequence[float]) -> "Superpotential":
        return cls(coeffs=coeffs)

    @classmethod
    def sampled(cls, nodes, values, d1, d2) -> "Superpotential":
        return cls(nodes=nodes, values=values, d1=d1, d2=d2)

    @property
    def is_polynomial(self) -> bool:
        return self.coeffs is not None

    def _lookup(self, x: np.ndarray) -> np.ndarray:
        idx = np.searchsorted(self.nodes, x)
        idx = np.clip(idx, 0, self.nodes.size - 1)
        left = np.clip(idx - 1, 0, self.nodes.size - 1)
        use_left = np.abs(self.nodes[left] - x) < np.abs(self.nodes[idx] - x)
        idx = np.where(use_left, left, idx)
        off = np.abs(self.nodes[idx] - x)
        tol = 1e-10 * max(1.0, float(np.max(np.abs(self.nodes))))
        if np.any(off > tol):
            bad = np.ravel(x)[np.argmax(off)]
            raise ValueError(f"x = {bad:.6g} is not a sample node of this superpotential")
        return idx

    def evaluate(self, x) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        x = np.asarray(x, dtype=float)
        if self.is_polynomial:
            c0 = self.coeffs
            c1 = npoly.polyder(c0) if c0.size > 1 else np.zeros(1)
            c2 = npoly.polyder(c1) if c1.size > 1 else np.zeros(1)
            return npoly.polyval(x, c0), npoly.polyval(x, c1), npoly.polyval(x, c2)
        idx = self._lookup(x)
        return tuple(t[idx] for t in self._tables)

    def __call__(self, x) -> np.ndarray:
        return self.evaluate(x)[0]

    def same_as(self, other: "Superpotential", x) -> bool:
        """Pointwise equality of ``W, W', W''`` on ``x``."""
        if self is other:
            return True
        return all(np.array_equal(a, b) for a, b in zip(self.evaluate(x), other.evaluate(x)))

    def __neg__(self) -> "Superpotential":
        if self.is_polynomial:
            return Superpotential.polynomial(-self.coeffs)
        w, d1, d2 = self._tables
        return Superpotential.sampled(self.nodes, -w, -d1, -d2)

    def to_config(self) -> dict:
        if not self.is_polynomial:
            raise ValueError("sampled superpotentials are built from a diag_pair config")
        return {"type": "poly", "coeffs": self.coeffs.tolist()}

    def __repr__(self) -> str:
        if self.is_polynomial:
            return f"Superpotential.polynomial({self.coeffs.tolist()})"
        return f"Superpotential.sampled(<{self.nodes.size} nodes>)"


H4Choice = str | Callable | Sequence[float]


def h4_values(choice: H4Choice, W: Superpotential, x) -> np.ndarray:
    """Evaluate the off-diagonal block ``H4`` (purely imaginary) at ``x``.

    ``choice`` is ``"zero"``, ``"iWprime"``, a callable returning complex
    values, or real coefficients ``c`` meaning ``H4 = i * sum c_k x^k``.
    """
    x = np.asarray(x, dtype=float)
    if isinstance(choice, str):
        if choice == "zero":
            return np.zeros(x.shape, dtype=complex)
        if choice == "iWprime":
            return 1j * W.evaluate(x)[1]
        raise ValueError(f"unknown H4 choice {choice!r}")
    if callable(choice):
        values = np.asarray(choice(x), dtype=complex) * np.ones(x.shape)
    else:
        values = 1j * npoly.polyval(x, np.asarray(choice, dtype=float))
    scale = max(1.0, float(np.max(np.abs(values), initial=0.0)))
    if np.max(np.abs(values.real), initial=0.0) > 1e-12 * scale:
        raise ValueError("H4 must be purely imaginary (anti-Hermitian multiplication operator)")
    return 1j * values.imag


@dataclass
class EqualSolution:
    """Potentials of the equal-superpotential solution at points ``x``.

    ``H1 = H2 = P^2/2 + v1`` and ``H3 = P^2/2 + v3``; ``h4`` is imaginary.
    """

    x: np.ndarray
    v1: np.ndarray
    v2: np.ndarray
    v3: np.ndarray
    h4: np.ndarray


def equal_case_components(W: Superpotential, h4_choice: H4Choice, x) -> EqualSolution:
    x = np.asarray(x, dtype=float)
    w, d1, _ = W.evaluate(x)
    h4 = h4_values(h4_choice, W, x)
    v1 = 0.5 * (w**2 - d1) + (-1j * h4).real
    v3 = 0.5 * (w**2 + d1)
    return EqualSolution(x, v1, v1.copy(), v3, h4)


@dataclass
class UnequalSolution:
    x: np.ndarray
    V1: np.ndarray
    V2: np.ndarray
    H4: np.ndarray


def _guard(W1: Superpotential, W2: Superpotential, x: np.ndarray, delta: float):
    w1, d1, e1 = W1.evaluate(x)
    w2, d2, e2 = W2.evaluate(x)
    gap = np.abs(w1 - w2)
    bad = np.nonzero(gap < delta)[0]
    if bad.size:
        raise SingularPointError(
            f"|W1 - W2| = {gap[bad[0]]:.3e} < {delta:.1e} at x = {x[bad[0]]:.6g}"
        )
    return (w1, d1, e1), (w2, d2, e2)


def solve_unequal_case(W1: Superpotential, W2: Superpotential, eval_points,
                       delta: float = DEFAULT_DELTA) -> UnequalSolution:
    """Closed-form ``V1, V2, H4`` for ``W1 != W2``, evaluated pointwise."""
    x = np.asarray(eval_points, dtype=float)
    (w1, d1, e1), (w2, d2, e2) = _guard(W1, W2, x, delta)
    gap = w1 - w2
    s2 = w1**2 + w2**2
    V1 = 0.25 * (s2 - (w1 - 3 * w2) / gap * (d1 - d2) + (e1 - e2) / gap)
    V2 = 0.25 * (s2 + (3 * w1 - w2) / gap * (d1 - d2) + (e1 - e2) / gap)
    H4 = 1j * (2 * w1 * d1 - 2 * w2 * d2 + e1 - e2) / (4 * gap)
    return UnequalSolution(x, V1, V2, H4)


def consistency_residuals(W1: Superpotential, W2: Superpotential, sol: UnequalSolution,
                          eval_points=None, delta: float = DEFAULT_DELTA) -> tuple[float, ...]:
    """Max pointwise ``|LHS - RHS|`` of the four consistency conditions."""
    x = sol.x if eval_points is None else np.asarray(eval_points, dtype=float)
    if eval_points is not None and not np.array_equal(x, sol.x):
        raise ValueError("solution was evaluated on different points")
    (w1, d1, e1), (w2, d2, e2) = _guard(W1, W2, x, delta)
    V1, V2, H4 = sol.V1, sol.V2, sol.H4
    H4d = np.conj(H4)
    lhs = [
        V1 + 1j * H4,
        V1 * w1 + 1j * H4 * w2,
        V2 - 1j * H4d,
        V2 * w2 - 1j * H4d * w1,
    ]
    rhs = [
        0.25 * (w1**2 + w2**2 - 3 * d1 + d2),
        0.25 * (w1**3 + w1 * w2**2 - w1 * d1 + w1 * d2 - 2 * w2 * d2 + e1 - e2),
        0.25 * (w1**2 + w2**2 + d1 - 3 * d2),
        0.25 * (w1**2 * w2 + w2**3 - 2 * w1 * d1 + w2 * d1 - w2 * d2 - e1 + e2),
    ]
    return tuple(float(np.max(np.abs(l - r))) for l, r in zip(lhs, rhs))


@dataclass
class DiagonalPairSpec:
    W_plus: Superpotential
    C: float
    D: float


@dataclass
class DiagonalPair:
    W1: Superpotential
    W2: Superpotential
    residual: float
    spec: DiagonalPairSpec


def _fine_nodes(points: np.ndarray, step: float) -> tuple[np.ndarray, np.ndarray]:
    pieces = [points[:1]]
    for a, b in zip(points[:-1], points[1:]):
        k = max(1, int(np.ceil((b - a) / step)))
        pieces.append(np.linspace(a, b, k + 1)[1:])
    fine = np.concatenate(pieces)
    return fine, np.searchsorted(fine, points)


def build_diagonal_pair(spec: DiagonalPairSpec, eval_points, anchor: float = 0.0,
                        step: float = 1e-3, tol: float = 1e-6) -> DiagonalPair:
    """``W1, W2 = (W+ +- W-) / 2`` with ``W-' + W+ W- = C``, so that ``H4 = 0``.

    Antiderivatives start at ``anchor`` and use the composite trapezoid rule
    with step ``<= step``.  ``W-'`` and ``W-''`` follow analytically from the
    differential equation.  The quadrature is cross-checked against an
    adaptive ODE solve; a mismatch above ``tol`` raises
    :class:`DiagonalPairError`.
    """
    x = np.asarray(eval_points, dtype=float)
    points = np.unique(np.append(x, anchor))
    fine, at = _fine_nodes(points, step)
    k_anchor = at[np.searchsorted(points, anchor)]
    wp_fine = spec.W_plus(fine)
    S = cumulative_trapezoid(wp_fine, fine, initial=0.0)
    S -= S[k_anchor]
    E = np.exp(S)
    I = cumulative_trapezoid(E, fine, initial=0.0)
    I -= I[k_anchor]
    wm_fine = (spec.C * I + spec.D) / E

    idx = at[np.searchsorted(points, x)]
    wm = wm_fine[idx]
    wp, wp1, wp2 = spec.W_plus.evaluate(x)
    wm1 = spec.C - wp * wm
    wm2 = -wp1 * wm - wp * wm1
    W1 = Superpotential.sampled(x, 0.5 * (wp + wm), 0.5 * (wp1 + wm1), 0.5 * (wp2 + wm2))
    W2 = Superpotential.sampled(x, 0.5 * (wp - wm), 0.5 * (wp1 - wm1), 0.5 * (wp2 - wm2))

    w1, d1, _ = W1.evaluate(x)
    w2, d2, _ = W2.evaluate(x)
    table_res = float(np.max(np.abs(d1 + w1**2 - d2 - w2**2 - spec.C)))
    ode_res = _ode_check(spec, x, wm, anchor)
    residual = max(table_res, ode_res)
    if residual > tol:
        raise DiagonalPairError(residual, tol)
    return DiagonalPair(W1, W2, residual, spec)


def _ode_check(spec: DiagonalPairSpec, x: np.ndarray, wm: np.ndarray, anchor: float) -> float:
    # independent route: integrate W-' = C - W+ W- from W-(anchor) = D
    def rhs(t, y):
        return spec.C - spec.W_plus(t) * y

    worst = 0.0
    for side in (x < anchor, x >= anchor):
        pts = x[side]
        if pts.size == 0:
            continue
        order = np.argsort(np.abs(pts - anchor))
        t_eval = pts[order]
        t_end = t_eval[-1]
        if t_end == anchor:
            ref = np.full(t_eval.shape, spec.D)
        else:
            sol = solve_ivp(rhs, (anchor, t_end), [spec.D], t_eval=t_eval, rtol=1e-11,
                            atol=1e-13, method="DOP853")
            ref = sol.y[0]
        scale = np.maximum(1.0, np.abs(ref))
        worst = max(worst, float(np.max(np.abs(wm[side][order] - ref) / scale)))
    return worst


def ossqm_constraint_residual(W1: Superpotential, W2: Superpotential, eval_points) -> float:
    """``max |(W1^2 + W1') - (W2^2 + W2')|``."""
    x = np.asarray(eval_points, dtype=float)
    w1, d1, _ = W1.evaluate(x)
    w2, d2, _ = W2.evaluate(x)
    return float(np.max(np.abs(w1**2 + d1 - w2**2 - d2)))


def superpotential_from_config(cfg: dict) -> Superpotential:
    if cfg.get("type") != "poly":
        raise ValueError(f"expected a poly superpotential config, got {cfg.get('type')!r}")
    return Superpotential.polynomial(cfg["coeffs"])
