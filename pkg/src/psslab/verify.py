"""Relation suites with explicit residual budgets.

A relation is a list of terms ``(coef, [A, B, ...])`` whose sum should
vanish.  A metric turns the sum into a residual and a budget:

* :class:`WindowMetric` (Fock spaces and fixed matrices) forms the full sum and
  takes the Frobenius norm on the trusted window.  Its budget is
  ``tol * max(1, max_t |coef_t| prod ||factor||_F)``.
* :class:`GridMetric` applies the sum to a bank of smooth test vectors and
  budgets ``factor * h^2 * scale`` with ``scale = max(||Q||, ||H||)`` on the
  same bank.
"""

from __future__ import annotations

import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from typing import Sequence

import numpy as np

from .grid import TestBank
from .linalg_core import BlockOperator, frobenius

Term = tuple[complex, Sequence]

FOCK_TOL = 1e-10
EXACT_TOL = 1e-14
GRID_FACTOR = 50.0


@dataclass
class ResidualReport:
    relation: str
    residual: float
    budget: float
    passed: bool
    window_margin: int
    derived: bool = False

    def to_dict(self) -> dict:
        d = asdict(self)
        d["pass"] = d.pop("passed")
        return d


def _apply(ops: Sequence, V: np.ndarray) -> np.ndarray:
    for op in reversed(ops):
        V = op @ V
    return V


def _norm(op) -> float:
    if isinstance(op, BlockOperator):
        return float(np.sqrt(sum(frobenius(b) ** 2 for row in op.blocks for b in row if b is not None)))
    return frobenius(op)


def _dim_and_blocks(op) -> tuple[int, int, int]:
    if isinstance(op, BlockOperator):
        return op.dim, op.block_dim, op.inner_dim
    n = np.asarray(op).shape[0]
    return n, 1, n


class WindowMetric:
    """Frobenius residuals on the trusted window of every block."""

    def __init__(self, margin: int = 4, tol: float = FOCK_TOL, budget: float | None = None):
        self.margin = margin
        self.tol = tol
        self.fixed_budget = budget

    def residual(self, terms: Sequence[Term]) -> float:
        dim, nb, inner = _dim_and_blocks(terms[0][1][0])
        if self.margin >= inner:
            raise ValueError(f"margin {self.margin} leaves no states in blocks of {inner}")
        V = np.eye(dim, dtype=complex)
        total = sum(coef * _apply(ops, V) for coef, ops in terms)
        keep = np.concatenate([b * inner + np.arange(inner - self.margin) for b in range(nb)])
        return float(np.linalg.norm(total[np.ix_(keep, keep)]))

    def budget(self, terms: Sequence[Term]) -> float:
        if self.fixed_budget is not None:
            return self.fixed_budget
        scale = max(abs(coef) * float(np.prod([_norm(op) for op in ops])) for coef, ops in terms)
        return self.tol * max(1.0, scale)


class GridMetric:
    """Test-vector residuals with an ``O(h^2)`` budget."""

    def __init__(self, bank: TestBank, scale: float, factor: float = GRID_FACTOR,
                 budget: float | None = None):
        self.bank = bank
        self.margin = bank.margin
        self.scale = scale
        self.factor = factor
        self.fixed_budget = budget

    def residual(self, terms: Sequence[Term]) -> float:
        return self.bank.residual(lambda V: sum(coef * _apply(ops, V) for coef, ops in terms))

    def budget(self, terms: Sequence[Term]) -> float:
        if self.fixed_budget is not None:
            return self.fixed_budget
        return self.factor * self.bank.grid.h ** 2 * self.scale


def metric_for(bundle, budget: float | None = None, block_dim: int | None = None):
    """Default metric for a realization bundle (or anything with the same fields)."""
    if bundle.space == "grid":
        bank = TestBank(bundle.grid, block_dim=block_dim or bundle.block_dim, margin=bundle.margin)
        scale = max(bank.operator_norm(lambda V: bundle.Q @ V),
                    bank.operator_norm(lambda V: bundle.H @ V))
        return GridMetric(bank, scale, budget=budget)
    return WindowMetric(bundle.margin, budget=budget)


def _workers() -> int:
    try:
        return max(1, int(os.environ.get("PSSLAB_THREADS", "1")))
    except ValueError:
        return 1


def run_relations(relations: Sequence[tuple[str, list[Term]]], metric) -> list[ResidualReport]:
    """Evaluate named relations; runs concurrently up to ``PSSLAB_THREADS`` workers."""
    def one(item):
        name, terms = item
        r, b = metric.residual(terms), metric.budget(terms)
        return ResidualReport(name, r, b, bool(r <= b), metric.margin)

    workers = _workers()
    if workers == 1 or len(relations) == 1:
        return [one(item) for item in relations]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(one, relations))


def _derived(primal: ResidualReport, name: str) -> ResidualReport:
    return ResidualReport(name, primal.residual, primal.budget, primal.passed,
                          primal.window_margin, derived=True)


def psssqm_relations(Q, Qd, H, c: float) -> list[tuple[str, list[Term]]]:
    return [
        ("Q^2 = 0", [(1.0, [Q, Q])]),
        ("[H, Q] = 0", [(1.0, [H, Q]), (-1.0, [Q, H])]),
        ("Q Q^dag Q = 4c^2 Q H", [(1.0, [Q, Qd, Q]), (-4.0 * c * c, [Q, H])]),
    ]


def check_psssqm(bundle, budget: float | None = None, metric=None,
                 include_derived: bool = True) -> list[ResidualReport]:
    """The three defining relations, plus their Hermitian conjugates as derived entries."""
    metric = metric or metric_for(bundle, budget)
    reports = run_relations(psssqm_relations(bundle.Q, bundle.Q_dag, bundle.H, bundle.c), metric)
    if include_derived:
        names = ["(Q^dag)^2 = 0", "[H, Q^dag] = 0", "Q^dag Q Q^dag = 4c^2 H Q^dag"]
        reports += [_derived(r, n) for r, n in zip(reports, names)]
    return reports


def check_pseudofermion(b, b_dag, tol: float = EXACT_TOL) -> list[ResidualReport]:
    m = WindowMetric(0, tol)
    return run_relations([
        ("b^2 = 0", [(1.0, [b, b])]),
        ("(b^dag)^2 = 0", [(1.0, [b_dag, b_dag])]),
        ("b b^dag b = b", [(1.0, [b, b_dag, b]), (-1.0, [b])]),
        ("b^dag b b^dag = b^dag", [(1.0, [b_dag, b, b_dag]), (-1.0, [b_dag])]),
    ], m)


def check_orthofermion(c_list: Sequence, p: int, tol: float = EXACT_TOL) -> list[ResidualReport]:
    """``c_a c_b = 0`` and ``c_a c_b^dag + delta_ab sum_g c_g^dag c_g = delta_ab`` for all pairs."""
    if len(c_list) != p:
        raise ValueError(f"expected {p} orthofermion operators, got {len(c_list)}")
    cs = [np.asarray(c, dtype=complex) for c in c_list]
    cds = [c.conj().T for c in cs]
    I = np.eye(cs[0].shape[0], dtype=complex)
    rels = []
    for a in range(p):
        for b in range(p):
            rels.append((f"c{a + 1} c{b + 1} = 0", [(1.0, [cs[a], cs[b]])]))
            terms = [(1.0, [cs[a], cds[b]])]
            if a == b:
                terms += [(1.0, [cds[g], cs[g]]) for g in range(p)] + [(-1.0, [I])]
            rels.append((f"c{a + 1} c{b + 1}^dag + delta sum c^dag c = delta", terms))
    return run_relations(rels, WindowMetric(0, tol))


def check_ossqm(QK: Sequence, HK, metric) -> list[ResidualReport]:
    """``Q_a Q_b = 0``, ``[H, Q_a] = 0``, ``Q_a Q_b^dag + delta sum Q_g^dag Q_g = 2 delta H``."""
    p = len(QK)
    Qd = [q.dagger() if isinstance(q, BlockOperator) else np.conj(q).T for q in QK]
    rels = []
    for a in range(p):
        rels.append((f"[H, Q{a + 1}] = 0", [(1.0, [HK, QK[a]]), (-1.0, [QK[a], HK])]))
        for b in range(p):
            rels.append((f"Q{a + 1} Q{b + 1} = 0", [(1.0, [QK[a], QK[b]])]))
            terms = [(1.0, [QK[a], Qd[b]])]
            if a == b:
                terms += [(1.0, [Qd[g], QK[g]]) for g in range(p)] + [(-2.0, [HK])]
            rels.append((f"Q{a + 1} Q{b + 1}^dag + delta sum Q^dag Q = 2 delta H", terms))
    return run_relations(rels, metric)


def check_sec2(Q1, Q2, H, margin: int = 4, tol: float = FOCK_TOL,
               budget: float | None = None) -> list[ResidualReport]:
    """``Q_i^3 = Q_i H``, ``[H, Q_i] = 0`` and ``Q_i^2 Q_j = Q_j Q_i^2 = -Q_i Q_j Q_i = Q_j H``."""
    Qs = {1: Q1, 2: Q2}
    rels = []
    for i in (1, 2):
        Qi = Qs[i]
        rels.append((f"Q{i}^3 = Q{i} H", [(1.0, [Qi, Qi, Qi]), (-1.0, [Qi, H])]))
        rels.append((f"[H, Q{i}] = 0", [(1.0, [H, Qi]), (-1.0, [Qi, H])]))
    for i, j in ((1, 2), (2, 1)):
        Qi, Qj = Qs[i], Qs[j]
        rels.append((f"Q{i}^2 Q{j} = Q{j} Q{i}^2", [(1.0, [Qi, Qi, Qj]), (-1.0, [Qj, Qi, Qi])]))
        rels.append((f"Q{j} Q{i}^2 = -Q{i} Q{j} Q{i}", [(1.0, [Qj, Qi, Qi]), (1.0, [Qi, Qj, Qi])]))
        rels.append((f"-Q{i} Q{j} Q{i} = Q{j} H", [(-1.0, [Qi, Qj, Qi]), (-1.0, [Qj, H])]))
    return run_relations(rels, WindowMetric(margin, tol, budget))


def all_passed(reports: Sequence[ResidualReport]) -> bool:
    return all(r.passed for r in reports)


def reports_to_json(reports: Sequence[ResidualReport]) -> str:
    return json.dumps([r.to_dict() for r in reports], indent=2, sort_keys=True)
