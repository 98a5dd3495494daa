"""Correlation-aware privacy-budget calibration.

Given a total leakage ceiling for every attribute, find the largest uniform
per-attribute budget whose worst-attribute total leakage (own budget plus
the correlation leakage caused by every neighbor at that same budget) stays
within the ceiling. Naive equal splitting uses ceiling/n; weak correlations
leave most of that slack unused, and stepping the shared budget upward while
the constraint holds recovers it. Worst-attribute leakage is monotone in the
shared budget, so the first infeasible step is final.
"""
from __future__ import annotations

from dataclasses import dataclass

from .cpl_bound import BudgetParams, cpl_bound
from .cpl_exact import cpl_exact
from .data_model import ConditionalDistribution, JointDistribution, conditional_from_joint
from .errors import InfeasibleBudgetError, InputError
from .mechanisms import MechanismSpec, transition_matrix

_FEAS_TOL = 1e-9


@dataclass(frozen=True)
class CalibrationResult:
    """Largest feasible uniform budget with the binding attribute.

    ``iterations`` counts accepted increments above the equal-split start;
    ``trace`` records every probed (budget, worst total leakage) pair.
    """

    epsilon_star: float
    worst_attribute: int
    worst_tpl: float
    iterations: int
    trace: tuple[tuple[float, float], ...]


def _as_conditionals(joints: dict) -> tuple[int, dict]:
    if not joints:
        raise InputError("no pairwise distributions supplied")
    n = 1 + max(max(i, j) for i, j in joints)
    conds = {}
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            if (i, j) not in joints:
                raise InputError(f"missing pairwise distribution for ({i}, {j})")
            table = joints[(i, j)]
            if isinstance(table, JointDistribution):
                conds[(i, j)] = conditional_from_joint(table, given="rows")
            elif isinstance(table, ConditionalDistribution):
                conds[(i, j)] = table
            else:
                raise InputError("pairwise tables must be joint or conditional distributions")
    return n, conds


def _pair_leakage(cond: ConditionalDistribution, eps: float, engine: str) -> float:
    if engine == "bound":
        return cpl_bound(cond, BudgetParams(eps, 0.0)).leakage
    if engine == "exact-grr":
        spec = MechanismSpec("grr", eps, cond.n_cols)
        return cpl_exact(cond, transition_matrix(spec)).leakage
    raise InputError(f"unknown leakage engine {engine!r}")


def worst_tpl(conds: dict, n: int, eps_tilde: float, engine: str = "bound") -> tuple[float, int]:
    """Worst-attribute total leakage at a shared per-attribute budget.

    An attribute's own leakage toward itself is zero and skipped.
    """
    worst, worst_idx = -1.0, 0
    for i in range(n):
        total = eps_tilde
        for j in range(n):
            if j != i:
                total += _pair_leakage(conds[(i, j)], eps_tilde, engine)
        if total > worst:
            worst, worst_idx = total, i
    return worst, worst_idx


def calibrate(joints: dict, epsilon_bar: float, step: float = 0.01,
              engine: str = "bound") -> CalibrationResult:
    """Step the shared budget up from the equal split and return the last
    feasible value.

    ``joints`` maps ordered attribute pairs (i, j) to the pairwise
    distribution of (attribute i, attribute j); the leakage engine is the
    budget-only bound (safe for any pure mechanism) or ``exact-grr``.
    The equal split is feasible by construction (each neighbor leaks at most
    the shared budget); a numerical violation of that is an error.
    """
    if epsilon_bar <= 0:
        raise InputError("total budget must be positive")
    if step <= 0:
        raise InputError("step must be positive")
    n, conds = _as_conditionals(joints)
    start = epsilon_bar / n
    worst, idx = worst_tpl(conds, n, start, engine)
    if worst > epsilon_bar + _FEAS_TOL:
        raise InfeasibleBudgetError(
            f"equal split should satisfy the ceiling but worst TPL {worst} > {epsilon_bar}"
        )
    trace = [(start, worst)]
    best = CalibrationResult(start, idx, worst, 0, ())
    i = 0
    while True:
        candidate = start + (i + 1) * step
        worst, idx = worst_tpl(conds, n, candidate, engine)
        trace.append((candidate, worst))
        if worst > epsilon_bar + _FEAS_TOL:
            break
        i += 1
        best = CalibrationResult(candidate, idx, worst, i, ())
    return CalibrationResult(best.epsilon_star, best.worst_attribute, best.worst_tpl,
                             best.iterations, tuple(trace))
