"""Tight upper bound on correlation-induced leakage from (epsilon, delta) alone.

When only the neighbor's privacy budget is known, the leakage maximization
over all admissible transition columns reduces, for each ordered pair of
conditional rows (g, g'), to choosing the index subset S that maximizes

    H(S) = (1 + A*(e^eps - 1)) / (1 + B*(e^eps - 1)),   A = sum_S g_i,
                                                        B = sum_S g'_i.

A greedy pass over indices in descending ratio order g_i/g'_i admits index i
exactly when g_i/g'_i >= current H; an exchange argument shows this is
optimal, and a brute-force subset enumeration is provided as the test oracle.
For delta > 0 the same leakage expression holds and the slack rides alongside
as a relaxation component delta*A, so results are reported as the pair
(leakage, relaxation).

Leakages are in nats throughout; converting to bits is a display concern.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .data_model import ConditionalDistribution
from .errors import InputError, InsufficientDataError

_ZERO = 1e-15  # below this a probability entry is treated as exactly zero


def _disjoint(g: np.ndarray, gp: np.ndarray) -> bool:
    return not ((g > _ZERO) & (gp > _ZERO)).any()


@dataclass(frozen=True)
class BudgetParams:
    """An (epsilon, delta) privacy budget."""

    epsilon: float
    delta: float = 0.0

    def __post_init__(self):
        if self.epsilon < 0:
            raise InputError("epsilon must be nonnegative")
        if not 0 <= self.delta < 1:
            raise InputError("delta must be in [0, 1)")


@dataclass(frozen=True)
class BoundedCplResult:
    """Leakage bound in nats with the optimizer that produced it.

    ``relaxation`` is delta * a_mass at the maximizing row pair; ``subset``
    holds the admitted neighbor-symbol indices, and ``a_mass``/``b_mass``
    their total probability under the two conditioning rows.
    """

    leakage: float
    relaxation: float
    subset: tuple[int, ...]
    a_mass: float
    b_mass: float
    witness_pair: tuple[int, int]

    def pair(self):
        """As a composable leakage statement."""
        from .composition import LeakagePair
        return LeakagePair(self.leakage, self.relaxation)


def _pair_optimum(g: np.ndarray, gp: np.ndarray, lam: float) -> tuple[float, tuple[int, ...], float, float]:
    """Greedy-optimal H for one ordered row pair.

    Indices with g' = 0 < g carry infinite ratio: they are processed first
    and always admitted, which realizes the supremum without floating-point
    infinities entering H. Indices with g = g' = 0 change nothing and are
    skipped. Ties are broken by ascending index; the objective depends on the
    subset only through (A, B), so tie order cannot change the optimum.
    """
    g_zero = g <= _ZERO
    gp_zero = gp <= _ZERO
    infinite = ~g_zero & gp_zero
    finite = ~gp_zero
    order: list[int] = sorted(np.flatnonzero(infinite).tolist())
    finite_idx = np.flatnonzero(finite)
    ratios = g[finite_idx] / gp[finite_idx]
    finite_order = finite_idx[np.lexsort((finite_idx, -ratios))]
    order.extend(int(i) for i in finite_order)

    a = b = 0.0
    chosen: list[int] = []
    for i in order:
        threshold = (1.0 + a * lam) / (1.0 + b * lam)
        q = math.inf if infinite[i] else g[i] / gp[i]
        if q >= threshold:
            a += g[i]
            b += gp[i]
            chosen.append(int(i))
    h = (1.0 + a * lam) / (1.0 + b * lam)
    return h, tuple(chosen), a, b


def _iter_pairs(cond: ConditionalDistribution):
    rows = cond.valid_rows()
    if rows.size < 2:
        raise InsufficientDataError("need at least 2 usable conditioning symbols")
    for x in rows:
        for xp in rows:
            if x != xp:
                yield int(x), int(xp)


def cpl_bound(cond: ConditionalDistribution, budget: BudgetParams) -> BoundedCplResult:
    """Upper bound on the leakage of the conditional's row attribute caused by
    any (epsilon, delta)-LDP release of the column attribute."""
    lam = math.expm1(budget.epsilon)
    best: BoundedCplResult | None = None
    for x, xp in _iter_pairs(cond):
        g = cond.matrix[x]
        gp = cond.matrix[xp]
        h, subset, a, b = _pair_optimum(g, gp, lam)
        if _disjoint(g, gp):
            # The admitted subset carries all of g's mass and none of g''s,
            # so H = e^eps analytically; record the exact budget rather than
            # round-tripping through exp/log.
            leak = budget.epsilon
        else:
            leak = math.log(h)
        if best is None or leak > best.leakage:
            best = BoundedCplResult(leak, budget.delta * a, subset, a, b, (x, xp))
    return best


def cpl_bound_bruteforce(cond: ConditionalDistribution, budget: BudgetParams) -> BoundedCplResult:
    """Exhaustive-subset reference implementation (oracle for the greedy).

    Enumerates every nonempty index subset for every ordered row pair;
    only usable below ~20 neighbor symbols.
    """
    t = cond.n_cols
    if t > 20:
        raise InputError(f"brute force enumerates 2^t subsets; t={t} is too large")
    masks = (np.arange(1, 2 ** t)[:, None] >> np.arange(t)[None, :]) & 1
    masks = masks.astype(np.float64)
    lam = math.expm1(budget.epsilon)
    best: BoundedCplResult | None = None
    for x, xp in _iter_pairs(cond):
        g = cond.matrix[x]
        gp = cond.matrix[xp]
        a_all = masks @ g
        b_all = masks @ gp
        h_all = (1.0 + a_all * lam) / (1.0 + b_all * lam)
        s = int(np.argmax(h_all))
        a, b = float(a_all[s]), float(b_all[s])
        if _disjoint(g, gp):
            leak = budget.epsilon
        else:
            leak = math.log(h_all[s])
        if best is None or leak > best.leakage:
            subset = tuple(int(i) for i in np.flatnonzero(masks[s]))
            best = BoundedCplResult(leak, budget.delta * a, subset, a, b, (x, xp))
    return best


def cpl_limit(cond: ConditionalDistribution) -> float:
    """Saturation value of the bound as the neighbor budget grows.

    Returns ln of the largest single-entry ratio p(col|x)/p(col|x') over all
    columns and ordered usable row pairs; ``math.inf`` when some column has
    positive mass under one row and zero under another.
    """
    rows = cond.valid_rows()
    if rows.size < 2:
        raise InsufficientDataError("need at least 2 usable conditioning symbols")
    sub = cond.matrix[rows]
    col_max = sub.max(axis=0)
    col_min = sub.min(axis=0)
    if ((col_max > _ZERO) & (col_min <= _ZERO)).any():
        return math.inf
    active = col_max > _ZERO
    if not active.any():
        return 0.0
    return float(np.log((col_max[active] / col_min[active]).max()))


def is_max_attainable(cond: ConditionalDistribution) -> tuple[bool, tuple[int, int] | None]:
    """Whether the bound can reach the full budget: true exactly when two
    usable rows have disjoint supports, returned with such a row pair."""
    rows = cond.valid_rows()
    support = cond.matrix[rows] > _ZERO
    for i in range(len(rows)):
        for j in range(i + 1, len(rows)):
            if not (support[i] & support[j]).any():
                return True, (int(rows[i]), int(rows[j]))
    return False, None
