"""Exact correlation-induced privacy leakage from transition probabilities.

For a target attribute with conditional table P(neighbor | target) and a
neighbor perturbed by a mechanism with transition matrix P(output | neighbor),
the leakage is

    l = ln max over outputs y and ordered row pairs (x, x') of
           (C_y . G_x) / (C_y . G_x')

where C_y is the y-th transition-matrix column and G_x the x-th conditional
row. The supremum ranges over ordered pairs, so the two directions between a
pair of attributes generally differ; that asymmetry is intended and must not
be symmetrized away.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .data_model import ConditionalDistribution
from .errors import DimensionMismatchError, InsufficientDataError
from .mechanisms import TransitionMatrix


@dataclass(frozen=True)
class ExactCplResult:
    """Leakage in nats plus the (output, row pair) witness achieving it.

    ``infinite_witness`` is set when some output has zero probability under
    one conditioning symbol and positive probability under another; such
    pairs make the supremum infinite and are surfaced separately instead of
    being folded into the finite ``leakage``.
    """

    leakage: float
    witness: tuple[int, int, int]  # (output index, row x, row x')
    infinite_witness: tuple[int, int, int] | None = None

    @property
    def is_infinite(self) -> bool:
        return self.infinite_witness is not None

    def pair(self):
        """As a composable leakage statement; an infinite witness becomes the
        infinite flag rather than entering the arithmetic."""
        from .composition import LeakagePair
        return LeakagePair(self.leakage, 0.0, infinite=self.is_infinite)


def cpl_exact(cond: ConditionalDistribution, trans: TransitionMatrix) -> ExactCplResult:
    """Exact leakage of the conditional's row attribute caused by releasing
    the column attribute through ``trans``."""
    if cond.n_cols != trans.n_inputs:
        raise DimensionMismatchError(
            f"conditional has {cond.n_cols} columns but transition matrix has "
            f"{trans.n_inputs} input rows"
        )
    rows = cond.valid_rows()
    if rows.size < 2:
        raise InsufficientDataError("need at least 2 usable conditioning symbols")

    # chan[x, y] = P(output y | target x) for every usable conditioning row.
    chan = cond.matrix[rows] @ trans.matrix

    best = 1.0
    witness = (0, int(rows[0]), int(rows[1]))
    infinite = None
    for y in range(chan.shape[1]):
        col = chan[:, y]
        imax = int(np.argmax(col))
        if col[imax] <= 0:
            continue
        positive = col > 0
        if not positive.all():
            if infinite is None:
                izero = int(np.argmax(~positive))
                infinite = (y, int(rows[imax]), int(rows[izero]))
            if positive.sum() < 2:
                continue
        imin = int(np.argmin(np.where(positive, col, np.inf)))
        if imin == imax:
            continue
        ratio = col[imax] / col[imin]
        if ratio > best:
            best = ratio
            witness = (y, int(rows[imax]), int(rows[imin]))
    return ExactCplResult(math.log(best), witness, infinite)


def evaluate_witness(cond: ConditionalDistribution, trans: TransitionMatrix,
                     witness: tuple[int, int, int]) -> float:
    """Re-evaluate a witness triple; returns the leakage it certifies."""
    y, x, xp = witness
    c = trans.matrix[:, y]
    num = float(c @ cond.matrix[x])
    den = float(c @ cond.matrix[xp])
    if den == 0:
        return math.inf
    return math.log(num / den)
