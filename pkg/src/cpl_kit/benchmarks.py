"""Benchmarks for leakage analyzers and for mechanism utility-vs-leakage.

Analyzer benchmark: per-pair leakage estimates are scored against a
reference by normalized undershoot (mass of underestimation) and overshoot
(mass of overestimation), both divided by epsilon times the pair count, and
classified into regions: P1 (both zero, optimal), R1 (pure underestimation,
risky), R2 (pure overestimation, wasteful), R3 (mixed).

Utility benchmark: each mechanism/budget cell reports frequency-estimation
NMSE, normalized 0-1 error between decoded outputs and inputs, and total
pairwise leakage normalized by the budget-only bound.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .cpl_bound import BudgetParams, cpl_bound
from .cpl_exact import cpl_exact
from .correlation_metrics import metrics
from .data_model import ConditionalDistribution, Dataset, conditional_from_joint, empirical_joint, expand_dataset
from .errors import DimensionMismatchError, InputError
from .mechanisms import MechanismSpec, decode_column, estimate_frequencies, perturb_column, transition_matrix
from .rng import STAGE_DECODE, STAGE_PERTURB, derive_rng
from .statistical import EstimationConfig, sup_ratio_leakage

_TOL = 1e-9


@dataclass(frozen=True)
class BenchmarkPoint:
    undershoot: float
    overshoot: float
    region: str  # P1 | R1 | R2 | R3

    @property
    def distance(self) -> float:
        return math.hypot(self.undershoot, self.overshoot)


@dataclass(frozen=True)
class UtilityReport:
    freq_nmse: float
    zero_one_error: float
    norm_tcpl: float


@dataclass(frozen=True)
class UtilityRow:
    mechanism: str
    epsilon: float
    report: UtilityReport


def ordered_pairs(n: int) -> list[tuple[int, int]]:
    """Row-major ordered attribute pairs (i, j), i != j; the canonical order
    for every flat per-pair list in this module."""
    return [(i, j) for i in range(n) for j in range(n) if i != j]


def _classify(undershoot: float, overshoot: float) -> str:
    under_zero = undershoot <= _TOL
    over_zero = overshoot <= _TOL
    if under_zero and over_zero:
        return "P1"
    if over_zero:
        return "R1"
    if under_zero:
        return "R2"
    return "R3"


def undershoot_overshoot(reference, estimates, epsilon: float) -> BenchmarkPoint:
    """Score a per-pair estimate list against the reference list."""
    ref = np.asarray(reference, dtype=np.float64)
    est = np.asarray(estimates, dtype=np.float64)
    if ref.shape != est.shape or ref.ndim != 1 or ref.size < 1:
        raise DimensionMismatchError("reference and estimates must be equal-length lists")
    if epsilon <= 0:
        raise InputError("normalization requires epsilon > 0")
    diff = ref - est
    q = ref.size
    undershoot = float(diff[diff >= 0].sum()) / (epsilon * q) + 0.0
    overshoot = float(-diff[diff < 0].sum()) / (epsilon * q) + 0.0
    return BenchmarkPoint(undershoot, overshoot, _classify(undershoot, overshoot))


def baseline_spl_anl(n_attributes: int, epsilon: float) -> list[float]:
    """Worst-case analyzer: every neighbor presumed to leak its full budget."""
    return [epsilon] * (n_attributes * (n_attributes - 1))


def baseline_grf(abs_pcc: np.ndarray, threshold: float, epsilon: float) -> list[float]:
    """Dependency-graph analyzer: connect attributes whose |PCC| clears the
    threshold, presume full-budget leakage inside each connected component
    and none across components."""
    if not 0 < threshold < 1:
        raise InputError("threshold must be in (0, 1)")
    pcc = np.asarray(abs_pcc, dtype=np.float64)
    n = pcc.shape[0]
    if pcc.shape != (n, n):
        raise DimensionMismatchError("PCC matrix must be square")
    adj = np.nan_to_num(np.abs(pcc)) >= threshold
    component = [-1] * n
    label = 0
    for start in range(n):
        if component[start] >= 0:
            continue
        stack = [start]
        component[start] = label
        while stack:
            u = stack.pop()
            for v in range(n):
                if v != u and adj[u, v] and component[v] < 0:
                    component[v] = label
                    stack.append(v)
        label += 1
    return [epsilon if component[i] == component[j] else 0.0
            for i, j in ordered_pairs(n)]


def pairwise_conditionals(d: Dataset) -> dict[tuple[int, int], ConditionalDistribution]:
    """Empirical P(attr j | attr i) for every ordered pair."""
    conds = {}
    for i, j in ordered_pairs(d.n_attributes):
        conds[(i, j)] = conditional_from_joint(empirical_joint(d, i, j), given="rows")
    return conds


def pairwise_abs_pcc(d: Dataset) -> np.ndarray:
    """|Pearson| matrix over integer-coded attributes (NaN when undefined)."""
    n = d.n_attributes
    out = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            pcc = metrics(empirical_joint(d, i, j)).pcc
            out[i, j] = out[j, i] = abs(pcc) if not math.isnan(pcc) else math.nan
    return out


def reference_leakages(d: Dataset, epsilon: float, method: str = "bound") -> list[float]:
    """Per-pair reference leakage: the budget-only bound, or the exact value
    for a transition-matrix mechanism (``exact-grr`` / ``exact-exp``)."""
    conds = pairwise_conditionals(d)
    values = []
    for i, j in ordered_pairs(d.n_attributes):
        cond = conds[(i, j)]
        if method == "bound":
            values.append(cpl_bound(cond, BudgetParams(epsilon, 0.0)).leakage)
        elif method in ("exact-grr", "exact-exp"):
            spec = MechanismSpec(method.split("-")[1], epsilon, cond.n_cols)
            values.append(cpl_exact(cond, transition_matrix(spec)).leakage)
        else:
            raise InputError(f"unknown reference method {method!r}")
    return values


def analyzer_benchmark(d: Dataset, epsilon: float, thresholds=(0.2, 0.4),
                       reference="bound") -> dict[str, BenchmarkPoint]:
    """Score the built-in analyzers on one dataset at one budget.

    ``reference`` is a method name accepted by :func:`reference_leakages` or
    a precomputed per-pair list (e.g. statistical estimates).
    """
    if isinstance(reference, str):
        ref = reference_leakages(d, epsilon, reference)
    else:
        ref = list(reference)
    n = d.n_attributes
    pcc = pairwise_abs_pcc(d)
    points = {
        "spl-anl": undershoot_overshoot(ref, baseline_spl_anl(n, epsilon), epsilon),
        "grr-anl": undershoot_overshoot(ref, reference_leakages(d, epsilon, "exact-grr"), epsilon),
        "exp-anl": undershoot_overshoot(ref, reference_leakages(d, epsilon, "exact-exp"), epsilon),
    }
    for thr in thresholds:
        points[f"grf-{thr:g}"] = undershoot_overshoot(
            ref, baseline_grf(pcc, thr, epsilon), epsilon)
    return points


def nmse_cpl(estimates, references) -> float:
    """Normalized mean-square error between two per-pair leakage lists."""
    est = np.asarray(estimates, dtype=np.float64)
    ref = np.asarray(references, dtype=np.float64)
    if est.shape != ref.shape:
        raise DimensionMismatchError("leakage lists must have equal length")
    denom = float((ref ** 2).sum())
    if denom <= 0:
        raise InputError("reference leakages are all zero; NMSE undefined")
    return float(((est - ref) ** 2).sum()) / denom


def utility_benchmark(d: Dataset, kinds: list[str], epsilons: list[float],
                      cfg: EstimationConfig) -> list[UtilityRow]:
    """Perturb the dataset under every (mechanism, budget) cell and report
    utility errors alongside normalized total pairwise leakage."""
    expanded = expand_dataset(d, cfg.expansion)
    n_attr = d.n_attributes
    pairs = ordered_pairs(n_attr)
    conds = pairwise_conditionals(d)
    true_freqs = [np.bincount(d.column(j), minlength=d.alphabet(j).size) / d.n_records
                  for j in range(n_attr)]
    freq_denom = sum(float((f ** 2).sum()) for f in true_freqs)

    rows: list[UtilityRow] = []
    for cell, (kind, eps) in enumerate((k, e) for k in kinds for e in epsilons):
        specs = [MechanismSpec(kind, eps, d.alphabet(j).size) for j in range(n_attr)]
        decoded = np.empty_like(expanded.records)
        freq_err = 0.0
        for j, spec in enumerate(specs):
            col = perturb_column(spec, expanded.column(j),
                                 derive_rng(cfg.seed, STAGE_PERTURB, cell, j))
            decoded[:, j] = decode_column(spec, col,
                                          derive_rng(cfg.seed, STAGE_DECODE, cell, j))
            est = estimate_frequencies(spec, col)
            freq_err += float(((est - true_freqs[j]) ** 2).sum())
        freq_nmse = freq_err / freq_denom
        zero_one = float((decoded != expanded.records).mean())

        tcpl_star = sum(cpl_bound(conds[p], BudgetParams(eps, 0.0)).leakage for p in pairs)
        tcpl_prime = 0.0
        for i, j in pairs:
            if kind in ("grr", "exp"):
                tcpl_prime += cpl_exact(conds[(i, j)], transition_matrix(specs[j])).leakage
            else:
                leak, _ = sup_ratio_leakage(
                    expanded.column(i), decoded[:, j],
                    d.alphabet(i).size, d.alphabet(j).size)
                tcpl_prime += leak
        norm_tcpl = tcpl_prime / tcpl_star if tcpl_star > 0 else 0.0
        rows.append(UtilityRow(kind, eps, UtilityReport(freq_nmse, zero_one, norm_tcpl)))
    return rows
