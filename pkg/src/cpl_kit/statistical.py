"""Statistical leakage estimation from perturbed data.

Three stages: expand the dataset by replication, perturb every attribute of
every expanded record independently, and decode each report back into the
input alphabet. The leakage of a target attribute caused by a neighbor set
is then the log of the largest conditional-probability ratio observed across
decoded neighbor tuples, restricted to cells witnessed under both
conditioning symbols.

Significance comes from permutation surrogates: shuffling each neighbor
column independently preserves every marginal while destroying the
cross-attribute correlation, so the surrogate leakage distribution is the
null against which the observed value is scored.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .data_model import Dataset, expand_dataset
from .errors import InputError, InsufficientDataError
from .mechanisms import MechanismSpec, decode_column, perturb_column
from .rng import STAGE_DECODE, STAGE_PERTURB, STAGE_SURROGATE, derive_rng

#: Refuse joint neighbor alphabets larger than this many cells.
MAX_TUPLE_CELLS = 10 ** 6


@dataclass(frozen=True)
class EstimationConfig:
    """Knobs for the statistical pipeline.

    ``expansion`` is the record replication factor; ``surrogates`` the number
    of permutation surrogates behind each p-value; ``threads`` bounds worker
    parallelism for surrogate evaluation (results do not depend on it).
    """

    expansion: int = 50
    surrogates: int = 1000
    alpha: float = 0.05
    seed: int = 0
    threads: int = 1

    def __post_init__(self):
        if self.expansion < 1:
            raise InputError("expansion factor must be >= 1")
        if self.surrogates < 1:
            raise InputError("surrogate count must be >= 1")
        if not 0 < self.alpha < 1:
            raise InputError("alpha must be in (0, 1)")
        if self.threads < 1:
            raise InputError("threads must be >= 1")


@dataclass(frozen=True)
class StatisticalCplResult:
    """Estimated leakage (nats) with its permutation-test verdict.

    ``excluded_cells`` counts conditional cells dropped from the supremum
    because one side had zero observations.
    """

    leakage: float
    p_value: float
    significant: bool
    excluded_cells: int


def perturb_dataset(d: Dataset, specs: list[MechanismSpec], cfg: EstimationConfig) -> Dataset:
    """Expand, perturb and decode every attribute; returns the decoded dataset.

    Row i of the result is aligned with row i of ``expand_dataset(d,
    cfg.expansion)``. Every expanded record is perturbed with fresh
    randomness; per-attribute streams are derived from the config seed.
    """
    if len(specs) != d.n_attributes:
        raise InputError(f"need one mechanism spec per attribute ({d.n_attributes})")
    for j, spec in enumerate(specs):
        if spec.k != d.alphabet(j).size:
            raise InputError(
                f"attribute {d.attribute_names[j]!r} has alphabet size "
                f"{d.alphabet(j).size} but spec k={spec.k}"
            )
    expanded = expand_dataset(d, cfg.expansion)
    decoded = np.empty_like(expanded.records)
    for j, spec in enumerate(specs):
        col = perturb_column(spec, expanded.column(j), derive_rng(cfg.seed, STAGE_PERTURB, j))
        decoded[:, j] = decode_column(spec, col, derive_rng(cfg.seed, STAGE_DECODE, j))
    return Dataset(expanded.schema, decoded)


def _tuple_codes(columns: list[np.ndarray], sizes: list[int]) -> tuple[np.ndarray, int]:
    cells = 1
    for s in sizes:
        cells *= s
    if cells > MAX_TUPLE_CELLS:
        raise InputError(
            f"joint neighbor alphabet has {cells} cells (cap {MAX_TUPLE_CELLS}); "
            "reduce the neighbor set"
        )
    codes = np.ravel_multi_index(tuple(columns), dims=tuple(sizes))
    return codes.astype(np.int64), cells


def sup_ratio_leakage(target: np.ndarray, w_codes: np.ndarray, m: int, n_w: int) -> tuple[float, int]:
    """Supremum log-ratio of empirical conditionals P(w | target).

    Only cells observed under both conditioning symbols enter the supremum;
    the return also counts the dropped zero cells.
    """
    counts = np.bincount(target * n_w + w_codes, minlength=m * n_w).astype(np.float64)
    counts = counts.reshape(m, n_w)
    row_tot = counts.sum(axis=1)
    rows = row_tot > 0
    if rows.sum() < 2:
        raise InsufficientDataError("need at least 2 observed conditioning symbols")
    sub = counts[rows]
    probs = sub / row_tot[rows, None]
    observed = sub.sum(axis=0) > 0
    sub = sub[:, observed]
    probs = probs[:, observed]
    positive = sub > 0
    excluded = int((~positive).sum())
    usable = positive.sum(axis=0) >= 2
    if not usable.any():
        raise InsufficientDataError("no conditional cell observed under two symbols")
    masked = np.where(positive[:, usable], probs[:, usable], np.nan)
    col_max = np.nanmax(masked, axis=0)
    col_min = np.nanmin(masked, axis=0)
    return float(np.log((col_max / col_min).max())), excluded


def _neighbor_columns(perturbed: Dataset, neighbors: list[int]) -> tuple[list[np.ndarray], list[int]]:
    cols = [perturbed.column(z) for z in neighbors]
    sizes = [perturbed.alphabet(z).size for z in neighbors]
    return cols, sizes


def _check_alignment(perturbed: Dataset, original: Dataset) -> None:
    if perturbed.n_records != original.n_records:
        raise InputError("perturbed and original datasets are not row-aligned")
    if perturbed.n_attributes != original.n_attributes:
        raise InputError("perturbed and original datasets have different schemas")


def _observed_and_null(perturbed: Dataset, original: Dataset, target: int,
                       neighbors: list[int], cfg: EstimationConfig) -> tuple[float, int, float]:
    cols, sizes = _neighbor_columns(perturbed, neighbors)
    w_codes, n_w = _tuple_codes(cols, sizes)
    x = original.column(target)
    m = original.alphabet(target).size
    leakage, excluded = sup_ratio_leakage(x, w_codes, m, n_w)

    n = perturbed.n_records

    def surrogate_hits(s: int) -> bool:
        rng = derive_rng(cfg.seed, STAGE_SURROGATE, s)
        shuffled = [col[rng.permutation(n)] for col in cols]
        codes, _ = _tuple_codes(shuffled, sizes)
        try:
            surrogate, _ = sup_ratio_leakage(x, codes, m, n_w)
        except InsufficientDataError:
            return False
        return surrogate >= leakage

    indices = range(cfg.surrogates)
    if cfg.threads > 1:
        with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
            hits = sum(pool.map(surrogate_hits, indices))
    else:
        hits = sum(surrogate_hits(s) for s in indices)
    p_value = (1 + hits) / (1 + cfg.surrogates)
    return leakage, excluded, p_value


def statistical_cpl(perturbed: Dataset, original: Dataset, target: int,
                    neighbors: list[int], cfg: EstimationConfig) -> StatisticalCplResult:
    """Leakage of ``target`` caused by the decoded ``neighbors`` tuple."""
    _check_alignment(perturbed, original)
    neighbors = list(neighbors)
    if not neighbors:
        raise InputError("neighbor set must be nonempty")
    if target in neighbors:
        raise InputError("target attribute cannot be its own neighbor")
    leakage, excluded, p = _observed_and_null(perturbed, original, target, neighbors, cfg)
    return StatisticalCplResult(leakage, p, p < cfg.alpha, excluded)


def statistical_tpl(perturbed: Dataset, original: Dataset, target: int,
                    cfg: EstimationConfig, neighbors: list[int] | None = None) -> StatisticalCplResult:
    """Total leakage of ``target``: the decoded tuple includes its own report.

    ``neighbors`` defaults to every other attribute.
    """
    _check_alignment(perturbed, original)
    if neighbors is None:
        neighbors = [j for j in range(original.n_attributes) if j != target]
    w_set = sorted(set(neighbors) | {target})
    leakage, excluded, p = _observed_and_null(perturbed, original, target, w_set, cfg)
    return StatisticalCplResult(leakage, p, p < cfg.alpha, excluded)


def permutation_significance(perturbed: Dataset, original: Dataset, target: int,
                             neighbors: list[int], cfg: EstimationConfig) -> float:
    """P-value of the observed leakage under column-shuffle surrogates."""
    _check_alignment(perturbed, original)
    _, _, p = _observed_and_null(perturbed, original, target, list(neighbors), cfg)
    return p
