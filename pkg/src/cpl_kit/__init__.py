"""Correlation-induced privacy leakage analysis for local differential privacy.

Quantifies how much a perturbed attribute reveals about a correlated
neighbor: exactly from transition probabilities, by a tight bound from the
(epsilon, delta) budget alone, or statistically from perturbed data with a
permutation significance test. Includes sequential composition, analyzer and
utility benchmarks, and correlation-aware budget calibration.
"""

__version__ = "0.1.0"

from .benchmarks import (
    BenchmarkPoint,
    UtilityReport,
    UtilityRow,
    analyzer_benchmark,
    baseline_grf,
    baseline_spl_anl,
    nmse_cpl,
    ordered_pairs,
    pairwise_abs_pcc,
    pairwise_conditionals,
    undershoot_overshoot,
    utility_benchmark,
)
from .calibration import CalibrationResult, calibrate, worst_tpl
from .composition import CplMatrix, LeakagePair, sequential_compose, tcpl, tpl_upper_bound
from .correlation_metrics import MetricReport, metrics
from .cpl_bound import (
    BoundedCplResult,
    BudgetParams,
    cpl_bound,
    cpl_bound_bruteforce,
    cpl_limit,
    is_max_attainable,
)
from .cpl_exact import ExactCplResult, cpl_exact, evaluate_witness
from .data_model import (
    Alphabet,
    ConditionalDistribution,
    Dataset,
    JointDistribution,
    bin_numeric,
    conditional_from_joint,
    empirical_joint,
    expand_dataset,
    load_csv,
    write_csv,
)
from .errors import (
    CplKitError,
    DimensionMismatchError,
    InfeasibleBudgetError,
    InputError,
    InsufficientDataError,
    UnsupportedMechanismError,
)
from .mechanisms import (
    MechanismSpec,
    PerturbedColumn,
    PerturbedOutput,
    TransitionMatrix,
    decode,
    decode_column,
    estimate_frequencies,
    perturb,
    perturb_column,
    transition_matrix,
)
from .statistical import (
    EstimationConfig,
    StatisticalCplResult,
    permutation_significance,
    perturb_dataset,
    statistical_cpl,
    statistical_tpl,
    sup_ratio_leakage,
)
