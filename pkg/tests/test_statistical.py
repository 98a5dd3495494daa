import math

import numpy as np
import pytest

from cpl_kit import (
    BudgetParams,
    Dataset,
    EstimationConfig,
    InputError,
    InsufficientDataError,
    MechanismSpec,
    cpl_bound,
    cpl_exact,
    expand_dataset,
    permutation_significance,
    perturb_dataset,
    statistical_cpl,
    statistical_tpl,
    transition_matrix,
)
from cpl_kit.data_model import Alphabet, conditional_from_joint, empirical_joint
from cpl_kit.fixtures import independent_pair, maxleak_pair, perfect_copy
from cpl_kit.rng import STAGE_SURROGATE, derive_rng


def grr_specs(d, epsilon):
    return [MechanismSpec("grr", epsilon, d.alphabet(j).size) for j in range(d.n_attributes)]


def pipeline(d, epsilon, cfg, kind="grr"):
    specs = [MechanismSpec(kind, epsilon, d.alphabet(j).size) for j in range(d.n_attributes)]
    return perturb_dataset(d, specs, cfg), expand_dataset(d, cfg.expansion)


class TestPerturbDataset:
    def test_row_count(self):
        d = independent_pair(n=1000, seed=0)
        cfg = EstimationConfig(expansion=50, surrogates=1, seed=0)
        assert perturb_dataset(d, grr_specs(d, 1.0), cfg).n_records == 50_000

    def test_high_budget_is_identity(self):
        d = independent_pair(n=2000, seed=1, k=4)
        cfg = EstimationConfig(expansion=2, surrogates=1, seed=1)
        pert, orig = pipeline(d, 20.0, cfg)
        assert (pert.records == orig.records).all()

    def test_zero_budget_uniformizes(self):
        d = perfect_copy(n=50_000, seed=2, k=4)
        cfg = EstimationConfig(expansion=1, surrogates=1, seed=2)
        pert, _ = pipeline(d, 0.0, cfg)
        sigma = math.sqrt(0.25 * 0.75 / pert.n_records)
        for j in range(2):
            freq = np.bincount(pert.column(j), minlength=4) / pert.n_records
            assert np.abs(freq - 0.25).max() <= 4 * sigma

    def test_spec_alphabet_mismatch_rejected(self):
        d = independent_pair(n=100, seed=3, k=2)
        cfg = EstimationConfig(expansion=1, surrogates=1, seed=0)
        with pytest.raises(InputError, match="alphabet size"):
            perturb_dataset(d, [MechanismSpec("grr", 1.0, 3)] * 2, cfg)

    def test_deterministic_given_seed(self):
        d = independent_pair(n=3000, seed=4, k=2)
        cfg = EstimationConfig(expansion=2, surrogates=1, seed=11)
        a = perturb_dataset(d, grr_specs(d, 1.0), cfg)
        b = perturb_dataset(d, grr_specs(d, 1.0), cfg)
        assert (a.records == b.records).all()


class TestStatisticalCpl:
    def test_independent_attributes_near_zero_and_insignificant(self):
        d = independent_pair(n=50_000, seed=3, k=2)
        cfg = EstimationConfig(expansion=2, surrogates=200, seed=7)
        pert, orig = pipeline(d, 1.0, cfg)
        res = statistical_cpl(pert, orig, 0, [1], cfg)
        assert res.leakage < 0.05
        assert not res.significant

    def test_reference_table_both_directions(self):
        d = maxleak_pair(n=100_000, seed=0)
        cfg = EstimationConfig(expansion=5, surrogates=200, seed=42)
        pert, orig = pipeline(d, 1.0, cfg)
        fwd = statistical_cpl(pert, orig, 0, [1], cfg)
        rev = statistical_cpl(pert, orig, 1, [0], cfg)
        assert fwd.leakage == pytest.approx(0.9985, abs=0.05)
        assert rev.leakage == pytest.approx(0.6222, abs=0.05)
        assert fwd.p_value < 0.05 and rev.p_value < 0.05
        assert abs(fwd.leakage - rev.leakage) > 0.3  # asymmetry preserved

    def test_perfect_copy_matches_exact_path(self):
        d = perfect_copy(n=100_000, seed=5, k=4)
        cfg = EstimationConfig(expansion=1, surrogates=50, seed=9)
        pert, orig = pipeline(d, 2.0, cfg)
        res = statistical_cpl(pert, orig, 0, [1], cfg)
        cond = conditional_from_joint(empirical_joint(d, 0, 1))
        exact = cpl_exact(cond, transition_matrix(MechanismSpec("grr", 2.0, 4))).leakage
        assert res.leakage == pytest.approx(exact, abs=0.05)

    def test_determinism_bit_identical(self):
        d = maxleak_pair(n=5000, seed=1)
        cfg = EstimationConfig(expansion=2, surrogates=99, seed=123)
        pert, orig = pipeline(d, 1.0, cfg)
        a = statistical_cpl(pert, orig, 0, [1], cfg)
        b = statistical_cpl(pert, orig, 0, [1], cfg)
        assert a == b

    def test_thread_count_does_not_change_result(self):
        d = maxleak_pair(n=5000, seed=1)
        cfg1 = EstimationConfig(expansion=1, surrogates=60, seed=5, threads=1)
        cfg4 = EstimationConfig(expansion=1, surrogates=60, seed=5, threads=4)
        pert, orig = pipeline(d, 1.0, cfg1)
        assert statistical_cpl(pert, orig, 0, [1], cfg1) == statistical_cpl(pert, orig, 0, [1], cfg4)

    def test_input_validation(self):
        d = independent_pair(n=100, seed=6)
        cfg = EstimationConfig(expansion=1, surrogates=1, seed=0)
        pert, orig = pipeline(d, 1.0, cfg)
        with pytest.raises(InputError, match="nonempty"):
            statistical_cpl(pert, orig, 0, [], cfg)
        with pytest.raises(InputError, match="own neighbor"):
            statistical_cpl(pert, orig, 0, [0, 1], cfg)

    def test_joint_neighbor_alphabet_cap(self):
        k = 101  # three neighbors: 101^3 cells exceeds the 1e6 cap
        alphabet = Alphabet(tuple(f"s{i}" for i in range(k)))
        records = np.zeros((50, 4), dtype=np.int64)
        records[:, 0] = np.arange(50) % 2
        schema = tuple((f"a{j}", alphabet) for j in range(4))
        d = Dataset(schema, records)
        cfg = EstimationConfig(expansion=1, surrogates=1, seed=0)
        with pytest.raises(InputError, match="cells"):
            statistical_cpl(d, d, 0, [1, 2, 3], cfg)

    def test_insufficient_data_when_target_constant(self):
        records = np.column_stack([np.zeros(200, dtype=np.int64),
                                   np.arange(200) % 2])
        schema = (("t", Alphabet(("u", "v"))), ("n", Alphabet(("x", "y"))))
        d = Dataset(schema, records)
        cfg = EstimationConfig(expansion=1, surrogates=1, seed=0)
        pert, orig = pipeline(d, 1.0, cfg)
        with pytest.raises(InsufficientDataError):
            statistical_cpl(pert, orig, 0, [1], cfg)


class TestPermutationSignificance:
    def test_zero_leakage_gives_p_near_one(self):
        # identical constant neighbor: observed leakage 0, every surrogate ties
        records = np.column_stack([np.arange(400) % 2, np.zeros(400, dtype=np.int64)])
        schema = (("t", Alphabet(("u", "v"))), ("n", Alphabet(("x",))))
        d = Dataset(schema, records)
        cfg = EstimationConfig(expansion=1, surrogates=99, seed=0)
        orig = d
        res = statistical_cpl(d, orig, 0, [1], cfg)  # no perturbation needed
        assert res.leakage == 0.0
        assert res.p_value == 1.0

    def test_correlated_data_significant(self):
        d = maxleak_pair(n=20_000, seed=2)
        cfg = EstimationConfig(expansion=1, surrogates=199, seed=3)
        pert, orig = pipeline(d, 1.0, cfg)
        assert permutation_significance(pert, orig, 0, [1], cfg) < 0.05

    def test_null_calibration_reject_rate(self):
        # correlation destroyed up front: rejections should track alpha
        rejects = 0
        p_values = []
        for s in range(100):
            d = maxleak_pair(n=1500, seed=s)
            shuffler = np.random.default_rng(10_000 + s)
            rec = d.records.copy()
            rec[:, 1] = rec[shuffler.permutation(len(rec)), 1]
            broken = Dataset(d.schema, rec)
            cfg = EstimationConfig(expansion=1, surrogates=199, seed=s)
            pert, orig = pipeline(broken, 1.0, cfg)
            res = statistical_cpl(pert, orig, 0, [1], cfg)
            p_values.append(res.p_value)
            rejects += res.significant
        assert rejects <= 12
        assert np.median(p_values) > 0.2  # p-values spread out, not piled at 0

    def test_surrogates_preserve_column_marginals(self):
        # reconstruct the derived surrogate stream and check multiset equality
        d = maxleak_pair(n=4000, seed=4)
        cfg = EstimationConfig(expansion=1, surrogates=5, seed=21)
        pert, _ = pipeline(d, 1.0, cfg)
        col = pert.column(1)
        for s in range(cfg.surrogates):
            rng = derive_rng(cfg.seed, STAGE_SURROGATE, s)
            shuffled = col[rng.permutation(len(col))]
            assert (np.bincount(shuffled, minlength=4)
                    == np.bincount(col, minlength=4)).all()
            assert (shuffled != col).any()


class TestStatisticalTpl:
    def test_single_attribute_tpl_equals_budget(self):
        d = independent_pair(n=100_000, seed=7, k=2)
        cfg = EstimationConfig(expansion=1, surrogates=50, seed=8)
        pert, orig = pipeline(d, 1.0, cfg)
        res = statistical_tpl(pert, orig, 0, cfg, neighbors=[])
        assert res.leakage == pytest.approx(1.0, abs=0.05)

    def test_tpl_below_composition_bound(self):
        d = maxleak_pair(n=50_000, seed=8)
        cfg = EstimationConfig(expansion=2, surrogates=50, seed=9)
        pert, orig = pipeline(d, 1.0, cfg)
        res = statistical_tpl(pert, orig, 0, cfg)
        cond = conditional_from_joint(empirical_joint(d, 0, 1))
        bound = 1.0 + cpl_bound(cond, BudgetParams(1.0)).leakage
        assert res.leakage <= bound + 0.05

    def test_zero_budget_tpl_insignificant(self):
        d = independent_pair(n=100_000, seed=9, k=2)
        cfg = EstimationConfig(expansion=2, surrogates=99, seed=10)
        pert, orig = pipeline(d, 0.0, cfg)
        res = statistical_tpl(pert, orig, 0, cfg)
        assert res.leakage < 0.05
        assert not res.significant
