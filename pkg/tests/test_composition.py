import pytest

from cpl_kit import (
    BudgetParams,
    CplMatrix,
    InputError,
    LeakagePair,
    cpl_bound,
    sequential_compose,
    tcpl,
    tpl_upper_bound,
)


class TestSequentialCompose:
    def test_budgets_add(self):
        out = sequential_compose([LeakagePair(1, 0), LeakagePair(1, 0)])
        assert (out.leakage, out.relaxation) == (2, 0)

    def test_relaxations_add(self):
        out = sequential_compose([LeakagePair(0.5, 0.01), LeakagePair(0.3, 0.02)])
        assert out.leakage == pytest.approx(0.8)
        assert out.relaxation == pytest.approx(0.03)

    def test_single_element_identity(self):
        p = LeakagePair(0.7, 0.1)
        out = sequential_compose([p])
        assert (out.leakage, out.relaxation) == (p.leakage, p.relaxation)

    def test_associative_exactly(self):
        a, b, c = LeakagePair(0.1), LeakagePair(0.2), LeakagePair(0.7)
        ab_c = sequential_compose([sequential_compose([a, b]), c])
        abc = sequential_compose([a, b, c])
        assert ab_c.leakage == abc.leakage
        assert ab_c.relaxation == abc.relaxation

    def test_relaxation_overflow_clamped_and_flagged(self):
        out = sequential_compose([LeakagePair(1, 0.6), LeakagePair(1, 0.6)])
        assert out.overflow
        assert out.relaxation < 1.0

    def test_infinite_flag_propagates(self):
        out = sequential_compose([LeakagePair(1.0, infinite=True), LeakagePair(0.5)])
        assert out.infinite
        assert out.leakage == pytest.approx(1.5)

    def test_empty_rejected(self):
        with pytest.raises(InputError):
            sequential_compose([])


class TestTplUpperBound:
    def test_arithmetic(self):
        out = tpl_upper_bound(LeakagePair(1.0), [LeakagePair(0.2), LeakagePair(0.1)])
        assert out.leakage == pytest.approx(1.3)
        assert out.relaxation == 0.0

    def test_no_neighbors(self):
        own = LeakagePair(1.0, 0.01)
        out = tpl_upper_bound(own, [])
        assert (out.leakage, out.relaxation) == (1.0, 0.01)

    def test_monotone_in_neighbors(self):
        own = LeakagePair(1.0)
        a = tpl_upper_bound(own, [LeakagePair(0.2)])
        b = tpl_upper_bound(own, [LeakagePair(0.2), LeakagePair(0.3)])
        assert own.leakage <= a.leakage <= b.leakage

    def test_bound_and_exact_results_compose(self, maxleak_cond_fwd):
        import math
        from cpl_kit import ConditionalDistribution, MechanismSpec, TransitionMatrix, cpl_exact
        import numpy as np
        bound = cpl_bound(maxleak_cond_fwd, BudgetParams(1.0, 0.02))
        out = tpl_upper_bound(LeakagePair(1.0), [bound.pair()])
        assert out.leakage == pytest.approx(1.0 + bound.leakage)
        assert out.relaxation == pytest.approx(bound.relaxation)
        # an infinite exact witness propagates as the flag
        cond = ConditionalDistribution(("x", "xp"), ("a", "b"),
                                       np.array([[1.0, 0.0], [0.0, 1.0]]))
        trans = TransitionMatrix(("a", "b"), ("u", "v"),
                                 np.array([[1.0, 0.0], [0.0, 1.0]]), math.inf)
        res = cpl_exact(cond, trans)
        composed = tpl_upper_bound(LeakagePair(1.0), [res.pair()])
        assert composed.infinite


def grid_from_values(values):
    n = len(values)
    entries = tuple(tuple(None if i == j else LeakagePair(values[i][j]) for j in range(n))
                    for i in range(n))
    return CplMatrix(tuple(f"a{i}" for i in range(n)), entries)


class TestTcpl:
    def test_all_zero(self):
        m = grid_from_values([[0, 0], [0, 0]])
        assert tcpl(m) == 0.0

    def test_two_attribute_sum(self):
        m = grid_from_values([[0, 0.3], [0.1, 0]])
        assert tcpl(m) == pytest.approx(0.4)

    def test_reference_table_sum(self, maxleak_cond_fwd, maxleak_cond_rev):
        fwd = cpl_bound(maxleak_cond_fwd, BudgetParams(1.0)).leakage
        rev = cpl_bound(maxleak_cond_rev, BudgetParams(1.0)).leakage
        m = grid_from_values([[0, fwd], [rev, 0]])
        assert tcpl(m) == pytest.approx(1.0 + 0.6203, abs=2e-3)

    def test_relabeling_invariance(self):
        values = [[0, 0.3, 0.2], [0.1, 0, 0.25], [0.05, 0.15, 0]]
        m = grid_from_values(values)
        perm = [2, 0, 1]
        permuted = [[values[perm[i]][perm[j]] for j in range(3)] for i in range(3)]
        assert tcpl(grid_from_values(permuted)) == pytest.approx(tcpl(m), abs=1e-12)

    def test_missing_entry_rejected(self):
        entries = ((None, None), (LeakagePair(0.1), None))
        m = CplMatrix(("a", "b"), entries)
        with pytest.raises(InputError, match="missing"):
            tcpl(m)

    def test_diagonal_must_be_absent(self):
        with pytest.raises(InputError, match="diagonal"):
            CplMatrix(("a",), ((LeakagePair(0.0),),))
