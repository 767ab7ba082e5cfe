import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from replicability.data import HypothesisRecord, StudyPairData
from replicability.errors import DataError
from replicability.selection import (
    SelectionRule,
    bh_reject,
    probe_validity,
    select,
)


def bh_scan_oracle(pvalues, q):
    """Direct transcription of the step-up definition."""
    m = len(pvalues)
    order = sorted(range(m), key=lambda i: pvalues[i])
    k_star = 0
    for rank, i in enumerate(order, start=1):
        if pvalues[i] <= rank * q / m:
            k_star = rank
    return set(order[:k_star])


def make_data(p1, p2=None, **kw):
    rows = []
    for i, p in enumerate(p1):
        rows.append(
            HypothesisRecord(f"h{i}", p, None if p2 is None else p2[i])
        )
    return StudyPairData(rows, **kw)


class TestBhReject:
    def test_basic(self):
        got = bh_reject([0.01, 0.02, 0.04, 0.9], 0.05)
        assert got == {0, 1}
        assert got == bh_scan_oracle([0.01, 0.02, 0.04, 0.9], 0.05)

    def test_single_hypothesis(self):
        assert bh_reject([0.04], 0.05) == {0}

    def test_all_ones(self):
        assert bh_reject([1.0, 1.0, 1.0], 0.05) == set()

    def test_empty(self):
        assert bh_reject([], 0.05) == set()

    def test_matches_scan_oracle_on_random_inputs(self):
        rng = np.random.default_rng(11)
        for _ in range(300):
            n = rng.integers(1, 40)
            p = np.where(
                rng.random(n) < 0.4, rng.random(n) * 0.02, rng.random(n)
            )
            q = float(rng.uniform(0.01, 0.3))
            assert bh_reject(p, q) == bh_scan_oracle(p.tolist(), q)

    @settings(max_examples=100, deadline=None)
    @given(
        st.lists(st.floats(min_value=0.0, max_value=1.0), min_size=1, max_size=25),
        st.integers(min_value=0, max_value=24),
        st.floats(min_value=0.01, max_value=0.3),
    )
    def test_monotone_in_pvalues(self, pvals, j, q):
        # lowering any single p-value never shrinks the rejection set
        j = j % len(pvals)
        before = bh_reject(pvals, q)
        lowered = list(pvals)
        lowered[j] = lowered[j] / 2.0
        after = bh_reject(lowered, q)
        assert before <= after


class TestSelect:
    def test_fixed_threshold(self):
        data = make_data([1e-6, 4e-5, 5e-5, 6e-5, 0.2])
        rule = SelectionRule.fixed_threshold(5e-5)
        assert select(rule, data) == ("h0", "h1", "h2")

    def test_top_k_all(self):
        data = make_data([0.5, 0.1, 0.9])
        assert select(SelectionRule.top_k(3), data) == ("h0", "h1", "h2")

    def test_top_k_ties_by_input_order(self):
        data = make_data([0.2, 0.1, 0.2, 0.3])
        assert select(SelectionRule.top_k(2), data) == ("h0", "h1")

    def test_top_k_beyond_family(self):
        data = make_data([0.5, 0.6])
        with pytest.raises(DataError):
            select(SelectionRule.top_k(3), data)

    def test_bh_delegates(self):
        p = [0.001, 0.004, 0.2, 0.6]
        data = make_data(p)
        rule = SelectionRule.bh_at_level(0.05)
        got = set(select(rule, data))
        expected = {f"h{i}" for i in bh_reject(p, 0.05)}
        assert got == expected

    def test_bonferroni_rule(self):
        data = make_data([0.01 / 4, 0.5, 0.9, 0.02], m_declared=4)
        assert select(SelectionRule.bonferroni_threshold(0.01), data) == ("h0",)

    def test_explicit_rule(self):
        data = make_data([0.5, 0.6, 0.7])
        assert select(SelectionRule.explicit({"h2", "h0"}), data) == ("h0", "h2")

    def test_explicit_unknown_id(self):
        data = make_data([0.5])
        with pytest.raises(DataError):
            select(SelectionRule.explicit({"nope"}), data)

    def test_followed_up_rule(self):
        data = make_data([0.1, 0.2, 0.3], p2=[0.5, None, 0.7])
        assert select(SelectionRule.followed_up(), data) == ("h0", "h2")

    def test_deterministic(self):
        rng = np.random.default_rng(3)
        p = rng.random(30)
        data = make_data(p)
        rule = SelectionRule.bh_at_level(0.2)
        assert select(rule, data) == select(rule, data)


class TestProbeValidity:
    def test_bh_rule_clean(self):
        rng = np.random.default_rng(5)
        p = np.concatenate([rng.random(15) * 0.01, rng.random(15)])
        data = make_data(p)
        report = probe_validity(SelectionRule.bh_at_level(0.2), data, grid_size=12, seed=1)
        assert report.looks_valid

    def test_fixed_threshold_clean(self):
        rng = np.random.default_rng(6)
        data = make_data(rng.random(20))
        report = probe_validity(
            SelectionRule.fixed_threshold(0.5), data, grid_size=12, seed=1
        )
        assert report.looks_valid

    def test_top_k_clean(self):
        rng = np.random.default_rng(7)
        data = make_data(rng.random(20))
        report = probe_validity(SelectionRule.top_k(5), data, grid_size=12, seed=1)
        assert report.looks_valid

    def test_median_coupled_rule_caught(self, monkeypatch):
        # "select p1 <= 2*median(p1)": shrinking a selected p-value moves the
        # median and drops another index, so the rule is invalid.
        import replicability.selection as sel_mod

        median_rule = SelectionRule("median2x")
        original = sel_mod._select_mask

        def patched(rule, data, p1):
            if rule.kind == "median2x":
                return p1 <= 2.0 * np.median(p1)
            return original(rule, data, p1)

        monkeypatch.setattr(sel_mod, "_select_mask", patched)
        data = make_data([0.5, 0.4, 1.0])
        report = probe_validity(median_rule, data, grid_size=16, seed=1)
        assert not report.looks_valid
        assert any(ce.perturbed_id for ce in report.counterexamples)

    def test_grid_size_validation(self):
        data = make_data([0.1])
        with pytest.raises(ValueError):
            probe_validity(SelectionRule.top_k(1), data, grid_size=1)
