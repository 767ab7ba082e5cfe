import numpy as np
import pytest

from conftest import make_data, random_instance
from replicability.adjust import build_adjusted_table
from replicability.datasets import load_crohns_disease, load_hippocampal_volume
from replicability.errors import DataError
from replicability.procedures import (
    Dependence,
    fdr_two_stage,
    fwer_two_stage,
    FwerMethod,
)
from replicability.selection import SelectionRule


def test_empty_followup_set_gives_empty_table():
    data = make_data([0.1, 0.2], [None, None])
    table = build_adjusted_table(data, c=0.5)
    assert table.rows == ()


def test_rows_sorted_by_adjusted_then_id():
    rng = np.random.default_rng(1)
    data, _, _, _ = random_instance(rng, max_m=40)
    table = build_adjusted_table(data, c=0.5, flavor="fdr")
    keys = [(r.adjusted_p, r.id) for r in table.rows]
    assert keys == sorted(keys)


def test_bonferroni_flavor_matches_hippocampal_column():
    data = load_hippocampal_volume()
    table = build_adjusted_table(data, c=0.2, flavor="bonferroni")
    by_id = {r.id: r.adjusted_p for r in table.rows}
    assert by_id["DPP4"] == pytest.approx(1.0)
    assert by_id["ASTN2"] == pytest.approx(1.0)
    assert by_id["MSRB3"] == pytest.approx(0.06875, rel=1e-6)
    assert by_id["WIF1"] == pytest.approx(0.2750, rel=1e-6)
    assert by_id["HRK"] == pytest.approx(0.6000, rel=1e-6)


def test_harmonic_modified_column_crohns_top_row():
    data = load_crohns_disease()
    table = build_adjusted_table(
        data, c=0.8, flavor="fdr", mode=Dependence.ARBITRARY_PRIMARY_ITEM1
    )
    top = table.rows[0]
    assert top.id == "chr1:67417979"
    assert top.adjusted_p == pytest.approx(2.53e-28, rel=0.03)
    assert top.adjusted_p_modified == pytest.approx(3.53e-27, rel=0.03)
    assert table.adjusted_is_upper_bound


def test_no_modified_column_for_independent_mode():
    data = load_hippocampal_volume()
    table = build_adjusted_table(data, c=0.5, flavor="fdr")
    assert all(r.adjusted_p_modified is None for r in table.rows)


def test_item2_mode_needs_q_and_t():
    data = load_crohns_disease()
    with pytest.raises(DataError):
        build_adjusted_table(
            data, c=0.8, flavor="fdr", mode=Dependence.ARBITRARY_PRIMARY_ITEM2
        )
    table = build_adjusted_table(
        data,
        c=0.8,
        flavor="fdr",
        mode=Dependence.ARBITRARY_PRIMARY_ITEM2,
        t=5e-5,
        q=0.05,
    )
    assert all(r.adjusted_p_modified is not None for r in table.rows)


def test_fdr_duality_on_random_instances():
    # thresholding the fdr-flavor table at q reproduces the procedure run
    rng = np.random.default_rng(2)
    for _ in range(100):
        data, q1, q, _ = random_instance(rng, max_m=60)
        table = build_adjusted_table(data, c=q1 / q, flavor="fdr")
        flagged = {r.id for r in table.rows if r.adjusted_p <= q}
        run = fdr_two_stage(data, SelectionRule.followed_up(), q1, q)
        assert flagged == set(run.rejected_ids)


def test_bonferroni_duality_on_random_instances():
    rng = np.random.default_rng(3)
    for _ in range(100):
        data, a1, a, _ = random_instance(rng, max_m=60)
        table = build_adjusted_table(data, c=a1 / a, flavor="bonferroni")
        flagged = {r.id for r in table.rows if r.adjusted_p <= a}
        run = fwer_two_stage(
            data, SelectionRule.followed_up(), a1, a, FwerMethod.BONFERRONI
        )
        assert flagged == set(run.rejected_ids)


def test_modified_duality_matches_modified_run():
    rng = np.random.default_rng(4)
    for _ in range(50):
        data, q1, q, _ = random_instance(rng, max_m=50)
        table = build_adjusted_table(
            data, c=q1 / q, flavor="fdr", mode=Dependence.ARBITRARY_PRIMARY_ITEM1
        )
        flagged = {r.id for r in table.rows if r.adjusted_p_modified <= q}
        run = fdr_two_stage(
            data, SelectionRule.followed_up(), q1, q, Dependence.ARBITRARY_PRIMARY_ITEM1
        )
        assert flagged == set(run.rejected_ids)


def test_prescale_capped_at_one():
    data = make_data([0.9, 1e-8], [0.01, 0.001], m_declared=100)
    table = build_adjusted_table(
        data, c=0.5, flavor="fdr", mode=Dependence.ARBITRARY_PRIMARY_ITEM1
    )
    assert all(r.adjusted_p_modified <= 1.0 for r in table.rows)
