import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import make_data
from replicability.dataio import (
    fmt,
    parse_dependence,
    parse_pvalue_csv,
    parse_rule_spec,
    parse_scenario_file,
    parse_sim_selection,
    write_pvalue_csv,
)
from replicability.errors import DataError
from replicability.procedures import Dependence


def test_parse_basic(tmp_path):
    path = tmp_path / "in.csv"
    path.write_text("id,p1,p2\nrs1,0.001,0.02\nrs2,0.5,\n")
    data = parse_pvalue_csv(path)
    assert data.m == 2
    assert data.records[0].p2 == 0.02
    assert data.records[1].p2 is None


def test_parse_directives(tmp_path):
    path = tmp_path / "in.csv"
    path.write_text("# m=635547\n# r1=126\nid,p1,p2\nrs1,1e-9,0.001\n")
    data = parse_pvalue_csv(path)
    assert data.m_declared == 635547
    assert data.r1_declared == 126


def test_parse_scientific_and_decimal(tmp_path):
    path = tmp_path / "in.csv"
    path.write_text("id,p1,p2\na,5.2e-8,0.7\nb,0.0007,1E-4\n")
    data = parse_pvalue_csv(path)
    assert data.records[0].p1 == 5.2e-8
    assert data.records[1].p2 == 1e-4


def test_header_only_is_valid_empty(tmp_path):
    path = tmp_path / "in.csv"
    path.write_text("id,p1,p2\n")
    data = parse_pvalue_csv(path)
    assert data.records == ()


def test_malformed_row_reports_line_number(tmp_path):
    path = tmp_path / "in.csv"
    path.write_text("id,p1,p2\nok,0.1,0.2\nbad,xyz,0.2\n")
    with pytest.raises(DataError) as err:
        parse_pvalue_csv(path)
    assert ":3:" in str(err.value)


def test_wrong_header_rejected(tmp_path):
    path = tmp_path / "in.csv"
    path.write_text("id,pval1,pval2\na,0.1,0.2\n")
    with pytest.raises(DataError):
        parse_pvalue_csv(path)


def test_missing_header_rejected(tmp_path):
    path = tmp_path / "empty.csv"
    path.write_text("")
    with pytest.raises(DataError):
        parse_pvalue_csv(path)


def test_round_trip_bit_exact(tmp_path):
    data = make_data(
        [5.2e-8, 1.0, 0.0, 3.141592653589793e-12],
        [0.7, None, 5e-324, 1e-300],
        m_declared=2_500_000,
        r1_declared=17,
    )
    path = tmp_path / "out.csv"
    write_pvalue_csv(data, path)
    back = parse_pvalue_csv(path)
    assert back == data
    # and a second pass writes identical bytes
    path2 = tmp_path / "out2.csv"
    write_pvalue_csv(back, path2)
    assert path.read_bytes() == path2.read_bytes()


@settings(max_examples=200, deadline=None)
@given(st.floats(min_value=0.0, max_value=1.0, allow_nan=False))
def test_fmt_round_trips_any_probability(p):
    assert float(fmt(p)) == p


def test_fmt_table_precision():
    assert fmt(0.068751234, full=False) == "0.06875"
    assert fmt(None) == ""


def test_trailing_newline(tmp_path):
    path = tmp_path / "out.csv"
    write_pvalue_csv(make_data([0.5], [0.5]), path)
    assert path.read_bytes().endswith(b"\n")


def test_parse_rule_specs():
    assert parse_rule_spec("followup").kind == "followup"
    assert parse_rule_spec("bh:0.04").level == 0.04
    assert parse_rule_spec("bonferroni:0.025").kind == "bonferroni"
    assert parse_rule_spec("top:12").k == 12
    assert parse_rule_spec("threshold:5e-5").threshold == 5e-5
    with pytest.raises(DataError):
        parse_rule_spec("nope:1")


def test_parse_sim_selection_auto_level():
    sel = parse_sim_selection("bh")
    assert sel.kind == "bh" and sel.level is None
    assert parse_sim_selection("top:25").k == 25


def test_parse_dependence_aliases():
    assert parse_dependence("item1") is Dependence.ARBITRARY_PRIMARY_ITEM1
    assert parse_dependence("ITEM2") is Dependence.ARBITRARY_PRIMARY_ITEM2
    assert parse_dependence("prds") is Dependence.PRDS_FOLLOWUP
    assert parse_dependence("both") is Dependence.ARBITRARY_BOTH
    with pytest.raises(DataError):
        parse_dependence("sideways")


SCENARIO = """\
# power run
m = 1000
f00 = 0.9
f01 = 0.025
f10 = 0.025
f11 = 0.05
mu1 = 2.0
mu2 = 2.0
sigma1 = 0.5
sigma2 = 0.5
procedure = fdr
q1 = 0.025
q = 0.05
selection = bh
reps = 100
seed = 42
"""


def test_parse_scenario(tmp_path):
    path = tmp_path / "s.txt"
    path.write_text(SCENARIO)
    parsed = parse_scenario_file(path)
    assert parsed.scenario.m == 1000
    assert parsed.scenario.procedure.q1 == 0.025
    assert parsed.scenario.reps == 100
    assert parsed.sweep_axis is None


def test_parse_scenario_sweep(tmp_path):
    path = tmp_path / "s.txt"
    path.write_text(SCENARIO + "sweep_axis = mu\nsweep_grid = 1.5, 2.0, 2.5\n")
    parsed = parse_scenario_file(path)
    assert parsed.sweep_axis == "mu"
    assert parsed.sweep_grid == (1.5, 2.0, 2.5)


def test_unknown_key_rejected(tmp_path):
    path = tmp_path / "s.txt"
    path.write_text(SCENARIO + "flurb = 3\n")
    with pytest.raises(DataError) as err:
        parse_scenario_file(path)
    assert "flurb" in str(err.value)


def test_fraction_sum_violation_rejected(tmp_path):
    path = tmp_path / "s.txt"
    path.write_text(SCENARIO.replace("f00 = 0.9", "f00 = 0.95"))
    with pytest.raises(DataError):
        parse_scenario_file(path)


def test_allocation_keys(tmp_path):
    body = SCENARIO.replace("sigma1 = 0.5\nsigma2 = 0.5\n", "sigma = 10\nzeta = 0.3\nN = 1000\n")
    path = tmp_path / "s.txt"
    path.write_text(body)
    parsed = parse_scenario_file(path)
    assert parsed.scenario.sd1 == pytest.approx(10.0 / math.sqrt(300))


def test_fixture_round_trip_identity(tmp_path):
    from replicability.datasets import load_crohns_disease, load_hippocampal_volume

    for name, data in (
        ("hippo", load_hippocampal_volume()),
        ("crohns", load_crohns_disease()),
    ):
        path = tmp_path / f"{name}.csv"
        write_pvalue_csv(data, path)
        assert parse_pvalue_csv(path) == data
