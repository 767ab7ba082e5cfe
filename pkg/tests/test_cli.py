import shutil
from importlib import resources

import pytest

from replicability.cli import main

HIPPO = resources.files("replicability.fixtures") / "hippocampal_volume.csv"
CROHNS = resources.files("replicability.fixtures") / "crohns_disease.csv"

SCENARIO = """\
m = 400
f00 = 0.9
f01 = 0.025
f10 = 0.025
f11 = 0.05
mu1 = 2.5
mu2 = 2.5
sigma1 = 0.5
sigma2 = 0.5
procedure = fdr
q1 = 0.025
q = 0.05
selection = bh
reps = 60
seed = 42
"""


@pytest.fixture
def crohns_csv(tmp_path):
    dst = tmp_path / "crohns.csv"
    shutil.copy(str(CROHNS), dst)
    return dst


@pytest.fixture
def hippo_csv(tmp_path):
    dst = tmp_path / "hippo.csv"
    shutil.copy(str(HIPPO), dst)
    return dst


def read_rejected(path):
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "id,p1,p2,z,adjusted_p,rejected"
    return [row.split(",")[0] for row in lines[1:] if row.endswith(",1")]


class TestAnalyze:
    def test_fdr_crohns_all_36(self, crohns_csv, tmp_path, capsys):
        out = tmp_path / "out"
        code = main([
            "analyze", "--input", str(crohns_csv), "--mode", "fdr",
            "--q1", "0.04", "--q", "0.05", "--out", str(out),
        ])
        assert code == 0
        assert len(read_rejected(out / "discoveries.csv")) == 36
        summary = (out / "summary.txt").read_text()
        assert "r2: 36" in summary
        assert "r1: 126" in summary
        assert "upper-bound" in summary

    def test_fdr_crohns_item2(self, crohns_csv, tmp_path):
        out = tmp_path / "out"
        code = main([
            "analyze", "--input", str(crohns_csv), "--q1", "0.04", "--q", "0.05",
            "--dependence", "item2", "--t", "5e-5", "--out", str(out), "--quiet",
        ])
        assert code == 0
        assert len(read_rejected(out / "discoveries.csv")) == 23

    def test_fwer_hippocampal(self, hippo_csv, tmp_path):
        out = tmp_path / "out"
        code = main([
            "analyze", "--input", str(hippo_csv), "--mode", "fwer",
            "--alpha1", "0.025", "--alpha", "0.05", "--out", str(out), "--quiet",
        ])
        assert code == 0
        assert read_rejected(out / "discoveries.csv") == ["MSRB3"]

    def test_quiet_prints_nothing(self, hippo_csv, tmp_path, capsys):
        main([
            "analyze", "--input", str(hippo_csv), "--mode", "fwer",
            "--alpha1", "0.025", "--alpha", "0.05",
            "--out", str(tmp_path / "o"), "--quiet",
        ])
        assert capsys.readouterr().out == ""

    def test_outputs_end_with_newline(self, hippo_csv, tmp_path):
        out = tmp_path / "out"
        main([
            "analyze", "--input", str(hippo_csv), "--mode", "fwer",
            "--alpha1", "0.025", "--alpha", "0.05", "--out", str(out), "--quiet",
        ])
        assert (out / "discoveries.csv").read_bytes().endswith(b"\n")
        assert (out / "summary.txt").read_bytes().endswith(b"\n")


class TestExitCodes:
    def test_usage_error_is_1(self, capsys):
        assert main(["analyze"]) == 1
        assert "usage error" in capsys.readouterr().err

    def test_bad_levels_are_usage(self, hippo_csv, capsys):
        code = main([
            "analyze", "--input", str(hippo_csv), "--q1", "0.05", "--q", "0.05",
        ])
        assert code == 1

    def test_data_error_is_2(self, tmp_path, capsys):
        bad = tmp_path / "bad.csv"
        bad.write_text("id,p1,p2\nrs1,zzz,0.1\n")
        code = main(["analyze", "--input", str(bad), "--q1", "0.01", "--q", "0.05"])
        assert code == 2
        assert "data error" in capsys.readouterr().err

    def test_applicability_error_is_3(self, crohns_csv, tmp_path, capsys):
        # t above the thresholded-mode applicability bound
        code = main([
            "analyze", "--input", str(crohns_csv), "--q1", "0.04", "--q", "0.05",
            "--dependence", "item2", "--t", "0.04",
            "--out", str(tmp_path / "o"), "--quiet",
        ])
        assert code == 3
        assert "applicability" in capsys.readouterr().err

    def test_io_error_is_4(self, capsys):
        code = main(["analyze", "--input", "/nonexistent/x.csv", "--q1", "0.01", "--q", "0.05"])
        assert code == 4


class TestAdjust:
    def test_table_output(self, crohns_csv, tmp_path):
        out = tmp_path / "adjusted.csv"
        code = main([
            "adjust", "--input", str(crohns_csv), "--c", "0.8",
            "--flavor", "fdr", "--dependence", "item1", "--out", str(out),
        ])
        assert code == 0
        lines = out.read_text().strip().splitlines()
        assert lines[0] == "id,p1,p2,z,adjusted_p,adjusted_p_modified"
        assert lines[1].startswith("chr1:67417979,")
        # default table precision is 4 significant digits
        assert "3.19e-34" in lines[1]

    def test_full_precision_flag(self, hippo_csv, tmp_path):
        out = tmp_path / "adjusted.csv"
        main([
            "adjust", "--input", str(hippo_csv), "--c", "0.2",
            "--flavor", "bonferroni", "--out", str(out), "--full-precision",
        ])
        row = out.read_text().strip().splitlines()[1].split(",")
        assert row[0] == "MSRB3"
        # round-trip form: parsing the field recovers the exact double
        assert float(row[4]) == 2.5e6 * 5.5e-9 / 0.2


class TestSimulate:
    def test_deterministic_across_workers(self, tmp_path):
        scen = tmp_path / "s.txt"
        scen.write_text(SCENARIO)
        out1 = tmp_path / "a.csv"
        out2 = tmp_path / "b.csv"
        assert main(["simulate", "--scenario", str(scen), "--out", str(out1)]) == 0
        assert main([
            "simulate", "--scenario", str(scen), "--out", str(out2),
            "--workers", "4",
        ]) == 0
        assert out1.read_bytes() == out2.read_bytes()
        header = out1.read_text().splitlines()[0]
        assert header == "point,avg_fdp,fdp_se,avg_power,power_se,avg_rejections"

    def test_unknown_key_is_data_error(self, tmp_path, capsys):
        scen = tmp_path / "s.txt"
        scen.write_text(SCENARIO + "wат = 1\n")
        assert main(["simulate", "--scenario", str(scen)]) == 2

    def test_sweep_rows(self, tmp_path):
        scen = tmp_path / "s.txt"
        scen.write_text(SCENARIO + "sweep_axis = mu\nsweep_grid = 2.0, 3.0\n")
        out = tmp_path / "sweep.csv"
        assert main(["simulate", "--scenario", str(scen), "--out", str(out)]) == 0
        lines = out.read_text().strip().splitlines()
        assert len(lines) == 3
        assert lines[1].startswith("2.0,")


class TestPower:
    def test_pi1_null(self, capsys):
        assert main([
            "power", "--mu11", "0", "--mu21", "0", "--m", "100", "--alpha", "0.05",
        ]) == 0
        out = capsys.readouterr().out
        assert "pi1 = 2.5e-07" in out

    def test_pi2_single(self, capsys):
        assert main([
            "power", "--mu11", "3", "--mu21", "3", "--m", "1",
            "--alpha1", "0.025", "--alpha", "0.05",
        ]) == 0
        out = capsys.readouterr().out
        assert "pi2 = " in out

    def test_grid_mode(self, tmp_path):
        out = tmp_path / "grid.csv"
        assert main([
            "power", "--mu11", "4.5", "--mu21", "4.5", "--m", "100",
            "--alpha", "0.05", "--grid-c", "0.2:0.8:7", "--out", str(out),
        ]) == 0
        lines = out.read_text().strip().splitlines()
        assert lines[0] == "c,power"
        assert len(lines) == 8


class TestCalibrateOracle:
    def test_prints_level(self, capsys):
        assert main([
            "calibrate-oracle", "--f00", "0.999", "--f01", "0.00036",
            "--q", "0.05", "--w1", "1",
        ]) == 0
        out = capsys.readouterr().out
        assert "q_prime = 0.047709" in out

    def test_half_weight(self, capsys):
        main([
            "calibrate-oracle", "--f00", "0.999", "--f01", "0.00036",
            "--q", "0.05", "--w1", "0.5",
        ])
        assert "q_prime = 0.0487932" in capsys.readouterr().out

    def test_degenerate(self, capsys):
        main(["calibrate-oracle", "--f00", "0", "--f01", "0", "--q", "0.05"])
        assert "q_prime = 0.05" in capsys.readouterr().out

    def test_with_input_runs_procedure(self, crohns_csv, tmp_path, capsys):
        out = tmp_path / "o"
        code = main([
            "calibrate-oracle", "--f00", "0.999", "--f01", "0.00036",
            "--q", "0.05", "--w1", "1", "--input", str(crohns_csv),
            "--out", str(out),
        ])
        assert code == 0
        assert (out / "discoveries.csv").exists()


class TestProbeSelection:
    def test_clean_rule(self, crohns_csv, capsys):
        code = main([
            "probe-selection", "--input", str(crohns_csv),
            "--selection", "threshold:5e-5", "--grid-size", "8",
        ])
        assert code == 0
        assert "counterexamples=0" in capsys.readouterr().out
