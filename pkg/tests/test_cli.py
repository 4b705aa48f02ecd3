import json
import os

import numpy as np
import pytest

from l0screen import validate_bench_csv, validate_run_report
from l0screen.cli import main


def run_cli(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def run_json(capsys, *argv):
    code, out, err = run_cli(capsys, *argv)
    assert code == 0, err
    report = json.loads(out)
    validate_run_report(report)
    return report


@pytest.fixture
def dataset(tmp_path, capsys):
    out = str(tmp_path / "ds")
    run_json(capsys, "gen", "--n", "12", "--m", "9", "--k-true", "3",
             "--rho", "0.4", "--snr", "6", "--seed", "5", "--out", out)
    return out


class TestGen:
    def test_writes_three_files_and_meta(self, tmp_path, capsys):
        out = str(tmp_path / "d")
        rep = run_json(capsys, "gen", "--n", "4", "--m", "3", "--k-true", "1",
                       "--rho", "0.2", "--snr", "6", "--seed", "7", "--out", out)
        assert rep["command"] == "gen"
        assert sorted(os.listdir(out)) == ["A.csv", "meta.json", "y.csv"]
        meta = json.loads(open(os.path.join(out, "meta.json")).read())
        assert meta["n"] == 4 and meta["m"] == 3 and meta["k_true"] == 1
        assert meta["rho"] == 0.2 and meta["seed"] == 7
        assert meta["generator_name"] == "numpy-pcg64"
        assert meta["true_support"] == [0]

    def test_same_flags_twice_identical_files(self, tmp_path, capsys):
        d1, d2 = str(tmp_path / "a"), str(tmp_path / "b")
        args = ["gen", "--n", "6", "--m", "5", "--k-true", "2",
                "--rho", "0.3", "--snr", "2", "--seed", "3"]
        run_json(capsys, *args, "--out", d1)
        run_json(capsys, *args, "--out", d2)
        for name in ("A.csv", "y.csv"):
            assert open(os.path.join(d1, name)).read() == open(os.path.join(d2, name)).read()

    def test_k_true_larger_than_n_is_usage_error(self, tmp_path, capsys):
        with pytest.raises(SystemExit) as err:
            main(["gen", "--n", "4", "--m", "3", "--k-true", "5",
                  "--out", str(tmp_path / "x")])
        assert err.value.code == 2


class TestScreen:
    def test_tiny_reg_fixes_everything(self, tmp_path, capsys):
        (tmp_path / "A.csv").write_text("1,0\n0,1\n")
        (tmp_path / "y.csv").write_text("3\n0.1\n")
        rep = run_json(capsys, "screen", "--variant", "reg", "--gamma", "1",
                       "--mu", "1", "--a", str(tmp_path / "A.csv"),
                       "--y", str(tmp_path / "y.csv"))
        blk = rep["screen"]
        assert (blk["n_zero"], blk["n_one"], blk["n_free"]) == (1, 1, 0)
        assert blk["fixes"] == ["one", "zero"]

    def test_full_budget_never_fixes_out(self, dataset, capsys):
        rep = run_json(capsys, "screen", "--variant", "card", "--gamma", "1",
                       "--k", "12", "--a", f"{dataset}/A.csv", "--y", f"{dataset}/y.csv")
        assert rep["screen"]["n_zero"] == 0

    def test_explicit_zeta_bar(self, dataset, capsys):
        rep = run_json(capsys, "screen", "--variant", "card", "--gamma", "0.5",
                       "--k", "3", "--a", f"{dataset}/A.csv", "--y", f"{dataset}/y.csv",
                       "--zeta-bar", "1e12")
        assert rep["screen"]["zeta_bar"] == 1e12
        assert rep["screen"]["n_free"] == 12  # nothing fires against a huge bound

    def test_missing_mu_is_usage_error(self, dataset, capsys):
        with pytest.raises(SystemExit) as err:
            main(["screen", "--variant", "reg", "--gamma", "1",
                  "--a", f"{dataset}/A.csv", "--y", f"{dataset}/y.csv"])
        assert err.value.code == 2

    def test_missing_file_is_runtime_error(self, tmp_path, capsys):
        code, _, errtxt = run_cli(capsys, "screen", "--variant", "reg", "--gamma", "1",
                                  "--mu", "1", "--a", str(tmp_path / "no.csv"),
                                  "--y", str(tmp_path / "no2.csv"))
        assert code == 1
        assert errtxt.strip() != ""

    def test_malformed_csv_is_runtime_error(self, tmp_path, capsys):
        (tmp_path / "A.csv").write_text("1,0\nbroken\n")
        (tmp_path / "y.csv").write_text("3\n0.1\n")
        code, _, errtxt = run_cli(capsys, "screen", "--variant", "reg", "--gamma", "1",
                                  "--mu", "1", "--a", str(tmp_path / "A.csv"),
                                  "--y", str(tmp_path / "y.csv"))
        assert code == 1
        assert "line" in errtxt


class TestSolve:
    def test_tiny_bnb_with_screening(self, tmp_path, capsys):
        (tmp_path / "A.csv").write_text("1,0\n0,1\n")
        (tmp_path / "y.csv").write_text("3\n0.1\n")
        rep = run_json(capsys, "solve", "--variant", "reg", "--gamma", "1",
                       "--mu", "1", "--a", str(tmp_path / "A.csv"),
                       "--y", str(tmp_path / "y.csv"))
        blk = rep["solve"]
        assert blk["optimal"] is True
        assert blk["nodes"] == 1
        assert blk["support"] == [0]
        assert blk["objective"] == pytest.approx(5.51, abs=1e-8)

    def test_brute_matches_bnb(self, dataset, capsys):
        common = ["--variant", "card", "--gamma", "0.8", "--k", "3",
                  "--a", f"{dataset}/A.csv", "--y", f"{dataset}/y.csv"]
        r1 = run_json(capsys, "solve", *common, "--method", "bnb", "--screen", "on")
        r2 = run_json(capsys, "solve", *common, "--method", "bnb", "--screen", "off")
        r3 = run_json(capsys, "solve", *common, "--method", "brute")
        assert r1["solve"]["objective"] == pytest.approx(r3["solve"]["objective"], rel=1e-9)
        assert r2["solve"]["objective"] == pytest.approx(r3["solve"]["objective"], rel=1e-9)
        assert r1["solve"]["support"] == r3["solve"]["support"]

    def test_time_limit_reports_not_optimal(self, tmp_path, capsys):
        out = str(tmp_path / "big")
        run_json(capsys, "gen", "--n", "200", "--m", "100", "--k-true", "10",
                 "--snr", "1", "--seed", "2", "--out", out)
        rep = run_json(capsys, "solve", "--variant", "card", "--gamma", "0.05",
                       "--k", "10", "--a", f"{out}/A.csv", "--y", f"{out}/y.csv",
                       "--time-limit", "0.0001", "--screen", "off")
        assert rep["solve"]["optimal"] is False
        assert rep["solve"]["objective"] > 0  # best-so-far is still reported

    def test_forced_in_is_respected(self, dataset, capsys):
        rep = run_json(capsys, "solve", "--variant", "card", "--gamma", "0.8",
                       "--k", "3", "--a", f"{dataset}/A.csv", "--y", f"{dataset}/y.csv",
                       "--forced-in", "7")
        assert 7 in rep["solve"]["support"]

    def test_forced_in_out_of_range_is_usage_error(self, dataset, capsys):
        with pytest.raises(SystemExit) as err:
            main(["solve", "--variant", "card", "--gamma", "0.8", "--k", "3",
                  "--a", f"{dataset}/A.csv", "--y", f"{dataset}/y.csv",
                  "--forced-in", "99"])
        assert err.value.code == 2


class TestReducedRoundTrip:
    def test_reduced_problem_solves_to_same_objective(self, dataset, tmp_path, capsys):
        red = str(tmp_path / "red")
        rep = run_json(capsys, "screen", "--variant", "card", "--gamma", "0.5",
                       "--k", "3", "--a", f"{dataset}/A.csv", "--y", f"{dataset}/y.csv",
                       "--out-reduced", red)
        full = run_json(capsys, "solve", "--variant", "card", "--gamma", "0.5",
                        "--k", "3", "--a", f"{dataset}/A.csv", "--y", f"{dataset}/y.csv")
        meta = json.loads(open(os.path.join(red, "meta_reduced.json")).read())
        assert meta["k"] == 3
        args = ["solve", "--variant", "card", "--gamma", "0.5", "--k", "3",
                "--a", f"{red}/A.csv", "--y", f"{red}/y.csv"]
        if meta["forced_in"]:
            args += ["--forced-in", ",".join(str(i) for i in meta["forced_in"])]
        sub = run_json(capsys, *args)
        assert sub["solve"]["objective"] == pytest.approx(
            full["solve"]["objective"], rel=1e-8)
        # reduced support maps back onto the original optimum
        kept = meta["kept_columns"]
        mapped = sorted(kept[i] for i in sub["solve"]["support"])
        assert mapped == full["solve"]["support"]


class TestBench:
    def test_row_count_and_validity(self, capsys):
        code, out, _ = run_cli(
            capsys, "bench", "--suite", "synthetic", "--n", "16", "--m", "12",
            "--k-grid", "3", "--gamma-exps", "0,2", "--snr-grid", "6",
            "--seeds", "2", "--methods", "screen,bnb_screen")
        assert code == 0
        validate_bench_csv(out)
        lines = out.strip().splitlines()
        assert len(lines) == 1 + 2 * 2 * 2  # header + gammas x seeds x methods

    def test_deterministic_rerun(self, capsys):
        args = ["bench", "--suite", "synthetic", "--n", "14", "--m", "10",
                "--k-grid", "2", "--gamma-exps", "0", "--snr-grid", "2",
                "--seeds", "2", "--methods", "screen"]
        _, out1, _ = run_cli(capsys, *args)
        _, out2, _ = run_cli(capsys, *args)

        def strip_time(text):
            rows = [r.split(",") for r in text.strip().splitlines()]
            return [r[:9] + r[10:] for r in rows]  # drop the wall-clock column

        assert strip_time(out1) == strip_time(out2)

    def test_files_suite(self, dataset, capsys):
        code, out, _ = run_cli(
            capsys, "bench", "--suite", "files", "--a", f"{dataset}/A.csv",
            "--y", f"{dataset}/y.csv", "--k-grid", "2,3", "--gamma-exps", "0",
            "--methods", "screen")
        assert code == 0
        validate_bench_csv(out)
        assert len(out.strip().splitlines()) == 3

    def test_unknown_method_is_usage_error(self, capsys):
        with pytest.raises(SystemExit) as err:
            main(["bench", "--suite", "synthetic", "--n", "10", "--m", "8",
                  "--methods", "magic"])
        assert err.value.code == 2

    def test_bnb_method_rows(self, capsys):
        code, out, _ = run_cli(
            capsys, "bench", "--suite", "synthetic", "--n", "12", "--m", "10",
            "--k-grid", "2", "--gamma-exps", "0", "--snr-grid", "6",
            "--seeds", "1", "--methods", "bnb,bnb_screen")
        assert code == 0
        validate_bench_csv(out)
        rows = [r.split(",") for r in out.strip().splitlines()[1:]]
        by_method = {r[1]: r for r in rows}
        assert by_method["bnb"][6] == "0"  # plain bnb reports no fixing
        assert int(by_method["bnb_screen"][8]) <= int(by_method["bnb"][8])
