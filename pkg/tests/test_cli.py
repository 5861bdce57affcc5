import csv
import subprocess
import sys

import pytest

from treebound.cli import check_sweep_monotone, main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def kv(out):
    return dict(line.split("=", 1) for line in out.splitlines() if "=" in line)


@pytest.fixture
def pair(tmp_path):
    path = tmp_path / "pair.txt"
    path.write_text("# two recurring shapes\n1 1 3 3\n1 2 1 2\n")
    return str(path)


class TestBound:
    def test_depth_one(self, capsys):
        code, out, _ = run(capsys, "bound", "--depth", "1", "--alpha-star", "0.3",
                           "--beta-star", "0.2")
        assert code == 0 and float(kv(out)["rho"]) == pytest.approx(0.7, abs=1e-15)

    def test_depth_two(self, capsys):
        code, out, _ = run(capsys, "bound", "--depth", "2", "--alpha-star", "0.25",
                           "--beta-star", "0.25")
        d = kv(out)
        assert code == 0
        assert float(d["rho"]) == pytest.approx(0.9330127018922193, abs=1e-12)
        assert set(d) >= {"T_d", "alpha_star", "beta_star", "rho", "method", "residual",
                          "classical", "gap_ratio"}

    def test_leader_case_uses_star_params(self, capsys):
        code, out, _ = run(capsys, "bound", "--depth", "3", "--alpha", "1", "--beta", "0.3",
                           "--gamma", "0.2")
        d = kv(out)
        assert code == 0
        assert float(d["alpha_star"]) == pytest.approx(0.2, abs=1e-15)
        assert float(d["beta_star"]) == pytest.approx(0.3, abs=1e-15)

    def test_invalid_params_name_constraint(self, capsys):
        code, _, err = run(capsys, "bound", "--depth", "2", "--alpha", "0.5", "--beta", "0.7",
                           "--gamma", "0.6")
        assert code == 2 and "beta+gamma" in err

    def test_mixing_raw_and_star(self, capsys):
        code, _, err = run(capsys, "bound", "--depth", "2", "--alpha", "0.5", "--beta", "0.2",
                           "--gamma", "0.2", "--alpha-star", "0.2", "--beta-star", "0.1")
        assert code == 2 and "not both" in err

    def test_bad_depth(self, capsys):
        code, _, _ = run(capsys, "bound", "--depth", "0", "--alpha-star", "0.3",
                         "--beta-star", "0.2")
        assert code == 2

    def test_argparse_error_is_usage(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["bound"])
        assert exc.value.code == 2


class TestSimulate:
    def test_identity(self, capsys):
        code, out, _ = run(capsys, "simulate", "--extremal", "identity", "--agents", "4")
        d = kv(out)
        assert code == 0 and float(d["empirical_rate"]) == 1.0 and float(d["bound"]) == 1.0
        assert d["dominance"] == d["comparison"] == "PASS"

    def test_leader_chain(self, capsys, tmp_path):
        out_csv = tmp_path / "lc.csv"
        code, out, _ = run(capsys, "simulate", "--extremal", "leader-chain", "--agents", "6",
                           "--beta", "0.5", "--horizon", "500", "--out", str(out_csv))
        d = kv(out)
        assert code == 0
        assert float(d["empirical_rate"]) == pytest.approx(0.5, abs=1e-3)
        assert float(d["bound"]) == pytest.approx(0.5, abs=1e-12)
        assert out_csv.read_text().startswith("t,delta_1,")

    @pytest.mark.parametrize("mode", ["tight", "slack"])
    def test_seeded_random_run(self, capsys, pair, mode):
        code, out, _ = run(capsys, "simulate", "--shapes", pair, "--alpha", "0.6",
                           "--beta", "0.2", "--gamma", "0.4", "--seed", "5", "--mode", mode)
        d = kv(out)
        assert code == 0 and d["comparison"] == "PASS"
        assert float(d["empirical_rate"]) <= float(d["bound"]) + 5e-3

    def test_deterministic(self, capsys, tmp_path):
        argv = ["simulate", "--levels", "0 1 2 2 3", "--alpha", "0.5", "--beta", "0.1",
                "--gamma", "0.5", "--seed", "3", "--initial", "random-uniform"]
        outs = []
        for name in ("a.csv", "b.csv"):
            path = tmp_path / name
            run(capsys, *argv, "--out", str(path))
            outs.append(path.read_bytes())
        assert outs[0] == outs[1]

    def test_star_params_rejected(self, capsys, pair):
        code, _, _ = run(capsys, "simulate", "--shapes", pair, "--alpha-star", "0.2",
                         "--beta-star", "0.2")
        assert code == 2

    def test_malformed_shapes(self, capsys, tmp_path):
        bad = tmp_path / "bad.txt"
        bad.write_text("1 5\n")
        code, _, _ = run(capsys, "simulate", "--shapes", str(bad), "--alpha", "0.5",
                         "--beta", "0.2", "--gamma", "0.3")
        assert code == 2

    def test_missing_file(self, capsys, tmp_path):
        code, _, _ = run(capsys, "depths", "--shapes", str(tmp_path / "nope.txt"))
        assert code == 2


class TestSweep:
    def sweep(self, capsys, tmp_path, *argv):
        path = tmp_path / "sweep.csv"
        code, _, err = run(capsys, "sweep", *argv, "--out", str(path))
        rows = list(csv.reader(path.open())) if path.exists() else []
        return code, rows, err

    def test_single_point(self, capsys, tmp_path):
        code, rows, _ = self.sweep(capsys, tmp_path, "--depth", "1", "--alpha-star-grid",
                                   "0.5,0.5,0.1", "--beta-star-grid", "0,0,0.1")
        assert code == 0
        assert rows[0] == ["T", "alpha_star", "beta_star", "rho", "classical", "gap_ratio"]
        assert [float(v) for v in rows[1][3:]] == [0.5, 0.5, 1.0]

    def test_order_and_lossless(self, capsys, tmp_path):
        code, rows, _ = self.sweep(capsys, tmp_path, "--depth", "2", "3", "--alpha-star-grid",
                                   "0.1,0.3,0.1", "--beta-star-grid", "0,0.2,0.1", "--jobs", "4")
        assert code == 0
        keys = [(int(r[0]), float(r[1]), float(r[2])) for r in rows[1:]]
        assert keys == sorted(keys) and len(keys) == 18
        from treebound import StarParams, rho_bound
        for r in rows[1:]:
            assert float(r[3]) == rho_bound(int(r[0]), StarParams(float(r[1]), float(r[2]))).rho

    def test_ratio_tends_to_depth(self, capsys, tmp_path):
        code, rows, _ = self.sweep(capsys, tmp_path, "--depth", "2", "3", "4",
                                   "--alpha-star-grid", "0.001,0.001,0.1")
        assert code == 0
        for r in rows[1:]:
            assert float(r[5]) == pytest.approx(int(r[0]), rel=1e-2)

    def test_monotone_grid_at_depth_four(self, capsys, tmp_path):
        code, rows, _ = self.sweep(capsys, tmp_path, "--depth", "4", "--alpha-star-grid",
                                   "0.05,0.95,0.05", "--beta-star-grid", "0,0.9,0.05")
        assert code == 0 and len(rows) > 100

    def test_raw_grid(self, capsys, tmp_path):
        code, rows, _ = self.sweep(capsys, tmp_path, "--depth", "2", "--alpha-grid", "0.5,1,0.5",
                                   "--beta-grid", "0,0.5,0.5", "--gamma-grid", "0.5,1,0.5")
        assert code == 0 and len(rows) == 1 + 2 * 3

    def test_mixed_grids_rejected(self, capsys, tmp_path):
        code, _, _ = self.sweep(capsys, tmp_path, "--depth", "2", "--alpha-star-grid",
                                "0.1,0.2,0.1", "--gamma-grid", "0,1,0.5")
        assert code == 2

    @pytest.mark.parametrize("grid", ["0.1,0.2,0", "0.5,0.2,0.1", "0.1,1.5,0.1"])
    def test_invalid_grid(self, capsys, tmp_path, grid):
        code, _, _ = self.sweep(capsys, tmp_path, "--depth", "2", "--alpha-star-grid", grid)
        assert code == 2

    def test_validator_flags_increase(self):
        rows = [(2, 0.1, 0.0, 0.9, 0, 0), (2, 0.2, 0.0, 0.95, 0, 0)]
        assert check_sweep_monotone(rows) == [((2, 0.1, 0.0), (2, 0.2, 0.0))]


class TestDepths:
    def test_two_shape_pair(self, capsys, pair):
        code, out, _ = run(capsys, "depths", "--shapes", pair)
        lines = out.splitlines()
        assert code == 0
        assert lines[:2] == ["r=0 1 2 3 3", "T_d=3"]
        assert lines[2:] == ["N_0=1", "N_1=1 2", "N_2=1 2 3", "N_3=1 2 3 4 5"]

    @pytest.mark.parametrize("line,r", [("1 2 3", "r=0 1 2 3"), ("1 1 1", "r=0 1 1 1")])
    def test_chain_and_star(self, capsys, tmp_path, line, r):
        path = tmp_path / "s.txt"
        path.write_text(line + "\n")
        assert run(capsys, "depths", "--shapes", str(path))[1].splitlines()[0] == r

    def test_malformed(self, capsys, tmp_path):
        path = tmp_path / "s.txt"
        path.write_text("1 two\n")
        assert run(capsys, "depths", "--shapes", str(path))[0] == 2


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "treebound", "bound", "--depth", "1",
                          "--alpha-star", "0.3", "--beta-star", "0.2"],
                         capture_output=True, text=True)
    assert res.returncode == 0 and "rho=0.7" in res.stdout
