import json
import math
from pathlib import Path

import numpy as np
import pytest
from click.testing import CliRunner

from annulus_nematics.cli import fmt17, load_field_csv, main, read_table
from annulus_nematics.of_strong import delta_n

DATA = Path(__file__).parent / "data"


@pytest.fixture()
def runner():
    return CliRunner()


class TestStabilityStrong:
    def test_table_matches_closed_form(self, runner, tmp_path):
        out = tmp_path / "ss.csv"
        res = runner.invoke(main, ["stability-strong", "--b-min", "0.05",
                                   "--b-max", "0.95", "--steps", "200",
                                   "--out", str(out)])
        assert res.exit_code == 0, res.output
        _, cols, data = read_table(str(out))
        assert cols == ["b", "delta1"]
        assert data.shape == (200, 2)
        for b, d in data:
            assert d == delta_n(b, 1)

    def test_golden_svg(self, runner, tmp_path):
        out = tmp_path / "ss.csv"
        svg = tmp_path / "ss.svg"
        res = runner.invoke(main, ["stability-strong", "--b-min", "0.1",
                                   "--b-max", "0.9", "--steps", "9",
                                   "--out", str(out), "--svg", str(svg)])
        assert res.exit_code == 0, res.output
        golden = (DATA / "golden_stability_strong.svg").read_bytes()
        assert svg.read_bytes() == golden

    def test_svg_deterministic(self, runner, tmp_path):
        paths = []
        for name in ("a.svg", "b.svg"):
            svg = tmp_path / name
            runner.invoke(main, ["stability-strong", "--steps", "12",
                                 "--out", str(tmp_path / "t.csv"),
                                 "--svg", str(svg)])
            paths.append(svg.read_bytes())
        assert paths[0] == paths[1]


class TestStabilityWeak:
    def test_per_order_files_and_termination(self, runner, tmp_path):
        prefix = str(tmp_path / "sw")
        svg = tmp_path / "sw.svg"
        res = runner.invoke(main, ["stability-weak", "--b", "0.5",
                                   "--k", "0,1,2,3", "--alpha-min", "0.05",
                                   "--alpha-max", "3", "--steps", "40",
                                   "--out-prefix", prefix, "--svg", str(svg)])
        assert res.exit_code == 0, res.output
        assert svg.exists()
        for k in (0, 1, 2, 3):
            _, cols, data = read_table(f"{prefix}_k{k}.csv")
            assert cols == ["x", "y", "k"]
            if k >= 1:
                # azimuthal perturbation curves end at alpha = 1
                assert np.all(data[:, 1] < 1.0)
            assert np.all((0 < data[:, 0]) & (data[:, 0] < 1))


class TestSpiral:
    def test_profile_roundtrip(self, runner, tmp_path):
        out = tmp_path / "sp.csv"
        res = runner.invoke(main, ["spiral", "--b", "0.2", "--delta", "0.95",
                                   "--n-profile", "129", "--out", str(out)])
        assert res.exit_code == 0, res.output
        comment, cols, data = read_table(str(out))
        assert cols == ["r", "value"]
        assert data[0, 0] == 0.2 and data[-1, 0] == 1.0
        assert "u_max=" in comment

    def test_subcritical_is_config_error(self, runner, tmp_path):
        res = runner.invoke(main, ["spiral", "--b", "0.5", "--delta", "0.5",
                                   "--out", str(tmp_path / "x.csv")])
        assert res.exit_code == 2


class TestDefectStates:
    def test_columns_and_odd_gaps(self, runner, tmp_path):
        out = tmp_path / "ds.csv"
        res = runner.invoke(main, ["defect-states", "--b", "0.5", "--n-max",
                                   "6", "--eps", "0.002", "--out", str(out)])
        assert res.exit_code == 0, res.output
        _, cols, data = read_table(str(out))
        assert cols == ["N", "E_U1", "E_U2", "E_U3", "E_D"]
        odd = data[data[:, 0] % 2 == 1]
        assert np.all(np.isnan(odd[:, 3])) and np.all(np.isnan(odd[:, 4]))
        even = data[data[:, 0] % 2 == 0]
        assert np.all(np.isfinite(even[:, 1:]))

    def test_bad_eps_is_config_error(self, runner, tmp_path):
        res = runner.invoke(main, ["defect-states", "--b", "0.5", "--eps",
                                   "0.2", "--out", str(tmp_path / "x.csv")])
        assert res.exit_code == 2


class TestPdeSolve:
    def test_field_roundtrip_bit_identical(self, runner, tmp_path):
        out = tmp_path / "fld.csv"
        res = runner.invoke(main, ["pde-solve", "--b", "0.3", "--delta", "0.5",
                                   "--nr", "24", "--nphi", "20",
                                   "--out", str(out)])
        assert res.exit_code == 0, res.output
        fld = load_field_csv(str(out))
        assert fld.grid.periodic
        _, pp = fld.grid.mesh()
        assert np.array_equal(fld.theta, pp + 0.5 * math.pi)

    def test_report_on_stderr(self, runner, tmp_path):
        out = tmp_path / "fld.csv"
        res = runner.invoke(main, ["pde-solve", "--b", "0.3", "--delta", "0.0",
                                   "--nr", "20", "--nphi", "16",
                                   "--out", str(out)])
        assert res.exit_code == 0
        # stderr carries the JSON solve report

    def test_sector_solve(self, runner, tmp_path):
        out = tmp_path / "fld.csv"
        res = runner.invoke(main, ["pde-solve", "--b", "0.4", "--delta", "0.0",
                                   "--nr", "33", "--nphi", "33",
                                   "--sector-n", "4", "--state", "U2",
                                   "--pin-eps", "0.1", "--out", str(out)])
        assert res.exit_code == 0, res.output
        fld = load_field_csv(str(out))
        assert not fld.grid.periodic


class TestBifurcation:
    def test_scan_brackets_critical(self, runner, tmp_path):
        out = tmp_path / "bf.csv"
        b = 0.2
        d1 = delta_n(b, 1)
        res = runner.invoke(main, ["bifurcation", "--b", str(b),
                                   "--delta-min", str(d1 - 0.01),
                                   "--delta-max", str(d1 + 0.02),
                                   "--steps", "4", "--nr", "129",
                                   "--out", str(out)])
        assert res.exit_code == 0, res.output
        _, cols, data = read_table(str(out))
        assert cols == ["x", "y", "k"]
        assert data[0, 1] < 1e-6
        assert data[-1, 1] > 0.05


class TestLdgCommands:
    def test_profile_values(self, runner, tmp_path):
        out = tmp_path / "lp.csv"
        res = runner.invoke(main, ["ldg-profile", "--b", "0.5", "--t", "0",
                                   "--n-nodes", "201", "--out", str(out)])
        assert res.exit_code == 0, res.output
        comment, cols, data = read_table(str(out))
        assert cols == ["r", "value"]
        assert abs(data[0, 1] - 1 / math.sqrt(2)) < 1e-12
        assert "energy=" in comment

    def test_stability_table(self, runner, tmp_path):
        out = tmp_path / "ls.csv"
        res = runner.invoke(main, ["ldg-stability", "--b", "0.5", "--t", "40",
                                   "--n", "0,1,2", "--n-nodes", "201",
                                   "--out", str(out)])
        assert res.exit_code == 0, res.output
        _, cols, data = read_table(str(out))
        assert cols == ["n", "min_eig"]
        assert np.all(data[:, 1] > 0)

    def test_solver_failure_exit_code(self, runner, tmp_path):
        # the divided-difference noise floor defeats the residual tolerance
        # on an absurdly fine grid: reported as a solver failure
        res = runner.invoke(main, ["ldg-profile", "--b", "0.5", "--t", "0",
                                   "--n-nodes", "20001",
                                   "--out", str(tmp_path / "x.csv")])
        assert res.exit_code == 3


class TestDeterminism:
    def test_solver_backed_output_is_reproducible(self, runner, tmp_path):
        b = 0.2
        d1 = delta_n(b, 1)
        blobs = []
        for name in ("r1.csv", "r2.csv"):
            out = tmp_path / name
            res = runner.invoke(main, ["bifurcation", "--b", str(b),
                                       "--delta-min", str(d1 + 0.005),
                                       "--delta-max", str(d1 + 0.02),
                                       "--steps", "2", "--nr", "97",
                                       "--out", str(out)])
            assert res.exit_code == 0, res.output
            blobs.append(out.read_bytes())
        assert blobs[0] == blobs[1]

    def test_weak_anchoring_annulus_solve(self, runner, tmp_path):
        out = tmp_path / "fld.csv"
        res = runner.invoke(main, ["pde-solve", "--b", "0.3", "--delta", "0.5",
                                   "--nr", "24", "--nphi", "20",
                                   "--alpha", "0.7", "--out", str(out)])
        assert res.exit_code == 0, res.output
        fld = load_field_csv(str(out))
        _, pp = fld.grid.mesh()
        assert np.array_equal(fld.theta, pp + 0.5 * math.pi)

    def test_bad_order_list_is_config_error(self, runner, tmp_path):
        res = runner.invoke(main, ["stability-weak", "--b", "0.5",
                                   "--k", "0,x", "--out-prefix",
                                   str(tmp_path / "sw")])
        assert res.exit_code == 2


class TestConfigHandling:
    def test_config_supplies_defaults_flags_override(self, runner, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"schema_version": 1, "b_min": 0.2,
                                   "b_max": 0.8, "steps": 5}))
        out = tmp_path / "ss.csv"
        res = runner.invoke(main, ["stability-strong", "--config", str(cfg),
                                   "--steps", "7", "--out", str(out)])
        assert res.exit_code == 0, res.output
        _, _, data = read_table(str(out))
        assert data.shape[0] == 7           # flag wins
        assert data[0, 0] == 0.2            # config wins over default

    def test_bad_schema_version(self, runner, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"schema_version": 99}))
        res = runner.invoke(main, ["stability-strong", "--config", str(cfg),
                                   "--out", str(tmp_path / "x.csv")])
        assert res.exit_code == 2

    def test_json_format(self, runner, tmp_path):
        out = tmp_path / "ss.json"
        res = runner.invoke(main, ["stability-strong", "--steps", "5",
                                   "--format", "json", "--out", str(out)])
        assert res.exit_code == 0
        payload = json.loads(out.read_text())
        assert payload["schema_version"] == 1
        assert payload["columns"] == ["b", "delta1"]
        assert len(payload["rows"]) == 5


def test_fmt17_roundtrips_doubles():
    rng = np.random.default_rng(1)
    for x in rng.standard_normal(200) * 10.0 ** rng.integers(-12, 12, 200):
        assert float(fmt17(float(x))) == float(x)
