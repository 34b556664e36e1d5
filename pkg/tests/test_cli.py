import csv
import io
import json

import pytest

from ehrelay import cli
from ehrelay.cli import ConfigError, parse_grid, run_config_from_dict


def run(args, capsys):
    code = cli.main(args)
    out = capsys.readouterr()
    return code, out.out, out.err


class TestConfig:
    def test_defaults(self):
        cfg = run_config_from_dict({})
        assert cfg.system.p1 == 1.0 and cfg.topology.d_sr == 0.5
        assert cfg.protocols == ["ts", "ps"]

    def test_ps_db(self):
        cfg = run_config_from_dict({"ps_db": 10})
        assert cfg.system.p1 == pytest.approx(10.0) and cfg.system.p2 == pytest.approx(10.0)

    def test_eta_message(self):
        with pytest.raises(ConfigError, match="0 < η ≤ 1"):
            run_config_from_dict({"eta": 1.5})

    @pytest.mark.parametrize("raw", [{"bogus": 1}, {"protocol": "af"}, {"d_sr": 5.0},
                                     {"n_samples": 0}, {"verify_grid": [1.0]}, {"ps_db": 0, "p1": 2}])
    def test_rejections(self, raw):
        with pytest.raises(ConfigError):
            run_config_from_dict(raw)

    def test_grid_parse(self):
        assert parse_grid("0:30:5") == [0, 5, 10, 15, 20, 25, 30]
        assert parse_grid("0.3:0.8:0.1") == [0.3, 0.4, 0.5, 0.6, 0.7, 0.8]
        with pytest.raises(ConfigError):
            parse_grid("1:0:1")


class TestExitCodes:
    def test_validation(self, tmp_path, capsys):
        path = tmp_path / "bad.json"
        path.write_text('{"eta": 1.5}')
        code, _, err = run(["verify", "--config", str(path)], capsys)
        assert code == cli.EXIT_INVALID
        assert "0 < η ≤ 1" in err

    def test_parse_error_location(self, tmp_path, capsys):
        path = tmp_path / "broken.json"
        path.write_text('{"eta": 1,\n "m": }')
        code, _, err = run(["optimize", "--config", str(path)], capsys)
        assert code == cli.EXIT_INVALID
        assert "line 2" in err

    def test_io(self, tmp_path, capsys):
        code, _, _ = run(["optimize", "--protocol", "ts", "--out", str(tmp_path / "missing" / "x.csv")], capsys)
        assert code == cli.EXIT_IO

    def test_disagreement(self, capsys, monkeypatch):
        monkeypatch.setattr(cli, "MC_SIGMAS", 0.0)
        code, _, _ = run(["verify", "--samples", "1000", "--protocol", "ps"], capsys)
        assert code == cli.EXIT_DISAGREE


class TestVerify:
    def test_default_grid_agrees(self, capsys):
        code, out, _ = run(["verify", "--samples", "1000000", "--seed", "7"], capsys)
        rows = list(csv.DictReader(io.StringIO(out)))
        assert code == 0
        assert len(rows) == 18
        assert all(r["agree"] == "true" for r in rows)
        assert list(rows[0]) == ["protocol", "parameter", "closed_form", "quadrature", "monte_carlo", "mc_stderr", "agree"]

    def test_zero_parameter(self, tmp_path, capsys):
        path = tmp_path / "c.json"
        path.write_text(json.dumps({"verify_grid": [0.0, 0.5], "n_samples": 200000}))
        code, out, _ = run(["verify", "--config", str(path), "--format", "json"], capsys)
        data = json.loads(out)
        assert code == 0
        assert data["parameter"][0] == 0.0
        assert data["closed_form"][0] == data["quadrature"][0]
        assert all(data["agree"])


class TestSweep:
    def test_power_rows(self, capsys):
        code, out, _ = run(["sweep", "--axis", "power", "--grid", "0:30:5"], capsys)
        rows = list(csv.reader(io.StringIO(out)))
        assert code == 0
        assert rows[0] == ["axis", "pout_ts", "pout_ps", "pout_baseline", "rho_opt", "alpha_opt"]
        assert len(rows) == 8
        ts = [float(r[1]) for r in rows[1:]]
        assert ts == sorted(ts, reverse=True)

    def test_null_rows(self, capsys):
        code, out, _ = run(["sweep", "--axis", "distance", "--grid", "0.5:2.5:1"], capsys)
        rows = list(csv.reader(io.StringIO(out)))
        assert code == 0
        assert rows[-1] == ["2.5", "", "", "", "", ""]

    def test_csv_json_same_numbers(self, tmp_path, capsys):
        csv_path, json_path = tmp_path / "s.csv", tmp_path / "s.json"
        base = ["sweep", "--axis", "distance", "--grid", "0.3:0.8:0.1"]
        assert cli.main(base + ["--out", str(csv_path)]) == 0
        assert cli.main(base + ["--out", str(json_path), "--format", "json"]) == 0
        rows = list(csv.DictReader(csv_path.open()))
        data = json.loads(json_path.read_text())
        for key in rows[0]:
            assert [float(r[key]) for r in rows] == data[key]

    def test_byte_identical(self, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        assert cli.main(["sweep", "--axis", "power", "--grid", "0:10:5", "--out", str(a)]) == 0
        assert cli.main(["sweep", "--axis", "power", "--grid", "0:10:5", "--out", str(b)]) == 0
        assert a.read_bytes() == b.read_bytes()


class TestOptimize:
    def test_both(self, capsys):
        code, out, _ = run(["optimize", "--format", "json"], capsys)
        data = json.loads(out)
        assert code == 0
        assert data["protocol"] == ["ts", "ps"]
        assert data["pout_star"][1] <= data["pout_star"][0]
        assert all(0 < p < 1 for p in data["param_star"])

    def test_single_protocol(self, capsys):
        code, out, _ = run(["optimize", "--protocol", "ts"], capsys)
        assert code == 0
        assert len(out.strip().splitlines()) == 2

    def test_golden_matches_grid(self, capsys):
        _, grid, _ = run(["optimize", "--format", "json"], capsys)
        _, golden, _ = run(["optimize", "--format", "json", "--method", "golden"], capsys)
        for g, h in zip(json.loads(grid)["pout_star"], json.loads(golden)["pout_star"]):
            assert abs(g - h) <= 1e-4 * g
