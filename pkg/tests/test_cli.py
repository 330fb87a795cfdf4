import json
import math

import numpy as np
import pytest

from holodual.cli import parse_orders, parse_point, run
from holodual.series import CoefficientSeries


@pytest.fixture
def one_json(tmp_path):
    p = tmp_path / "one.json"
    p.write_text(CoefficientSeries.monomial((0, 0)).to_json())
    return str(p)


@pytest.fixture
def empty_json(tmp_path):
    p = tmp_path / "empty.json"
    p.write_text('{"terms": []}')
    return str(p)


def out_json(capsys):
    return json.loads(capsys.readouterr().out)


class TestParsing:
    def test_point(self):
        np.testing.assert_array_equal(parse_point("0.5,0;0,-1"), [0.5, -1j])
        for bad in ("1,2", "1;2", "a,b;c,d", "1,2;3,4;5,6"):
            with pytest.raises(Exception):
                parse_point(bad)

    def test_orders(self):
        assert parse_orders("8") == (8, 8, 8, 8)
        assert parse_orders("4,5,6,7") == (4, 5, 6, 7)

    def test_usage_errors(self, one_json, capsys):
        assert run([]) == 2
        assert run(["bogus"]) == 2
        assert run(["norm", "--space", "a2-diamond", "--in", one_json, "--wat"]) == 2
        assert run(["transform", "--kind", "laplace", "--in", one_json, "--z", "1,2"]) == 2
        assert run(["transform", "--kind", "laplace", "--in", one_json]) == 2
        assert run(["kernel-sweep", "--domain", "diamond"]) == 2
        assert run(["kernel-sweep", "--count", "50"]) == 2
        assert run(["counterexample", "--which", "laplace", "--kmax", "100"]) == 2
        assert run(["verify", "--test", "nope"]) == 2
        assert run(["norm", "--space", "a2-diamond", "--in", "/nonexistent/x.json"]) == 2

    def test_help(self, capsys):
        assert run(["--help"]) == 0
        assert "kernel-sweep" in capsys.readouterr().out

    def test_malformed_series(self, tmp_path, capsys):
        p = tmp_path / "bad.json"
        p.write_text('{"terms": [\n  {"m": [0, 0], "re": 1,,}\n]}')
        assert run(["norm", "--space", "a2-diamond", "--in", str(p)]) == 2
        err = capsys.readouterr().err
        assert "line 2" in err and "column" in err


class TestCommands:
    def test_norm_empty_sentinel(self, empty_json, capsys):
        assert run(["norm", "--space", "a2-polydisc", "--in", empty_json]) == 0
        data = out_json(capsys)
        assert data["log_norm2"] == "-inf" and data["norm2"] == 0

    def test_norm_one(self, one_json, capsys):
        assert run(["norm", "--space", "a2-diamond", "--in", one_json]) == 0
        assert out_json(capsys)["norm2"] == pytest.approx(np.pi**2 / 6)

    def test_laplace_quad_one(self, one_json, capsys):
        assert run(["transform", "--kind", "laplace", "--path", "quad", "--domain", "diamond",
                    "--in", one_json, "--z", "0,0;0,0"]) == 0
        # measured diamond volume, see the calibration report
        assert out_json(capsys)["value"]["re"] == pytest.approx(np.pi**2 / 6, rel=1e-12)

    def test_paths_agree(self, tmp_path, capsys):
        p = tmp_path / "s.json"
        p.write_text(CoefficientSeries({(1, 0): 1.0, (1, 1): 0.5j}).to_json())
        vals = {}
        for path in ("coeff", "quad"):
            assert run(["transform", "--kind", "fantappie", "--path", path, "--in", str(p), "--z", "0.2,0.1;-0.3,0"]) == 0
            v = out_json(capsys)["value"]
            vals[path] = complex(v["re"], v["im"])
        assert abs(vals["coeff"] - vals["quad"]) <= 1e-10

    def test_image_series(self, one_json, capsys):
        assert run(["transform", "--kind", "fantappie", "--path", "coeff", "--in", one_json]) == 0
        terms = out_json(capsys)["series"]["terms"]
        assert terms[0]["re"] == pytest.approx(1 / 3)

    def test_borel(self, one_json, capsys):
        assert run(["transform", "--kind", "borel", "--in", one_json, "--z", "0.5,0;0,0"]) == 0
        data = out_json(capsys)
        assert data["value"]["re"] == pytest.approx(2, abs=1e-10) and data["tail_bound"] <= 1e-10
        assert run(["transform", "--kind", "borel", "--in", one_json, "--z", "1,0;0,0"]) == 2

    def test_fantappie_outside_dual(self, one_json, capsys):
        assert run(["transform", "--kind", "fantappie", "--in", one_json, "--z", "2,0;0,0"]) == 2
        assert "dual complement" in capsys.readouterr().err

    def test_kernel_sweep_csv(self, capsys):
        assert run(["kernel-sweep", "--domain", "ellipsoid:1,0.7", "--count", "300", "--format", "csv"]) == 0
        assert capsys.readouterr().out.startswith("domain,which,statistic,value")

    def test_counterexample(self, tmp_path):
        out = tmp_path / "r.json"
        assert run(["counterexample", "--which", "fantappie", "--kmax", "100000", "--out", str(out)]) == 0
        data = json.loads(out.read_text())
        assert data["metrics"]["slope"] > 0 and data["status"] == "pass"

    def test_verify_exit_codes(self, tmp_path):
        out = tmp_path / "v.jsonl"
        assert run(["verify", "--test", "composition", "--test", "tmap_roundtrip_ball", "--out", str(out)]) == 0
        lines = out.read_text().splitlines()
        assert [json.loads(x)["test_id"] for x in lines] == ["composition", "tmap_roundtrip_ball"]
        # diamond volume against the stated pi^2/12 target fails
        assert run(["verify", "--test", "diamond_volume", "--out", str(out)]) == 1

    def test_verify_csv(self, capsys):
        assert run(["verify", "--test", "tmap_roundtrip_ellipsoid", "--format", "csv"]) == 0
        assert "tmap_roundtrip_ellipsoid" in capsys.readouterr().out


class TestDeterminism:
    @pytest.mark.parametrize("argv", [
        ["kernel-sweep", "--domain", "ball", "--count", "500", "--seed", "4"],
        ["verify", "--test", "change_of_variables_ball", "--mc-samples", "20000", "--seed", "9"],
        ["counterexample", "--which", "laplace", "--kmax", "10000"],
    ])
    def test_byte_identical(self, tmp_path, argv):
        a, b = tmp_path / "a", tmp_path / "b"
        run(argv + ["--out", str(a)])
        run(argv + ["--out", str(b)])
        assert a.read_bytes() == b.read_bytes() and len(a.read_bytes()) > 0

    def test_seed_changes_output(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        run(["kernel-sweep", "--count", "500", "--seed", "1", "--out", str(a)])
        run(["kernel-sweep", "--count", "500", "--seed", "2", "--out", str(b)])
        assert a.read_bytes() != b.read_bytes()
        assert math.isfinite(json.loads(a.read_text())["max_ratio"])
