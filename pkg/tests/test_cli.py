"""Command-line interface: exit codes, output formats, determinism."""

import json

import pytest

from eiskit.cli import dispatch
from eiskit.uniqueness import AffineMap, affine_map_to_json


def run(capsys, *argv):
    code = dispatch(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestRho:
    def test_borel_gl3(self, capsys):
        code, out, _ = run(capsys, "rho", "--partition", "1,1,1",
                           "--kind", "borel")
        assert code == 0
        assert out.strip() == "[1, 0, -1]"

    def test_fractions_printed_exactly(self, capsys):
        code, out, _ = run(capsys, "rho", "--partition", "1,1",
                           "--kind", "borel")
        assert code == 0
        assert out.strip() == "[1/2, -1/2]"

    def test_bad_partition_exits_2(self, capsys):
        code, _, err = run(capsys, "rho", "--partition", "1,x")
        assert code == 2
        assert err.strip().startswith("error:")
        assert "\n" not in err.strip()


class TestDivisorSum:
    def test_m_one_prints_1(self, capsys):
        code, out, _ = run(capsys, "divisor-sum", "--partition", "1,1",
                           "--s", "1.5,-1.5", "--m", "1")
        assert code == 0
        assert out.strip() == "1"

    def test_gl2_divisor_value(self, capsys):
        # borel GL(2): m^{s2} sigma_{s1 - s2}(m); at s = (1, -1), m = 6:
        # 6^{-1} * sigma_2(6) = 50/6
        code, out, _ = run(capsys, "divisor-sum", "--partition", "1,1",
                           "--s", "1,-1", "--m", "6")
        assert code == 0
        assert complex(out.strip()).real == pytest.approx(50 / 6, rel=1e-15)

    def test_deterministic(self, capsys):
        args = ("divisor-sum", "--partition", "1,2",
                "--forms", "const,mock:3", "--s", "0.8", "--m", "12")
        _, out1, _ = run(capsys, *args)
        _, out2, _ = run(capsys, *args)
        assert out1 == out2


class TestCheckFE:
    def test_symbolic_pass_exits_0(self, capsys):
        code, out, _ = run(capsys, "check-fe", "--partition", "1,1,1",
                           "--forms", "const,const,const",
                           "--s", "0.4,0.1,-0.5", "--sigma", "2,1,3")
        assert code == 0
        doc = json.loads(out)
        assert doc["schema"] == 1
        assert doc["passed"] is True

    def test_numeric_mode(self, capsys):
        code, out, _ = run(capsys, "check-fe", "--partition", "1,1",
                           "--forms", "const,const", "--s", "1.5,-1.5",
                           "--sigma", "2,1", "--mode", "numeric")
        assert code == 0
        doc = json.loads(out)
        assert doc["passed"] is True
        assert doc["rel_residual"] <= 1e-6

    def test_bad_sigma_exits_2(self, capsys):
        code, _, err = run(capsys, "check-fe", "--partition", "1,1",
                           "--forms", "const,const", "--s", "1.5,-1.5",
                           "--sigma", "1,1")
        assert code == 2
        assert "permutation" in err


class TestOutputs:
    def test_json_report_file(self, capsys, tmp_path):
        out_file = tmp_path / "report.json"
        code, out, _ = run(capsys, "params", "--partition", "1,1",
                           "--forms", "const,const", "--s", "1.5,-1.5",
                           "--output", str(out_file))
        assert code == 0
        doc = json.loads(out_file.read_text())
        assert doc["schema"] == 1
        assert doc["alpha"][0] == {"im": 0.0, "re": 1.5}
        assert json.loads(out) == doc

    def test_csv_report_file(self, capsys, tmp_path):
        out_file = tmp_path / "report.csv"
        code, _, _ = run(capsys, "params", "--partition", "1,1",
                         "--forms", "const,const", "--s", "1.5,-1.5",
                         "--output", str(out_file), "--format", "csv")
        assert code == 0
        lines = out_file.read_text().strip().splitlines()
        assert lines[0] == "index,re,im"
        assert len(lines) == 3
        assert lines[1].split(",")[1] == "1.5"

    def test_eval_report(self, capsys):
        code, out, _ = run(capsys, "eval", "--partition", "1,1",
                           "--s", "1.5,-1.5", "--height", "50")
        assert code == 0
        doc = json.loads(out)
        assert doc["command"] == "eval"
        assert doc["value"]["re"] == pytest.approx(2.784, abs=2e-3)
        assert doc["tail_bound"] > 0

    def test_extract_matches_eval_pipeline(self, capsys):
        code, out, _ = run(capsys, "extract", "--partition", "1,1",
                           "--s", "1.5,-1.5", "--m", "1", "--height", "100",
                           "--nodes", "32")
        assert code == 0
        doc = json.loads(out)
        assert doc["value"]["re"] == pytest.approx(0.019739, rel=1e-3)


class TestUniqueness:
    def test_accept_exits_0(self, capsys, tmp_path):
        map_file = tmp_path / "mu.json"
        map_file.write_text(affine_map_to_json(
            AffineMap.permutation((1, 0, 2))))
        code, out, _ = run(capsys, "uniqueness", "--partition", "1,1,1",
                           "--map", str(map_file))
        assert code == 0
        doc = json.loads(out)
        assert doc["accepted"] is True
        assert doc["permutation"] == [1, 0, 2]

    def test_reject_exits_1(self, capsys, tmp_path):
        map_file = tmp_path / "mu.json"
        mu = AffineMap.permutation((0, 1, 2), shift=("1/8", 0, 0))
        map_file.write_text(affine_map_to_json(mu))
        code, out, _ = run(capsys, "uniqueness", "--partition", "1,1,1",
                           "--map", str(map_file))
        assert code == 1
        assert json.loads(out)["accepted"] is False

    def test_missing_map_exits_2(self, capsys, tmp_path):
        code, _, err = run(capsys, "uniqueness", "--partition", "1,1,1",
                           "--map", str(tmp_path / "absent.json"))
        assert code == 2
        assert "not found" in err

    def test_falsify(self, capsys):
        code, out, _ = run(capsys, "falsify", "--partition", "1,1,1",
                           "--trials", "10", "--seed", "7")
        assert code == 0
        doc = json.loads(out)
        assert doc["rejections"] == 10
        assert doc["all_rejected"] is True


class TestSelftest:
    def test_selftest_passes(self, capsys):
        code, out, _ = run(capsys, "selftest")
        assert code == 0
        doc = json.loads(out)
        assert doc["passed"] is True
        assert all(c["passed"] for c in doc["checks"])
