import json
import math
import subprocess
import sys

import numpy as np
import pytest

from dualitylab import GridFunction2D, read_grid_csv, write_grid_csv
from dualitylab.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestTransform:
    def test_gauge_of_ray_to_stdout(self, capsys, tmp_path):
        spec = tmp_path / "f.json"
        spec.write_text('{"kind": "linear", "a": 2}')
        code, out, _ = run(capsys, "transform", "--op", "j", "--in", str(spec))
        assert code == 0
        assert json.loads(out) == {"kind": "indicator", "z": 0.5}

    def test_out_file(self, capsys, tmp_path):
        spec = tmp_path / "f.json"
        spec.write_text('{"kind": "indicator", "z": 2}')
        dest = tmp_path / "g.json"
        code, out, _ = run(
            capsys, "transform", "--op", "legendre", "--in", str(spec),
            "--out", str(dest),
        )
        assert code == 0 and out == ""
        assert json.loads(dest.read_text()) == {"kind": "linear", "a": 2}

    def test_grid_round(self, capsys, tmp_path):
        g = GridFunction2D.from_function(
            lambda x, y: (x * x + y * y) / 2, R=4.0, N=33
        )
        src, dst = tmp_path / "g.csv", tmp_path / "lg.csv"
        write_grid_csv(g, str(src))
        code, _, _ = run(
            capsys, "transform", "--op", "legendre", "--in", str(src),
            "--out", str(dst),
        )
        assert code == 0
        h = read_grid_csv(str(dst))
        assert np.abs(h.values - g.values).max() <= 2 * g.spec.step * 4.0

    def test_grid_requires_out(self, capsys, tmp_path):
        src = tmp_path / "g.csv"
        write_grid_csv(
            GridFunction2D.from_function(lambda x, y: x * x + y * y, R=1.0, N=5),
            str(src),
        )
        code, _, err = run(capsys, "transform", "--op", "a", "--in", str(src))
        assert code == 2 and "error:" in err

    def test_bad_op_is_usage_error(self, capsys, tmp_path):
        spec = tmp_path / "f.json"
        spec.write_text('{"kind": "linear", "a": 2}')
        code, _, _ = run(capsys, "transform", "--op", "polar", "--in", str(spec))
        assert code == 2

    def test_missing_grid_input_is_usage_error(self, capsys, tmp_path):
        # CSV inputs bypass _read_text, so OSError must still exit cleanly
        code, _, err = run(
            capsys, "transform", "--op", "legendre",
            "--in", str(tmp_path / "absent.csv"), "--out", str(tmp_path / "o.csv"),
        )
        assert code == 2 and "absent.csv" in err

    def test_unwritable_out_is_usage_error(self, capsys, tmp_path):
        spec = tmp_path / "f.json"
        spec.write_text('{"kind": "linear", "a": 2}')
        code, _, err = run(
            capsys, "transform", "--op", "j", "--in", str(spec),
            "--out", str(tmp_path / "no-such-dir" / "g.json"),
        )
        assert code == 2 and "error:" in err


class TestCheck:
    def test_order_certifies_identity(self, capsys, tmp_path):
        from dualitylab import CorpusTransform, geometric_corpus, transform_to_obj

        c = geometric_corpus()
        path = tmp_path / "t.json"
        path.write_text(json.dumps(transform_to_obj(CorpusTransform(c, c.elements))))
        code, out, _ = run(
            capsys, "check", "order", "--transform", str(path), "--ctilde", "1.5"
        )
        assert code == 0
        assert "identity" in out and "NOT" not in out

    def test_order_flags_sabotage(self, capsys, tmp_path):
        from dualitylab import CorpusTransform, geometric_corpus, transform_to_obj

        c = geometric_corpus()
        images = tuple(reversed(c.elements))
        path = tmp_path / "t.json"
        path.write_text(json.dumps(transform_to_obj(CorpusTransform(c, images))))
        code, out, _ = run(
            capsys, "check", "order", "--transform", str(path), "--ctilde", "1.5"
        )
        assert code == 1
        assert "NOT certified" in out

    def test_ptilde_pass(self, capsys, tmp_path):
        spec = tmp_path / "f.json"
        spec.write_text('{"kind": "indicator", "z": 1}')
        code, out, _ = run(
            capsys, "check", "ptilde", "--in", str(spec), "--ctilde", "1.5"
        )
        assert code == 0
        assert out == "relative-P̃: pass\n" or "pass" in out

    def test_ptilde_witness(self, capsys, tmp_path):
        spec = tmp_path / "f.json"
        spec.write_text('{"kind": "triangle", "z": 1, "a": 64}')
        code, out, _ = run(
            capsys, "check", "ptilde", "--in", str(spec), "--ctilde", "1.5"
        )
        assert code == 1
        assert '"kind"' in out  # both witness pieces are printed as specs

    def test_ctilde_must_exceed_one(self, capsys, tmp_path):
        spec = tmp_path / "f.json"
        spec.write_text('{"kind": "indicator", "z": 1}')
        code, _, err = run(
            capsys, "check", "ptilde", "--in", str(spec), "--ctilde", "1.0"
        )
        assert code == 2 and "error:" in err


class TestFuzz:
    def test_certified_run_with_artifacts(self, capsys, tmp_path):
        rep = tmp_path / "rep.json"
        plots = tmp_path / "plots"
        code, out, _ = run(
            capsys, "fuzz", "--base", "gauge", "--ctilde", "1.5", "--seed", "7",
            "--report", str(rep), "--emit-plots", str(plots),
        )
        assert code == 0
        obj = json.loads(rep.read_text())
        assert obj["certified"] and obj["classification"] == "gauge"
        assert abs(obj["gamma"] + 1.0) <= 0.05
        assert sorted(p.name for p in plots.iterdir()) == [
            "phi.csv", "phi.svg", "sandwich.csv", "sandwich.svg",
            "slope.csv", "slope.svg",
        ]

    def test_byte_identical_reruns(self, capsys, tmp_path):
        out1, out2 = tmp_path / "r1.json", tmp_path / "r2.json"
        for path in (out1, out2):
            code, _, _ = run(
                capsys, "fuzz", "--base", "identity", "--ctilde", "2.0",
                "--seed", "42", "--report", str(path),
            )
            assert code == 0
        assert out1.read_bytes() == out2.read_bytes()

    def test_env_tolerance_accepted(self, capsys, tmp_path, monkeypatch):
        monkeypatch.setenv("DUALITYLAB_TOL", "1e-9")
        code, _, _ = run(
            capsys, "fuzz", "--base", "identity", "--ctilde", "1.5", "--seed", "3"
        )
        assert code == 0

    def test_bad_env_tolerance(self, capsys, monkeypatch):
        monkeypatch.setenv("DUALITYLAB_TOL", "plenty")
        code, _, err = run(
            capsys, "fuzz", "--base", "identity", "--ctilde", "1.5", "--seed", "3"
        )
        assert code == 2 and "DUALITYLAB_TOL" in err


class TestHyersUlam:
    def make_samples(self, tmp_path, eps_field=None):
        import random

        rng = random.Random(17)
        xs = [0.5 * i for i in range(-20, 21)]
        samples = [[x, 3.0 * x + rng.uniform(-0.1, 0.1)] for x in xs]
        obj = {"samples": samples}
        if eps_field is not None:
            obj["eps"] = eps_field
        path = tmp_path / "samples.json"
        path.write_text(json.dumps(obj))
        return path

    def test_flag_eps(self, capsys, tmp_path):
        path = self.make_samples(tmp_path)
        out_path = tmp_path / "fit.json"
        code, out, _ = run(
            capsys, "hyers-ulam", "--in", str(path), "--eps", "0.3",
            "--out", str(out_path),
        )
        assert code == 0
        assert "sup |f - g|" in out
        fit = json.loads(out_path.read_text())
        assert fit["kind"] == "additive-approximation"
        assert fit["sup_error"] <= 0.3
        slopes = [g / x for x, g in fit["additive"] if abs(x) >= 2.0]
        assert all(abs(s - 3.0) <= 0.2 for s in slopes)

    def test_file_eps(self, capsys, tmp_path):
        path = self.make_samples(tmp_path, eps_field=0.3)
        code, _, _ = run(capsys, "hyers-ulam", "--in", str(path))
        assert code == 0

    def test_missing_eps(self, capsys, tmp_path, monkeypatch):
        monkeypatch.delenv("DUALITYLAB_TOL", raising=False)
        path = self.make_samples(tmp_path)
        code, _, err = run(capsys, "hyers-ulam", "--in", str(path))
        assert code == 2 and "eps" in err

    def test_violation_exit(self, capsys, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text(json.dumps({"samples": [[0, 0], [1, 1], [2, 30]]}))
        code, out, _ = run(capsys, "hyers-ulam", "--in", str(path), "--eps", "0.5")
        assert code == 1
        assert "additive hypothesis fails" in out


class TestReport:
    def test_rerender(self, capsys, tmp_path):
        rep = tmp_path / "rep.json"
        code, first, _ = run(
            capsys, "fuzz", "--base", "a", "--ctilde", "1.5", "--seed", "2",
            "--report", str(rep),
        )
        assert code == 0
        code, second, _ = run(capsys, "report", "--in", str(rep))
        assert code == 0
        assert second == first  # same text rendering

    def test_wrong_kind(self, capsys, tmp_path):
        path = tmp_path / "other.json"
        path.write_text('{"kind": "corpus"}')
        code, _, err = run(capsys, "report", "--in", str(path))
        assert code == 2 and "error:" in err


class TestEntryPoint:
    def test_module_invocation(self, tmp_path):
        spec = tmp_path / "f.json"
        spec.write_text('{"kind": "linear", "a": 2}')
        proc = subprocess.run(
            [sys.executable, "-m", "dualitylab.cli", "transform", "--op", "j",
             "--in", str(spec)],
            capture_output=True, text=True,
        )
        assert proc.returncode == 0
        assert json.loads(proc.stdout) == {"kind": "indicator", "z": 0.5}

    def test_missing_subcommand(self, capsys):
        code, _, _ = run(capsys)
        assert code == 2
