import json
import math
import subprocess
import sys

import numpy as np
import pytest

from _gen import random_spd
from spdkit.abld import ab_logdet
from spdkit.cli import main
from spdkit.io import ResultRecord, read_matrix_array, write_matrix


@pytest.fixture
def files(tmp_path):
    def make(name, a):
        path = tmp_path / name
        write_matrix(path, np.atleast_2d(a))
        return str(path)

    return make


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def values(out):
    return dict(line.split(" ", 1) for line in out.strip().splitlines())


class TestDiv:
    def test_scalar(self, capsys, files):
        code, out, _ = run(capsys, "div", files("p.csv", [[2.0]]), files("q.csv", [[1.0]]), "--alpha", 1, "--beta", 1)
        assert code == 0
        assert float(values(out)["value"]) == pytest.approx(math.log(1.25), abs=1e-12)
        assert values(out)["value"] == "0.223143551314"
        assert values(out)["regime"] == "generic"

    def test_named_airm_equal(self, capsys, files, rng):
        a = random_spd(rng, 3)
        code, out, _ = run(capsys, "div", "--named", "airm", files("p.csv", a), files("q.csv", a))
        assert code == 0 and abs(float(values(out)["value"])) < 1e-7

    def test_named_with_param(self, capsys, files):
        code, out, _ = run(capsys, "div", "--named", "alpha_logdet", "--param", 0.5,
                           files("p.csv", [[4.0]]), files("q.csv", [[1.0]]))
        assert code == 0
        assert float(values(out)["value"]) == pytest.approx(4 * math.log(1.25), rel=1e-11)

    def test_infinite(self, capsys, files):
        p, q = files("p.csv", [[0.2]]), files("q.csv", [[1.0]])
        code, out, _ = run(capsys, "div", p, q, "--alpha", 1, "--beta=-0.5")
        assert code == 3 and values(out)["value"] == "inf"
        code, out, _ = run(capsys, "div", p, q, "--alpha", 1, "--beta=-0.5", "--json")
        rec = ResultRecord.from_json(out)
        assert code == 3 and rec.value == math.inf and rec.finite is False

    def test_terms_and_json(self, capsys, files, rng):
        p, q = random_spd(rng, 3), random_spd(rng, 3)
        code, out, _ = run(capsys, "div", files("p.csv", p), files("q.csv", q), "--alpha", 0.5, "--beta", 2, "--terms", "--json")
        rec = ResultRecord.from_json(out)
        assert code == 0 and len(rec.terms) == 3
        assert rec.value == pytest.approx(ab_logdet(p, q, 0.5, 2).value, rel=1e-12)
        assert sum(rec.terms) == pytest.approx(rec.value, rel=1e-12)
        assert rec.params == {"alpha": 0.5, "beta": 2.0, "sym": None}

    def test_sym(self, capsys, files):
        code, out, _ = run(capsys, "div", files("p.csv", [[4.0]]), files("q.csv", [[1.0]]),
                           "--alpha", 1, "--beta", 0, "--sym", "type1")
        assert code == 0 and float(values(out)["value"]) == pytest.approx(1.125, rel=1e-11)

    def test_missing_file(self, capsys, tmp_path, files):
        code, _, err = run(capsys, "div", str(tmp_path / "nope.csv"), files("q.csv", [[1.0]]), "--alpha", 1, "--beta", 1)
        assert code == 2 and "invalid input" in err

    def test_bad_matrix(self, capsys, files, tmp_path):
        bad = tmp_path / "bad.csv"
        bad.write_text("1,2\n3,x\n")
        code, _, _ = run(capsys, "div", str(bad), str(bad), "--alpha", 1, "--beta", 1)
        assert code == 2
        code, _, _ = run(capsys, "div", files("p.csv", [[1.0, 2.0], [2.0, 1.0]]), files("q.csv", np.eye(2)),
                         "--alpha", 1, "--beta", 1)
        assert code == 2

    def test_dimension_mismatch(self, capsys, files):
        code, _, _ = run(capsys, "div", files("p.csv", np.eye(2)), files("q.csv", np.eye(3)), "--alpha", 1, "--beta", 1)
        assert code == 2

    def test_usage(self, capsys, files):
        p = files("p.csv", [[1.0]])
        code, _, _ = run(capsys, "div", p, p)
        assert code == 1
        with pytest.raises(SystemExit) as exc:
            main(["div", p, p, "--alpha", "abc"])
        assert exc.value.code == 1
        with pytest.raises(SystemExit) as exc:
            main([])
        assert exc.value.code == 1


class TestSweep:
    ARGS = ["--alpha-range=-1:1:5", "--beta-range=-1:2:4"]

    def test_grid(self, capsys, files, rng):
        p, q = random_spd(rng, 3, cond=3), random_spd(rng, 3, cond=3)
        code, out, _ = run(capsys, "sweep", files("p.csv", p), files("q.csv", q), *self.ARGS)
        lines = out.strip().splitlines()
        assert code == 0 and lines[0] == "alpha,beta,value,finite"
        rows = [line.split(",") for line in lines[1:]]
        assert len(rows) == 20
        assert [float(r[1]) for r in rows[:4]] == [-1.0, 0.0, 1.0, 2.0]
        assert [float(r[0]) for r in rows[::4]] == [-1.0, -0.5, 0.0, 0.5, 1.0]
        for a, b, v, finite in rows:
            d = ab_logdet(p, q, float(a), float(b))
            assert finite == str(d.finite).lower()
            if d.finite:
                assert float(v) == pytest.approx(d.value, rel=1e-10, abs=1e-12)
            else:
                assert v == "inf"

    def test_single_cell_matches_div(self, capsys, files):
        p, q = files("p.csv", [[2.0]]), files("q.csv", [[1.0]])
        _, out, _ = run(capsys, "sweep", p, q, "--alpha-range", "1:1:1", "--beta-range", "1:1:1")
        assert out.strip().splitlines()[1] == "1,1,0.223143551314,true"
        _, out, _ = run(capsys, "sweep", p, q, "--alpha-range", "0:0:1", "--beta-range", "0:0:1")
        assert float(out.strip().splitlines()[1].split(",")[2]) == pytest.approx(0.5 * math.log(2) ** 2, rel=1e-11)

    def test_deterministic(self, files, tmp_path, rng, monkeypatch):
        p, q = files("p.csv", random_spd(rng, 5)), files("q.csv", random_spd(rng, 5))
        outs = []
        for threads in ("1", "4"):
            monkeypatch.setenv("SPDKIT_THREADS", threads)
            out = tmp_path / f"grid{threads}.csv"
            assert main(["sweep", p, q, "--alpha-range=-2:2:21", "--beta-range=-2:2:21", "-o", str(out)]) == 0
            outs.append(out.read_bytes())
        assert outs[0] == outs[1]

    def test_shrink_and_sym(self, capsys, files):
        p, q = files("p.csv", np.diag([4.0, 0.5])), files("q.csv", np.eye(2))
        _, out, _ = run(capsys, "sweep", p, q, "--alpha-range", "0:0:1", "--beta-range", "0:0:1", "--shrink", "truncate:1")
        assert float(out.strip().splitlines()[1].split(",")[2]) == pytest.approx(0.5 * math.log(4) ** 2, rel=1e-11)
        _, out, _ = run(capsys, "sweep", p, q, "--alpha-range", "1:1:1", "--beta-range", "0:0:1", "--sym", "type1")
        assert float(out.strip().splitlines()[1].split(",")[2]) == pytest.approx(1.125 + 0.25, rel=1e-11)
        code, _, _ = run(capsys, "sweep", p, q, "--alpha-range", "1:1:1", "--beta-range", "0:0:1", "--shrink", "bogus")
        assert code == 2

    def test_bad_range(self, capsys, files):
        p = files("p.csv", [[1.0]])
        code, _, _ = run(capsys, "sweep", p, p, "--alpha-range", "2:1:3", "--beta-range", "0:0:1")
        assert code == 2
        with pytest.raises(SystemExit):
            main(["sweep", p, p, "--alpha-range", "1:2", "--beta-range", "0:0:1"])


class TestBounds:
    def test_values(self, capsys):
        code, out, _ = run(capsys, "bounds", "--alpha-range", "1:1:1", "--beta-range=-0.5:-0.5:1")
        assert code == 0
        assert out.strip().splitlines() == ["alpha,beta,kind,value", "1,-0.5,lower,0.25"]

    def test_grid(self, capsys):
        _, out, _ = run(capsys, "sweep", "--emit", "bounds", "--alpha-range=-1:1:3", "--beta-range=-1:1:3")
        rows = {tuple(map(float, r.split(",")[:2])): r.split(",")[2:] for r in out.strip().splitlines()[1:]}
        assert rows[(0.0, 0.0)] == ["undefined", ""]
        assert rows[(1.0, 1.0)] == ["none", ""]
        assert rows[(1.0, -1.0)][1] == f"{math.exp(-1):.12g}"


class TestGaussian:
    @pytest.fixture
    def models(self, tmp_path):
        p, q = tmp_path / "p.json", tmp_path / "q.json"
        p.write_text(json.dumps({"mean": [0.0], "cov": [[2.0]]}))
        q.write_text(json.dumps({"mean": [0.0], "cov": [[1.0]]}))
        return str(p), str(q)

    def test_kl(self, capsys, models):
        code, out, _ = run(capsys, "gaussian", *models, "--family", "kl")
        assert code == 0
        v = values(out)
        assert float(v["total"]) == pytest.approx(0.153426, abs=1e-6)
        assert float(v["mahalanobis_term"]) == 0.0

    def test_identical(self, capsys, models):
        for fam in ("kl", "bhatt", "cs"):
            _, out, _ = run(capsys, "gaussian", models[0], models[0], "--family", fam)
            assert abs(float(values(out)["total"])) < 1e-12

    def test_verify_quadrature(self, capsys, models):
        code, out, _ = run(capsys, "gaussian", *models, "--family", "gamma", "--alpha", 1, "--beta", 1, "--verify", "quadrature")
        v = values(out)
        assert code == 0 and float(v["difference"]) < 1e-4
        assert float(v["total"]) == pytest.approx(0.029446, abs=1e-6)

    def test_verify_mc_json(self, capsys, models):
        code, out, _ = run(capsys, "gaussian", *models, "--family", "bhatt", "--verify", "mc",
                           "--seed", 5, "--budget", 20000, "--json")
        rec = ResultRecord.from_json(out)
        assert code == 0 and rec.extra["seed"] == 5
        assert rec.extra["difference"] <= 4 * rec.extra["oracle_error"]

    def test_renyi_and_errors(self, capsys, models, tmp_path):
        code, out, _ = run(capsys, "gaussian", *models, "--family", "renyi", "--alpha", 0.5)
        assert code == 0 and float(values(out)["total"]) == pytest.approx(0.117783, abs=1e-6)
        assert run(capsys, "gaussian", *models, "--family", "renyi", "--alpha", 1.5)[0] == 2
        assert run(capsys, "gaussian", *models, "--family", "gamma")[0] == 1
        bad = tmp_path / "bad.json"
        bad.write_text('{"mean": [0, 0], "cov": [[1]]}')
        assert run(capsys, "gaussian", str(bad), models[1])[0] == 2

    def test_budget_exceeded(self, capsys, models):
        code, _, _ = run(capsys, "gaussian", *models, "--alpha", 1, "--beta", 1, "--verify", "mc", "--budget", 1)
        assert code == 4


class TestMultiway:
    @pytest.fixture
    def models(self, tmp_path, files):
        f = files("f.csv", np.diag([3.0, 1.0]))
        p = tmp_path / "p.json"
        q = tmp_path / "q.json"
        p.write_text(json.dumps({"sigma2": 1.0, "factors": [[[2.0, 0.0], [0.0, 0.5]], "f.csv"]}))
        q.write_text(json.dumps({"sigma2": 2.0, "factors": [[[1.0, 0.0], [0.0, 1.0]], [[1.0, 0.0], [0.0, 1.0]]]}))
        return str(p), str(q)

    def test_hilbert(self, capsys, models):
        code, out, _ = run(capsys, "multiway", *models, "--metric", "hilbert", "--check-expand")
        v = values(out)
        assert code == 0
        assert float(v["value"]) == pytest.approx(2.484907, abs=1e-6)
        assert float(v["difference"]) < 1e-8

    def test_stein_and_riemannian(self, capsys, models):
        code, out, _ = run(capsys, "multiway", *models, "--metric", "stein", "--check-expand")
        assert code == 0 and float(values(out)["difference"]) < 1e-8
        assert run(capsys, "multiway", *models, "--metric", "riemannian")[0] == 2
        code, out, _ = run(capsys, "multiway", *models, "--metric", "riemannian", "--normalize", "--check-expand")
        assert code == 0 and float(values(out)["difference"]) < 1e-8

    def test_identical(self, capsys, models):
        _, out, _ = run(capsys, "multiway", models[0], models[0])
        assert abs(float(values(out)["value"])) < 1e-12

    def test_shape_mismatch(self, capsys, models, tmp_path):
        r = tmp_path / "r.json"
        r.write_text(json.dumps({"sigma2": 1.0, "factors": [[[1.0]], [[1.0]]]}))
        assert run(capsys, "multiway", models[0], str(r))[0] == 2


class TestGram:
    def test_single(self, capsys, tmp_path):
        write_matrix(tmp_path / "a.csv", np.eye(2))
        code, out, err = run(capsys, "gram", tmp_path, "--alpha", 0.5, "--beta", 0.5, "--gamma", 1)
        assert code == 0 and out.strip() == "1.0" and "min_eigenvalue" in err

    def test_duplicates_and_output(self, capsys, tmp_path, rng):
        d = tmp_path / "mats"
        d.mkdir()
        a = random_spd(rng, 3)
        write_matrix(d / "a.csv", a)
        write_matrix(d / "b.csv", a)
        write_matrix(d / "c.csv", random_spd(rng, 3))
        out_file = tmp_path / "g.csv"
        code, _, err = run(capsys, "gram", d, "--alpha", 1, "--beta", 2, "--gamma", 0.5, "-o", out_file)
        g = read_matrix_array(out_file)
        assert code == 0 and g.shape == (3, 3)
        assert g[0, 1] == pytest.approx(1.0, abs=1e-9)
        np.testing.assert_array_equal(np.diag(g), 1.0)
        np.testing.assert_array_equal(g, g.T)
        assert np.all((g > 0) & (g <= 1))
        assert float(err.split()[1]) == pytest.approx(np.linalg.eigvalsh(g)[0], abs=1e-12)

    def test_empty_directory(self, capsys, tmp_path):
        assert run(capsys, "gram", tmp_path, "--alpha", 1, "--beta", 1, "--gamma", 1)[0] == 2

    def test_invalid_params(self, capsys, tmp_path):
        write_matrix(tmp_path / "a.csv", np.eye(2))
        assert run(capsys, "gram", tmp_path, "--alpha", 1, "--beta", -1, "--gamma", 1)[0] == 2


class TestIo:
    def test_round_trip_bit_identical(self, tmp_path, rng):
        a = random_spd(rng, 6, cond=1e6) * 1e-7
        write_matrix(tmp_path / "m.csv", a)
        np.testing.assert_array_equal(read_matrix_array(tmp_path / "m.csv"), a)

    def test_record_round_trip(self):
        rec = ResultRecord("abc", {"alpha": 1.0}, math.inf, False, terms=[0.5, math.inf], regime="generic",
                           timing=0.1, extra={"k": [1, 2]})
        again = ResultRecord.from_json(rec.to_json())
        assert again == rec
        assert "\n" not in rec.to_json()


def test_subprocess_exit_codes(tmp_path):
    write_matrix(tmp_path / "p.csv", [[0.2]])
    write_matrix(tmp_path / "q.csv", [[1.0]])
    exe = [sys.executable, "-m", "spdkit"]
    ok = subprocess.run(exe + ["div", tmp_path / "p.csv", tmp_path / "q.csv", "--alpha", "1", "--beta", "1"],
                        capture_output=True, text=True)
    assert ok.returncode == 0 and ok.stdout.startswith("value ")
    inf = subprocess.run(exe + ["div", tmp_path / "p.csv", tmp_path / "q.csv", "--alpha", "1", "--beta=-0.5"],
                         capture_output=True, text=True)
    assert inf.returncode == 3 and "value inf" in inf.stdout
    usage = subprocess.run(exe + ["div"], capture_output=True, text=True)
    assert usage.returncode == 1 and usage.stderr
    missing = subprocess.run(exe + ["div", tmp_path / "x.csv", tmp_path / "q.csv", "--alpha", "1", "--beta", "1"],
                             capture_output=True, text=True)
    assert missing.returncode == 2
