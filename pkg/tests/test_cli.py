from __future__ import annotations

import csv
import io
import json
import math

import pytest

from wigner_ldp import __version__
from wigner_ldp.cli import EXIT_CONFIG, EXIT_NUMERICS, EXIT_REGIME, main
from wigner_ldp.laws import classify, law_from_spec, LawClass, tail_constants


def _unclassified_spec() -> str:
    # two far-apart atom pairs whose psi bumps have nearly equal height
    w2, a2, w3, a3 = 0.02, 3.0, 1e-6, 5.3
    w1 = 1.0 - w2 - w3
    a1 = math.sqrt((1.0 - w2 * a2 * a2 - w3 * a3 * a3) / w1)
    return f"rademacher_mixture:weights={w1!r}/{w2!r}/{w3!r},atoms={a1!r}/{a2!r}/{a3!r}"


def _read(path):
    text = path.read_text()
    lines = text.splitlines()
    assert lines[0].startswith("# ")
    meta = json.loads(lines[0][2:])
    body = [l for l in lines[1:] if not l.startswith("#")]
    rows = list(csv.DictReader(io.StringIO("\n".join(body))))
    return meta, rows


def test_unclassified_fixture():
    assert classify(law_from_spec(_unclassified_spec())).tag is LawClass.UNCLASSIFIED


class TestIgoe:
    def test_rows(self, tmp_path):
        out = tmp_path / "igoe.csv"
        assert main(["igoe", "--xmin", "2", "--xmax", "4", "--steps", "3", "--out", str(out)]) == 0
        meta, rows = _read(out)
        assert meta["version"] == __version__
        assert meta["command"] == "igoe"
        xs = [float(r["x"]) for r in rows]
        assert xs == [2.0, 3.0, 4.0]
        vals = [float(r["I_GOE"]) for r in rows]
        assert vals[0] == 0.0
        assert vals[1] == pytest.approx(0.71462, abs=1e-5)
        r = math.sqrt(12.0)
        assert vals[2] == pytest.approx(4 * r / 4 - math.log((4 + r) / 2), abs=1e-12)
        for row in rows:
            assert float(row["I_GOE_quadrature"]) == pytest.approx(float(row["I_GOE"]), abs=1e-8)

    def test_deterministic(self, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        args = ["igoe", "--xmin", "2", "--xmax", "5", "--steps", "7"]
        main(args + ["--out", str(a)])
        main(args + ["--out", str(b)])
        assert a.read_bytes() == b.read_bytes()

    def test_json_format(self, tmp_path):
        out = tmp_path / "igoe.json"
        main(["igoe", "--xmin", "2", "--xmax", "3", "--steps", "2", "--format", "json", "--out", str(out)])
        doc = json.loads(out.read_text())
        assert doc["meta"]["command"] == "igoe"
        assert len(doc["rows"]) == 2

    def test_stdout(self, capsys):
        assert main(["igoe", "--xmin", "2", "--xmax", "3", "--steps", "2"]) == 0
        assert capsys.readouterr().out.startswith("# {")


class TestFcurve:
    def test_small_theta(self, tmp_path):
        out = tmp_path / "f.csv"
        rc = main(["fcurve", "--law", "sparse_gaussian:p=0.5", "--theta-min", "0.1", "--theta-max", "0.4",
                   "--steps", "4", "--out", str(out)])
        assert rc == 0
        meta, rows = _read(out)
        assert meta["config"]["law"] == {"kind": "sparse_gaussian", "p": 0.5}
        for r in rows:
            th = float(r["theta"])
            assert float(r["F"]) == pytest.approx(th * th, abs=1e-9)
            assert r["regime"] == "SmallTheta"
            assert r["validity"] == "true"

    def test_compact(self, tmp_path):
        out = tmp_path / "f.csv"
        main(["fcurve", "--law", "three_point:p=0.2", "--theta-min", "3", "--theta-max", "4", "--steps", "2",
              "--out", str(out)])
        _, rows = _read(out)
        assert all(r["regime"] == "CompactExplicit" for r in rows)
        assert float(rows[0]["alpha_opt"]) > 0.5


class TestRate:
    def test_gaussian(self, tmp_path):
        out = tmp_path / "r.csv"
        main(["rate", "--law", "gaussian", "--xmin", "1.5", "--xmax", "3", "--steps", "4", "--emit-theta",
              "--out", str(out)])
        _, rows = _read(out)
        assert rows[0]["I"] == "inf"
        assert float(rows[-1]["I"]) == pytest.approx(0.71462, abs=1e-5)
        assert "theta_star" in rows[0]

    def test_without_theta_column(self, tmp_path):
        out = tmp_path / "r.csv"
        main(["rate", "--law", "gaussian", "--xmin", "2", "--xmax", "3", "--steps", "2", "--out", str(out)])
        _, rows = _read(out)
        assert "theta_star" not in rows[0]

    def test_unclassified_exit(self, tmp_path):
        args = ["rate", "--law", _unclassified_spec(), "--xmin", "2", "--xmax", "3", "--steps", "2",
                "--out", str(tmp_path / "r.csv")]
        assert main(args) == EXIT_REGIME
        assert main(args + ["--allow-upper-bound"]) == 0


class TestErrors:
    def test_bad_law(self, tmp_path):
        assert main(["fcurve", "--law", "nonsense:p=1", "--out", str(tmp_path / "x.csv")]) == EXIT_CONFIG

    def test_bad_param(self, tmp_path):
        assert main(["fcurve", "--law", "sparse_gaussian:p=2", "--out", str(tmp_path / "x.csv")]) == EXIT_CONFIG

    def test_bad_grid(self, tmp_path):
        assert main(["igoe", "--xmin", "3", "--xmax", "2", "--steps", "3"]) == EXIT_CONFIG

    def test_argparse_error(self):
        with pytest.raises(SystemExit) as exc:
            main(["igoe", "--steps", "many"])
        assert exc.value.code == EXIT_CONFIG

    def test_tilt_degenerate(self, tmp_path):
        out = tmp_path / "t.csv"
        rc = main(["tilt", "--law", "gaussian", "--N-list", "20", "--x", "9", "--theta", "1", "--samples", "10",
                   "--seed", "1", "--out", str(out)])
        assert rc == EXIT_NUMERICS
        _, rows = _read(out)
        assert rows[0]["status"] == "degenerate"


class TestLaws:
    def test_inspect_round_trip(self, tmp_path):
        spec_path = tmp_path / "law.json"
        out = tmp_path / "inspect.json"
        rc = main(["laws", "inspect", "--law", "rademacher_mixture:weights=0.05/0.95,atoms=3/0.7608859102526822",
                   "--emit-spec", str(spec_path), "--out", str(out)])
        assert rc == 0
        law = law_from_spec(str(spec_path))
        again = law_from_spec(json.loads(spec_path.read_text()))
        assert law == again
        info = json.loads(out.read_text())
        assert info["class"] == "CompactCase"
        assert info["A"] == pytest.approx(tail_constants(law).A, abs=1e-12)
        assert info["B"] == pytest.approx(tail_constants(law).B, abs=1e-12)

    def test_alias(self, capsys):
        assert main(["laws-inspect", "--law", "gaussian"]) == 0
        info = json.loads(capsys.readouterr().out)
        assert info["class"] == "SharpSubGaussian"

    def test_config_file(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"law": {"kind": "sparse_gaussian", "p": 0.5}, "theta_min": 0.2,
                                   "theta_max": 0.3, "steps": 2}))
        out = tmp_path / "f.csv"
        assert main(["fcurve", "--config", str(cfg), "--out", str(out)]) == 0
        _, rows = _read(out)
        assert [float(r["theta"]) for r in rows] == [0.2, 0.3]


class TestSimulate:
    def test_seed_behaviour(self, tmp_path):
        base = ["simulate", "--law", "rademacher", "--N", "40", "--samples", "3"]
        a, b, c = (tmp_path / n for n in ("a.csv", "b.csv", "c.csv"))
        main(base + ["--seed", "1", "--out", str(a)])
        main(base + ["--seed", "1", "--out", str(b)])
        main(base + ["--seed", "2", "--out", str(c)])
        assert a.read_bytes() == b.read_bytes()
        assert a.read_bytes() != c.read_bytes()
        meta, rows = _read(a)
        assert meta["seed"] == 1
        assert len(rows) == 3
        assert set(rows[0]) == {"sample", "lambda_max", "ks", "overlap_sq"}
        summary = json.loads((tmp_path / "a.csv.summary.json").read_text())
        assert summary["n_samples"] == 3

    def test_tilted_full_spectrum(self, tmp_path):
        out = tmp_path / "s.csv"
        main(["simulate", "--law", "gaussian", "--N", "60", "--samples", "2", "--seed", "3", "--tilt-theta", "1",
              "--tilt-dir", "uniform", "--full-spectrum", "--out", str(out)])
        _, rows = _read(out)
        assert float(rows[0]["ks"]) < 0.5
        assert 0.0 <= float(rows[0]["overlap_sq"]) <= 1.0

    def test_localized_direction(self, tmp_path):
        out = tmp_path / "s.csv"
        assert main(["simulate", "--law", "three_point:p=0.2", "--N", "64", "--samples", "2", "--seed", "3",
                     "--tilt-theta", "1.5", "--tilt-dir", "loc:0.5,1.0", "--out", str(out)]) == 0

    def test_bad_direction(self, tmp_path):
        assert main(["simulate", "--law", "gaussian", "--N", "10", "--samples", "1", "--tilt-theta", "1",
                     "--tilt-dir", "sideways", "--out", str(tmp_path / "x.csv")]) == EXIT_CONFIG


class TestLocalizeAndTilt:
    def test_localize(self, tmp_path):
        out = tmp_path / "l.csv"
        assert main(["localize", "--law", "gaussian", "--N", "64", "--samples", "2", "--seed", "4",
                     "--epsilon", "0.2", "--r2", "1.0", "--out", str(out)]) == 0
        _, rows = _read(out)
        assert len(rows) == 2
        assert float(rows[0]["bucket_mass"]) + float(rows[0]["small_mass"]) <= 1 + 1e-9

    def test_tilt_ok(self, tmp_path):
        out = tmp_path / "t.csv"
        rc = main(["tilt", "--law", "gaussian", "--N-list", "10", "--x", "2.2", "--theta", "0.3", "--samples", "600",
                   "--seed", "3", "--event", "upper", "--out", str(out)])
        assert rc == 0
        _, rows = _read(out)
        assert rows[0]["status"] == "ok"
        assert float(rows[0]["log_p_per_N"]) > 0
