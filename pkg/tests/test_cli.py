import csv
import io
import json
from importlib import resources

import jsonschema
import numpy as np
import pytest

from filament_waves.cli import main
from filament_waves.field import Grid2D, read_coeffs_csv, restrict


def schema(name):
    return json.loads(resources.files("filament_waves").joinpath(f"schemas/{name}.schema.json").read_text())


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def csv_rows(text):
    lines = [l for l in text.splitlines() if not l.startswith("#")]
    return list(csv.DictReader(io.StringIO("\n".join(lines))))


@pytest.fixture(autouse=True)
def outdir(tmp_path, monkeypatch):
    monkeypatch.setenv("FILAMENT_WAVES_OUTDIR", str(tmp_path / "out"))
    return tmp_path / "out"


class TestCc:
    def test_polygon(self, capsys, outdir):
        code, out, _ = run(capsys, "cc", "--n", 3, "--kappa", 2, "--out", "tri.json")
        assert code == 0
        doc = json.loads(out)
        jsonschema.validate(doc, schema("cc"))
        assert doc["residual"] <= 1e-13
        assert np.allclose(np.hypot(*np.array(doc["points"]).T), 1.0)
        assert json.loads((outdir / "tri.json").read_text()) == doc
        assert doc["settings"]["tol"] == 1e-11

    def test_infeasible(self, capsys):
        code, _, err = run(capsys, "cc", "--n", 3, "--kappa", 1)
        assert code == 2 and "(n-1)/2" in err

    def test_nested(self, capsys):
        code, out, _ = run(capsys, "cc", "--n", 6, "--kappa", 4, "--nested", "0.7,1.5", "--offsets", "0,0.5236")
        doc = json.loads(out)
        assert code == 0 and doc["residual"] <= 1e-12 and doc["method"] == "newton"

    def test_divergence_exit(self, capsys):
        code, _, err = run(capsys, "cc", "--n", 6, "--kappa", 4, "--nested", "0.7,1.5", "--max-iter", 1)
        assert code == 3

    @pytest.mark.parametrize("argv", [
        ["cc", "--n", "3"],
        ["cc", "--n", "x", "--kappa", "2"],
        ["cc", "--n", "4", "--kappa", "3", "--nested", "1,2", "--offsets", "0"],
        ["cc", "--n", "5", "--kappa", "3", "--nested", "1,2"],
        ["bogus"],
    ])
    def test_usage(self, capsys, argv):
        with pytest.raises(SystemExit) as ex:
            code = main(argv)
            raise SystemExit(code)
        assert ex.value.code == 1


class TestSpectrum:
    def test_bifurcation(self, capsys):
        code, out, _ = run(capsys, "spectrum", "--q", 1, "--k0", 2, "--scan", "60,15")
        doc = json.loads(out)
        jsonschema.validate(doc, schema("spectrum"))
        assert code == 0 and doc["omega0"] == -0.875 and doc["j0"] == 3
        assert sorted(map(tuple, doc["resonant"])) == [(-3, -2), (-3, 2), (0, 0), (3, -2), (3, 2)]

    def test_degenerate(self, capsys):
        code, _, _ = run(capsys, "spectrum", "--q", 1, "--k0", 1)
        assert code == 2

    def test_generic_frequency(self, capsys):
        code, out, _ = run(capsys, "spectrum", "--q", 2, "--omega", -0.2, "--scan", "100,40")
        doc = json.loads(out)
        assert code == 0 and doc["resonant"] == [[0, 0]] and doc["scan"] == [100, 40]
        assert 0.19 < doc["gap"] <= doc["scan_gap"] and doc["gap_hypothesis"]
        assert len(doc["worst_mode"]) == 2


class TestBranch:
    def test_trivial(self, capsys):
        code, out, _ = run(capsys, "branch", "--q", 1, "--k0", 2, "--bmax", 0, "--trunc", "6,6")
        lines = [json.loads(l) for l in out.splitlines() if not l.startswith("#")]
        assert code == 0 and lines == [{"b": 0.0, "omega": -0.875, "residual": 0.0, "iters": 0, "full_residual": 0.0}]
        assert out.startswith("# settings ")

    def test_dump_and_reconstruct(self, capsys, outdir):
        code, out, _ = run(capsys, "branch", "--q", 2, "--k0", 1, "--db", "2e-3", "--bmax", "1e-2",
                           "--trunc", "8,8", "--dump-fields", "fields", "--out", "br.jsonl")
        assert code == 0
        recs = [json.loads(l) for l in (outdir / "br.jsonl").read_text().splitlines() if not l.startswith("#")]
        points, report = recs[:-1], recs[-1]
        assert len(points) == 6
        for p in points:
            jsonschema.validate(p, schema("branch_point"))
            assert p["residual"] <= 1e-10
        jsonschema.validate(report, schema("branch_report"))
        assert abs(report["report"]["omega_slope"] - 2) < 0.2
        # coefficient CSVs give back the exact fields
        v = restrict(read_coeffs_csv(points[-1]["field"], Grid2D.for_truncation(8, 8)))
        assert v.X[1, 1] == points[-1]["b"]

        run(capsys, "cc", "--n", 3, "--kappa", 2, "--out", "cfg.json")
        code, out, _ = run(capsys, "reconstruct", "--branch", outdir / "br.jsonl", "--point", 0,
                           "--config", outdir / "cfg.json", "--t", 0.5, "--samples", 8)
        rows = csv_rows(out)
        assert code == 0 and len(rows) == 32 and list(rows[0]) == ["filament", "t", "s", "re", "im"]
        a = (0.375) ** -0.5
        for r in rows:
            u = complex(float(r["re"]), float(r["im"]))
            f = int(r["filament"])
            expect = 0 if f == 0 else a * np.exp(-0.375j * 0.5) * np.exp(2j * np.pi * f / 3)
            assert abs(u - expect) < 1e-14

        code, _, err = run(capsys, "reconstruct", "--branch", outdir / "br.jsonl", "--point", 99,
                           "--config", outdir / "cfg.json")
        assert code == 1


class TestEvolve:
    def test_constant(self, capsys, outdir):
        code, out, _ = run(capsys, "evolve", "--pde", "--init", "constant:1", "--dt", "1e-4",
                           "--T", np.pi, "--samples", 8, "--invariants", "inv.csv")
        rows = csv_rows(out)
        assert code == 0 and len(rows) == 8
        for r in rows:
            assert abs(complex(float(r["re"]), float(r["im"])) + 1) < 1e-10
        inv = csv_rows((outdir / "inv.csv").read_text())
        assert list(inv[0]) == ["t", "mass", "energy"] and len(inv) >= 32

    def test_homographic(self, capsys):
        code, out, err = run(capsys, "evolve", "--filaments", "--init", "homographic:poly,3,2",
                             "--dt", "1e-3", "--T", 1, "--samples", 8)
        closure = float(err.split()[-1])
        assert code == 0 and closure <= 1e-8
        assert "# homographic closure" in out

    def test_restart_from_file(self, capsys, outdir):
        run(capsys, "evolve", "--pde", "--init", "constant:2", "--dt", "1e-3", "--T", 1, "--samples", 8, "--out", "a.csv")
        code, out, _ = run(capsys, "evolve", "--pde", "--init", outdir / "a.csv", "--dt", "1e-3", "--T", 1, "--samples", 8)
        r = csv_rows(out)[0]
        assert code == 0 and abs(complex(float(r["re"]), float(r["im"])) - 2 * np.exp(-0.5j)) < 1e-12

    def test_singularity_exit(self, capsys):
        code, _, _ = run(capsys, "evolve", "--pde", "--init", "constant:0", "--dt", "1e-3", "--T", 1)
        assert code == 3

    @pytest.mark.parametrize("argv", [
        ["evolve", "--pde", "--init", "constant:1", "--dt", "-1", "--T", "1"],
        ["evolve", "--pde", "--init", "nope.csv", "--dt", "1e-3", "--T", "1"],
        ["evolve", "--filaments", "--init", "homographic:tri,3", "--dt", "1e-3", "--T", "1"],
        ["evolve", "--pde", "--filaments", "--init", "constant:1", "--dt", "1e-3", "--T", "1"],
    ])
    def test_usage(self, capsys, argv):
        try:
            code = main(argv)
        except SystemExit as ex:
            code = ex.code
        assert code == 1
