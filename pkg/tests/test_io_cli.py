import csv
import io
import json

import numpy as np
import pytest
from numpy.testing import assert_allclose

from mmsverify.constitutive import CaseId
from mmsverify.errors import ConfigParseError, ConfigValidationError
from mmsverify.io_cli import DeckSpec, RunConfig, export_cload, export_dload_table, load_config, parse_config
from mmsverify.io_cli.cli import OUTPUT_DIR_ENV, main
from mmsverify.io_cli.deck import read_dload_table
from mmsverify.manufactured import source

PHI_QUARTER = 12 * np.pi ** 2


def cload_lines(spec):
    buf = io.StringIO()
    n = export_cload(spec, buf)
    lines = buf.getvalue().splitlines()
    assert lines[0] == "*CLOAD"
    assert len(lines) == n + 1
    return lines[1:]


class TestCload:
    def test_line_count_bound(self):
        assert len(cload_lines(DeckSpec(4))) <= 81

    def test_interior_nodes_only_and_ordered(self):
        keys = [tuple(int(v) for v in line.split(",")[:2]) for line in cload_lines(DeckSpec(4, emit_zeros=True))]
        assert len(keys) == 81
        assert keys == sorted(keys)
        nodes = {k[0] - 1 for k in keys}
        from mmsverify.fem import build_mesh
        assert nodes == set(build_mesh(4).interior_nodes)

    def test_center_node_suppressed(self):
        # node (0.5, 0.5, 0.5) is id 63 (1-based) on the 4^3 grid
        assert not any(line.startswith("63,") for line in cload_lines(DeckSpec(4)))
        zeros = [line for line in cload_lines(DeckSpec(4, emit_zeros=True)) if line.startswith("63,")]
        assert zeros == ["63, 1, 0", "63, 2, 0", "63, 3, 0"]

    def test_quarter_point_value(self):
        # node (0.25, 0.25, 0.25) is id 32
        lines = [line for line in cload_lines(DeckSpec(4)) if line.startswith("32,")]
        assert len(lines) == 3
        for line in lines:
            assert_allclose(float(line.split(",")[2]), PHI_QUARTER / 64, rtol=1e-15)

    def test_precision(self):
        line = cload_lines(DeckSpec(4, precision=6))[0]
        assert len(line.split(",")[2].strip().replace("-", "").replace(".", "")) <= 6

    def test_byte_identical(self):
        spec = DeckSpec(8, case="III")
        assert cload_lines(spec) == cload_lines(spec)

    def test_wrong_kind(self):
        with pytest.raises(ValueError):
            export_cload(DeckSpec(4, load="dload"), io.StringIO())


class TestDloadTable:
    def test_row_count(self):
        buf = io.StringIO()
        assert export_dload_table(DeckSpec(4, load="dload"), buf) == 512
        assert len(buf.getvalue().splitlines()) == 513

    def test_values_without_nlgeom(self, params, field):
        buf = io.StringIO()
        export_dload_table(DeckSpec(4, load="dload", case="II", nlgeom=False), buf)
        X, vals = read_dload_table(io.StringIO(buf.getvalue()))
        assert_allclose(vals, source(CaseId.II, params, field, X).phi, rtol=1e-14, atol=1e-12)

    def test_nlgeom_divides_by_J(self, params, field):
        buf = io.StringIO()
        spec = DeckSpec(4, load="dload", case="II")
        assert spec.nlgeom
        export_dload_table(spec, buf)
        X, vals = read_dload_table(io.StringIO(buf.getvalue()))
        ev = source(CaseId.II, params, field, X)
        assert_allclose(vals, ev.phi / ev.J[:, None], rtol=1e-14, atol=1e-12)

    def test_nlgeom_default_follows_case(self):
        assert DeckSpec(4, load="dload", case="I").nlgeom is False
        assert DeckSpec(4, load="dload", case="III").nlgeom is True

    def test_bad_spec(self):
        with pytest.raises(ValueError):
            DeckSpec(4, load="pressure")
        with pytest.raises(ValueError):
            DeckSpec(4, precision=0)


class TestConfig:
    def test_empty_gives_reference_constants(self):
        cfg = parse_config("")
        assert (cfg.lam, cfg.mu, cfg.C1, cfg.n) == (100.0, 50.0, 0.01, 2)
        assert cfg.case is CaseId.I and cfg.source_case is CaseId.I

    def test_full_file(self, tmp_path):
        path = tmp_path / "run.cfg"
        path.write_text("# mismatch probe\ncase = III\nsource_case = II  # neo-Hookean source\n"
                        "levels = 4,8,16\nload_mode = body\n\n")
        cfg = load_config(path)
        assert cfg.case is CaseId.III and cfg.source_case is CaseId.II
        assert cfg.levels == (4, 8, 16)
        assert cfg.solver_config().load_mode == "body"

    def test_source_case_follows_case(self):
        assert parse_config("case = 2").source_case is CaseId.II

    def test_unknown_key_reports_line(self):
        with pytest.raises(ConfigParseError) as info:
            parse_config("case = I\n\nmesh_size = 3\n")
        assert info.value.line == 3

    @pytest.mark.parametrize("text", ["case I", "N = four", "case = IV", "mu = 1\nmu = 2"])
    def test_parse_errors(self, text):
        with pytest.raises(ConfigParseError):
            parse_config(text)

    @pytest.mark.parametrize("text", ["lambda = -1", "mu = 0", "C1 = 0", "dt = 0.3", "levels = 4,6",
                                      "levels = 8,4", "load_mode = point", "dts = 0.1,0.2", "N = 1"])
    def test_validation_errors(self, text):
        with pytest.raises(ConfigValidationError):
            parse_config(text)

    def test_to_dict_round_trip(self):
        cfg = parse_config("case = III\nlevels = 4,8")
        d = cfg.to_dict()
        assert d["case"] == "III" and d["levels"] == [4, 8]
        json.dumps(d)


@pytest.fixture
def out_dir(tmp_path, monkeypatch):
    monkeypatch.delenv(OUTPUT_DIR_ENV, raising=False)
    return tmp_path / "out"


class TestCli:
    def test_no_arguments(self, capsys):
        assert main([]) == 2
        assert "usage" in capsys.readouterr().err

    def test_unknown_subcommand(self, capsys):
        assert main(["frobnicate"]) == 2

    def test_source(self, out_dir, capsys):
        assert main(["source", "--case", "I", "--at", "0.25,0.25,0.25", "--out", str(out_dir)]) == 0
        vals = [float(v) for v in capsys.readouterr().out.split()]
        assert_allclose(vals, [118.4353] * 3, atol=5e-5)
        manifest = json.loads((out_dir / "manifest.json").read_text())
        assert manifest["command"] == "source"
        assert manifest["config"]["lam"] == 100.0
        assert "version" in manifest

    def test_bad_point(self, out_dir):
        assert main(["source", "--at", "0.1,0.2", "--out", str(out_dir)]) == 2

    def test_config_validation_is_usage_error(self, out_dir, tmp_path):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("lambda = -1\n")
        assert main(["solve", "--config", str(cfg), "--out", str(out_dir)]) == 2

    def test_solve_writes_snapshot(self, out_dir):
        assert main(["solve", "--case", "II", "--N", "4", "--out", str(out_dir)]) == 0
        rows = list(csv.reader(open(out_dir / "solution_caseII_N4.csv")))
        assert len(rows) == 126

    def test_solver_error_exit_code(self, out_dir, tmp_path):
        cfg = tmp_path / "tight.cfg"
        cfg.write_text("max_newton_iters = 1\n")
        assert main(["solve", "--case", "II", "--config", str(cfg), "--out", str(out_dir)]) == 3
        assert "error" in json.loads((out_dir / "manifest.json").read_text())

    def test_study_grid_fail_exit_code(self, out_dir):
        # the coarse 4-8 pair sits above the band, so the study reports FAIL
        assert main(["study-grid", "--case", "I", "--levels", "4,8", "--out", str(out_dir)]) == 1
        text = (out_dir / "grid_modelI_sourceI_lumped.csv").read_text()
        assert text.startswith("N,h,L2,Linf,OOC_L2,OOC_Linf\n")
        assert "FAIL" in (out_dir / "grid_modelI_sourceI_lumped_summary.txt").read_text()

    def test_study_increment_pass(self, out_dir, capsys):
        assert main(["study-increment", "--case", "II", "--dts", "0.2,0.1,0.05", "--out", str(out_dir)]) == 0
        assert "0.2-0.1-0.05" in capsys.readouterr().out
        manifest = json.loads((out_dir / "manifest.json").read_text())
        assert manifest["config"]["stepping"] == "first_order"

    def test_export_deck_deterministic(self, out_dir):
        assert main(["export-deck", "--N", "4", "--out", str(out_dir)]) == 0
        first = (out_dir / "cload_caseI_N4.inp").read_bytes()
        assert main(["export-deck", "--N", "4", "--out", str(out_dir)]) == 0
        assert (out_dir / "cload_caseI_N4.inp").read_bytes() == first

    def test_export_dload(self, out_dir):
        assert main(["export-deck", "--kind", "dload", "--case", "III", "--no-nlgeom",
                     "--out", str(out_dir)]) == 0
        assert len((out_dir / "dload_caseIII_N4.csv").read_text().splitlines()) == 513

    def test_export_field(self, out_dir):
        assert main(["export-field", "--case", "II", "--N", "8", "--z", "0.25", "--out", str(out_dir)]) == 0
        assert len((out_dir / "field_caseII_N8_z0.25.csv").read_text().splitlines()) == 82

    def test_environment_output_dir(self, tmp_path, monkeypatch):
        monkeypatch.setenv(OUTPUT_DIR_ENV, str(tmp_path / "env"))
        assert main(["source", "--at", "0.5,0.5,0.5"]) == 0
        assert (tmp_path / "env" / "manifest.json").exists()

    def test_flag_overrides_config(self, out_dir, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("case = II\nmu = 40\n")
        assert main(["source", "--config", str(cfg), "--case", "III", "--at", "0.3,0.3,0.3",
                     "--out", str(out_dir)]) == 0
        conf = json.loads((out_dir / "manifest.json").read_text())["config"]
        assert conf["case"] == "III" and conf["source_case"] == "III" and conf["mu"] == 40.0
