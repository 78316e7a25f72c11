"""The fpm command line tool: subcommands, config files, exit codes."""

import numpy as np
import pytest

from fpmheat.harness.cli import main
from fpmheat.harness.meshes import l_shape_mesh_text


class TestRun:
    def test_run_writes_results(self, tmp_path, capsys):
        code = main(["run", "--case", "2.1", "--method", "pg2",
                     "--points", "125", "--out", str(tmp_path), "--vtk"])
        assert code == 0
        out = capsys.readouterr().out
        assert "e0=" in out
        assert (tmp_path / "results.csv").exists()
        assert (tmp_path / "field_tsteady.vtk").exists()

    def test_unknown_case_exit_2(self, tmp_path, capsys):
        code = main(["run", "--case", "7.7", "--method", "pg2",
                     "--out", str(tmp_path)])
        assert code == 2
        assert "unknown case" in capsys.readouterr().err

    def test_missing_method_exit_2(self, tmp_path, capsys):
        code = main(["run", "--case", "2.1", "--out", str(tmp_path)])
        assert code == 2

    def test_config_file_supplies_flags(self, tmp_path, capsys):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("[run]\ncase = 2.1\nmethod = pg2\npoints = 125\n"
                       f"out = {tmp_path}\n")
        code = main(["run", "--config", str(cfg)])
        assert code == 0
        assert (tmp_path / "results.csv").exists()

    def test_flags_override_config(self, tmp_path, capsys):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("[run]\ncase = 2.1\nmethod = pg2\npoints = 1000\n")
        code = main(["run", "--config", str(cfg), "--points", "125",
                     "--out", str(tmp_path)])
        assert code == 0
        line = (tmp_path / "results.csv").read_text().splitlines()[1]
        assert line.split(",")[2] == "125"

    def test_missing_config_file_exit_2(self, capsys):
        code = main(["run", "--config", "/nonexistent.cfg"])
        assert code == 2


class TestSweep:
    def test_sweep_table(self, tmp_path, capsys):
        code = main(["sweep", "--case", "2.1", "--method", "pg2",
                     "--points", "125", "--eta1", "0.5,1", "--eta2", "1e5",
                     "--out", str(tmp_path)])
        assert code == 0
        out = capsys.readouterr().out
        assert out.startswith("eta1,eta2,e0,status")
        assert len(out.strip().splitlines()) == 3
        assert (tmp_path / "sweep.csv").exists()

    def test_sweep_requires_lists(self, capsys):
        code = main(["sweep", "--case", "2.1", "--method", "pg2"])
        assert code == 2


class TestMeshInfo:
    def test_mesh_info(self, tmp_path, capsys):
        p = tmp_path / "l.msh"
        p.write_text(l_shape_mesh_text(218))
        code = main(["mesh-info", str(p)])
        assert code == 0
        out = capsys.readouterr().out
        assert "elements 218" in out
        assert "dim 2" in out
        assert "segment bottom" in out

    def test_mesh_info_parse_error_exit_2(self, tmp_path, capsys):
        p = tmp_path / "bad.msh"
        p.write_text("dim 2\nnodes 1\n0 0\n")
        code = main(["mesh-info", str(p)])
        assert code == 2

    def test_mesh_info_missing_file_exit_2(self, capsys):
        code = main(["mesh-info", "/no/such/file.msh"])
        assert code == 2
