import json

import numpy as np
import pandas as pd
import pytest

from pyqkt.cli import main
from pyqkt.evolution import OverlapSeries
from pyqkt.io import RunRecord, emit_series
from pyqkt.nonextensive import e_q


def run_cli(out, *args):
    return main([*args, "--out", str(out), "--quiet"])


def summary(out):
    return json.loads((out / "summary.json").read_text())


@pytest.fixture
def qexp_csv(tmp_path):
    t = np.arange(401, dtype=float)
    path = tmp_path / "series.csv"
    emit_series(OverlapSeries.from_values(e_q(-((t / 40.0) ** 2), 2.5)), "csv", path)
    return path


class TestBuild:
    def test_writes_outputs(self, tmp_path):
        assert run_cli(tmp_path, "build", "--J", "8") == 0
        data = summary(tmp_path)
        assert data["dimension"] == 17
        assert data["block_dims"] == [5, 4, 8]
        assert data["unitarity_residual"] < 1e-10
        assert len(pd.read_csv(tmp_path / "quasienergies.csv")) == 4
        assert RunRecord.read(tmp_path / "run.json").verify()

    def test_odd_spin(self, tmp_path):
        assert run_cli(tmp_path, "build", "--J", "7") == 1

    def test_config_file(self, tmp_path):
        config = tmp_path / "config.json"
        config.write_text(json.dumps({"J": 8, "alpha": 2.0}))
        assert run_cli(tmp_path / "out", "build", "--config", str(config)) == 0
        assert summary(tmp_path / "out")["alpha"] == 2.0


class TestUsage:
    def test_unknown_command(self, tmp_path):
        assert main(["teleport", "--quiet"]) == 1

    def test_no_command(self):
        assert main([]) == 1

    def test_bad_flag_value(self, tmp_path):
        assert run_cli(tmp_path, "build", "--J", "8", "--steps", "many") == 1


class TestFidelity:
    ARGS = ("fidelity", "--J", "20", "--delta", "0", "--state-z", "0.5", "--steps", "60")

    def test_unperturbed_overlap_is_one(self, tmp_path):
        assert run_cli(tmp_path, *self.ARGS) == 0
        frame = pd.read_csv(tmp_path / "overlap.csv")
        assert list(frame.columns) == ["t", "overlap"]
        assert len(frame) == 61
        assert (frame["overlap"] == 1.0).all()
        assert summary(tmp_path)["series"]["classification"]["kind"] == "regular"

    def test_deterministic(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        args = ("fidelity", "--J", "20", "--delta", "0.05", "--state-z", "0.5", "--steps", "80")
        assert run_cli(a, *args) == 0
        assert run_cli(b, *args) == 0
        assert (a / "overlap.csv").read_bytes() == (b / "overlap.csv").read_bytes()

    def test_both_formats(self, tmp_path):
        assert run_cli(tmp_path, *self.ARGS, "--format", "both") == 0
        assert (tmp_path / "overlap.csv").is_file()
        payload = json.loads((tmp_path / "overlap.json").read_text())
        assert payload["columns"] == ["t", "overlap"]
        assert payload["meta"]["J"] == 20


class TestEdgeScan:
    def test_no_edge_exit_code(self, tmp_path):
        code = run_cli(
            tmp_path, "edge-scan", "--J", "20", "--delta", "0", "--z-range", "0.60,0.62", "--steps", "60"
        )
        assert code == 3

    def test_sweep_without_state_scans_for_the_edge(self, tmp_path):
        code = run_cli(
            tmp_path, "delta-sweep", "--J", "20", "--deltas", "0.01,0.05", "--scan-delta", "0",
            "--z-range", "0.60,0.62", "--steps", "60",
        )
        assert code == 3


class TestFitCommands:
    def test_fit(self, tmp_path, qexp_csv):
        out = tmp_path / "fit"
        assert run_cli(out, "fit", "--input", str(qexp_csv), "--window", "1,300") == 0
        frame = pd.read_csv(out / "fit.csv")
        assert list(frame.columns) == ["t", "overlap", "model", "t_pow", "lnq_overlap"]
        assert summary(out)["fit"]["q_rel"] == pytest.approx(2.5, abs=0.01)

    def test_classify(self, tmp_path, qexp_csv):
        out = tmp_path / "classify"
        assert run_cli(out, "classify", "--input", str(qexp_csv)) == 0
        assert "label" in summary(out)

    def test_missing_input(self, tmp_path):
        assert run_cli(tmp_path, "fit", "--input", str(tmp_path / "missing.csv")) == 1


class TestClassical:
    def test_project_with_plot(self, tmp_path):
        assert run_cli(tmp_path, "classical", "project", "--orbit-points", "100", "--plot") == 0
        assert len(pd.read_csv(tmp_path / "projection.csv")) == 101
        assert (tmp_path / "projection.svg").is_file()

    def test_orbit(self, tmp_path):
        assert run_cli(tmp_path, "classical", "orbit", "--orbit-points", "50") == 0
        frame = pd.read_csv(tmp_path / "orbit.csv")
        assert list(frame.columns) == ["t", "x", "y", "z"]
        assert summary(tmp_path)["norm_drift"] < 1e-10

    def test_sensitivity(self, tmp_path):
        assert run_cli(tmp_path, "classical", "sensitivity", "--steps", "20") == 0
        assert summary(tmp_path)["lyapunov"] is not None


class TestReproduce:
    def test_fig2(self, tmp_path):
        assert run_cli(tmp_path, "reproduce", "fig2", "--orbit-points", "200") == 0
        assert len(pd.read_csv(tmp_path / "fig2_chaotic_orbit.csv")) == 200
        assert len(pd.read_csv(tmp_path / "fig2_fixed_points.csv")) == 2
        assert summary(tmp_path)["target"] == "fig2"

    def test_unknown_target(self, tmp_path):
        assert run_cli(tmp_path, "reproduce", "fig9") == 1
