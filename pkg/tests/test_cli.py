import csv
import json
import math
import subprocess
import sys

import pytest

from photon_locality import __version__
from photon_locality.bounds import CSV_HEADER, read_bounds_csv
from photon_locality.cli import EXIT_DATA, EXIT_IO, EXIT_OK, EXIT_USAGE, EXIT_VERIFY, main, read_config
from photon_locality.fockspace import fidelity_single_photon, load_state_json, photon_statistics


def rows_of(path):
    with open(path) as fh:
        return list(csv.reader(fh))


class TestSweep:
    def test_full_grid(self, tmp_path):
        out = tmp_path / "bounds.csv"
        code = main(["sweep", "--omega-sigma", "0.2:3.0:0.1", "--tau-ratio", "1.5,3,inf",
                     "--alpha", "1", "--exact", "--out", str(out)])
        assert code == EXIT_OK
        rows = rows_of(out)
        assert rows[0] == list(CSV_HEADER)
        for tau in (1.5, 3.0, math.inf):
            assert sum(float(r[1]) == tau for r in rows[1:]) >= 29
        manifest = json.loads((tmp_path / "bounds.csv.manifest.json").read_text())
        assert manifest["version"] == __version__
        assert manifest["resolved"]["tau_ratio"] == "1.5,3,inf"
        assert manifest["error_rows"] == []

    def test_small_eta_form(self, tmp_path):
        out = tmp_path / "b.csv"
        assert main(["sweep", "--out", str(out)]) == EXIT_OK
        data = read_bounds_csv(out)
        k = list(data["omega0_sigma"]).index(1.0)
        assert data["one_minus_f_upper"][k] == pytest.approx(0.5 * data["eta"][k], rel=0.1)

    def test_malformed_range(self, tmp_path, capsys):
        assert main(["sweep", "--omega-sigma", "3:1:0.1", "--out", str(tmp_path / "x.csv")]) == EXIT_USAGE
        assert "usage error" in capsys.readouterr().err

    def test_unwritable(self, tmp_path):
        assert main(["sweep", "--omega-sigma", "1", "--out", str(tmp_path / "no" / "x.csv")]) == EXIT_IO

    def test_error_rows_exit_2(self, tmp_path, capsys):
        out = tmp_path / "x.csv"
        assert main(["sweep", "--omega-sigma", "1e-9", "--tau-ratio", "inf", "--out", str(out)]) == 2
        assert "error row" in capsys.readouterr().err
        assert json.loads((tmp_path / "x.csv.manifest.json").read_text())["error_rows"]

    def test_deterministic(self, tmp_path):
        paths = [tmp_path / "a.csv", tmp_path / "b.csv"]
        for p, threads in zip(paths, ("1", "4")):
            main(["sweep", "--omega-sigma", "0.5:2:0.5", "--tau-ratio", "3,inf", "--threads", threads,
                  "--out", str(p)])
        assert paths[0].read_bytes() == paths[1].read_bytes()


class TestState:
    def test_default(self, tmp_path):
        out = tmp_path / "state.json"
        assert main(["state", "--omega-sigma", "1", "--tau-ratio", "3", "--ncut", "30",
                     "--out", str(out)]) == EXIT_OK
        record = json.loads(out.read_text())
        assert 0.99 < record["fidelity"] < 1
        assert record["eta"] == pytest.approx(0.0787254, abs=1e-6)
        assert {"eta_tilde", "C", "gamma", "n_cut"} <= record.keys()
        back = load_state_json(out)
        assert fidelity_single_photon(back) == pytest.approx(record["fidelity"], abs=1e-12)

    def test_round_trip_statistics(self, tmp_path):
        out = tmp_path / "s.json"
        main(["state", "--eta-tilde", "0.1", "--out", str(out)])
        back = load_state_json(out)
        assert photon_statistics(back)[1] == pytest.approx(abs(back.c1) ** 2, abs=1e-12)

    def test_short_pulse_limit(self, tmp_path):
        out = tmp_path / "s.json"
        assert main(["state", "--omega-sigma", "6", "--tau-ratio", "8", "--out", str(out)]) == EXIT_OK
        assert json.loads(out.read_text())["fidelity"] >= 1 - 1e-6

    def test_truncation_error(self, tmp_path, capsys):
        assert main(["state", "--ncut", "2", "--eta-tilde", "0.1", "--out", str(tmp_path / "s.json")]) == EXIT_DATA
        assert "TruncationError" in capsys.readouterr().err

    def test_degenerate(self, tmp_path, capsys):
        assert main(["state", "--eta-tilde", "0.5", "--out", str(tmp_path / "s.json")]) == EXIT_DATA
        assert "1/2" in capsys.readouterr().err

    def test_deterministic(self, tmp_path):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        for p in (a, b):
            main(["state", "--out", str(p)])
        assert a.read_bytes() == b.read_bytes()

    def test_infinite_delay_rejected(self, tmp_path):
        with pytest.raises(SystemExit) as exc:
            main(["state", "--tau-ratio", "inf", "--out", str(tmp_path / "s.json")])
        assert exc.value.code == EXIT_USAGE


class TestConfig:
    def test_parse(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("# comment\nomega-sigma = 0.5:1.0:0.5\ntau_ratio = inf  # trailing\n\n")
        assert read_config(cfg) == {"omega_sigma": "0.5:1.0:0.5", "tau_ratio": "inf"}

    def test_flags_override(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("omega_sigma = 0.5:1.0:0.5\ntau_ratio = inf\nexact = no\n")
        out = tmp_path / "b.csv"
        assert main(["sweep", "--config", str(cfg), "--tau-ratio", "3", "--out", str(out)]) == EXIT_OK
        resolved = json.loads((tmp_path / "b.csv.manifest.json").read_text())["resolved"]
        assert resolved["tau_ratio"] == "3" and resolved["exact"] is False
        assert [float(r[1]) for r in rows_of(out)[1:]] == [3.0, 3.0]

    @pytest.mark.parametrize("text", ["bogus = 1\n", "no equals sign\n", "alpha = x\n"])
    def test_bad_config(self, tmp_path, text):
        cfg = tmp_path / "run.cfg"
        cfg.write_text(text)
        assert main(["sweep", "--config", str(cfg), "--out", str(tmp_path / "b.csv")]) == EXIT_USAGE

    def test_missing_config(self, tmp_path):
        assert main(["sweep", "--config", str(tmp_path / "none.cfg")]) == EXIT_IO


class TestOutputs:
    def test_density(self, tmp_path, capsys):
        prefix = str(tmp_path / "d")
        assert main(["density", "--samples", "400", "--out", prefix]) == EXIT_OK
        for name in ("localized", "single", "coherent"):
            rows = rows_of(f"{prefix}_{name}.csv")
            assert rows[0] == ["t", "density"] and len(rows) > 390
        assert rows_of(f"{prefix}_glauber.csv")[0] == ["t", "intensity_nonlocal"]
        metrics = json.loads((tmp_path / "d.manifest.json").read_text())["localization"]
        assert metrics["localized"] <= 1e-3 and metrics["single"] >= 10 * metrics["localized"]
        assert "localization localized" in capsys.readouterr().out

    def test_modes(self, tmp_path):
        prefix = str(tmp_path / "m")
        assert main(["modes", "--samples", "100", "--out", prefix]) == EXIT_OK
        assert rows_of(f"{prefix}_modes.csv")[0] == ["omega", "re_xi1", "im_xi1", "re_xi2", "im_xi2"]
        assert rows_of(f"{prefix}_E1.csv")[0] == ["t", "re_E", "im_E", "abs2_E"]
        record = json.loads((tmp_path / "m.manifest.json").read_text())
        assert record["C"] ** 2 == pytest.approx((1 - record["eta_tilde"]) / record["eta_tilde"], rel=1e-12)

    def test_bad_times(self, tmp_path):
        assert main(["modes", "--t-min", "5", "--t-max", "1", "--out", str(tmp_path / "m")]) == EXIT_USAGE


class TestVerify:
    def test_list(self, capsys):
        assert main(["verify", "--list"]) == EXIT_OK
        assert "modes.orthogonalization" in capsys.readouterr().out

    def test_single_check(self, capsys):
        assert main(["verify", "--check", "spectral.parseval"]) == EXIT_OK
        assert "1/1 checks passed" in capsys.readouterr().out

    def test_fault_injection(self, capsys):
        code = main(["verify", "--check", "modes.orthogonalization", "--inject-fault", "beta-plus-branch"])
        assert code == EXIT_VERIFY
        assert "failed: modes.orthogonalization" in capsys.readouterr().err

    def test_unknown_check(self):
        assert main(["verify", "--check", "nope"]) == EXIT_USAGE

    def test_unknown_subcommand(self):
        with pytest.raises(SystemExit) as exc:
            main(["plot"])
        assert exc.value.code == EXIT_USAGE


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "photon_locality.cli", "verify", "--list"],
                          capture_output=True, text=True, timeout=120)
    assert proc.returncode == 0
    assert len(proc.stdout.splitlines()) == 17
