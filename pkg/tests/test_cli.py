import csv
import json

import pytest

from readout_forge.cli import run
from readout_forge.output import verify_manifest


def _rows(path):
    with open(path) as fh:
        return list(csv.reader(fh))


def test_trajectory_al(tmp_path):
    code = run(["trajectory", "--scheme", "al", "--chi-over-kappa", "1", "--n-max", "2.44", "--t-end", "20",
                "--out-dir", str(tmp_path)])
    assert code == 0
    rows = _rows(tmp_path / "trajectory.csv")
    assert rows[0][:3] == ["t", "re_alpha_g", "im_alpha_g"]
    assert float(rows[1][2]) == pytest.approx((2.44 / 2) ** 0.5, rel=1e-15)
    assert (tmp_path / "trajectory.svg").read_text().startswith("<?xml")
    assert verify_manifest(tmp_path / "trajectory_manifest.json")


def test_csv_has_full_precision(tmp_path):
    run(["trajectory", "--scheme", "ar", "--chi", "0.7", "--alpha-tilde", "0.5", "--n-max", "2.44",
         "--points", "5", "--out-dir", str(tmp_path)])
    value = _rows(tmp_path / "trajectory.csv")[2][1]
    assert float(format(float(value), ".17g")) == float(value)
    assert len(value.replace("-", "").replace(".", "").split("e")[0]) >= 15


def test_outputs_deterministic(tmp_path):
    argv = ["snr", "--scheme", "ar", "--chi", "0.5", "--alpha-arm", "0.9", "--n-max", "2.44", "--points", "20"]
    a, b = tmp_path / "a", tmp_path / "b"
    assert run(argv + ["--out-dir", str(a)]) == 0
    assert run(argv + ["--out-dir", str(b)]) == 0
    for name in ("snr.csv", "snr.svg"):
        assert (a / name).read_bytes() == (b / name).read_bytes()
    ma = json.loads((a / "snr_manifest.json").read_text())
    mb = json.loads((b / "snr_manifest.json").read_text())
    assert ma["files"] == mb["files"] and ma["params"] == mb["params"]


def test_recommend_experiment_point(tmp_path, capsys):
    code = run(["recommend", "--chi-over-kappa", "0.42", "--kappa-tau", "11.31", "--n-max", "2.44",
                "--out-dir", str(tmp_path)])
    assert code == 0
    data = json.loads((tmp_path / "recommend.json").read_text())
    assert data["scheme"] == "arm_and_release"
    assert "arm_and_release" in capsys.readouterr().out


def test_mhz_units_match_dimensionless(tmp_path):
    run(["recommend", "--units", "mhz", "--chi", "4.242", "--kappa", "10.1", "--kappa-tau", "20.73",
         "--n-max", "2.44", "--out-dir", str(tmp_path / "m")])
    run(["recommend", "--chi", "0.42", "--kappa-tau", "20.73", "--n-max", "2.44", "--out-dir", str(tmp_path / "d")])
    m = json.loads((tmp_path / "m" / "recommend.json").read_text())
    d = json.loads((tmp_path / "d" / "recommend.json").read_text())
    assert m["scheme"] == d["scheme"] == "arm_and_longitudinal"
    assert m["gain_ratio"] == pytest.approx(d["gain_ratio"], rel=1e-9)


def test_gainmap_small(tmp_path):
    code = run(["gainmap", "--n-max", "2.44", "--chi-points", "3", "--tau-points", "3", "--grid-points", "12",
                "--jobs", "1", "--out-dir", str(tmp_path)])
    assert code == 0
    rows = _rows(tmp_path / "gainmap.csv")
    assert len(rows) == 10 and rows[0][0] == "chi_over_kappa"
    assert verify_manifest(tmp_path / "gainmap_manifest.json")


def test_error_and_snr_modes(tmp_path):
    assert run(["error", "--snr", "0", "2", "--out-dir", str(tmp_path)]) == 0
    rows = _rows(tmp_path / "error.csv")
    assert float(rows[1][1]) == 0.5
    assert run(["error", "--chi", "1", "--n-max", "2.44", "--points", "10", "--ar-alpha-tilde", "0.2", "0.8",
                "--out-dir", str(tmp_path / "curves")]) == 0
    assert _rows(tmp_path / "curves" / "error.csv")[0] == [
        "kappa_tau", "error_dispersive", "error_al", "error_ar_0.2", "error_ar_0.8"]


def test_drive_profile_and_volterra(tmp_path, capsys):
    assert run(["drive-profile", "--scheme", "al", "--chi", "1", "--alpha-arm", "1", "--points", "3",
                "--t-end", "2", "--out-dir", str(tmp_path)]) == 0
    rows = _rows(tmp_path / "drive_profile.csv")
    assert float(rows[3][1]) == pytest.approx(1.6321205588285577, rel=1e-15)
    assert run(["volterra-check", "--scheme", "al", "--chi", "1.5", "--n-max", "2.44", "--out-dir",
                str(tmp_path)]) == 0
    summary = json.loads((tmp_path / "volterra_check.json").read_text())
    assert summary["max_abs_residual"] < 1e-8


def test_chi_table(tmp_path):
    assert run(["chi-table", "--kappa", "1", "--out-dir", str(tmp_path)]) == 0
    rows = _rows(tmp_path / "chi_table.csv")
    assert abs(float(rows[3][4])) == pytest.approx(3.286, rel=0.02)


def test_fullsim_small(tmp_path):
    code = run(["fullsim", "--scheme", "dispersive", "--epsilon1", "2", "--levels", "3", "--fock-cutoff", "8",
                "--charge-cutoff", "20", "--horizon", "0.2", "--n-out", "5", "--jobs", "1",
                "--out-dir", str(tmp_path)])
    assert code == 0
    rows = _rows(tmp_path / "fullsim.csv")
    assert rows[0] == ["t", "re_a_g", "im_a_g", "re_a_e", "im_a_e", "n_g", "n_e", "leak_g", "leak_e"]
    meta = json.loads((tmp_path / "fullsim_meta.json").read_text())
    assert meta["demodulation_frame"] == "omega_1"
    assert verify_manifest(tmp_path / "fullsim_manifest.json")


def test_config_merged_under_flags(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"chi": 3.0, "n_max": 2.44, "kappa_tau": 1.0}))
    run(["recommend", "--config", str(cfg), "--chi", "0.42", "--kappa-tau", "11.31", "--out-dir", str(tmp_path)])
    manifest = json.loads((tmp_path / "recommend_manifest.json").read_text())
    assert manifest["params"]["chi_over_kappa"] == 0.42
    assert manifest["params"]["n_max"] == 2.44


def test_usage_errors_exit_2(capsys):
    assert run(["trajectory", "--bogus"]) == 2
    assert "--bogus" in capsys.readouterr().err
    assert run([]) == 2
    assert run(["recommend", "--chi", "0.4"]) == 2


def test_domain_errors_exit_1(tmp_path, capsys):
    assert run(["recommend", "--chi", "0.4", "--kappa-tau", "-1", "--n-max", "2.44",
                "--out-dir", str(tmp_path)]) == 1
    assert run(["trajectory", "--scheme", "ar", "--alpha-arm", "3", "--n-max", "2.44",
                "--out-dir", str(tmp_path)]) == 1
    assert "error" in capsys.readouterr().err


def test_unknown_config_key_is_usage_error(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text('{"nope": 1}')
    assert run(["recommend", "--config", str(cfg), "--chi", "1", "--kappa-tau", "1", "--n-max", "1"]) == 2
