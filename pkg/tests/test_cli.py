import json
import subprocess
import sys

import numpy as np
import pytest

from aircomp_filters.cli import EXIT_INFEASIBLE, EXIT_USAGE, main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def kv(text):
    return dict(line.split("=", 1) for line in text.splitlines() if "=" in line)


def test_design_filter_exact_rect(capsys):
    code, out, _ = run(capsys, "design-filter", "--pulse", "rect", "--ns", "4", "--d", "2",
                       "--exact")
    assert code == 0
    r = kv(out)
    np.testing.assert_allclose([float(t) for t in r["taps"].split(",")], [0, 0, 1, 1],
                               atol=1e-12)
    assert r["leading_zeros"] == "2" and float(r["residual"]) < 1e-12
    assert float(r["noise_gain"]) == pytest.approx(2.0)


def test_design_filter_tikhonov_rect(capsys, tmp_path):
    path = tmp_path / "f.json"
    code, out, _ = run(capsys, "design-filter", "--pulse", "rect", "--ns", "4", "--d", "2",
                       "--lambda", "0.1", "--output", str(path))
    assert code == 0
    assert kv(out)["taps"] == "0,0,0.9375,0.9375"
    saved = json.loads(path.read_text())
    np.testing.assert_allclose(saved["taps"], [0, 0, 0.9375, 0.9375])
    assert saved["reg"] == 0.1


def test_design_filter_infeasible_exit_code(capsys):
    code, out, err = run(capsys, "design-filter", "--pulse", "gaussian", "--ns", "4", "--d", "3",
                         "--exact")
    assert code == EXIT_INFEASIBLE
    assert "infeasible" in err and "rank=1" in err
    assert out == ""


def test_usage_errors(capsys):
    with pytest.raises(SystemExit) as e:
        main(["design-filter", "--ns", "4"])
    assert e.value.code == EXIT_USAGE
    code, _, err = run(capsys, "design-filter", "--ns", "4", "--d", "4")
    assert code == EXIT_USAGE and "error" in err


def test_check_reports(capsys):
    code, out, _ = run(capsys, "check", "--pulse", "rect", "--ns", "8", "--d", "7")
    r = kv(out)
    assert code == 0 and r["feasible"] == "true" and r["rank"] == "1"
    code, out, _ = run(capsys, "check", "--pulse", "gaussian", "--ns", "21", "--d", "10",
                       "--lemma1", "--lemma1-trials", "200")
    r = kv(out)
    assert r["corollary2_bound"] == "10" and r["sufficient"] == "true"
    assert float(r["lemma1_max_discrepancy"]) <= 1e-12


def test_simulate_dump(capsys, tmp_path):
    path = tmp_path / "sim.npz"
    code, out, _ = run(capsys, "simulate", "--ns", "6", "--d", "2", "--K", "5", "--N", "3",
                       "--M", "4", "--exact", "--output", str(path))
    assert code == 0
    r = kv(out)
    assert {"f_hat_proposed", "f_hat_matched", "f_hat_unbiased"} <= set(r)
    data = np.load(path)
    assert data["v"].shape == (4, 18) and data["y_matched"].shape == (4, 3)
    np.testing.assert_allclose(data["f"], data["messages"].mean(axis=0))


def test_sweep_figure3_rows_and_manifest(capsys, tmp_path):
    csv = tmp_path / "fig3.csv"
    code, out, _ = run(capsys, "sweep", "--figure", "3", "--trials", "20", "--seed", "7",
                       "--output", str(csv), "-q")
    assert code == 0 and out == ""
    lines = csv.read_text().splitlines()
    assert lines[0] == "d,MSE,MSE_mf,bias,bias_mf,se_MSE,se_MSE_mf,se_bias,se_bias_mf"
    assert [line.split(",")[0] for line in lines[1:]] == [str(d) for d in range(11)]
    manifest = json.loads((tmp_path / "fig3.csv.manifest.json").read_text())
    assert manifest["seed"] == 7 and manifest["config"]["n_trials"] == 20
    assert manifest["outputs"]["csv"] == str(csv)
    assert "[sweep]" in manifest["config_ini"]


def test_sweep_from_config_file_and_override(capsys, tmp_path):
    ini = tmp_path / "run.ini"
    ini.write_text("[system]\nn_devices = 6\nn_symbols = 3\nn_copies = 2\n"
                   "[pulse]\nkind = rect\nns_rule = fixed\nns_fixed = 8\n"
                   "[sweep]\nd_values = 0-3\ntrials = 50  ; short run\nseed = 1\n")
    csv, man = tmp_path / "out.csv", tmp_path / "m.json"
    code, _, _ = run(capsys, "sweep", "--config", str(ini), "--trials", "10", "--output",
                     str(csv), "--manifest", str(man), "-q")
    assert code == 0
    assert len(csv.read_text().splitlines()) == 5
    cfg = json.loads(man.read_text())["config"]
    assert cfg["n_trials"] == 10 and cfg["pulse"] == "rect" and cfg["ns_fixed"] == 8
    # the recorded INI reproduces the same CSV
    (tmp_path / "again.ini").write_text(json.loads(man.read_text())["config_ini"])
    code, out, _ = run(capsys, "sweep", "--config", str(tmp_path / "again.ini"), "-q")
    assert out == csv.read_text()


def test_sweep_rejects_unknown_config_keys(capsys, tmp_path):
    ini = tmp_path / "bad.ini"
    ini.write_text("[system]\nn_devices = 6\nn_devcies = 3\n[sweep]\ntrails = 5\n")
    code, _, err = run(capsys, "sweep", "--config", str(ini))
    assert code == EXIT_USAGE
    assert "n_devcies" in err and "trails" in err


def test_sweep_infeasible_unbiased(capsys, tmp_path):
    ini = tmp_path / "x.ini"
    ini.write_text("[pulse]\nns_rule = fixed\nns_fixed = 4\n[sweep]\nd_values = 3\n")
    code, _, err = run(capsys, "sweep", "--config", str(ini), "--include-unbiased", "-q")
    assert code == EXIT_INFEASIBLE


def test_sweep_extended_and_plot(capsys, tmp_path):
    svg = tmp_path / "p.svg"
    code, out, _ = run(capsys, "sweep", "--figure", "4", "--trials", "5", "--d-values", "0,1",
                       "--include-unbiased", "--extended", "--plot", str(svg), "-q")
    assert code == 0
    header = out.splitlines()[0].split(",")
    assert header[:9] == "d,MSE,MSE_mf,bias,bias_mf,se_MSE,se_MSE_mf,se_bias,se_bias_mf".split(",")
    assert "MSE_ub" in header and "n_s" in header
    assert svg.read_text().lstrip().startswith("<?xml")


def test_sweep_deterministic_across_threads(capsys):
    args = ["sweep", "--figure", "3", "--trials", "30", "--seed", "42", "-q"]
    outs = []
    for threads in ("1", "1", "3"):
        code, out, _ = run(capsys, *args, "--threads", threads)
        assert code == 0
        outs.append(out)
    assert outs[0] == outs[1] == outs[2]


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "aircomp_filters", "--version"],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout.startswith("aircomp ")
