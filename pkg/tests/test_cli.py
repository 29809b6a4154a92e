"""End-to-end command behavior: files written, exit codes, reproducibility."""

import json

import pytest

from robustnn.cli import dispatch
from robustnn.dataset import load_dataset

SCENARIO_200 = "[scenario]\np = 200\nbeta = 0.6\nr = 0.7\nseed = 3\n"


def write_cfg(tmp_path, text, name="cfg.ini"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def test_print_config(capsys):
    assert dispatch(["--print-config"]) == 0
    out = capsys.readouterr().out
    assert "[scenario]" in out
    assert "p = 20000" in out


def test_no_command_prints_usage(capsys):
    assert dispatch([]) == 2
    assert "usage" in capsys.readouterr().err


def test_unknown_flag_returns_parser_code(capsys):
    assert dispatch(["gen", "--bogus"]) == 2
    capsys.readouterr()


def test_gen_writes_csv_and_manifest(tmp_path, capsys):
    cfg = write_cfg(tmp_path, SCENARIO_200)
    out = tmp_path / "data.csv"
    assert dispatch(["gen", "--config", cfg, "--out", str(out)]) == 0
    assert "wrote 3 rows" in capsys.readouterr().out
    dataset = load_dataset(out)
    assert dataset.samples.shape == (3, 200)
    assert list(dataset.labels) == ["X", "Y", "Y"]  # z defaults to a Y draw
    manifest = json.loads((tmp_path / "data.manifest.json").read_text())
    assert manifest["command"] == "gen"
    assert manifest["seed"] == 3
    assert manifest["schema_version"] == 1
    assert manifest["outputs"] == [str(out)]
    assert manifest["config"]["scenario"]["p"] == 200


def test_gen_replays_byte_identical_from_manifest(tmp_path):
    cfg = write_cfg(tmp_path, SCENARIO_200)
    out = tmp_path / "data.csv"
    assert dispatch(["gen", "--config", cfg, "--out", str(out)]) == 0
    first_csv = out.read_bytes()
    manifest_path = tmp_path / "data.manifest.json"
    first_manifest = manifest_path.read_bytes()
    argv = json.loads(first_manifest)["argv"]
    assert dispatch(argv) == 0
    assert out.read_bytes() == first_csv
    assert manifest_path.read_bytes() == first_manifest


def test_gen_seed_flag_overrides_config(tmp_path):
    cfg = write_cfg(tmp_path, SCENARIO_200)
    a = tmp_path / "a.csv"
    b = tmp_path / "b.csv"
    assert dispatch(["gen", "--config", cfg, "--out", str(a)]) == 0
    assert dispatch(["gen", "--config", cfg, "--seed", "7", "--out", str(b)]) == 0
    assert json.loads((tmp_path / "b.manifest.json").read_text())["seed"] == 7
    assert a.read_bytes() != b.read_bytes()


def test_gen_missing_config_errors(tmp_path, capsys):
    code = dispatch(
        ["gen", "--config", str(tmp_path / "nope.ini"), "--out", str(tmp_path / "x.csv")]
    )
    assert code == 1
    assert "error:" in capsys.readouterr().err


def test_classify_last_row(tmp_path, capsys):
    cfg = write_cfg(tmp_path, SCENARIO_200)
    data = tmp_path / "data.csv"
    dispatch(["gen", "--config", cfg, "--out", str(data)])
    out = tmp_path / "result.json"
    assert dispatch(["classify", "--data", str(data), "--out", str(out)]) == 0
    assert "predicted" in capsys.readouterr().out
    result = json.loads(out.read_text())
    assert result["row_index"] == 2
    assert result["true_label"] == "Y"
    assert result["predicted_label"] in ("X", "Y")
    assert result["correct"] == (result["predicted_label"] == "Y")
    assert result["method"] == "robust"
    assert (tmp_path / "result.manifest.json").exists()


def test_classify_bad_index(tmp_path, capsys):
    cfg = write_cfg(tmp_path, SCENARIO_200)
    data = tmp_path / "data.csv"
    dispatch(["gen", "--config", cfg, "--out", str(data)])
    code = dispatch(
        ["classify", "--data", str(data), "--index", "99", "--out", str(tmp_path / "r.json")]
    )
    assert code == 1
    assert "error:" in capsys.readouterr().err


def test_classify_missing_data(tmp_path, capsys):
    code = dispatch(
        ["classify", "--data", str(tmp_path / "nope.csv"), "--out", str(tmp_path / "r.json")]
    )
    assert code == 1
    assert "error:" in capsys.readouterr().err


def test_loo_and_cv_on_generated_data(tmp_path, capsys):
    cfg = write_cfg(
        tmp_path,
        "[scenario]\np = 200\nm = 2\nn = 2\nbeta = 0.6\nr = 0.7\nseed = 5\n",
    )
    data = tmp_path / "data.csv"
    dispatch(["gen", "--config", cfg, "--out", str(data)])

    loo_out = tmp_path / "loo.json"
    assert dispatch(["loo", "--data", str(data), "--method", "nn", "--out", str(loo_out)]) == 0
    payload = json.loads(loo_out.read_text())
    assert payload["total"] == 5
    assert 0.0 <= payload["accuracy"] <= 1.0
    assert set(payload["confusion"]) <= {"X->X", "X->Y", "Y->X", "Y->Y"}
    diagonal = sum(n for key, n in payload["confusion"].items() if key == key[0] + "->" + key[0])
    assert payload["correct"] == diagonal

    cv_out = tmp_path / "cv.json"
    assert dispatch(["cv", "--data", str(data), "--out", str(cv_out)]) == 0
    payload = json.loads(cv_out.read_text())
    assert payload["grid_size"] >= 1
    assert payload["minimizer_count"] >= 1
    assert isinstance(payload["theta_cv"], float)
    capsys.readouterr()


def test_sweep_writes_grid_and_dominance(tmp_path, capsys):
    cfg = write_cfg(
        tmp_path,
        "[scenario]\np = 60\nbeta = 0.6\nr = 0.7\nseed = 1\n"
        "[sweep]\nbeta_grid = 0.6, 0.8\nr_grid = 0.5, 0.9\ntrials = 6\n",
    )
    out = tmp_path / "grid.csv"
    assert dispatch(["sweep", "--config", cfg, "--out", str(out)]) == 0
    assert "2x2 cells" in capsys.readouterr().out
    dominance = tmp_path / "grid_dominance.csv"
    assert out.exists() and dominance.exists()
    lines = out.read_text().splitlines()
    assert lines[0] == "beta,r,method,rate,se,trials"
    assert len(lines) == 1 + 2 * 2 * 2  # cells x default methods (robust, nn)
    manifest = json.loads((tmp_path / "grid.manifest.json").read_text())
    assert manifest["outputs"] == [str(out), str(dominance)]
    assert manifest["config"]["trials_per_cell"] == 6
    assert manifest["config"]["methods"] == ["robust", "nn"]


def test_curves_c_kind(tmp_path, capsys):
    cfg = write_cfg(
        tmp_path,
        "[scenario]\np = 100\nbeta = 0.6\nr = 0.7\nseed = 2\n"
        "[curves]\nc_grid = 0.3, 0.6\nt_grid = 0.4, 0.8\ntrials = 5\n",
    )
    out = tmp_path / "curve.csv"
    assert dispatch(["curves", "--config", cfg, "--kind", "c", "--out", str(out)]) == 0
    assert out.read_text().splitlines()[0] == "c,value"
    details = json.loads((tmp_path / "curve.json").read_text())
    assert details["kind"] == "c"
    assert details["x"] == [0.3, 0.6]
    assert len(details["rate"]) == 2
    assert len(details["defaulted_fraction"]) == 2
    assert 0.0 <= details["nn_rate"] <= 1.0
    manifest = json.loads((tmp_path / "curve.manifest.json").read_text())
    assert manifest["outputs"] == [str(out), str(tmp_path / "curve.json")]
    capsys.readouterr()


def test_curves_threshold_kind(tmp_path, capsys):
    cfg = write_cfg(
        tmp_path,
        "[scenario]\np = 100\nbeta = 0.6\nr = 0.7\nseed = 2\n"
        "[curves]\nc_grid = 0.3, 0.6\nt_grid = 0.4, 0.8\ntrials = 5\n",
    )
    out = tmp_path / "tcurve.csv"
    assert dispatch(["curves", "--config", cfg, "--kind", "threshold", "--out", str(out)]) == 0
    assert out.read_text().splitlines()[0] == "t_over_shift,value"
    details = json.loads((tmp_path / "tcurve.json").read_text())
    assert details["kind"] == "threshold"
    assert details["defaulted_fraction"] is None  # fixed thresholds never default
    capsys.readouterr()


def test_apriori_curve(tmp_path, capsys):
    cfg = write_cfg(
        tmp_path,
        "[scenario]\np = 100\nbeta = 0.6\nr = 0.7\nseed = 2\n"
        "[apriori]\nt_grid = 0.0:2.0:1.0\nmethod = normal_approx\n",
    )
    out = tmp_path / "ap.csv"
    assert dispatch(["apriori", "--config", cfg, "--out", str(out)]) == 0
    assert "t_star" in capsys.readouterr().out
    lines = out.read_text().splitlines()
    assert lines[0] == "t,value"
    assert len(lines) == 4
    manifest = json.loads((tmp_path / "ap.manifest.json").read_text())
    assert manifest["config"]["t_star"] in (0.0, 1.0, 2.0)
    assert 0.0 <= manifest["config"]["predicted_success_at_t_star"] <= 1.0


def test_threshold_dist(tmp_path, capsys):
    cfg = write_cfg(
        tmp_path,
        SCENARIO_200 + "[threshold_dist]\ntrials = 5\nc = 0.5\nbins = 4\n",
    )
    out = tmp_path / "hist.csv"
    assert dispatch(["threshold-dist", "--config", cfg, "--out", str(out)]) == 0
    assert "defaulted fraction" in capsys.readouterr().out
    lines = out.read_text().splitlines()
    assert lines[0] == "bin_left,bin_right,proportion"
    assert len(lines) == 5
    manifest = json.loads((tmp_path / "hist.manifest.json").read_text())
    assert manifest["config"]["bins"] == 4
    assert 0.0 <= manifest["config"]["defaulted_fraction"] <= 1.0


def test_sample_size(tmp_path, capsys):
    cfg = write_cfg(
        tmp_path,
        "[scenario]\np = 100\nbeta = 0.6\nr = 0.7\nseed = 4\n"
        "[sample_size]\npairs = 1,1; 2,1\ntrials = 4\n",
    )
    out = tmp_path / "ss.csv"
    assert dispatch(["sample-size", "--config", cfg, "--out", str(out)]) == 0
    capsys.readouterr()
    lines = out.read_text().splitlines()
    assert lines[0] == "m,n,method,rate,se,trials"
    assert len(lines) == 1 + 2 * 2  # pairs x default methods
    manifest = json.loads((tmp_path / "ss.manifest.json").read_text())
    assert manifest["config"]["pairs"] == [[1, 1], [2, 1]]


def test_nn_trunc_requires_t(tmp_path, capsys):
    cfg = write_cfg(tmp_path, SCENARIO_200)
    data = tmp_path / "data.csv"
    dispatch(["gen", "--config", cfg, "--out", str(data)])
    code = dispatch(
        [
            "classify",
            "--data",
            str(data),
            "--method",
            "nn_trunc",
            "--out",
            str(tmp_path / "r.json"),
        ]
    )
    assert code == 1
    assert "error:" in capsys.readouterr().err
