import json
import math
import os
import subprocess
import sys

import numpy as np
import pytest
from scipy import special as sp

from opuc.cli import main
from opuc.errors import ConfigError
from opuc.report import (DEFAULT_CONFIG, SUITES, RunSpec, aggregate, config_hash, determinism_hash,
                         expand_config, explain, parse_config_text, run_suite)


def _run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_build_circular_jacobi(capsys, tmp_path):
    out = tmp_path / "cj.json"
    code, text, _ = _run(capsys, "build", "--family", "cj", "--a", "1", "--n", "8", "--route", "closed",
                         "--out", str(out))
    assert code == 0
    d = json.loads(out.read_text())
    assert d["schema"] == 1
    assert d["kappa"][1] == pytest.approx(2 / math.sqrt(3), rel=1e-15)
    assert "kappa_n" in text


def test_build_lebesgue_monomials(capsys, tmp_path):
    out = tmp_path / "leb.json"
    assert _run(capsys, "build", "--family", "lebesgue", "--n", "5", "--out", str(out))[0] == 0
    d = json.loads(out.read_text())
    for n, c in enumerate(d["phi"]):
        arr = np.array(c)[:, 0] + 1j * np.array(c)[:, 1]
        assert np.array_equal(arr, np.eye(n + 1)[n])


def test_build_bessel_by_moments(capsys, tmp_path):
    out = tmp_path / "mb.json"
    assert _run(capsys, "build", "--family", "mb", "--t", "1", "--n", "10", "--route", "moments",
                "--out", str(out))[0] == 0
    d = json.loads(out.read_text())
    r1 = d["phi0"][1][0] / d["kappa"][1]
    assert r1 == pytest.approx(-sp.iv(1, 1.0) / sp.iv(0, 1.0), rel=1e-13)
    assert d["route"] == "Moments"


def test_verify_examples(capsys, tmp_path):
    assert _run(capsys, "verify", "--suite", "functional-eq", "--family", "sz", "--a", "1", "--b", "0.5",
                "--n", "8")[0] == 0
    out = tmp_path / "dpii.json"
    assert _run(capsys, "verify", "--suite", "dpii", "--family", "mb", "--t", "1", "--n", "10",
                "--out", str(out))[0] == 0
    rep = json.loads(out.read_text())
    assert rep["suite"] == "dpii" and all(c["pass"] for c in rep["checks"])
    assert set(rep["checks"][0]) >= {"name", "residual", "scale", "tolerance", "pass"}


def test_verify_degenerate_family_exits_1(capsys):
    code, _, err = _run(capsys, "verify", "--suite", "delta", "--family", "lebesgue")
    assert code == 1 and "DegenerateReflection" in err


def test_failed_check_exits_2(capsys):
    code, text, _ = _run(capsys, "verify", "--suite", "recurrences", "--family", "cj", "--a", "1",
                         "--tol", "1e-30")
    assert code == 2 and "FAIL" in text


def test_report_all_empty_and_malformed(capsys, tmp_path):
    empty = tmp_path / "empty.toml"
    empty.write_text("")
    code, text, _ = _run(capsys, "report-all", str(empty), "--out", str(tmp_path / "e.json"))
    assert code == 0 and "0 runs" in text
    assert json.loads((tmp_path / "e.json").read_text())["reports"] == []
    bad = tmp_path / "bad.toml"
    bad.write_text('[[run]]\nsuite = "ladder"\nfamily = \n')
    code, _, err = _run(capsys, "report-all", str(bad))
    assert code == 3 and "line 3" in err
    badj = tmp_path / "bad.json"
    badj.write_text('{"run": [}')
    code, _, err = _run(capsys, "report-all", str(badj))
    assert code == 3 and "line 1" in err


def test_report_all_small_config_outputs(capsys, tmp_path):
    cfg = tmp_path / "c.toml"
    cfg.write_text('[[run]]\nsuite = "dpii"\nfamily = "mb"\nN = 6\nparams = { t = [0.5, 1.0] }\n')
    code, text, _ = _run(capsys, "report-all", str(cfg), "--out", str(tmp_path / "a.json"),
                         "--csv", str(tmp_path / "a.csv"), "--plot-dir", str(tmp_path / "plots"), "--jobs", "2")
    assert code == 0 and "2 runs" in text
    agg = json.loads((tmp_path / "a.json").read_text())
    assert agg["summary"]["passed"] == 2
    assert (tmp_path / "a.csv").read_text().startswith("suite,family,params,check")
    assert os.listdir(tmp_path / "plots")


def test_unwritable_output_exits_3(capsys, tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    code, _, _ = _run(capsys, "build", "--family", "cj", "--a", "1", "--out", str(blocker / "sub" / "o.json"))
    assert code == 3


def test_roots_and_disc_table(capsys, tmp_path):
    code, text, _ = _run(capsys, "roots", "--family", "cj", "--a", "1", "--n", "6", "--csv", str(tmp_path / "r.csv"))
    assert code == 0 and "inside the unit disk: True" in text
    code, text, _ = _run(capsys, "disc-table", "--family", "rs", "--q", "0.5", "--n", "4",
                         "--out", str(tmp_path / "d.csv"))
    assert code == 0 and (tmp_path / "d.csv").exists()


def test_explain_every_suite(capsys):
    anchors = set()
    for name in SUITES:
        text = explain(name)
        assert text.startswith(name)
        anchors.add(SUITES[name].anchor)
    assert len(anchors) == len(SUITES)
    assert _run(capsys, "--explain", "ladder")[0] == 0
    with pytest.raises(ConfigError):
        explain("nope")


def test_config_validation():
    with pytest.raises(ConfigError):
        expand_config({"run": [{"suite": "nope", "family": "cj"}]})
    with pytest.raises(ConfigError):
        expand_config({"run": [{"suite": "ladder", "family": "cj", "bogus": 1}]})
    specs = expand_config(parse_config_text('[[run]]\nsuite="routes"\nfamily="cj"\nparams={a=[1.0,2.0]}\n', "toml"))
    assert [s.params_dict["a"] for s in specs] == [1.0, 2.0]


def test_default_config_covers_the_suites():
    specs = expand_config(DEFAULT_CONFIG)
    assert len({s.suite for s in specs}) >= 14


def test_tolerance_override_and_hash():
    s1 = RunSpec("recurrences", "cj", (("a", 1.0),), 6)
    s2 = RunSpec("recurrences", "cj", (("a", 1.0),), 6, (("*", 1e-30),))
    r1, r2 = run_suite(s1), run_suite(s2)
    assert r1.passed and not r2.passed and r2.exit_code == 2
    assert config_hash(s1.hash_payload()) != config_hash(s2.hash_payload())
    assert config_hash(s1.hash_payload()) == config_hash(s1.hash_payload())


def test_determinism_excludes_runtime():
    specs = expand_config({"run": [{"suite": "delta", "family": "cj", "N": 6, "params": {"a": 1.0}}]})
    h = config_hash([s.hash_payload() for s in specs])
    a = aggregate([run_suite(s) for s in specs], h)
    b = aggregate([run_suite(s) for s in specs], h)
    b["runtime_ms"] += 123
    assert determinism_hash(a) == determinism_hash(b)


def test_grid_env_override(monkeypatch):
    from opuc.moments import default_grid_size

    monkeypatch.setenv("OPUC_GRID_M", "1024")
    assert default_grid_size(3) == 1024
    monkeypatch.setenv("OPUC_GRID_M", "x")
    with pytest.raises(ConfigError):
        default_grid_size(3)


def test_version_names_backend():
    out = subprocess.run([sys.executable, "-m", "opuc.cli", "--version"], capture_output=True, text=True,
                         env={**os.environ, "OPUC_NUMBA": "0"})
    assert out.returncode == 0
    assert "numpy kernels" in out.stdout
