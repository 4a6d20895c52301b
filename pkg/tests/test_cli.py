import csv
import json

import numpy as np
import pytest

from qnd.cli import main
from qnd.harness import AnalysisReport, analyze, sweep, verify
from qnd.zoo import luders, pauli_observable, trivial_instrument, weak_measurement

X, Z = pauli_observable("x"), pauli_observable("z")


def bundle(tmp_path, name):
    assert main(["example", name, str(tmp_path / name)]) == 0
    d = tmp_path / name
    return ["--instrument", str(d / "instrument.json"), "--obs-x", str(d / "obs_x.json"), "--obs-z", str(d / "obs_z.json")]


def test_analyze_luders_bundle(tmp_path, capsys):
    out = tmp_path / "report.json"
    assert main(["analyze", *bundle(tmp_path, "luders-mub"), "--restarts", "2", "--out", str(out)]) == 0
    rep = AnalysisReport.from_json(out.read_text())
    assert rep.noise_x == pytest.approx(0.0, abs=1e-9)
    assert rep.disturbance_lower == pytest.approx(1.0, abs=1e-9)
    assert rep.disturbance_upper == pytest.approx(1.0, abs=1e-6)
    assert rep.c == pytest.approx(0.5, abs=1e-12)
    assert all(c.status == "pass" for c in rep.checks)
    assert all(c.margin >= -1e-9 for c in rep.checks)


def test_analyze_trivial_bundle_csv(tmp_path, capsys):
    args = bundle(tmp_path, "trivial")
    capsys.readouterr()
    assert main(["analyze", *args, "--restarts", "0", "--format", "csv"]) == 0
    rows = dict(csv.reader(capsys.readouterr().out.splitlines()))
    assert float(rows["noise_x"]) == pytest.approx(1.0, abs=1e-12)
    assert float(rows["disturbance_lower"]) == pytest.approx(0.0, abs=1e-12)
    assert float(rows["disturbance_upper"]) == pytest.approx(0.0, abs=1e-12)
    assert all(v.startswith("pass") for k, v in rows.items() if k.startswith("check:"))


def test_analyze_malformed_observable(tmp_path, capsys):
    args = bundle(tmp_path, "trivial")
    bad = tmp_path / "bad_obs.json"
    bad.write_text('{"eigenvalues": [1, -1], "vectors": [[[1, 0]], [[0, 0], [1, 0]]]}')
    args[3] = str(bad)
    out = tmp_path / "never.json"
    assert main(["analyze", *args, "--out", str(out)]) == 2
    assert not out.exists()
    assert "bad_obs.json" in capsys.readouterr().err


def test_analyze_dimension_mismatch_names_file(tmp_path, capsys):
    args = bundle(tmp_path, "trivial")
    q = tmp_path / "qutrit.json"
    q.write_text(json.dumps({"eigenvalues": [0, 1, 2], "vectors": [[[1, 0], [0, 0], [0, 0]], [[0, 0], [1, 0], [0, 0]], [[0, 0], [0, 0], [1, 0]]]}))
    args[5] = str(q)
    assert main(["analyze", *args]) == 2
    err = capsys.readouterr().err
    assert "qutrit.json" in err and "--obs-z" in err


def test_analyze_degenerate_observable_names_file(tmp_path, capsys):
    args = bundle(tmp_path, "trivial")
    flat = tmp_path / "flat.json"
    flat.write_text(json.dumps({"eigenvalues": [1.0], "projectors": [[[[1, 0], [0, 0]], [[0, 0], [1, 0]]]]}))
    args[3] = str(flat)
    out = tmp_path / "report.json"
    assert main(["analyze", *args, "--out", str(out)]) == 2
    err = capsys.readouterr().err
    assert "flat.json" in err and "--obs-x" in err
    assert not out.exists()


def test_report_roundtrip_lossless():
    rep = analyze(weak_measurement(X, 0.3), X, Z, restarts=1, seed=4, instrument_id="weak")
    back = AnalysisReport.from_json(rep.to_json())
    assert back == rep
    assert AnalysisReport.from_dict(rep.to_dict()) == rep


def test_report_is_deterministic():
    a = analyze(weak_measurement(X, 0.6), X, Z, restarts=2, seed=9)
    b = analyze(weak_measurement(X, 0.6), X, Z, restarts=2, seed=9)
    assert a.to_json() == b.to_json()


def test_verify_small_sweeps():
    for dim, k in ((2, 1), (3, 2), (4, 1)):
        s = verify(dim, 20, seed=1, kraus_per_outcome=k)
        assert s["violations"] == 0
        assert 1 <= s["tightest_seed"] < 21


def test_verify_cli_deterministic(capsys):
    assert main(["verify", "--dim", "2", "--trials", "30", "--seed", "5"]) == 0
    first = capsys.readouterr().out
    assert main(["verify", "--dim", "2", "--trials", "30", "--seed", "5"]) == 0
    assert capsys.readouterr().out == first
    assert json.loads(first)["violations"] == 0


def test_verify_rejects_dim():
    with pytest.raises(SystemExit) as err:
        main(["verify", "--dim", "5"])
    assert err.value.code == 2


def test_parallel_matches_serial(monkeypatch):
    serial = verify(2, 8, seed=3)
    monkeypatch.setenv("QND_THREADS", "2")
    parallel = verify(2, 8, seed=3)
    for key in ("violations", "min_margins", "tightest_seed"):
        assert serial[key] == parallel[key]


def test_sweep_weak_csv(tmp_path):
    out = tmp_path / "weak.csv"
    assert main(["sweep", "--family", "weak", "--steps", "21", "--restarts", "0", "--out", str(out)]) == 0
    with out.open() as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 21
    assert list(rows[0]) == ["param", "noise_x", "disturbance_lower", "disturbance_upper", "v_n", "v_d", "bound_margin"]
    noise = [float(r["noise_x"]) for r in rows]
    assert all(b <= a + 1e-12 for a, b in zip(noise, noise[1:]))
    assert all(float(r["bound_margin"]) >= -1e-9 for r in rows)
    assert all(float(r["disturbance_lower"]) <= float(r["disturbance_upper"]) for r in rows)
    # endpoints against direct analyses
    lo = analyze(trivial_instrument(2), X, Z, restarts=0)
    hi = analyze(luders(X), X, Z, restarts=0)
    for row, rep in ((rows[0], lo), (rows[-1], hi)):
        assert float(row["noise_x"]) == pytest.approx(rep.noise_x, abs=1e-9)
        assert float(row["disturbance_lower"]) == pytest.approx(rep.disturbance_lower, abs=1e-9)
        assert float(row["disturbance_upper"]) == pytest.approx(rep.disturbance_upper, abs=1e-9)


def test_sweep_full_precision():
    rows = sweep("noisy-luders", 0.0, 0.5, 3, restarts=0)
    from qnd.harness import rows_to_csv

    parsed = list(csv.DictReader(rows_to_csv(rows).splitlines()))
    for r, p in zip(rows, parsed):
        assert float(p["noise_x"]) == r["noise_x"]
        assert float(p["v_d"]) == r["v_d"]


def test_sweep_unknown_family(capsys):
    assert main(["sweep", "--family", "strong", "--steps", "3"]) == 2
    assert "unknown family" in capsys.readouterr().err


def test_skipped_checks_do_not_fail():
    x3 = np.diag([0.0, 1.0, np.sqrt(2)])
    from qnd.core import Observable
    from qnd.zoo import random_basis_pair, random_instrument

    obs = Observable.from_hermitian(x3)
    rep = analyze(random_instrument(3, seed=1), obs, random_basis_pair(3, seed=1)[1], restarts=0)
    statuses = {c.name: c.status for c in rep.checks}
    assert statuses["msd_tradeoff"] == "skipped"
    assert rep.msd is None
    assert rep.all_passed
