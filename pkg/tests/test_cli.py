import csv
import json

import pytest

from qct import cli


def run(argv, capsys=None):
    code = cli.main(argv)
    return code


def read_rows(path):
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        return header, list(reader)


def test_teleport_single_row(tmp_path):
    out = tmp_path / "row.csv"
    code = run([
        "teleport", "--model", "star", "--n", "1", "--j", "1", "--h", "1",
        "--basis", "x", "--observable", "charge", "--a", "0", "--out", str(out),
    ])
    assert code == 0
    header, rows = read_rows(out)
    assert header == cli.COLUMNS
    assert len(rows) == 1
    row = dict(zip(header, rows[0]))
    assert float(row["delta_exact"]) == pytest.approx(-0.052786, abs=5e-7)
    assert row["model"] == "star" and row["observable"] == "charge"


def test_sweep_grid_shape_and_monotonicity(tmp_path):
    out = tmp_path / "sweep.csv"
    code = run([
        "sweep", "--variable", "j", "--start", "0", "--stop", "4", "--steps", "41",
        "--model", "star", "--n", "1", "--out", str(out), "--verify",
    ])
    assert code == 0
    header, rows = read_rows(out)
    assert len(rows) == 41
    j_values = [float(dict(zip(header, row))["j"]) for row in rows]
    assert j_values == sorted(j_values)
    assert j_values[0] == 0.0 and j_values[-1] == 4.0


def test_sweep_rows_round_trip_floats(tmp_path):
    out = tmp_path / "sweep.csv"
    run([
        "sweep", "--variable", "j", "--start", "0.1", "--stop", "2.1", "--steps", "5",
        "--model", "nn", "--n", "2", "--out", str(out),
    ])
    header, rows = read_rows(out)
    from qct import models, protocol

    for raw in rows:
        row = dict(zip(header, raw))
        config = protocol.ProtocolConfig(
            spec=models.ModelSpec(kind=row["model"], n=int(row["n"]), j=float(row["j"]), h=float(row["h"])),
            basis=row["basis"], observable=row["observable"], a=int(row["a"]),
        )
        again = protocol.run_on_ground_state(config)
        assert repr(again.delta) == row["delta_exact"]  # exact 17-digit round trip


def test_keyrate_rows(tmp_path):
    out = tmp_path / "keyrate.csv"
    code = run([
        "keyrate", "--model", "nn", "--n", "2", "--j", "2", "--h", "1",
        "--noise", "bob-phaseflip", "--p", "0:0.1:11", "--out", str(out),
    ])
    assert code == 0
    header, rows = read_rows(out)
    assert len(rows) == 11
    k_values = [float(dict(zip(header, row))["k_asym"]) for row in rows]
    assert k_values[0] > 0.0
    assert all(k2 <= k1 + 1e-12 for k1, k2 in zip(k_values, k_values[1:]))


def test_output_is_deterministic(tmp_path):
    args = [
        "sweep", "--variable", "h", "--start", "0.2", "--stop", "1.4", "--steps", "7",
        "--model", "nn", "--n", "2",
    ]
    first = tmp_path / "a.csv"
    second = tmp_path / "b.csv"
    run(args + ["--out", str(first)])
    run(args + ["--out", str(second)])
    assert first.read_bytes() == second.read_bytes()


def test_thread_pool_does_not_change_bytes(tmp_path, monkeypatch):
    args = [
        "sweep", "--variable", "j", "--start", "0.5", "--stop", "2.5", "--steps", "9",
        "--model", "nn", "--n", "2",
    ]
    serial = tmp_path / "serial.csv"
    pooled = tmp_path / "pooled.csv"
    monkeypatch.delenv("QCT_THREADS", raising=False)
    run(args + ["--out", str(serial)])
    monkeypatch.setenv("QCT_THREADS", "4")
    run(args + ["--out", str(pooled)])
    assert serial.read_bytes() == pooled.read_bytes()


def test_bad_thread_env_rejected(tmp_path, monkeypatch):
    monkeypatch.setenv("QCT_THREADS", "zero")
    code = run([
        "sweep", "--variable", "j", "--start", "0", "--stop", "1", "--steps", "3",
        "--out", str(tmp_path / "x.csv"),
    ])
    assert code == 2


def test_config_file_merging(tmp_path):
    config = tmp_path / "run.conf"
    config.write_text("j = 1\nmodel = star\nn = 1\n")
    out = tmp_path / "out.csv"
    code = run(["teleport", "--config", str(config), "--j", "2", "--out", str(out)])
    assert code == 0
    header, rows = read_rows(out)
    row = dict(zip(header, rows[0]))
    assert float(row["j"]) == 2.0  # flag beats file
    assert row["model"] == "star"


def test_empty_config_equals_flags_only(tmp_path):
    config = tmp_path / "empty.conf"
    config.write_text("# nothing here\n")
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    run(["teleport", "--j", "1.5", "--out", str(a), "--config", str(config)])
    run(["teleport", "--j", "1.5", "--out", str(b)])
    assert a.read_bytes() == b.read_bytes()


def test_unknown_config_key_rejected(tmp_path, capsys):
    config = tmp_path / "bad.conf"
    config.write_text("coupling = 3\n")
    code = run(["teleport", "--config", str(config)])
    assert code == 2
    assert "coupling" in capsys.readouterr().err


def test_illegal_basis_combo_exits_2(tmp_path):
    code = run(["teleport", "--model", "star", "--n", "2", "--basis", "y",
                "--out", str(tmp_path / "x.csv")])
    assert code == 2


def test_degenerate_model_exits_1(tmp_path):
    code = run(["teleport", "--model", "nn", "--n", "2", "--h", "0", "--j", "1",
                "--out", str(tmp_path / "x.csv")])
    assert code == 1


def test_json_format_mirrors_rows(tmp_path):
    out_csv = tmp_path / "rows.csv"
    out_json = tmp_path / "rows.json"
    args = ["teleport", "--model", "nn", "--n", "2", "--j", "2"]
    run(args + ["--out", str(out_csv)])
    run(args + ["--out", str(out_json)])
    header, rows = read_rows(out_csv)
    data = json.loads(out_json.read_text())
    assert len(data) == len(rows) == 1
    for col, raw in zip(header, rows[0]):
        value = data[0][col]
        if raw == "":
            assert value is None
        elif isinstance(value, float):
            assert repr(value) == raw
        else:
            assert str(value) == raw


def test_shots_and_counts_export_then_ingest(tmp_path):
    counts = tmp_path / "counts.json"
    out = tmp_path / "shots.csv"
    code = run([
        "shots", "--model", "star", "--n", "2", "--n-shots", "4000", "--seed", "9",
        "--counts-out", str(counts), "--out", str(out),
    ])
    assert code == 0
    header, rows = read_rows(out)
    row = dict(zip(header, rows[0]))
    assert int(row["n_shots"]) == 4000
    mean = float(row["mean"])

    ingest_out = tmp_path / "ingest.csv"
    code = run(["ingest", str(counts), "--out", str(ingest_out)])
    assert code == 0
    header, rows = read_rows(ingest_out)
    row = dict(zip(header, rows[0]))
    assert float(row["mean"]) == pytest.approx(mean, abs=1e-12)
    assert int(row["n_shots"]) == 4000


def test_ingest_rejects_malformed_file(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"basis": "z", "n_sites": 3, "counts": {"00": 5}}))
    assert run(["ingest", str(bad)]) == 2
    missing = tmp_path / "missing.json"
    assert run(["ingest", str(missing)]) == 2


def test_noise_command_reports_threshold(tmp_path, capsys):
    out = tmp_path / "noise.csv"
    code = run([
        "noise", "--model", "star", "--n", "1", "--noise", "classical-flip",
        "--p-grid", "0:0.5:26", "--out", str(out),
    ])
    assert code == 0
    captured = capsys.readouterr().out
    assert "p*=0.2639" in captured
    header, rows = read_rows(out)
    assert len(rows) == 26


def test_sweep_default_grids(tmp_path):
    out = tmp_path / "default.csv"
    assert run(["sweep", "--variable", "j", "--model", "star", "--n", "1", "--out", str(out)]) == 0
    header, rows = read_rows(out)
    assert len(rows) == 41
    assert float(dict(zip(header, rows[-1]))["j"]) == 4.0


def test_sweep_p_requires_noise(tmp_path):
    code = run(["sweep", "--variable", "p", "--start", "0", "--stop", "0.5", "--steps", "3",
                "--out", str(tmp_path / "x.csv")])
    assert code == 2


def test_console_script_runs():
    import subprocess
    import sys

    proc = subprocess.run(
        [sys.executable, "-m", "qct.cli", "teleport", "--model", "star", "--n", "1"],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0
    assert "delta=-0.052786" in proc.stderr
    assert proc.stdout.startswith(",".join(cli.COLUMNS[:3]))


def test_shots_rows_pass_verification(tmp_path):
    out = tmp_path / "shots.csv"
    code = run([
        "shots", "--model", "nn", "--n", "2", "--j", "2", "--n-shots", "2000",
        "--seed", "3", "--verify", "--out", str(out),
    ])
    assert code == 0
