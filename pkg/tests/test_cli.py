import csv
import io
import json
import subprocess
import sys

import numpy as np
import pytest

from cqsim.cli import main


def cqsim(*args):
    proc = subprocess.run([sys.executable, "-m", "cqsim", *args], capture_output=True, text=True)
    return proc.returncode, proc.stdout, proc.stderr


def values(stdout):
    return dict(line.split(": ", 1) for line in stdout.splitlines() if ": " in line)


def test_simulate_builtin_qft(tmp_path):
    rc, out, _ = cqsim("simulate", "--circuit", "builtin:qft", "--qubits", "10", "--theta", "8",
                       "--stride-bits", "6", "--csv", str(tmp_path / "m.csv"), "--json", str(tmp_path / "s.json"))
    assert rc == 0
    v = values(out)
    assert float(v["overall_min_ratio"]) >= 8 or int(v["threshold_violations"]) > 0
    rows = list(csv.DictReader(io.StringIO((tmp_path / "m.csv").read_text())))
    assert len(rows) == 70
    summary = json.loads((tmp_path / "s.json").read_text())
    assert summary["overall_min_ratio"] == pytest.approx(float(v["overall_min_ratio"]))


def test_simulate_circuit_file(tmp_path):
    path = tmp_path / "bell.qc"
    path.write_text("qubits 2\nh 0\ncx 0 1\n")
    rc, out, _ = cqsim("simulate", "--circuit", str(path), "--ladder", "0", "--reference")
    assert rc == 0
    assert float(values(out)["fidelity"]) == pytest.approx(1.0, abs=1e-12)


def test_missing_file_exits_2():
    rc, _, err = cqsim("simulate", "--circuit", "/nowhere/x.qc")
    assert rc == 2 and "/nowhere/x.qc" in err


@pytest.mark.parametrize("args", [
    ["simulate", "--circuit", "builtin:qft", "--qubits", "4", "--ladder", "1e-3"],
    ["simulate", "--circuit", "builtin:qft", "--qubits", "4", "--theta", "0.5"],
    ["simulate", "--circuit", "builtin:qft"],
    ["simulate", "--circuit", "builtin:nope", "--qubits", "4"],
    ["simulate", "--circuit", "builtin:grover", "--qubits", "4", "--marked", "16"],
    ["simulate", "--circuit", "builtin:qft", "--qubits", "4", "--stride-bits", "5"],
    ["simulate"],
    ["frobnicate"],
])
def test_config_errors_exit_2(args):
    assert cqsim(*args)[0] == 2


def test_parse_error_exit_2(tmp_path):
    path = tmp_path / "bad.qc"
    path.write_text("qubits 2\ncx 1 1\n")
    rc, _, err = cqsim("simulate", "--circuit", str(path))
    assert rc == 2 and "line 2" in err


def test_runtime_failure_exit_1(tmp_path):
    # the run succeeds but the checkpoint cannot be written
    assert main(["simulate", "--circuit", "builtin:qft", "--qubits", "4", "--checkpoint",
                 str(tmp_path / "missing-dir" / "c.ckpt")]) == 1


def test_checkpoint_resume_matches_straight_run(tmp_path):
    ckpt = tmp_path / "half.ckpt"
    base = ["--circuit", "builtin:qft", "--qubits", "8", "--theta", "4", "--stride-bits", "4"]
    assert main(["simulate", *base, "--checkpoint", str(ckpt), "--checkpoint-at", "30"]) == 0
    assert main(["simulate", *base, "--resume", str(ckpt), "--checkpoint", str(tmp_path / "a.ckpt")]) == 0
    assert main(["simulate", *base, "--checkpoint", str(tmp_path / "b.ckpt")]) == 0
    assert (tmp_path / "a.ckpt").read_bytes() == (tmp_path / "b.ckpt").read_bytes()
    # a checkpoint from another geometry is a config error
    assert main(["simulate", *base[:-1], "3", "--resume", str(ckpt)]) == 2


def test_compare_lossless(capsys):
    assert main(["compare", "--circuit", "builtin:grover", "--qubits", "6", "--ladder", "0"]) == 0
    v = values(capsys.readouterr().out)
    assert abs(float(v["fidelity"]) - 1) <= 1e-12
    assert float(v["compressed_norm"]) == pytest.approx(1.0)
    assert float(v["reference_norm"]) == pytest.approx(1.0)
    assert float(v["overhead_factor"]) > 0


def test_compare_size_guard():
    assert main(["compare", "--circuit", "builtin:qft", "--qubits", "12", "--max-dense-qubits", "10"]) == 2


def test_bench_rows(capsys):
    assert main(["bench", "--circuit", "builtin:qft", "--qubits", "10", "--stride-bits", "6",
                 "--thetas", "4,8,16"]) == 0
    rows = list(csv.DictReader(io.StringIO(capsys.readouterr().out)))
    assert [float(r["theta"]) for r in rows] == [4, 8, 16]
    for r in rows:
        assert float(r["min_ratio"]) >= float(r["theta"]) or int(r["threshold_violations"]) > 0
    assert float(rows[0]["fidelity"]) >= float(rows[-1]["fidelity"])


def test_bench_empty_thetas():
    assert main(["bench", "--circuit", "builtin:qft", "--qubits", "4", "--thetas", ""]) == 2


def test_codec_zero_file(tmp_path, capsys):
    path = tmp_path / "z.bin"
    np.zeros(10000).tofile(path)
    assert main(["codec", "--input", str(path), "--delta", "0"]) == 0
    v = values(capsys.readouterr().out)
    assert float(v["ratio"]) > 1000 and float(v["max_error"]) == 0


def test_codec_lossy_and_round_trip(tmp_path, capsys):
    path = tmp_path / "r.bin"
    np.random.default_rng(4).uniform(-1, 1, 20000).tofile(path)
    assert main(["codec", "--input", str(path), "--delta", "1e-4"]) == 0
    assert float(values(capsys.readouterr().out)["max_error"]) <= 1e-4
    out = tmp_path / "o.bin"
    assert main(["codec", "--input", str(path), "--delta", "0", "--output", str(out)]) == 0
    assert out.read_bytes() == path.read_bytes()


def test_codec_bad_inputs(tmp_path):
    assert main(["codec", "--input", str(tmp_path / "none.bin")]) == 2
    odd = tmp_path / "odd.bin"
    odd.write_bytes(b"1234567")
    assert main(["codec", "--input", str(odd)]) == 2
