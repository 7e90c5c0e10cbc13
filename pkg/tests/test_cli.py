import hashlib
import json
import subprocess
import sys

import pytest

from exactrnn.cli import main


def run_cli(args):
    return main(args)


def test_verify_pass_exit_code(capsys):
    assert run_cli(["verify", "pd-product", "--trials", "15", "--seed", "7"]) == 0
    out = capsys.readouterr().out
    assert out.startswith("PASS pd-product")


def test_verify_reports_counterexample(capsys, monkeypatch):
    from exactrnn import verify as verify_mod
    from exactrnn.verify import VerifyResult

    def broken(**kwargs):
        return VerifyResult("pd-product", 3, False, "expected 1/2 actual 1/3")

    monkeypatch.setitem(
        verify_mod.REGISTRY, "pd-product", ("broken for testing", broken)
    )
    assert run_cli(["verify", "pd-product"]) == 1
    out = capsys.readouterr().out
    assert "FAIL" in out and "expected 1/2 actual 1/3" in out


def test_unknown_construction_is_usage_error():
    assert run_cli(["verify", "nonsense"]) == 2


def test_gen_is_byte_deterministic(tmp_path):
    out1 = tmp_path / "a.jsonl"
    out2 = tmp_path / "b.jsonl"
    for out in (out1, out2):
        assert run_cli([
            "gen", "imm-z", "--count", "50", "--range", "1,12",
            "--seed", "5", "--out", str(out),
        ]) == 0
    h1 = hashlib.sha256(out1.read_bytes()).hexdigest()
    h2 = hashlib.sha256(out2.read_bytes()).hexdigest()
    assert h1 == h2


def test_gen_conn_labels_alternate(tmp_path):
    out = tmp_path / "conn.jsonl"
    assert run_cli([
        "gen", "conn", "--count", "10", "--range", "2,20",
        "--seed", "3", "--out", str(out),
    ]) == 0
    labels = [json.loads(line)["label"] for line in out.read_text().splitlines()]
    assert labels == [1, 0] * 5


def test_gen_imm_mod_schema(tmp_path):
    out = tmp_path / "mod.jsonl"
    assert run_cli([
        "gen", "imm-mod", "--count", "5", "--range", "1,8",
        "--seed", "2", "--m", "7", "--q-k", "3", "--out", str(out),
    ]) == 0
    for line in out.read_text().splitlines():
        rec = json.loads(line)
        assert rec["task"] == "imm-mod"
        assert len(rec["tokens"]) == 9 * rec["meta"]["T"]
        assert len(rec["targets"]) == rec["meta"]["T"]
        assert rec["meta"]["m"] == 7 and rec["meta"]["q_k"] == 3


def test_gen_rejects_non_prime_modulus(capsys, tmp_path):
    code = run_cli([
        "gen", "imm-mod", "--count", "2", "--range", "1,4",
        "--seed", "2", "--m", "6", "--out", str(tmp_path / "x.jsonl"),
    ])
    assert code == 2
    assert "error" in capsys.readouterr().err


def test_report_depth_csv(capsys):
    assert run_cli(["report", "depth", "--n-list", "8,64", "--dim", "1"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0] == "n,scan_depth,sequential_steps"
    rows = [line.split(",") for line in lines[1:]]
    assert [r[0] for r in rows] == ["8", "64"]
    assert int(rows[0][1]) <= 6 and int(rows[1][1]) <= 12
    assert [int(r[2]) for r in rows] == [7, 63]


def test_report_depth_from_trace_file(tmp_path, capsys):
    import random

    from exactrnn.lrnn import dump_steps
    from exactrnn.verify import random_linstep

    rng = random.Random(0)
    steps = [random_linstep(rng, 2) for _ in range(10)]
    trace = tmp_path / "trace.txt"
    trace.write_text(dump_steps(steps))
    assert run_cli(["report", "depth", "--trace", str(trace)]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[1].startswith("10,")


def test_report_precision_csv(tmp_path):
    out = tmp_path / "prec.csv"
    assert run_cli([
        "report", "precision", "--task", "conn", "--n-list", "16,64",
        "--out", str(out),
    ]) == 0
    lines = out.read_text().strip().splitlines()
    assert lines[0] == "n,max_value_bits"
    values = {int(a): int(b) for a, b in (line.split(",") for line in lines[1:])}
    assert values[64] >= values[16]


def test_seed_env_default(capsys, monkeypatch):
    monkeypatch.setenv("EXACTRNN_SEED", "123")
    assert run_cli(["verify", "scan-depth", "--trials", "3"]) == 0
    assert "seed=123" in capsys.readouterr().out


def test_console_script_installed():
    proc = subprocess.run(
        [sys.executable, "-m", "exactrnn.cli", "verify", "pd-product", "--trials", "3"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0
    assert "PASS" in proc.stdout


def test_verify_trials_must_be_positive(capsys):
    assert run_cli(["verify", "pd-product", "--trials", "0"]) == 2
    assert "trials" in capsys.readouterr().err


def test_verify_dnet_imm_quick(capsys):
    assert run_cli(["verify", "dnet-imm", "--blocks", "3", "--trials", "1"]) == 0
    assert "PASS dnet-imm" in capsys.readouterr().out


def test_verify_rwkv_imm_quick(capsys):
    assert run_cli(["verify", "rwkv-imm", "--blocks", "4", "--trials", "2"]) == 0
    assert "PASS rwkv-imm" in capsys.readouterr().out


def test_gen_imm_z_bare_clip_flag(tmp_path):
    out = tmp_path / "clip.jsonl"
    assert run_cli([
        "gen", "imm-z", "--count", "5", "--range", "1,5",
        "--seed", "9", "--clip", "--out", str(out),
    ]) == 0
    recs = [json.loads(line) for line in out.read_text().splitlines()]
    assert all(rec["meta"]["clip"] == 2**63 - 1 for rec in recs)
