import json

import pytest

from qsdc import transcript as tx
from qsdc.cli import format_tables, main
from qsdc.coding import transform
from oracles import transform_table


def run(argv):
    try:
        return main(argv)
    except SystemExit as exc:
        return exc.code


def test_simulate_honest(capsys):
    assert run(["simulate", "--messages", "100", "--lambda-c", "0", "--attack", "none", "--seed", "1"]) == 0
    out = capsys.readouterr().out
    assert "bob decoded: 100/100" in out
    assert "rq: 1 " in out and "rtot: 0.5" in out


def test_simulate_intercept_resend(capsys, tmp_path):
    code = run(["simulate", "--attack", "intercept-resend", "--lambda-c", "0.5", "--messages", "200",
                "--trials", "1000", "--seed", "7", "--out", str(tmp_path)])
    assert code == 0
    s = json.loads((tmp_path / "summary.json").read_text())["summary"]
    assert abs(s["detection_rate_per_control"] - 0.25) < 0.01
    assert "per-control detection: 0.2" in capsys.readouterr().out


@pytest.mark.parametrize("argv", [
    ["simulate", "--messages", "0", "--lambda-c", "0", "--seed", "1"],
    ["simulate", "--messages", "5", "--lambda-c", "0"],
    ["simulate", "--messages", "5", "--seed", "1"],
    ["simulate", "--messages", "5", "--message-string", "01", "--lambda-c", "0", "--seed", "1"],
    ["simulate", "--message-string", "0143", "--lambda-c", "0", "--seed", "1"],
    ["simulate", "--bits", "011", "--lambda-c", "0", "--seed", "1"],
    ["simulate", "--messages", "5", "--lambda-c", "1.5", "--seed", "1"],
    ["simulate", "--messages", "5", "--lambda-c", "1", "--seed", "1"],
    ["simulate", "--messages", "5", "--lambda-c", "0.2", "--seed", "-3"],
    ["simulate", "--messages", "5", "--lambda-c", "0.2", "--seed", "1", "--attack", "strong-mitm"],
    ["simulate", "--messages", "5", "--lambda-c", "0.2", "--seed", "1", "--transcripts"],
    ["sweep", "--lambda-c", "0.2", "--messages", "5", "--seed", "1", "--attack", "nope"],
    ["frobnicate"],
])
def test_usage_errors_exit_64(argv, capsys):
    assert run(argv) == 64
    assert "usage" in capsys.readouterr().err


def test_fixed_messages(capsys):
    assert run(["simulate", "--message-string", "0123", "--lambda-c", "0.3", "--seed", "4"]) == 0
    assert "4/4" in capsys.readouterr().out
    assert run(["simulate", "--bits", "00011011", "--lambda-c", "0", "--seed", "4"]) == 0
    assert "4/4" in capsys.readouterr().out


def test_fail_on_detect():
    argv = ["simulate", "--messages", "20", "--lambda-c", "0.5", "--seed", "3", "--trials", "20",
            "--attack", "weak-mitm"]
    assert run(argv) == 0
    assert run(argv + ["--fail-on-detect"]) == 2
    strong = ["simulate", "--messages", "20", "--lambda-c", "0.5", "--seed", "3", "--trials", "20",
              "--attack", "strong-mitm", "--allow-channel-rewriting", "--fail-on-detect"]
    assert run(strong) == 0


def test_help_lists_defaults(capsys):
    assert run(["simulate", "--help"]) == 0
    out = capsys.readouterr().out
    for text in ("--seed", "(required)", "default: none", "default: physical", "default: abort",
                 "default: 8", "default: 1"):
        assert text in out


def test_table_output(capsys):
    assert run(["table"]) == 0
    out = capsys.readouterr().out
    assert "sigma_2 swaps 0<->3, 1<->2" in out
    rows = [ln for ln in out.splitlines() if ln.startswith("sigma_") and "(" in ln]
    parsed = [[int(x) for x in ln.split(")")[1].split()] for ln in rows]
    assert parsed[0] == [0, 1, 2, 3]
    assert parsed == transform_table()
    assert "paper-literal" in out and "anticorrelated" in out
    assert format_tables() in out


def test_transcripts_and_replay(tmp_path, capsys):
    code = run(["simulate", "--messages", "6", "--lambda-c", "0.4", "--seed", "5", "--trials", "3",
                "--attack", "intercept-resend", "--out", str(tmp_path), "--transcripts"])
    assert code == 0
    files = sorted((tmp_path / "transcripts").glob("*.jsonl"))
    assert len(files) == 3
    for f in files:
        assert run(["replay", str(f)]) == 0
    lines = files[0].read_text().splitlines()
    rec = json.loads(lines[1])
    rec["a_n"] = (rec["a_n"] + 1) % 4
    lines[1] = json.dumps(rec)
    files[0].write_text("\n".join(lines) + "\n")
    capsys.readouterr()
    assert run(["replay", str(files[0])]) == 1
    assert "MISMATCH at record 0" in capsys.readouterr().out
    files[1].write_text("{}\n")
    assert run(["replay", str(files[1])]) == 65
    assert run(["replay", str(tmp_path / "missing.jsonl")]) == 64


def test_sweep_to_stdout(capsys):
    assert run(["sweep", "--lambda-c", "0.2,0.5", "--messages", "4", "--attack", "none,weak-mitm",
                "--seed", "2", "--trials", "20"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0].startswith("lambda_c,n_messages,attack,detection_rate")
    assert len(lines) == 5


def test_verify_quick_and_fault(capsys):
    assert run(["verify", "--scale", "0.02", "--only", "1,3,9"]) == 0
    out = capsys.readouterr().out
    assert out.count("PASS") == 3
    assert run(["verify", "--scale", "0.02", "--only", "1", "--inject-fault", "transform-table"]) == 1
    assert "FAIL" in capsys.readouterr().out
    # The fault is scoped to the call.
    assert transform(0, 1) == 2


def test_verify_reports_expected_fail(capsys):
    assert run(["verify", "--scale", "0.05", "--only", "11"]) == 0
    assert "XFAIL" in capsys.readouterr().out
