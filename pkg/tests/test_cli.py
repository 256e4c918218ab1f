import json
import os
import subprocess
import sys

import pytest

from qsuper.cli import main, parse_factor, read_config_file, table, UsageError
from qsuper.pool import ordered_map, worker_count


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_build_text_and_json(capsys):
    code, out, _ = run(capsys, "build", "--M", "2", "--N", "2", "--sign", "+", "--r", "2")
    assert code == 0 and "dimension" in out
    code, out, _ = run(capsys, "build", "--M", "2", "--N", "2", "--sign", "+", "--r", "2", "--format", "json")
    js = json.loads(out)
    assert js["dim"] == js["tableau_count"] == 8 and js["ambient_dim"] == 16


def test_build_exit_codes(capsys):
    assert run(capsys, "build", "--M", "2", "--N", "1", "--sign", "-", "--r", "2")[0] == 2
    assert run(capsys, "build", "--M", "3", "--N", "3", "--sign", "+", "--r", "3", "--cap", "100")[0] == 3
    assert run(capsys, "build", "--q", "1", "--sign", "+", "--r", "1")[0] == 2
    assert run(capsys, "build", "--q", "abc", "--sign", "+", "--r", "1")[0] == 2
    assert run(capsys, "build", "--mode", "symbolic-q", "--sign", "+", "--r", "1")[0] == 2
    assert run(capsys, "build", "--mode", "symbolic-u", "--sign", "+", "--r", "1")[0] == 2


def test_argparse_usage_is_exit_two(capsys):
    with pytest.raises(SystemExit) as info:
        main(["nosuch"])
    assert info.value.code == 2


def test_rmatrix(capsys):
    code, out, _ = run(capsys, "rmatrix", "--M", "1", "--N", "1", "--kind", "PlusMinus", "--format", "json")
    js = json.loads(out)
    assert code == 0 and js["module_map"]["commutes"] and js["dim"] == 4
    assert run(capsys, "rmatrix", "--mode", "numeric")[0] == 2


def test_denoms_mixed_gl11(capsys):
    code, out, _ = run(capsys, "denoms", "--M", "1", "--N", "1", "--q", "2/1", "--kinds", "mixed", "--format", "json")
    js = json.loads(out)
    assert code == 0 and js["all_match"]
    (cell,) = js["cells"]
    assert cell["computed"] == "u - 16" and cell["computed_ab"] == "a - 16*b"


def test_denoms_text_and_empty(capsys):
    code, out, _ = run(capsys, "denoms", "--M", "2", "--N", "1", "--kinds", "same", "--s-max", "1", "--t-max", "1")
    assert code == 0 and "FusedSame" in out
    code, out, _ = run(capsys, "denoms", "--M", "1", "--N", "1", "--kinds", "mixed", "--s-max", "0")
    assert code == 0 and out.strip() == "empty grid"
    assert run(capsys, "denoms", "--kinds", "odd")[0] == 2
    assert run(capsys, "denoms", "--normalization", "Z")[0] == 2


def test_cyclicity_and_simplicity(capsys):
    code, out, _ = run(capsys, "cyclicity", "--M", "2", "--N", "1", "--factor", "+,1,625/16", "--factor=-,1,1",
                       "--format", "json")
    js = json.loads(out)
    assert code == 0 and js["verdict"]["brute_hw"] is False and js["verdict"]["c3"] is False
    code, out, _ = run(capsys, "simplicity", "--M", "1", "--N", "1", "--factor", "+,1,25/4", "--factor=-,1,4/25",
                       "--format", "json")
    js = json.loads(out)
    assert code == 0 and js["simple"] is False and js["agrees"]
    assert run(capsys, "simplicity")[0] == 2
    assert run(capsys, "simplicity", "--factor", "+,x")[0] == 2
    assert run(capsys, "cyclicity", "--factor", "+,1,1", "--factor", "+,1,2", "--factor=-,1,3",
               "--cap", "20")[0] == 3


def test_scan_question(capsys):
    code, out, _ = run(capsys, "scan-question", "--M", "1", "--N", "1", "--s", "2", "--radius", "2", "--format", "json")
    js = json.loads(out)
    assert code == 0 and js["counterexamples"] == [] and js["lattice_size"] == 10
    assert run(capsys, "scan-question", "--s", "1")[0] == 2


def test_verify_all_subset(capsys, tmp_path):
    dest = tmp_path / "report.json"
    code, out, err = run(capsys, "verify-all", "--only", "weights,11", "--output", str(dest), "--progress")
    assert code == 0
    js = json.loads(dest.read_text())
    assert [c["number"] for c in js["checks"]] == [3, 11] and js["all_passed"]
    assert "weights" in out and "[ 3]" in err
    assert run(capsys, "verify-all", "--only", "nosuch")[0] == 2


def test_verify_all_rejects_bad_thread_env(capsys, monkeypatch):
    monkeypatch.setenv("QSUPER_THREADS", "zero")
    assert run(capsys, "verify-all", "--only", "3")[0] == 2


def test_config_file_and_override(capsys, tmp_path):
    conf = tmp_path / "session.conf"
    conf.write_text("# session\nM = 1\nN = 1\nq = 2/1\ncap = 64\nformat = json\n")
    assert read_config_file(str(conf)) == {"M": "1", "N": "1", "q": "2/1", "dimension_cap": "64", "format": "json"}
    code, out, _ = run(capsys, "denoms", "--config", str(conf), "--kinds", "mixed")
    js = json.loads(out)
    assert code == 0 and js["q"] == "2/1" and js["M"] == 1
    code, out, _ = run(capsys, "denoms", "--config", str(conf), "--kinds", "mixed", "--q", "5/2")
    assert json.loads(out)["q"] == "5/2"


def test_config_file_errors(tmp_path):
    bad = tmp_path / "bad.conf"
    bad.write_text("colour = red\n")
    with pytest.raises(UsageError, match="unknown key"):
        read_config_file(str(bad))
    bad.write_text("M 2\n")
    with pytest.raises(UsageError, match="key=value"):
        read_config_file(str(bad))
    with pytest.raises(UsageError):
        read_config_file(str(tmp_path / "missing.conf"))


def test_config_file_bad_value(capsys, tmp_path):
    conf = tmp_path / "c.conf"
    conf.write_text("M = two\n")
    assert run(capsys, "build", "--config", str(conf), "--sign", "+", "--r", "1")[0] == 2


def test_parse_factor():
    f = parse_factor("-,2,-3/2")
    assert (f.sign, f.r, f.a) == ("-", 2, -1.5)
    assert parse_factor("+,1").a == 1
    with pytest.raises(UsageError):
        parse_factor("+")


def test_table_alignment():
    text = table([(1, "ab"), (10, "c")], ["n", "value"])
    lines = text.splitlines()
    assert lines[0] == "n   value"
    assert lines[1] == "--  -----"
    assert lines[2] == "1   ab"


def test_output_is_byte_identical_across_processes(tmp_path):
    cmd = [sys.executable, "-m", "qsuper", "verify-all", "--only", "1,3", "--format", "json", "--seed", "7"]
    env = dict(os.environ, QSUPER_THREADS="1")
    first = subprocess.run(cmd, capture_output=True, env=env, check=True).stdout
    second = subprocess.run(cmd, capture_output=True, env=env, check=True).stdout
    assert first == second and json.loads(first)["seed"] == 7
    other = subprocess.run(cmd[:-1] + ["8"], capture_output=True, env=env, check=True).stdout
    assert json.loads(other)["checks"][0]["details"] != json.loads(first)["checks"][0]["details"]


def test_worker_count(monkeypatch):
    monkeypatch.setenv("QSUPER_THREADS", "2")
    assert worker_count(8) == 2 and worker_count(1) == 1
    monkeypatch.setenv("QSUPER_THREADS", "0")
    with pytest.raises(ValueError):
        worker_count(4)
    monkeypatch.delenv("QSUPER_THREADS")
    assert worker_count(3) == 3


def _square(x):
    return x * x


def test_ordered_map_keeps_order(monkeypatch):
    monkeypatch.setenv("QSUPER_THREADS", "2")
    assert ordered_map(_square, range(10), 2) == [x * x for x in range(10)]
    assert ordered_map(_square, [], 2) == []
