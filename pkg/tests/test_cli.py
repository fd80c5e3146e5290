import json
import subprocess
import sys

import pytest

from somekawa.cli import dumps, main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_supersingular(capsys):
    code, out, _ = run(capsys, "supersingular", "--p", "7")
    assert code == 0 and json.loads(out) == [2, 4, 6]
    code, out, _ = run(capsys, "supersingular", "--p", "11", "--plain")
    assert code == 0 and len(out.split()) == 3


def test_domain_errors_exit_1(capsys):
    assert run(capsys, "supersingular", "--p", "9")[0] == 1
    assert run(capsys, "signatures", "--p", "7", "--ext", "+", "--lambda", "3", "--mu", "6")[0] == 1
    code, _, err = run(capsys, "table", "--p", "13", "--ext", "+", "--no-cache")
    assert code == 1 and "precondition" in err
    assert run(capsys, "diagonal", "--p", "7", "--ext", "+", "--lambda", "2", "--mu", "6", "--n", "0")[0] == 1


def test_usage_errors_exit_2(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["bogus"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        main(["signatures", "--p", "7"])
    assert exc.value.code == 2


def test_spans(capsys):
    code, out, _ = run(capsys, "spans", "--p", "7", "--ext", "+", "--lambda", "2", "--mu", "6")
    obj = json.loads(out)
    assert code == 0 and [r["nondegenerate"] for r in obj["rows"]] == [True, True, False, False, True, True]


def test_signatures_and_replay(capsys, tmp_path):
    code, out, _ = run(capsys, "signatures", "--p", "7", "--ext", "-", "--lambda", "2", "--mu", "6", "--precision", "16")
    obj = json.loads(out)
    assert code == 0 and obj["success"] and len(obj["witnesses"]) == 4
    f = tmp_path / "pair.json"
    f.write_text(out)
    code, out, _ = run(capsys, "replay", "--file", str(f))
    assert code == 0 and json.loads(out)["verified"]
    # a corrupted witness is reported and exits 1
    keys = list(obj["witnesses"])
    obj["witnesses"][keys[0]] = obj["witnesses"][keys[-1]]
    f.write_text(json.dumps(obj))
    code, out, _ = run(capsys, "replay", "--file", str(f))
    assert code == 1 and not json.loads(out)["verified"]
    assert run(capsys, "replay", "--file", str(tmp_path / "missing.json"))[0] == 1


def test_diagonal(capsys):
    code, out, _ = run(capsys, "diagonal", "--p", "7", "--ext", "+", "--lambda", "2", "--mu", "6", "--n", "3",
                       "--precision", "16")
    obj = json.loads(out)
    assert code == 0 and obj["depths"] == [3, 3]


def test_table_cache_is_byte_identical(capsys, tmp_path):
    args = ["table", "--p", "7", "--ext", "+", "--cache-dir", str(tmp_path), "--precision", "16"]
    code, first, err = run(capsys, *args)
    assert code == 0 and "9/9" in err
    code, second, _ = run(capsys, *args)
    assert second == first
    csvs = list(tmp_path.glob("*/table_p7_plus.csv"))
    assert len(csvs) == 1 and csvs[0].read_text() == first
    code, out, _ = run(capsys, "replay", "--file", str(csvs[0]))
    assert code == 0 and len(json.loads(out)["pairs"]) == 9


def test_cache_env(capsys, tmp_path, monkeypatch):
    monkeypatch.setenv("SOMEKAWA_CACHE", str(tmp_path))
    assert run(capsys, "table", "--p", "7", "--ext", "-", "--precision", "16", "--budget", "50")[0] == 0
    assert list(tmp_path.glob("*/p7_minus_2_6.json"))


def test_dumps_keeps_scalar_lists_inline():
    text = dumps({"a": [1, 2, 3], "b": {"c": [[1, 2], [3, 4]]}})
    assert '"a": [1, 2, 3]' in text and "[1, 2]" in text
    assert json.loads(text) == {"a": [1, 2, 3], "b": {"c": [[1, 2], [3, 4]]}}


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "somekawa", "supersingular", "--p", "7", "--plain"],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout.split() == ["2", "4", "6"]
