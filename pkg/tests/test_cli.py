import json
import subprocess
import sys

import pytest

from esfkit.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_k_dist_example(capsys):
    code, out, _ = run(capsys, "k-dist", "--n", "2", "--theta", "1", "--format", "json")
    assert code == 0 and out == '{"1":0.5,"2":0.5}\n'


def test_exact_output(capsys):
    _, out, _ = run(capsys, "eve", "--n", "2", "--theta", "1", "--exact")
    assert json.loads(out)["q"] == {"0": "1/6", "1": "1/3", "2": "1/2"}


def test_lambda_exponent(capsys):
    code, out, _ = run(capsys, "lambda", "--two-n-exponent", "1656520")
    assert code == 0 and out.strip() == "3"


def test_csv_output(capsys):
    _, out, _ = run(capsys, "esf", "--n", "3", "--theta", "1", "--format", "csv")
    lines = out.splitlines()
    assert lines[0] == "partition,probability" and len(lines) == 4


def test_table_rows(capsys):
    _, out, _ = run(capsys, "table-3-1", "--replicates", "2000", "--seed", "42", "--exact")
    rows = json.loads(out)
    assert [r["row"] for r in rows] == ["most_frequent", "oldest"]
    assert rows[1]["1"] == "1/2" and rows[1]["0.1"] == "10/11"
    assert abs(rows[0]["1"] - 0.624) < 0.03


@pytest.mark.parametrize("argv", [
    ("coalescent", "--n", "5", "--theta", "1", "--replicates", "20", "--seed", "3"),
    ("moran", "--N", "2", "--theta", "1", "--samples", "500", "--seed", "3"),
    ("neutrality", "--sizes", "4,3,3", "--seed", "3"),
    ("gem-sample", "--theta", "2", "--seed", "3"),
    ("mapping", "--n", "100", "--samples", "500", "--seed", "3"),
])
def test_deterministic_output(capsys, argv):
    _, first, _ = run(capsys, *argv)
    _, second, _ = run(capsys, *argv)
    assert first == second and first


def test_every_subcommand_runs(capsys, tmp_path):
    commands = [
        ("esf", "--partition", "1,1,0", "--theta", "0.5"),
        ("age-dist", "--counts", "1,2", "--theta", "1"),
        ("age-dist", "--n", "4", "--k", "2", "--theta", "1", "--format", "csv"),
        ("oldest", "--n", "4", "--theta", "1", "--population"),
        ("order-stats", "--theta", "0.5", "--threshold", "0.5", "--replicates", "1000"),
        ("coalescent", "--n", "4", "--theta", "1", "--replicates", "50", "--summary"),
        ("hoppe", "--N", "2", "--theta", "1", "--replicates", "1000"),
        ("ages", "--N", "1", "--theta", "1", "--p", "0.5", "--n", "1"),
        ("charge-state", "--N", "5", "--u", "0.05", "--generations", "50", "--format", "csv"),
        ("lambda", "--two-n", "10"),
        ("perm", "--n", "6"),
        ("mapping", "--n", "6"),
    ]
    for argv in commands:
        code, out, err = run(capsys, *argv)
        assert code == 0, (argv, err)
        assert out
    target = tmp_path / "k.json"
    code, out, _ = run(capsys, "k-dist", "--n", "3", "--theta", "1", "--out", str(target))
    assert code == 0 and out == "" and json.loads(target.read_text())["3"] == pytest.approx(1 / 6)


def test_errors_exit_two(capsys):
    for argv in (("bogus",), ("k-dist", "--n", "2"), ("k-dist", "--n", "2", "--theta", "0"),
                 ("k-dist", "--n", "2", "--theta", "1", "--frobnicate")):
        with pytest.raises(SystemExit) as exc:
            main(list(argv))
        assert exc.value.code == 2
    code, _, err = run(capsys, "moran", "--N", "2", "--u", "1.5")
    assert code == 2 and "error" in err
    code, _, _ = run(capsys, "lambda")
    assert code == 2


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "esfkit", "k-dist", "--n", "3", "--theta", "1", "--exact"],
                         capture_output=True, text=True, check=True)
    assert json.loads(res.stdout) == {"1": "1/3", "2": "1/2", "3": "1/6"}
