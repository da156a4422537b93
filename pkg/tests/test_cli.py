import json
import subprocess
import sys

import pytest

from kothe_hankel.certificate import validate
from kothe_hankel.cli import main

LIN = "Linf:linear:c=1"


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_seq_stability(capsys):
    code, out, _ = run(capsys, "seq", "stability", "--family", "linear:c=1", "--window", "1:512")
    data = json.loads(out)
    assert code == 0 and data["verdict"] == "StableAtScale" and data["seed"] == 0


def test_seq_dominate(capsys):
    code, out, _ = run(capsys, "seq", "dominate", "--kind", "C1", "--alpha", "log",
                       "--beta", "linear:c=1")
    assert code == 0 and json.loads(out)["verdict"] == "HoldsAtScale"


def test_seq_refuted_table(tmp_path, capsys, monkeypatch):
    import math

    (tmp_path / "exp.csv").write_text("".join(f"{math.exp(n)!r}\n" for n in range(1, 65)))
    monkeypatch.chdir(tmp_path)
    code, out, _ = run(capsys, "seq", "stability", "--family", "table:@exp.csv", "--window", "1:64")
    assert code == 1 and json.loads(out)["verdict"] == "RefutedAtScale"


def test_seq_inconclusive_exit_two(capsys):
    code, out, _ = run(capsys, "seq", "dominate", "--kind", "C1", "--alpha", "power:p=2",
                       "--beta", "linear:c=1")
    assert code == 2 and json.loads(out)["verdict"] == "Inconclusive"


@pytest.mark.parametrize("argv", [
    ["seq", "stability", "--family", "bogus"],
    ["seq", "stability"],
    ["seq", "stability", "--family", "log", "--window", "5"],
    ["seq", "subadditive", "--beta", "log", "--M", "0.5"],
    ["certify", "--op", "hankel", "--domain", LIN, "--codomain", LIN],
    ["certify", "--op", "forward", "--symbol", "delta", "--domain", LIN, "--codomain", LIN],
    ["certify", "--op", "hankel", "--symbol", "nosuch", "--domain", LIN, "--codomain", LIN],
    ["certify", "--op", "hankel", "--symbol", "delta", "--domain", "L3:log", "--codomain", LIN],
    ["certify", "--op", "hankel", "--symbol", "delta", "--domain", LIN, "--codomain", LIN,
     "--K-max", "0"],
    ["suite", "run", "T9"],
    ["frobnicate"],
])
def test_usage_errors_exit_64(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 64, err


def test_certify_compact_gauss(capsys, tmp_path):
    out = tmp_path / "c.json"
    code, _, _ = run(capsys, "certify", "--op", "hankel", "--symbol", "gauss", "--domain", LIN,
                     "--codomain", LIN, "--compact", "--K-max", "4", "--output", str(out))
    data = json.loads(out.read_text())
    validate(data)
    assert code == 0 and data["status"] == "CertifiedAtScale"
    assert data["details"]["run"]["seed"] == 0


def test_certify_ones_refuted(capsys):
    code, out, _ = run(capsys, "certify", "--op", "hankel", "--symbol", "ones", "--domain", LIN,
                       "--codomain", LIN)
    assert code == 1 and json.loads(out)["status"] == "RefutedAtScale"


def test_certify_identity_toeplitz_not_compact(capsys):
    code, _, _ = run(capsys, "certify", "--op", "toeplitz", "--symbol", "delta", "--domain", LIN,
                     "--codomain", LIN, "--compact", "--K-max", "4", "--M-max", "8",
                     "--N-max", "128", "--J-max", "512")
    assert code == 1


def test_certify_not_montel_exit_65(capsys, tmp_path):
    f = tmp_path / "w.csv"
    f.write_text("".join(f"{n},{k},{k * n}\n" for n in range(1, 9) for k in range(1, 4)))
    code, _, err = run(capsys, "certify", "--op", "hankel", "--symbol", "delta", "--domain", LIN,
                       "--codomain", f"table:@{f}", "--compact")
    assert code == 65 and "Montel" in err


def test_certify_csv_format(capsys):
    code, out, _ = run(capsys, "certify", "--op", "hankel", "--symbol", "delta", "--domain", LIN,
                       "--codomain", LIN, "--format", "csv", "--K-max", "2")
    lines = out.splitlines()
    assert code == 0 and lines[0] == "k,m,n_star,log_ratio" and len(lines) > 1
    assert all(len(line.split(",")) == 4 for line in lines)


def test_certify_reruns_are_byte_identical(capsys, tmp_path):
    args = ["certify", "--op", "hankel", "--symbol", "geomgauss:0.1", "--domain", LIN,
            "--codomain", LIN, "--compact", "--K-max", "4", "--seed", "7"]
    outs = []
    for i in range(2):
        path = tmp_path / f"{i}.json"
        assert main(args + ["--output", str(path)]) == 0
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]
    assert json.loads(outs[0])["seed"] == 7


def test_suite_t3_log_skips(capsys, tmp_path):
    out = tmp_path / "t3.json"
    code, table, _ = run(capsys, "suite", "run", "T3", "--alpha", "log", "--beta", "linear:c=1",
                         "--K-max", "4", "--output", str(out))
    data = json.loads(out.read_text())
    assert code == 0
    assert {c["status"] for c in data["cases"]} == {"SKIP"}
    assert all(c["checks"]["C2"] != "HoldsAtScale" for c in data["cases"])
    assert "SKIP" in table


def test_suite_csv_output(capsys, tmp_path):
    out = tmp_path / "t1.csv"
    code, _, _ = run(capsys, "suite", "run", "T1", "--K-max", "3", "--format", "csv",
                     "--output", str(out))
    rows = out.read_text().splitlines()
    assert code == 0 and rows[0] == "case,status,detail" and len(rows) == 4


def test_bench_table(capsys):
    code, out, _ = run(capsys, "bench", "--sizes", "128", "--repeats", "1")
    assert code == 0 and out.splitlines()[0] == "# seed=0 op=hankel"


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "kothe_hankel", "seq", "stability", "--family",
                           "log"], capture_output=True, text=True)
    assert proc.returncode == 0 and "StableAtScale" in proc.stdout
