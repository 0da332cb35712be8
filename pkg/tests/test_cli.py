import json
import subprocess
import sys

import numpy as np
import pytest

from nmfid import corpus
from nmfid import linalg as la
from nmfid.cli import main


def gen(tmp_path, name, *extra):
    out = tmp_path / name
    assert main(["generate", name, "--out", str(out), *extra]) == 0
    return out


def test_generate_writes_manifest(tmp_path):
    out = gen(tmp_path, "type2")
    man = json.loads((out / "manifest.json").read_text())
    assert man["name"] == "type2" and man["expected"]["rank_bounds"] == [5, 6]
    for name in man["files"].values():
        assert (out / name).exists()
    assert la.equal(la.read_csv(out / "S.csv"), corpus.paper_example("type2").S)


def test_generate_unknown_name_is_usage_error(tmp_path):
    with pytest.raises(SystemExit) as exc:
        main(["generate", "nosuch", "--out", str(tmp_path)])
    assert exc.value.code == 1


def test_analyze_type2_pipeline(tmp_path, capsys):
    d = gen(tmp_path, "type2")
    report = tmp_path / "report.json"
    code = main(["analyze", "--input", str(d / "S.csv"),
                 "--w", str(d / "W1.csv"), "--h", str(d / "H1.csv"),
                 "--w", str(d / "W2.csv"), "--h", str(d / "H2.csv"),
                 "--parts", "2", "--arts", "3", "--out", str(report)])
    assert code == 0
    obj = json.loads(report.read_text())
    assert obj["type"] == "TypeII"
    assert (obj["rank_bounds"]["lower"], obj["rank_bounds"]["upper"]) == (5, 6)
    assert obj["mode"] == "exact"
    assert obj["sfa"]["type2_nonidentifiable"] is True
    assert obj["family"] is not None
    text = capsys.readouterr().out
    assert "type: TypeII" in text and "huang" in text


def test_analyze_json_is_byte_identical(tmp_path, capsys):
    d = gen(tmp_path, "type1")
    args = ["analyze", "--input", str(d / "S.csv"),
            "--w", str(d / "W1.csv"), "--h", str(d / "H1.csv"),
            "--w", str(d / "W2.csv"), "--h", str(d / "H2.csv"), "--json"]
    capsys.readouterr()
    assert main(args) == 0
    first = capsys.readouterr().out
    assert main(args) == 0
    assert capsys.readouterr().out == first
    assert json.loads(first)["type"] == "TypeI"


def test_analyze_single_factorization_is_no_evidence(tmp_path, capsys):
    d = gen(tmp_path, "type2")
    capsys.readouterr()
    assert main(["analyze", "--input", str(d / "S.csv"),
                 "--w", str(d / "W1.csv"), "--h", str(d / "H1.csv"), "--json"]) == 0
    obj = json.loads(capsys.readouterr().out)
    assert obj["type"] == "NoEvidence" and obj["classification"] is None
    assert len(obj["certificates"]) == 1


def test_analyze_single_factorization_report(tmp_path, capsys):
    d = gen(tmp_path, "type2")
    capsys.readouterr()
    assert main(["analyze", "--input", str(d / "S.csv"),
                 "--w", str(d / "W1.csv"), "--h", str(d / "H1.csv")]) == 0
    text = capsys.readouterr().out
    assert "type: NoEvidence" in text and "condition" in text


def test_analyze_inexact_exits_2(tmp_path):
    d = gen(tmp_path, "type2")
    bad = tmp_path / "bad.csv"
    H = la.read_csv(d / "H1.csv")
    H[0, 0] = H[0, 0] + 1
    la.write_csv(bad, H)
    assert main(["analyze", "--input", str(d / "S.csv"),
                 "--w", str(d / "W1.csv"), "--h", str(bad)]) == 2


def test_analyze_guard_exits_3(tmp_path):
    I = la.identity(40)
    p = tmp_path / "I.csv"
    la.write_csv(p, I)
    assert main(["analyze", "--input", str(p), "--w", str(p), "--h", str(p),
                 "--parts", "20", "--arts", "2", "--restarts", "0"]) == 3


def test_parse_errors_exit_1(tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text("1,2\n3\n")
    assert main(["analyze", "--input", str(p)]) == 1
    assert main(["analyze", "--input", str(tmp_path / "missing.csv")]) == 1
    with pytest.raises(SystemExit) as exc:
        main(["analyze"])
    assert exc.value.code == 1


def test_analyze_float_input_with_solver(tmp_path):
    p = tmp_path / "S.csv"
    p.write_text("1.0,0.5\n0.5,1.0\n")
    report = tmp_path / "r.json"
    assert main(["analyze", "--input", str(p), "--rank", "2", "--out", str(report)]) == 0
    obj = json.loads(report.read_text())
    assert obj["mode"] == "float" and obj["rank_bounds"]["lower"] == 2


def test_verify_block_g(tmp_path, capsys):
    d = gen(tmp_path, "block-g")
    args = ["verify", "--input", str(d / "S.csv"), "--w", str(d / "W.csv"),
            "--h", str(d / "H.csv"), "--g", str(d / "G.csv")]
    assert main(args) == 0
    assert "exact" in capsys.readouterr().out
    assert main(args[:-2]) == 2


def test_verify_not_exact(tmp_path):
    d = gen(tmp_path, "type1")
    assert main(["verify", "--input", str(d / "S.csv"), "--w", str(d / "W1.csv"),
                 "--h", str(d / "H2.csv")]) == 2


def test_decompose_block_g(tmp_path):
    d = gen(tmp_path, "block-g")
    out = tmp_path / "dec.json"
    assert main(["decompose", "--g", str(d / "G.csv"), "--w", str(d / "W.csv"),
                 "--h", str(d / "H.csv"), "--out", str(out)]) == 0
    obj = json.loads(out.read_text())
    assert obj["reassembly_exact"] is True
    assert len(obj["sub_models"]) == 2
    assert obj["sub_models"][1]["S"] == [["4"], ["6"], ["4"], ["6"]]
    assert obj["identifiability"]["aggregate"] == "non-identifiable"


def test_enumerate_type2(tmp_path):
    d = gen(tmp_path, "type2")
    out = tmp_path / "fam"
    assert main(["enumerate", "--input", str(d / "S.csv"), "--w", str(d / "W1.csv"),
                 "--h", str(d / "H1.csv"), "--parts", "2", "--arts", "3",
                 "--samples", "4", "--out", str(out)]) == 0
    fam = json.loads((out / "family.json").read_text())
    assert len(fam["members"]) == 4
    assert all(m["residual"] == 0 for m in fam["members"])
    S = la.read_csv(d / "S.csv")
    H = la.read_csv(out / "H.csv")
    for m in fam["members"]:
        assert la.equal(la.matmul(la.read_csv(out / m["W"]), H), S)
    assert la.equal(la.read_csv(out / "W_002.csv"), la.read_csv(d / "W2.csv"))


def test_enumerate_without_sfa_exits_1(tmp_path):
    d = gen(tmp_path, "type1")
    assert main(["enumerate", "--input", str(d / "S.csv"), "--w", str(d / "W1.csv"),
                 "--h", str(d / "H1.csv"), "--parts", "3", "--arts", "1",
                 "--out", str(tmp_path / "x")]) == 1


def test_generate_swimmer_images(tmp_path):
    out = gen(tmp_path, "swimmer", "--no-body")
    assert len(list((out / "images").glob("*.pgm"))) == 256
    S = la.read_csv(out / "S.csv")
    assert S.shape == (1024, 256)


def test_console_script_runs(tmp_path):
    out = subprocess.run([sys.executable, "-m", "nmfid.cli", "generate", "example1",
                          "--out", str(tmp_path)], capture_output=True, text=True)
    assert out.returncode == 0
    assert np.array(la.read_csv(tmp_path / "S.csv")).shape == (5, 4)
