import json

from fregelab.cli import main


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    rep = json.loads(capsys.readouterr().out)
    assert rep["exit_code"] == code
    return code, rep


def test_gen_is_deterministic_and_counts(tmp_path, capsys):
    a, b = tmp_path / "a", tmp_path / "b"
    code, rep = run(capsys, "gen", "--n", 20, "--density", 6, "--seed", 5, "--prefix", a)
    assert code == 0 and rep["stages"][0]["clauses"] == 120
    run(capsys, "gen", "--n", 20, "--density", 6, "--seed", 5, "--prefix", b)
    assert (tmp_path / "a.cnf").read_text() == (tmp_path / "b.cnf").read_text()
    assert (tmp_path / "a.xor").read_text() == (tmp_path / "b.xor").read_text()
    _, low = run(capsys, "gen", "--n", 20, "--density", 5, "--prefix", tmp_path / "c")
    assert low["deviations"]


def test_certify_triangle(tmp_path, capsys):
    f = tmp_path / "tri.xor"
    f.write_text("p xor 3 3\n1 2 1\n2 3 1\n1 3 1\n")
    code, _ = run(capsys, "certify", f, "--kind", "weak", "--params", "2,2,1")
    assert code == 0
    code, rep = run(capsys, "certify", f, "--kind", "weak", "--params", "3,2,1")
    assert code == 1 and "[0, 1, 2]" in json.dumps(rep)


def test_classify_command(tmp_path, capsys):
    f = tmp_path / "xy.xor"
    f.write_text("p xor 2 2\n1 2 1\n2 1\n")
    code, rep = run(capsys, "classify", f, "x1", "--params", "2,2,1", "--permissive")
    assert code == 0 and "Forced(0)" in json.dumps(rep)


def test_core_pipeline_and_exit_codes(tmp_path, capsys):
    p = tmp_path / "core"
    assert run(capsys, "gen", "--kind", "core", "--prefix", p)[0] == 0
    proof, xor = f"{p}.proof.jsonl", f"{p}.xor"
    code, rep = run(capsys, "pipeline", proof, xor)
    assert code == 0 and rep["outcome"] == "pass"
    assert run(capsys, "regularize", proof, xor, "--params", "3,3,1", "--permissive")[0] == 2
    lines = open(proof).read().splitlines()
    lines[-2] = lines[-2].replace("x1", "x9", 1)
    bad = tmp_path / "bad.jsonl"
    bad.write_text("\n".join(lines) + "\n")
    assert run(capsys, "check-proof", bad, "--xor", xor)[0] == 1
    assert run(capsys, "check-proof", tmp_path / "missing.jsonl")[0] == 3


def test_saturate_command(tmp_path, capsys):
    f = tmp_path / "f.cnf"
    f.write_text("p cnf 2 3\n1 2 0\n-1 2 0\n-2 0\n")
    code, rep = run(capsys, "saturate", f, "--upto", 3)
    assert code == 0 and rep["stages"][0]["min_width"] == 2
