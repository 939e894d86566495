import io
import json

import pytest

from coopeq.cli import main
from coopeq.gameio import loads_game


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.fixture
def prisoner_file(tmp_path, capsys):
    path = tmp_path / "pris.json"
    assert run(capsys, "gen", "prisoner", "--mu", "2", "-o", str(path))[0] == 0
    return str(path)


def test_gen_writes_loadable_json(capsys):
    code, out, _ = run(capsys, "gen", "traveler", "--bonus", "5")
    assert code == 0
    assert loads_game(out).sizes == (121, 121)


def test_gen_rejects_foreign_parameter(capsys):
    code, _, err = run(capsys, "gen", "prisoner", "--bonus", "3")
    assert code == 1 and "bonus" in err


def test_solve_json(capsys, prisoner_file):
    code, out, _ = run(capsys, "solve", prisoner_file, "--format", "json")
    assert code == 0
    js = json.loads(out)
    assert js["equilibria"] == [[{"C": "1/2", "D": "1/2"}, {"C": "1/2", "D": "1/2"}]]
    assert js["mode"] == "eut"


def test_solve_table_and_quantal(capsys, prisoner_file):
    code, out, _ = run(capsys, "solve", prisoner_file, "--quantal", "0")
    assert code == 0
    assert "coalition structure: {1,2}" in out and "quantal player 1" in out


def test_solve_reads_stdin(capsys, monkeypatch, prisoner_file):
    with open(prisoner_file) as fh:
        monkeypatch.setattr("sys.stdin", io.StringIO(fh.read()))
    code, out, _ = run(capsys, "solve", "-", "--format", "json")
    assert code == 0 and json.loads(out)["thresholds"] == [2, 2]


def test_value_with_cpt(capsys, prisoner_file):
    code, out, _ = run(capsys, "value", prisoner_file, "--cpt", "--format", "json")
    assert code == 0
    rows = json.loads(out)
    assert len(rows) == 4 and all("v_cpt" in r for r in rows)
    code, _, err = run(capsys, "value", prisoner_file, "--structure", "7")
    assert code == 1 and "--structure" in err


def test_reduce(capsys, tmp_path):
    path = tmp_path / "sg.json"
    run(capsys, "gen", "sure_gain", "-o", str(path))
    code, out, _ = run(capsys, "reduce", str(path), "--format", "json")
    assert code == 0
    assert json.loads(out)["playable"] == [["D"], ["L"]]


def test_bad_inputs_exit_with_one(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{nope")
    code, _, err = run(capsys, "solve", str(bad))
    assert code == 1 and "line 1" in err
    code, _, err = run(capsys, "solve", str(tmp_path / "missing.json"))
    assert code == 1
    with pytest.raises(SystemExit) as info:
        main(["frobnicate"])
    assert info.value.code == 1


def test_repro_single_case(capsys):
    code, out, _ = run(capsys, "repro", "--case", "prisoner-mu2", "--json")
    assert code == 0
    [row] = json.loads(out)
    assert row["ok"] and row["id"] == "prisoner-mu2-ce"


def test_repro_mismatch_exits_with_two(capsys, monkeypatch):
    from coopeq import repro
    case = repro.select_cases("prisoner-mu2")[0]
    broken = repro.ReproCase(case.id, case.description, case.family, case.params,
                             case.quantity, "nonsense", case.compute, case.tolerance)
    monkeypatch.setattr(repro, "CASES", [broken])
    code, out, _ = run(capsys, "repro")
    assert code == 2 and "FAIL" in out
