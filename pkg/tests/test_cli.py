import json

import pytest

from hypermon.cli import main

from conftest import PHI_A, PHI_E


@pytest.fixture
def files(tmp_path, t1, t2, t_bad):
    paths = {}
    for name, text in (("phi_a.hml", PHI_A), ("wolper.hml", PHI_E)):
        (tmp_path / name).write_text(text + "\n")
        paths[name] = str(tmp_path / name)
    for name, t in (("T1.json", t1), ("T2.json", t2), ("Tb.json", t_bad)):
        (tmp_path / name).write_text(json.dumps(t.to_json()))
        paths[name] = str(tmp_path / name)
    (tmp_path / "broken.json").write_text("{")
    paths["broken.json"] = str(tmp_path / "broken.json")
    return paths


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_eval_unsat(files, capsys):
    code, out, _ = run(capsys, "eval", "-f", files["phi_a.hml"], "-t", files["T1.json"])
    assert (code, out.strip()) == (0, "unsat")


def test_eval_sat_with_positions(files, capsys):
    code, out, _ = run(capsys, "eval", "-f", files["phi_a.hml"], "-t", files["T2.json"], "--positions")
    assert code == 0 and out.splitlines() == ["sat", "positions: [0, 1]"]


def test_classify(files, capsys):
    code, out, _ = run(capsys, "classify", "-f", files["phi_a.hml"])
    lines = out.split()
    assert code == 0 and "Hyper-maxHML" in lines and "PHyper-recHML" not in lines


def test_parse_prints_formula(files, capsys):
    code, out, _ = run(capsys, "parse", "-f", files["wolper.hml"])
    assert code == 0 and out.startswith("exists p. max x.")


def test_diff_matches(files, capsys):
    code, out, _ = run(capsys, "diff", "-f", files["wolper.hml"], "-t", files["Tb.json"])
    assert code == 0 and "verdicts match" in out


def test_run_central(files, capsys):
    code, out, _ = run(capsys, "--json", "run-central", "-f", files["wolper.hml"], "-t", files["Tb.json"])
    data = json.loads(out)
    assert code == 0 and data["reachable_no"] and data["steps_to_first_no"] == 2


def test_run_dec_seeded(files, capsys):
    code, out, _ = run(capsys, "run-dec", "-f", files["wolper.hml"], "-t", files["Tb.json"],
                       "--scheduler", "seed:3")
    assert code == 0 and "reachable no: yes (after 2 steps)" in out


def test_synth_commands(files, capsys):
    code, out, _ = run(capsys, "synth-central", "-f", files["wolper.hml"],
                       "--locations", "1,2", "--actions", "a,b")
    assert code == 0 and out.count("rec x.") == 2
    code, out, _ = run(capsys, "synth-dec", "--json", "-f", files["wolper.hml"], "-t", files["Tb.json"])
    assert code == 0 and "@l2" in json.loads(out)["monitor"]


def test_budget_exit_code(files, capsys, monkeypatch):
    monkeypatch.setenv("HYPERMON_MAX_STATES", "1")
    code, _, err = run(capsys, "run-central", "-f", files["wolper.hml"], "-t", files["Tb.json"])
    assert code == 3 and "budget" in err
    monkeypatch.delenv("HYPERMON_MAX_STATES")
    code, _, _ = run(capsys, "run-dec", "-f", files["wolper.hml"], "-t", files["Tb.json"],
                     "--max-states", "1")
    assert code == 3


def test_usage_errors(files, capsys):
    assert run(capsys, "bogus")[0] == 2
    assert run(capsys, "eval", "-f", files["phi_a.hml"])[0] == 2
    assert run(capsys, "run-dec", "-f", files["wolper.hml"], "-t", files["Tb.json"],
               "--scheduler", "fifo")[0] == 2


def test_errors_as_json(files, capsys):
    code, out, err = run(capsys, "--json", "eval", "-f", "missing.hml", "-t", files["T1.json"])
    assert code == 2 and out == ""
    data = json.loads(err)
    assert data["exit_code"] == 2 and len(err.strip().splitlines()) == 1
    code, _, err = run(capsys, "eval", "--json", "-f", files["phi_a.hml"], "-t", files["broken.json"])
    assert code == 2 and json.loads(err)["error"] == "TraceError"


def test_not_decentralizable(files, capsys):
    code, _, err = run(capsys, "diff", "-f", files["phi_a.hml"], "-t", files["T1.json"])
    assert code == 2 and "PHyper-maxHML" in err


def test_verify_json_is_deterministic(capsys):
    outputs = []
    for _ in range(2):
        code, out, err = run(capsys, "verify", "--json", "--suite", "diff", "--samples", "10", "--seed", "5")
        assert code == 0 and "PASS" in err
        data = json.loads(out)
        for r in data["reports"]:
            r.pop("seconds")
        outputs.append(data)
    assert outputs[0] == outputs[1]


@pytest.mark.parametrize("suite", ["soundness", "completeness", "confluence", "principled", "bisim"])
def test_verify_suites_small(suite, capsys):
    code, out, _ = run(capsys, "verify", "--suite", suite, "--samples", "3", "--seed", "1",
                       "--depth", "4")
    assert code == 0 and "PASS" in out


def test_verify_bad_config(capsys):
    assert run(capsys, "verify", "--suite", "diff", "--action-count", "1")[0] == 2
