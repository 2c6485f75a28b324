import io
import json

from coevent.cli import EXIT_BUDGET, EXIT_DEAD_END, EXIT_INVALID, EXIT_OK, main

from test_systems import ROOT

HOPPER = str(ROOT / "systems" / "hopper2.json")
WALKER = str(ROOT / "systems" / "walker.json")


def call(*argv):
    out = io.StringIO()
    code = main(list(argv), out)
    return code, out.getvalue()


def records(text):
    return [json.loads(line) for line in text.splitlines() if line.strip()]


def test_run_walker_matches_classical():
    code, text = call("run", "--system", WALKER, "--scheme", "basic", "--stages", "3")
    _, ref = call("run", "--system", WALKER, "--scheme", "classical", "--stages", "3")
    assert code == EXIT_OK
    got, want = records(text), records(ref)
    assert [r["count"] for r in got] == [3, 6, 12, 24]
    assert [sorted(c["text"] for c in r["coevents"]) for r in got] == [sorted(c["text"] for c in r["coevents"]) for r in want]


def test_run_hopper_counts():
    _, basic = call("run", "--system", HOPPER, "--scheme", "basic", "--stages", "2")
    _, glob = call("run", "--system", HOPPER, "--scheme", "global", "--stages", "2")
    _, maxaff = call("run", "--system", HOPPER, "--scheme", "basic", "--mode", "maxaff", "--stages", "2")
    assert [r["count"] for r in records(basic)] == [1, 2, 18]
    assert [r["count"] for r in records(glob)] == [1, 2, 2]
    assert [r["count"] for r in records(maxaff)] == [1, 2, 4]
    first = records(basic)[2]["coevents"][0]
    assert set(first) == {"monomials", "support", "lineage", "text"}


def test_run_summary_and_budget(tmp_path):
    code, _ = call("run", "--system", HOPPER, "--scheme", "basic", "--stages", "3")
    assert code == EXIT_BUDGET
    out = tmp_path / "summary.jsonl"
    code, _ = call("run", "--system", HOPPER, "--scheme", "basic", "--stages", "3", "--summary", "--out", str(out))
    assert code == EXIT_OK
    last = records(out.read_text())[-1]
    assert last["count"] > 2**64 and sum(s["count"] for s in last["supports"]) == last["count"]


def test_verify_presets():
    assert call("verify", "--system", WALKER, "--stages", "3")[0] == EXIT_OK
    code, text = call("verify", "--system", HOPPER, "--stages", "2", "--oracle")
    assert code == EXIT_OK and "engine matches brute force" in text
    code, text = call("verify", "--system", HOPPER, "--stages", "1", "--json")
    assert code == EXIT_OK and '"checks"' in text


def test_walk_seed_and_replay():
    args = ("walk", "--system", HOPPER, "--scheme", "maxaff", "--stages", "3", "--policy", "random", "--seed", "3")
    _, a = call(*args)
    _, b = call(*args)
    assert a == b
    choices = a.strip().splitlines()[-1].split(": ")[1]
    _, c = call("walk", "--system", HOPPER, "--scheme", "maxaff", "--stages", "3", "--replay", choices)
    assert c == a


def test_interactive_walk(monkeypatch):
    monkeypatch.setattr("sys.stdin", io.StringIO("0\n0\n0\n"))
    code, text = call("walk", "--system", HOPPER, "--scheme", "basic", "--stages", "2", "--policy", "interactive", "--json")
    steps = records("\n".join(l for l in text.splitlines() if l.startswith("{")))
    assert code == EXIT_OK
    assert steps[-1]["candidates"][steps[-1]["choice"]] == "0→0→0*"


def test_walker_walk_stays_classical():
    code, text = call("walk", "--system", WALKER, "--scheme", "basic", "--stages", "4", "--policy", "random", "--seed", "1", "--json")
    assert code == EXIT_OK
    for step in records("\n".join(l for l in text.splitlines() if l.startswith("{"))):
        assert all("·" not in c and "+" not in c for c in step["candidates"])


def test_inspect_dump_round_trip(tmp_path):
    dump = tmp_path / "dump.json"
    code, text = call("inspect", "--system", HOPPER, "--stages", "2", "--dump", str(dump))
    assert code == EXIT_OK and "stage 2: 8 histories" in text
    again = tmp_path / "again.json"
    assert call("inspect", "--system", str(dump), "--stages", "2", "--dump", str(again))[0] == EXIT_OK
    assert json.loads(dump.read_text()) == json.loads(again.read_text())


def test_perturbed_matrix_is_rejected(tmp_path, capsys):
    dump = tmp_path / "dump.json"
    call("inspect", "--system", HOPPER, "--stages", "2", "--dump", str(dump))
    data = json.loads(dump.read_text())
    data["stages"][2]["matrix"][0][0][0] += 1e-3
    dump.write_text(json.dumps(data))
    code, _ = call("verify", "--system", str(dump), "--stages", "2")
    assert code == EXIT_INVALID
    assert "consistency" in capsys.readouterr().err


def test_missing_file(capsys):
    assert call("run", "--system", "/nonexistent.json", "--scheme", "basic", "--stages", "1")[0] == EXIT_INVALID
    assert "error" in capsys.readouterr().err


def test_inconsistent_link_rejected(tmp_path):
    spec = {
        "kind": "custom",
        "stages": [
            {"labels": ["a", "b"], "matrix": [[0.5, 0], [0, 0.5]]},
            {"labels": ["a'", "b'"], "parents": [0, 1], "matrix": [[0, 0], [0, 1]]},
        ],
    }
    path = tmp_path / "dead.json"
    path.write_text(json.dumps(spec))
    code, _ = call("walk", "--system", str(path), "--scheme", "classical", "--stages", "1")
    assert code == EXIT_INVALID


def test_dead_end_exit(monkeypatch, capsys):
    from coevent.errors import WalkTerminated
    from coevent.schemes import Transcript

    def stuck(*args, **kwargs):
        err = WalkTerminated(2)
        err.transcript = Transcript("basic", "first")
        raise err

    monkeypatch.setattr("coevent.cli.run_walk", stuck)
    code, _ = call("walk", "--system", HOPPER, "--scheme", "basic", "--stages", "2")
    assert code == EXIT_DEAD_END
    assert "stage 2" in capsys.readouterr().err


def test_environment_cap(monkeypatch):
    monkeypatch.setenv("COEVENT_MAX_HISTORIES", "2")
    code, _ = call("run", "--system", HOPPER, "--scheme", "basic", "--stages", "2")
    assert code == EXIT_BUDGET
    code, _ = call("run", "--system", HOPPER, "--scheme", "basic", "--stages", "2", "--max-histories", "20")
    assert code == EXIT_OK
