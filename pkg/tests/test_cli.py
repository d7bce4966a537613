import pytest

from decmon import golden
from decmon.cli import main, parse_choose_mon, parse_leaders, parse_range

from helpers import L1


@pytest.fixture
def l1_files(tmp_path):
    spec = tmp_path / "l1.mon"
    spec.write_text(L1)
    trace = tmp_path / "ex.trc"
    trace.write_text("-|-|-\na|b|-\na|b|c\na|-|-\n")
    return spec, trace


def test_arg_helpers():
    assert parse_leaders("all", 3) == (1, 2, 3)
    assert parse_leaders("2", 3) == (1, 2)
    assert parse_leaders("1,3", 3) == (1, 3)
    assert parse_choose_mon("cycle", 3) == (2, 3, 1)
    assert parse_choose_mon("3,1,2", 3) == (3, 1, 2)
    assert parse_range("1..3") == [1, 2, 3]
    assert parse_range("2,5") == [2, 5]


def test_run_both(l1_files, capsys):
    spec, trace = l1_files
    code = main(["run", "--spec", str(spec), "--trace", str(trace), "--mode", "both",
                 "--leaders", "1", "--choose-mon", "cycle"])
    out = capsys.readouterr().out
    assert code == 0
    assert "central verdict ⊤ at t=2" in out
    assert "decent verdict ⊤ by M1 at round 4" in out
    assert "delay 2" in out


def test_run_central_only(l1_files, capsys):
    spec, trace = l1_files
    assert main(["run", "--spec", str(spec), "--trace", str(trace), "--mode", "central"]) == 0
    out = capsys.readouterr().out
    assert "decent" not in out and "delay" not in out


def test_run_formula_with_log(capsys):
    code = main(["run", "--formula", "F (a & b & c)", "--components", "a|b|c", "--trace-len", "20",
                 "--seed", "3", "--log-rounds"])
    assert code == 0
    assert "r=0 M1 read" in capsys.readouterr().out


def test_missing_spec_exit_2(tmp_path, capsys):
    assert main(["run", "--spec", str(tmp_path / "nope.mon")]) == 2
    assert "error" in capsys.readouterr().err


def test_bad_formula_exit_2(capsys):
    assert main(["run", "--formula", "F (a &"]) == 2


def test_bad_routing_exit_2(l1_files):
    spec, trace = l1_files
    assert main(["run", "--spec", str(spec), "--trace", str(trace), "--choose-mon", "1,2,3"]) == 2


def test_cap_exceeded_exit_3(l1_files, tmp_path):
    spec, _ = l1_files
    trace = tmp_path / "abc.trc"
    trace.write_text("a|b|c\n")
    with pytest.warns(UserWarning):
        code = main(["run", "--spec", str(spec), "--trace", str(trace), "--leaders", "0"])
    assert code == 3


def test_bench_sizes_rows(capsys):
    assert main(["bench", "--sizes", "1..3", "--runs", "5", "--trace-len", "30", "--seed", "7"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert len(lines) == 4
    assert [ln.split(",")[2] for ln in lines[1:]] == ["1", "2", "3"]


def test_bench_patterns_rows(capsys):
    assert main(["bench", "--patterns", "absence,existence", "--runs", "5", "--trace-len", "30"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert [ln.split(",")[1] for ln in lines[1:]] == ["absence", "existence"]


def test_bench_both_modes_and_per_run(capsys):
    assert main(["bench", "--sizes", "1", "--runs", "3", "--trace-len", "20", "--mode", "both", "--per-run"]) == 0
    rows = capsys.readouterr().out.strip().splitlines()[1:]
    assert len(rows) == 2 * (1 + 3)


def test_bench_zero_runs_exit_2():
    assert main(["bench", "--runs", "0"]) == 2


def test_bench_unknown_pattern_exit_2():
    assert main(["bench", "--patterns", "nope", "--runs", "1"]) == 2


def test_bench_rejections_exit_3():
    # a cap of one state rejects every formula
    assert main(["bench", "--sizes", "2", "--runs", "2", "--trace-len", "5", "--state-cap", "1"]) == 3


def test_bench_seed_from_env(monkeypatch, capsys):
    args = ["bench", "--sizes", "2", "--runs", "4", "--trace-len", "30"]
    monkeypatch.setenv("DECMON_SEED", "11")
    main(args)
    from_env = capsys.readouterr().out
    main(args + ["--seed", "11"])
    assert capsys.readouterr().out == from_env


def test_bench_worker_pool_same_output(capsys):
    args = ["bench", "--sizes", "1..2", "--runs", "6", "--trace-len", "30", "--seed", "5"]
    main(args)
    serial = capsys.readouterr().out
    main(args + ["--jobs", "2"])
    assert capsys.readouterr().out == serial


def test_golden_emit_transcript(tmp_path):
    out = tmp_path / "t.txt"
    main(["golden", "--emit-transcript", str(out)])
    text = out.read_text()
    assert text.startswith("r=-1 M1 init: start | t_last=0 t=-1 q=q0 | mem=∅")
    assert "r=0 M1 comm: send M2 | t_last=1 t=0 q=q0 | mem=∅ | msg=(q0,1)" in text


def test_golden_accepts_own_transcript(tmp_path, capsys):
    fixture = tmp_path / "self.txt"
    fixture.write_text(golden.transcript())
    assert main(["golden", "--fixture", str(fixture)]) == 0


def test_golden_perturbed_fixture_names_round(tmp_path, capsys):
    text = golden.transcript().replace("msg=(({a},{1}),1)", "msg=(({a},{1,2}),1)")
    fixture = tmp_path / "bad.txt"
    fixture.write_text(text)
    assert main(["golden", "--fixture", str(fixture)]) == 1
    assert "round 1, M1 comm: message" in capsys.readouterr().out
