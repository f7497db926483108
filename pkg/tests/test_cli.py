"""Command-line interface: subcommands, outputs, config files, exit codes."""

from __future__ import annotations

import dataclasses
import json

import pytest

from aoisched import (
    Violation,
    load_schedule,
    load_trace,
    parse_trace,
    ratio_report,
    schedule_cost,
)
from aoisched.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


# ---------------------------------------------------------------------------
# gen
# ---------------------------------------------------------------------------


def test_gen_writes_trace_to_stdout(capsys):
    code, out, err = run(capsys, "gen", "--kind", "adv2", "--delta", "4")
    assert code == 0 and err == ""
    assert parse_trace(out).rows == ("GB", "GG", "BG", "GG")


def test_gen_writes_trace_file(tmp_path, capsys):
    path = tmp_path / "trace.txt"
    code, out, _ = run(capsys, "gen", "--kind", "iid", "--users", "3",
                       "--horizon", "20", "--seed", "5", "--out", str(path))
    assert code == 0
    assert "3-user trace of 20 slots" in out
    trace = load_trace(path)
    assert (trace.num_users, trace.horizon) == (3, 20)
    # regenerating with the same seed is byte-identical
    path2 = tmp_path / "again.txt"
    run(capsys, "gen", "--kind", "iid", "--users", "3",
        "--horizon", "20", "--seed", "5", "--out", str(path2))
    assert path.read_bytes() == path2.read_bytes()


def test_gen_construction_requires_delta(capsys):
    code, _, err = run(capsys, "gen", "--kind", "adv2")
    assert code == 1
    assert "delta" in err
    code, _, err = run(capsys, "gen", "--kind", "adv3", "--delta", "18")
    assert code == 1


# ---------------------------------------------------------------------------
# simulate / opt
# ---------------------------------------------------------------------------


@pytest.fixture
def trace_file(tmp_path, capsys):
    path = tmp_path / "trace.txt"
    assert main(["gen", "--kind", "adv2", "--delta", "8", "--periods", "2",
                 "--out", str(path)]) == 0
    capsys.readouterr()
    return path


def test_simulate_reports_cost_and_writes_records(trace_file, tmp_path, capsys):
    csv_path = tmp_path / "records.csv"
    code, out, _ = run(capsys, "simulate", "--trace", str(trace_file),
                       "--out", str(csv_path))
    assert code == 0
    assert "policy ma-csit: total cost" in out
    lines = csv_path.read_text().splitlines()
    assert lines[0] == "slot,age_0,age_1,decision,success,slot_cost"
    assert len(lines) == 1 + 16
    # slot 1 of the construction: ages (1,1), only user 0 good
    assert lines[1] == "1,1,1,0,true,2"


def test_simulate_channel_oblivious_costs_more(trace_file, capsys):
    _, aware, _ = run(capsys, "simulate", "--trace", str(trace_file))
    _, oblivious, _ = run(capsys, "simulate", "--trace", str(trace_file),
                          "--policy", "max-age")
    cost = lambda text: int(text.split("total cost ")[1].split()[0])
    assert cost(aware) < cost(oblivious)


def test_opt_writes_replayable_schedule(trace_file, tmp_path, capsys):
    sched_path = tmp_path / "sched.txt"
    code, out, _ = run(capsys, "opt", "--trace", str(trace_file),
                       "--out", str(sched_path))
    assert code == 0
    reported = int(out.split("optimal cost ")[1].split()[0])
    trace = load_trace(trace_file)
    schedule = load_schedule(sched_path, trace.num_users)
    assert schedule_cost(trace, schedule) == reported
    assert reported == ratio_report(trace).cost_opt


def test_opt_budget_exhaustion_exits_3(trace_file, capsys):
    code, _, err = run(capsys, "opt", "--trace", str(trace_file), "--budget", "3")
    assert code == 3
    assert "budget" in err


# ---------------------------------------------------------------------------
# analyze / verify
# ---------------------------------------------------------------------------


def test_analyze_writes_report_bundle(trace_file, tmp_path, capsys):
    outdir = tmp_path / "analysis"
    code, out, _ = run(capsys, "analyze", "--trace", str(trace_file),
                       "--out", str(outdir))
    assert code == 0
    assert "ratio" in out and "within" in out

    report = json.loads((outdir / "report.json").read_text())
    assert report["num_users"] == 2 and report["horizon"] == 16
    assert report["within_bound"] is True
    assert report["violations"] == [] and report["warnings"] == []
    assert report["meta"]["command"] == "analyze"
    assert report["meta"]["version"]

    lines = (outdir / "intervals.csv").read_text().splitlines()
    assert lines[0] == ("index,start,I,l,user,complete,case,split_a,split_b,"
                        "next_l,subs,cost_policy,cost_opt,upper_slack,lower_slack")
    assert len(lines) == 1 + len(report["intervals"])

    assert (outdir / "ages.png").read_bytes()[:4] == b"\x89PNG"


def test_verify_passes_on_genuine_trace(trace_file, tmp_path, capsys):
    report_path = tmp_path / "report.json"
    code, out, _ = run(capsys, "verify", "--trace", str(trace_file),
                       "--out", str(report_path))
    assert code == 0
    assert "all checks passed" in out
    assert json.loads(report_path.read_text())["violations"] == []


def test_verify_exits_2_on_violations(trace_file, capsys, monkeypatch):
    # no genuine trace violates the proven invariants, so exercise the exit
    # path by injecting a violation into an otherwise real report
    import aoisched.cli as cli

    real = ratio_report(load_trace(trace_file))
    doctored = dataclasses.replace(
        real,
        violations=(Violation("max_user_gap", 1, 2, "injected for the test"),),
    )
    monkeypatch.setattr(cli, "ratio_report", lambda *a, **k: doctored)
    code, out, _ = run(capsys, "verify", "--trace", str(trace_file))
    assert code == 2
    assert "VIOLATION [max_user_gap]" in out
    assert "all checks passed" not in out


def test_analyze_missing_trace_file_exits_1(capsys):
    code, _, err = run(capsys, "analyze", "--trace", "/nonexistent/trace.txt")
    assert code == 1
    assert err.startswith("error:")


# ---------------------------------------------------------------------------
# sweeps / stochastic / search
# ---------------------------------------------------------------------------


def test_sweep2_outputs_and_reruns_identically(tmp_path, capsys):
    out1, out2 = tmp_path / "a", tmp_path / "b"
    argv = ["sweep2", "--deltas", "4,8", "--periods", "2"]
    assert main(argv + ["--out", str(out1)]) == 0
    assert main(argv + ["--out", str(out2)]) == 0
    capsys.readouterr()
    for name in ("sweep2.csv", "sweep2.json"):
        assert (out1 / name).read_bytes() == (out2 / name).read_bytes()
    lines = (out1 / "sweep2.csv").read_text().splitlines()
    assert lines[0] == ("num_users,delta,periods,horizon,cost_policy,cost_opt,"
                        "ratio,bound,violations,warnings")
    assert len(lines) == 3
    assert (out1 / "sweep2.png").read_bytes()[:4] == b"\x89PNG"
    sidecar = json.loads((out1 / "sweep2.json").read_text())
    assert sidecar["command"] == "sweep2"
    assert sidecar["params"]["deltas"] == [4, 8]


def test_sweep3_small(tmp_path, capsys):
    code, out, _ = run(capsys, "sweep3", "--deltas", "24", "--periods", "1",
                       "--out", str(tmp_path))
    assert code == 0
    assert "delta    24" in out
    assert (tmp_path / "sweep3.csv").exists()


def test_stochastic_outputs(tmp_path, capsys):
    code, out, _ = run(capsys, "stochastic", "--p", "0.2,0.6", "--users", "2",
                       "--horizon", "300", "--seeds", "2", "--out", str(tmp_path))
    assert code == 0
    assert "p=0.2" in out and "p=0.6" in out
    rows = (tmp_path / "stochastic.csv").read_text().splitlines()
    assert rows[0] == "p,seed,cost_csit,cost_oblivious,avg_age_csit,avg_age_oblivious,ratio"
    assert len(rows) == 1 + 4
    summary = (tmp_path / "stochastic_summary.csv").read_text().splitlines()
    assert summary[0] == "p,seeds,mean_avg_age_csit,mean_avg_age_oblivious,mean_ratio"
    assert (tmp_path / "stochastic.png").read_bytes()[:4] == b"\x89PNG"
    assert json.loads((tmp_path / "stochastic.json").read_text())["params"]["seeds"] == 2


def test_search_exhaustive_writes_best_trace(tmp_path, capsys):
    code, out, _ = run(capsys, "search", "--users", "2", "--horizon", "5",
                       "--mode", "exhaustive", "--out", str(tmp_path))
    assert code == 0
    assert "worst ratio 21/17" in out
    doc = json.loads((tmp_path / "search.json").read_text())
    assert doc["best_ratio_exact"] == [21, 17]
    assert doc["method"] == "exhaustive"
    assert doc["sequences_examined"] == 1 << 10
    best = load_trace(tmp_path / "best_trace.txt")
    assert ratio_report(best).ratio == pytest.approx(21 / 17)


def test_search_sampled_and_local_modes(tmp_path, capsys):
    code, out, _ = run(capsys, "search", "--users", "2", "--horizon", "6",
                       "--mode", "sampled", "--sample", "200", "--seed", "4")
    assert code == 0 and "(sampled)" in out
    code, out, _ = run(capsys, "search", "--users", "2", "--horizon", "8",
                       "--mode", "local", "--iterations", "3", "--restarts", "1")
    assert code == 0 and "(local)" in out


def test_search_over_budget_exits_3(capsys):
    code, _, err = run(capsys, "search", "--users", "2", "--horizon", "30",
                       "--mode", "exhaustive")
    assert code == 3
    assert "error:" in err


# ---------------------------------------------------------------------------
# config files and argument handling
# ---------------------------------------------------------------------------


def test_config_file_supplies_defaults(tmp_path, capsys):
    cfg = tmp_path / "sweep.cfg"
    cfg.write_text("# sweep settings\ndeltas = 4,8\nperiods = 2\n")
    code, out, _ = run(capsys, "sweep2", "--config", str(cfg),
                       "--out", str(tmp_path))
    assert code == 0
    lines = (tmp_path / "sweep2.csv").read_text().splitlines()
    assert [line.split(",")[1] for line in lines[1:]] == ["4", "8"]
    assert lines[1].split(",")[2] == "2"


def test_explicit_flags_beat_config_values(tmp_path, capsys):
    cfg = tmp_path / "sweep.cfg"
    cfg.write_text("deltas = 4,8\nperiods = 5\n")
    code, _, _ = run(capsys, "sweep2", "--config", str(cfg), "--periods", "1",
                     "--out", str(tmp_path))
    assert code == 0
    lines = (tmp_path / "sweep2.csv").read_text().splitlines()
    assert lines[1].split(",")[2] == "1"


def test_config_rejects_unknown_keys(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("horizon = 10\n")  # not a sweep2 option
    code, _, err = run(capsys, "sweep2", "--config", str(cfg))
    assert code == 1
    assert "horizon" in err and "sweep2" in err


def test_config_rejects_malformed_lines(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("periods: 2\n")
    code, _, err = run(capsys, "sweep2", "--config", str(cfg))
    assert code == 1
    assert "line 1" in err


def test_missing_config_file_exits_1(capsys):
    code, _, err = run(capsys, "sweep2", "--config", "/nonexistent.cfg")
    assert code == 1
    assert "cannot read config" in err


def test_ages_flag_flows_through(trace_file, capsys):
    _, default_out, _ = run(capsys, "simulate", "--trace", str(trace_file))
    _, aged_out, _ = run(capsys, "simulate", "--trace", str(trace_file),
                         "--ages", "5,1")
    cost = lambda text: int(text.split("total cost ")[1].split()[0])
    assert cost(aged_out) > cost(default_out)


def test_bad_usage_exits_1(capsys):
    assert run(capsys, "no-such-command")[0] == 1
    assert run(capsys, "simulate")[0] == 1  # missing required --trace
    assert run(capsys, "gen", "--horizon", "x")[0] == 1
    assert run(capsys, "sweep2", "--deltas", "4,x")[0] == 1
    assert run(capsys)[0] == 1  # no subcommand


def test_version_and_help_exit_0(capsys):
    assert run(capsys, "--version")[0] == 0
    assert run(capsys, "--help")[0] == 0
    assert run(capsys, "gen", "--help")[0] == 0
