"""Command-line interface.

Subcommands::

    gen         write a channel trace (worst-case construction or i.i.d.)
    simulate    run a policy over a trace file
    opt         exact offline optimum of a trace file
    analyze     full interval/ratio report for one trace
    sweep2      two-user construction ratio sweep (CSV + JSON + figure)
    sweep3      three-user construction ratio sweep (CSV + JSON + figure)
    stochastic  policy comparison on i.i.d. channels (CSV + JSON + figure)
    search      look for worst-case traces (exhaustive, sampled, or local)
    verify      run every invariant check on a trace; nonzero exit on violation

Exit codes: 0 success; 1 bad parameters, unparsable input, or I/O failure;
2 an invariant check reported a violation; 3 a computation refused to exceed
its resource budget.

Any subcommand accepts ``--config FILE`` with ``key = value`` lines naming
that subcommand's options; explicit flags override the file.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction
from typing import Optional, Sequence

from . import __version__
from .analysis import ratio_report
from .channels import (
    format_trace,
    gen_adversarial_2user,
    gen_adversarial_3user,
    gen_iid,
    load_trace,
    save_schedule,
    save_trace,
)
from .core import average_aoi, replay, simulate
from .errors import (
    AoischedError,
    ConfigurationError,
    IntegrityError,
    ParameterError,
    ParseError,
    ResourceBudgetError,
    ScopeError,
)
from .experiments import (
    STOCHASTIC_ROW_FIELDS,
    STOCHASTIC_SUMMARY_FIELDS,
    SWEEP2_FIELDS,
    SWEEP3_FIELDS,
    stochastic_compare,
    sweep_three_user,
    sweep_two_user,
    write_csv,
)
from .optsolver import opt_exact
from .policies import policy_by_name
from .search import exhaustive_search, local_search

DEFAULT_BUDGET = 2_000_000


# ---------------------------------------------------------------------------
# small helpers
# ---------------------------------------------------------------------------


def _int_list(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(part) for part in text.split(",") if part.strip() != "")
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _float_list(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(part) for part in text.split(",") if part.strip() != "")
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _write_json(path: str, payload: dict) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _sidecar(command: str, params: dict) -> dict:
    return {"version": __version__, "command": command, "params": params}


def _ratio_text(ratio: Fraction) -> str:
    return f"{ratio.numerator}/{ratio.denominator} ({float(ratio):.6f})"


def _ensure_dir(path: str) -> None:
    os.makedirs(path, exist_ok=True)


# ---------------------------------------------------------------------------
# subcommand implementations
# ---------------------------------------------------------------------------


def cmd_gen(args: argparse.Namespace) -> int:
    if args.kind == "adv2":
        if args.delta is None:
            raise ParameterError("gen adv2 requires --delta")
        trace = gen_adversarial_2user(args.delta, args.periods)
    elif args.kind == "adv3":
        if args.delta is None:
            raise ParameterError("gen adv3 requires --delta")
        trace = gen_adversarial_3user(args.delta, args.periods)
    else:
        trace = gen_iid(args.p, args.users, args.horizon, args.seed)
    if args.out:
        save_trace(args.out, trace)
        print(f"wrote {trace.num_users}-user trace of {trace.horizon} slots to {args.out}")
    else:
        sys.stdout.write(format_trace(trace))
    return 0


def cmd_simulate(args: argparse.Namespace) -> int:
    trace = load_trace(args.trace)
    kind = policy_by_name(args.policy)
    sim = simulate(trace, kind.decide, args.ages)
    avg = average_aoi(sim)
    print(
        f"policy {kind.value}: total cost {sim.total_cost} over {trace.horizon} "
        f"slots, average per-user age {_ratio_text(avg)}"
    )
    if args.out:
        fields = (
            ["slot"]
            + [f"age_{u}" for u in range(trace.num_users)]
            + ["decision", "success", "slot_cost"]
        )
        rows = []
        for rec in sim.records:
            row = {"slot": rec.slot, "decision": "" if rec.decision is None else rec.decision,
                   "success": rec.success, "slot_cost": rec.slot_cost}
            for u in range(trace.num_users):
                row[f"age_{u}"] = rec.pre_ages[u]
            rows.append(row)
        write_csv(args.out, fields, rows)
        print(f"wrote per-slot records to {args.out}")
    return 0


def cmd_opt(args: argparse.Namespace) -> int:
    trace = load_trace(args.trace)
    result = opt_exact(trace, args.ages, node_budget=args.budget)
    print(
        f"optimal cost {result.cost} over {trace.horizon} slots "
        f"({result.nodes} solver states)"
    )
    if args.out:
        save_schedule(args.out, result.schedule)
        print(f"wrote optimal schedule to {args.out}")
    return 0


def _print_report(report) -> None:
    print(
        f"{report.num_users} users, {report.horizon} slots: policy cost "
        f"{report.cost_policy}, optimal cost {report.cost_opt}, ratio "
        f"{_ratio_text(report.ratio)}"
    )
    if report.bound is not None:
        verdict = "within" if report.within_bound else "EXCEEDS"
        print(f"worst-case bound {_ratio_text(report.bound)}: {verdict}")
    complete = sum(1 for iv in report.intervals if iv.complete)
    print(f"intervals: {len(report.intervals)} ({complete} complete)")
    for v in report.violations:
        where = f" interval {v.interval}" if v.interval is not None else ""
        where += f" slot {v.slot}" if v.slot is not None else ""
        print(f"VIOLATION [{v.check}]{where}: {v.detail}")
    for w in report.warnings:
        print(f"warning [{w.check}] interval {w.interval}: {w.detail}")


def _interval_rows(report) -> list[dict]:
    slacks = {c.interval: c for c in report.checks}
    rows = []
    for iv in report.intervals:
        chk = slacks.get(iv.index)
        rows.append(
            {
                "index": iv.index,
                "start": iv.start_slot,
                "I": iv.length,
                "l": iv.residue,
                "user": iv.max_age_user,
                "complete": iv.complete,
                "case": iv.case,
                "split_a": iv.split_a,
                "split_b": iv.split_b,
                "next_l": iv.next_residue,
                "subs": len(iv.sub_intervals),
                "cost_policy": chk.cost_policy if chk else None,
                "cost_opt": chk.cost_opt if chk else None,
                "upper_slack": chk.upper_slack if chk else None,
                "lower_slack": chk.lower_slack if chk else None,
            }
        )
    return rows


INTERVAL_FIELDS = (
    "index", "start", "I", "l", "user", "complete", "case", "split_a",
    "split_b", "next_l", "subs", "cost_policy", "cost_opt", "upper_slack",
    "lower_slack",
)


def cmd_analyze(args: argparse.Namespace) -> int:
    trace = load_trace(args.trace)
    report = ratio_report(trace, args.ages, node_budget=args.budget)
    _print_report(report)
    if args.out:
        _ensure_dir(args.out)
        payload = report.to_json()
        payload["meta"] = _sidecar(
            "analyze", {"trace": args.trace, "budget": args.budget}
        )
        _write_json(os.path.join(args.out, "report.json"), payload)
        write_csv(
            os.path.join(args.out, "intervals.csv"),
            INTERVAL_FIELDS,
            _interval_rows(report),
        )
        from . import figures

        sim = simulate(trace, policy_by_name("ma-csit").decide, args.ages)
        opt_sim = replay(trace, report.opt_schedule, args.ages)
        figures.render_age_timelines(
            sim,
            opt_sim,
            os.path.join(args.out, "ages.png"),
            f"{trace.num_users} users, {trace.horizon} slots",
        )
        print(f"wrote report.json, intervals.csv, ages.png to {args.out}")
    return 0


def _run_sweep(args: argparse.Namespace, which: int) -> int:
    if which == 2:
        rows = sweep_two_user(args.deltas, args.periods, args.budget)
        name, fields, title = "sweep2", SWEEP2_FIELDS, "two-user worst-case construction"
    else:
        rows = sweep_three_user(args.deltas, args.periods, args.budget)
        name, fields, title = "sweep3", SWEEP3_FIELDS, "three-user worst-case construction"
    for row in rows:
        print(
            f"delta {row['delta']:>5}: ratio {row['ratio']:.6f} "
            f"(policy {row['cost_policy']}, optimal {row['cost_opt']})"
        )
    outdir = args.out or "."
    _ensure_dir(outdir)
    write_csv(os.path.join(outdir, f"{name}.csv"), fields, rows)
    _write_json(
        os.path.join(outdir, f"{name}.json"),
        _sidecar(name, {
            "deltas": list(args.deltas),
            "periods": args.periods,
            "budget": args.budget,
        }),
    )
    from . import figures

    figures.render_ratio_sweep(rows, os.path.join(outdir, f"{name}.png"), title)
    print(f"wrote {name}.csv, {name}.json, {name}.png to {outdir}")
    bad = sum(row["violations"] for row in rows)
    if bad:
        print(f"{bad} invariant violation(s) reported — see the analysis output")
        return 2
    return 0


def cmd_sweep2(args: argparse.Namespace) -> int:
    return _run_sweep(args, 2)


def cmd_sweep3(args: argparse.Namespace) -> int:
    return _run_sweep(args, 3)


def cmd_stochastic(args: argparse.Namespace) -> int:
    rows, summaries = stochastic_compare(
        args.p, args.users, args.horizon, args.seeds, args.seed
    )
    for s in summaries:
        print(
            f"p={s['p']:g}: mean age {s['mean_avg_age_csit']:.4f} (aware) vs "
            f"{s['mean_avg_age_oblivious']:.4f} (oblivious), "
            f"mean cost ratio {s['mean_ratio']:.4f}"
        )
    outdir = args.out or "."
    _ensure_dir(outdir)
    write_csv(os.path.join(outdir, "stochastic.csv"), STOCHASTIC_ROW_FIELDS, rows)
    write_csv(
        os.path.join(outdir, "stochastic_summary.csv"),
        STOCHASTIC_SUMMARY_FIELDS,
        summaries,
    )
    _write_json(
        os.path.join(outdir, "stochastic.json"),
        _sidecar("stochastic", {
            "p": list(args.p),
            "users": args.users,
            "horizon": args.horizon,
            "seeds": args.seeds,
            "seed": args.seed,
        }),
    )
    from . import figures

    figures.render_stochastic(
        summaries,
        os.path.join(outdir, "stochastic.png"),
        f"{args.users} users, {args.horizon} slots, {args.seeds} seeds",
    )
    print("wrote stochastic.csv, stochastic_summary.csv, stochastic.json, "
          f"stochastic.png to {outdir}")
    return 0


def cmd_search(args: argparse.Namespace) -> int:
    if args.mode == "local":
        result = local_search(
            args.users,
            args.horizon,
            args.ages,
            seed=args.seed,
            iterations=args.iterations,
            restarts=args.restarts,
            node_budget=args.budget,
        )
    elif args.mode == "sampled":
        result = exhaustive_search(
            args.users,
            args.horizon,
            args.ages,
            sample=args.sample,
            seed=args.seed,
        )
    else:
        result = exhaustive_search(
            args.users, args.horizon, args.ages, max_sequences=args.max_sequences
        )
    print(
        f"worst ratio {_ratio_text(result.best_ratio)} over "
        f"{result.sequences_examined} evaluated traces ({result.method})"
    )
    if args.out:
        _ensure_dir(args.out)
        trace_path = os.path.join(args.out, "best_trace.txt")
        save_trace(trace_path, result.trace)
        _write_json(
            os.path.join(args.out, "search.json"),
            {
                **_sidecar("search", {
                    "users": args.users,
                    "horizon": args.horizon,
                    "mode": args.mode,
                    "seed": args.seed,
                }),
                "best_ratio": float(result.best_ratio),
                "best_ratio_exact": [
                    result.best_ratio.numerator,
                    result.best_ratio.denominator,
                ],
                "sequences_examined": result.sequences_examined,
                "method": result.method,
            },
        )
        print(f"wrote best_trace.txt, search.json to {args.out}")
    return 0


def cmd_verify(args: argparse.Namespace) -> int:
    trace = load_trace(args.trace)
    report = ratio_report(trace, args.ages, node_budget=args.budget)
    _print_report(report)
    if args.out:
        payload = report.to_json()
        payload["meta"] = _sidecar("verify", {"trace": args.trace, "budget": args.budget})
        _write_json(args.out, payload)
        print(f"wrote report to {args.out}")
    if report.violations:
        return 2
    print("all checks passed")
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def _add_common(sp: argparse.ArgumentParser, *, budget: bool = False,
                ages: bool = False) -> None:
    sp.add_argument(
        "--config",
        metavar="FILE",
        help="file of 'key = value' lines for this subcommand's options",
    )
    if budget:
        sp.add_argument(
            "--budget",
            type=int,
            default=DEFAULT_BUDGET,
            help="exact-solver state budget (default %(default)s)",
        )
    if ages:
        sp.add_argument(
            "--ages",
            type=_int_list,
            default=None,
            metavar="A0,A1,...",
            help="initial ages (default: all ones)",
        )


def build_parser() -> tuple[argparse.ArgumentParser, dict]:
    parser = argparse.ArgumentParser(
        prog="aoisched",
        description="Age-of-information downlink scheduling toolkit",
    )
    parser.add_argument(
        "--version", action="version", version=f"%(prog)s {__version__}"
    )
    subparsers = parser.add_subparsers(dest="command", required=True)
    sub = {}

    sp = subparsers.add_parser("gen", help="generate a channel trace")
    sp.add_argument("--kind", choices=("iid", "adv2", "adv3"), default="iid")
    sp.add_argument("--delta", type=int, help="construction period (adv2/adv3)")
    sp.add_argument("--periods", type=int, default=1)
    sp.add_argument("--p", type=float, default=0.5, help="P(Good) for iid")
    sp.add_argument("--users", type=int, default=2)
    sp.add_argument("--horizon", type=int, default=50)
    sp.add_argument("--seed", type=int, default=1)
    sp.add_argument("--out", metavar="FILE", help="trace file (default: stdout)")
    _add_common(sp)
    sp.set_defaults(func=cmd_gen)
    sub["gen"] = sp

    sp = subparsers.add_parser("simulate", help="run a policy over a trace")
    sp.add_argument("--trace", required=True, metavar="FILE")
    sp.add_argument("--policy", default="ma-csit", choices=("ma-csit", "max-age"))
    sp.add_argument("--out", metavar="FILE", help="per-slot records CSV")
    _add_common(sp, ages=True)
    sp.set_defaults(func=cmd_simulate)
    sub["simulate"] = sp

    sp = subparsers.add_parser("opt", help="exact offline optimum of a trace")
    sp.add_argument("--trace", required=True, metavar="FILE")
    sp.add_argument("--out", metavar="FILE", help="optimal schedule file")
    _add_common(sp, budget=True, ages=True)
    sp.set_defaults(func=cmd_opt)
    sub["opt"] = sp

    sp = subparsers.add_parser("analyze", help="interval and ratio report")
    sp.add_argument("--trace", required=True, metavar="FILE")
    sp.add_argument("--out", metavar="DIR",
                    help="write report.json, intervals.csv, ages.png here")
    _add_common(sp, budget=True, ages=True)
    sp.set_defaults(func=cmd_analyze)
    sub["analyze"] = sp

    sp = subparsers.add_parser("sweep2", help="two-user construction sweep")
    sp.add_argument("--deltas", type=_int_list, default=(8, 16, 32, 64, 128))
    sp.add_argument("--periods", type=int, default=20)
    sp.add_argument("--out", metavar="DIR", help="output directory (default: .)")
    _add_common(sp, budget=True)
    sp.set_defaults(func=cmd_sweep2)
    sub["sweep2"] = sp

    sp = subparsers.add_parser("sweep3", help="three-user construction sweep")
    sp.add_argument("--deltas", type=_int_list, default=(24, 48, 96, 192, 384))
    sp.add_argument("--periods", type=int, default=20)
    sp.add_argument("--out", metavar="DIR", help="output directory (default: .)")
    _add_common(sp, budget=True)
    sp.set_defaults(func=cmd_sweep3)
    sub["sweep3"] = sp

    sp = subparsers.add_parser("stochastic", help="policy comparison on i.i.d. channels")
    sp.add_argument("--p", type=_float_list, default=(0.1, 0.3, 0.5))
    sp.add_argument("--users", type=int, default=3)
    sp.add_argument("--horizon", type=int, default=10_000)
    sp.add_argument("--seeds", type=int, default=50, help="number of seeds per p")
    sp.add_argument("--seed", type=int, default=1, help="first seed")
    sp.add_argument("--out", metavar="DIR", help="output directory (default: .)")
    _add_common(sp)
    sp.set_defaults(func=cmd_stochastic)
    sub["stochastic"] = sp

    sp = subparsers.add_parser("search", help="search for worst-case traces")
    sp.add_argument("--users", type=int, required=True)
    sp.add_argument("--horizon", type=int, required=True)
    sp.add_argument("--mode", choices=("exhaustive", "sampled", "local"),
                    default="exhaustive")
    sp.add_argument("--sample", type=int, default=1_000_000,
                    help="trace count for --mode sampled")
    sp.add_argument("--max-sequences", type=int, default=1 << 24,
                    help="full-enumeration size limit")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--iterations", type=int, default=50,
                    help="hill-climb step limit for --mode local")
    sp.add_argument("--restarts", type=int, default=4,
                    help="random starts for --mode local")
    sp.add_argument("--out", metavar="DIR", help="write best_trace.txt, search.json")
    _add_common(sp, budget=True, ages=True)
    sp.set_defaults(func=cmd_search)
    sub["search"] = sp

    sp = subparsers.add_parser("verify", help="run every invariant check on a trace")
    sp.add_argument("--trace", required=True, metavar="FILE")
    sp.add_argument("--out", metavar="FILE", help="report JSON file")
    _add_common(sp, budget=True, ages=True)
    sp.set_defaults(func=cmd_verify)
    sub["verify"] = sp

    return parser, sub


def _read_config(path: str) -> dict:
    entries: dict = {}
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigurationError(f"cannot read config file {path}: {exc}") from None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigurationError(
                f"{path} line {lineno}: expected 'key = value', got {line!r}"
            )
        key, _, value = line.partition("=")
        entries[key.strip().replace("-", "_")] = value.strip()
    return entries


def _parse(parser: argparse.ArgumentParser, sub: dict,
           argv: Sequence[str]) -> argparse.Namespace:
    args = parser.parse_args(list(argv))
    cfg_path = getattr(args, "config", None)
    if not cfg_path:
        return args
    entries = _read_config(cfg_path)
    sp = sub[args.command]
    valid = {a.dest for a in sp._actions if a.dest not in ("help", "config", "func")}
    for key in entries:
        if key not in valid:
            raise ConfigurationError(
                f"config key {key!r} is not an option of '{args.command}' "
                f"(known: {', '.join(sorted(valid))})"
            )
    # String defaults go through each option's type converter on re-parse,
    # and explicitly passed flags still win over defaults.
    sp.set_defaults(**entries)
    return parser.parse_args(list(argv))


def main(argv: Optional[Sequence[str]] = None) -> int:
    if argv is None:
        argv = sys.argv[1:]
    try:
        parser, sub = build_parser()
        try:
            args = _parse(parser, sub, argv)
        except SystemExit as exc:  # argparse exits 2 on bad usage; remap
            code = exc.code
            return 0 if code in (0, None) else 1
        return args.func(args)
    except ResourceBudgetError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (
        ParameterError,
        ParseError,
        ConfigurationError,
        ScopeError,
        IntegrityError,
        AoischedError,
        OSError,
    ) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
