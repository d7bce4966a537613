"""Command-line entry point: ``decmon run | golden | bench``."""

from __future__ import annotations

import argparse
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from . import golden, ltl
from .alphabet import AlphabetError, DistributedAlphabet
from .generators import (
    PATTERN_KINDS,
    TraceFormatError,
    UnknownPattern,
    gen_formula,
    gen_pattern,
    gen_traces,
    load_trace,
    rng_for,
)
from .metrics import RunSummary, aggregate, per_run_row, to_csv
from .monitor import Monitor, monitor_from_acceptor
from .netsim import CapExceeded, CommConfig, ConfigError, SimResult, run_centralized, simulate, validate_config
from .specfile import SpecError, load_spec

log = logging.getLogger("decmon")

EXIT_OK, EXIT_DIFF, EXIT_USAGE, EXIT_RUNTIME = 0, 1, 2, 3


class UsageError(Exception):
    pass


# -- argument helpers ---------------------------------------------------------


def parse_leaders(text: str, n: int) -> tuple[int, ...]:
    text = text.strip()
    if text == "all":
        return tuple(range(1, n + 1))
    if "," not in text:
        k = int(text)
        if not 0 <= k <= n:
            raise UsageError(f"leader count {k} not in 0..{n}")
        return tuple(range(1, k + 1))
    out = tuple(int(x) for x in text.split(",") if x.strip())
    if any(not 1 <= i <= n for i in out):
        raise UsageError(f"leader indices must be in 1..{n}")
    return out


def parse_choose_mon(text: str, n: int) -> tuple[int, ...]:
    if text == "cycle":
        return tuple(i % n + 1 for i in range(1, n + 1))
    return tuple(int(x) for x in text.replace(" ", ",").split(",") if x)


def parse_range(text: str) -> list[int]:
    """``1..3`` or ``1,2,5``."""
    if ".." in text:
        lo, hi = text.split("..", 1)
        return list(range(int(lo), int(hi) + 1))
    return [int(x) for x in text.split(",") if x.strip()]


def resolve_seed(seed: int | None) -> int:
    if seed is not None:
        return seed
    env = os.environ.get("DECMON_SEED")
    return int(env) if env else 0


def comm_config(args, n: int) -> CommConfig:
    leaders = parse_leaders(args.leaders, n)
    cfg = CommConfig(
        n=n,
        choose_mon=parse_choose_mon(args.choose_mon, n),
        leader_mon=tuple(i in leaders for i in range(1, n + 1)),
        event_period=args.event_period,
        comm_period=args.comm_period,
        count_halt=args.count_halt,
    )
    validate_config(cfg)
    return cfg


def _formula_text(value: str) -> str:
    path = Path(value)
    if len(value) < 256 and path.is_file():
        return path.read_text(encoding="utf-8").strip()
    return value


def load_monitor(args) -> tuple[Monitor, str]:
    if args.spec:
        return monitor_from_acceptor(load_spec(args.spec)), Path(args.spec).name
    text = _formula_text(args.formula)
    f = ltl.parse(text)
    if args.components:
        alphabet = DistributedAlphabet.parse(args.components)
    else:
        alphabet = DistributedAlphabet.from_blocks([[p] for p in sorted(ltl.atoms(f))])
    return ltl.compile(f, alphabet, cap=args.state_cap), ltl.render(f)


# -- run ----------------------------------------------------------------------


def _metrics_line(res: SimResult) -> str:
    m = res.metrics
    return (
        f"  n_msgs={m.n_msgs} msg_bits={m.msg_bits} trace_len={m.trace_len_to_verdict}"
        f" mem_bits={m.peak_mem_bits}"
    )


def cmd_run(args) -> int:
    monitor, _ = load_monitor(args)
    alphabet = monitor.alphabet
    seed = resolve_seed(args.seed)
    if args.trace:
        traces = load_trace(alphabet, args.trace)
    else:
        traces = gen_traces(alphabet, args.trace_len, args.prob, rng_for(seed, "run", "trace"))
    out: list[str] = []
    central = decent_res = None
    if args.mode in ("central", "both"):
        central = run_centralized(monitor, traces)
        where = f" at t={central.verdict_round}" if central.verdict.definitive else ""
        out.append(f"central verdict {central.verdict}{where}")
        out.append(_metrics_line(central))
    if args.mode in ("decent", "both"):
        cfg = comm_config(args, alphabet.n)
        decent_res = simulate(monitor, traces, cfg, seed, log_rounds=args.log_rounds)
        v = decent_res.verdict
        if v.definitive:
            out.append(f"decent verdict {v} by M{decent_res.verdict_monitor} at round {decent_res.verdict_round}")
        else:
            out.append(f"decent verdict {v}")
        out.append(_metrics_line(decent_res))
        if central is not None and decent_res.metrics.delay is not None:
            delay = decent_res.metrics.delay
            assert delay >= 0, "decentralized verdict precedes the centralized one"
            out.append(f"delay {delay}")
        if args.log_rounds:
            out.append(decent_res.transcript().rstrip("\n"))
    _emit("\n".join(out) + "\n", args.out)
    return EXIT_OK


def _emit(text: str, path: str | None):
    if path and path != "-":
        Path(path).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


# -- golden -------------------------------------------------------------------


def cmd_golden(args) -> int:
    actual = golden.transcript()
    if args.emit_transcript:
        _emit(actual, args.emit_transcript)
    fixture = golden.TABLE_1 if not args.fixture else Path(args.fixture).read_text(encoding="utf-8")
    problem = golden.diff(fixture, actual)
    if problem is None:
        print("golden: transcript matches")
        return EXIT_OK
    print(f"golden: first divergence at {problem}")
    return EXIT_DIFF


# -- bench --------------------------------------------------------------------


@dataclass(frozen=True)
class BenchJob:
    label: str
    kind: str  # "size" or "pattern"
    run: int
    seed: int
    components: str
    trace_len: int
    prob: float
    cfg: CommConfig
    state_cap: int
    max_attempts: int = 20


@dataclass(frozen=True)
class BenchOutcome:
    central: RunSummary
    decent: RunSummary
    rejected: int


def _summary(mode: str, job: BenchJob, res: SimResult) -> RunSummary:
    return RunSummary(mode, job.label if job.kind == "pattern" else "random", _size_label(job), str(res.verdict), res.metrics)


def _size_label(job: BenchJob) -> str:
    return job.label if job.kind == "size" else "-"


def run_bench_job(job: BenchJob) -> BenchOutcome:
    alphabet = DistributedAlphabet.parse(job.components)
    rejected = 0
    for attempt in range(job.max_attempts):
        rng = rng_for(job.seed, job.kind, job.label, job.run, attempt, "formula")
        if job.kind == "size":
            f = gen_formula(alphabet, int(job.label), rng)
        else:
            f = gen_pattern(job.label, alphabet, rng)
        try:
            monitor = ltl.compile(f, alphabet, cap=job.state_cap)
            break
        except ltl.StateExplosion:
            log.info("rejected %s (state explosion)", ltl.render(f))
            rejected += 1
    else:
        raise RejectionRateExceeded(f"{job.kind} {job.label} run {job.run}: no compilable formula")
    traces = gen_traces(alphabet, job.trace_len, job.prob, rng_for(job.seed, job.kind, job.label, job.run, "trace"))
    central = run_centralized(monitor, traces)
    decent_res = simulate(monitor, traces, job.cfg, job.seed)
    return BenchOutcome(_summary("central", job, central), _summary("decent", job, decent_res), rejected)


class RejectionRateExceeded(RuntimeError):
    pass


def bench_rows(jobs_by_label: dict[str, list[BenchJob]], mode: str, per_run: bool, workers: int) -> tuple[list[dict], int, int]:
    flat = [j for jobs in jobs_by_label.values() for j in jobs]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(run_bench_job, flat))
    else:
        outcomes = [run_bench_job(j) for j in flat]
    rows: list[dict] = []
    rejected = sum(o.rejected for o in outcomes)
    pos = 0
    for label, jobs in jobs_by_label.items():
        batch = outcomes[pos : pos + len(jobs)]
        pos += len(jobs)
        central = [o.central for o in batch]
        decent_runs = [o.decent for o in batch]
        modes = ("central", "decent") if mode == "both" else (mode,)
        for m in modes:
            runs = central if m == "central" else decent_runs
            rows.append(aggregate(runs, central=central))
            if per_run:
                rows.extend(per_run_row(r, k) for k, r in enumerate(runs))
    return rows, rejected, len(flat)


def cmd_bench(args) -> int:
    if args.runs < 1:
        raise UsageError("--runs must be >= 1")
    if args.sizes and args.patterns:
        raise UsageError("give either --sizes or --patterns")
    seed = resolve_seed(args.seed)
    alphabet = DistributedAlphabet.parse(args.components or "a|b|c")
    cfg = comm_config(args, alphabet.n)
    if args.patterns:
        kinds = list(PATTERN_KINDS) if args.patterns == "all" else [k.strip() for k in args.patterns.split(",")]
        for k in kinds:
            if k not in PATTERN_KINDS:
                raise UsageError(f"unknown pattern {k!r}; known: {', '.join(PATTERN_KINDS)}")
        labels, kind = kinds, "pattern"
    else:
        sizes = parse_range(args.sizes or "1..6")
        if any(s < 1 for s in sizes):
            raise UsageError("formula sizes start at 1")
        labels, kind = [str(s) for s in sizes], "size"
    components = " | ".join(" ".join(b) for b in alphabet.blocks)
    jobs = {
        label: [
            BenchJob(label, kind, run, seed, components, args.trace_len, args.prob, cfg, args.state_cap)
            for run in range(args.runs)
        ]
        for label in labels
    }
    rows, rejected, total = bench_rows(jobs, args.mode, args.per_run, args.jobs)
    if rejected > 0.5 * (rejected + total):
        log.error("rejection rate %d/%d exceeds 50%%", rejected, rejected + total)
        return EXIT_RUNTIME
    _emit(to_csv(rows), args.out)
    return EXIT_OK


# -- main ---------------------------------------------------------------------


def _common(p: argparse.ArgumentParser, default_mode: str):
    p.add_argument("--components", help='alphabet partition, e.g. "a|b|c"')
    p.add_argument("--mode", choices=("central", "decent", "both"), default=default_mode)
    p.add_argument("--leaders", default="1", help="all, a count K (monitors 1..K), or a list i,j")
    p.add_argument("--choose-mon", default="cycle", help="cycle or an explicit permutation, e.g. 2,3,1")
    p.add_argument("--event-period", type=int, default=1)
    p.add_argument("--comm-period", type=int, default=1)
    p.add_argument("--seed", type=int, default=None, help="root seed (default: $DECMON_SEED or 0)")
    p.add_argument("--out", help="output file (default: stdout)")
    p.add_argument("--count-halt", action="store_true", help="count halt notifications as messages")
    p.add_argument("--prob", type=float, default=0.5, help="per-proposition truth probability")
    p.add_argument("--state-cap", type=int, default=ltl.DEFAULT_STATE_CAP)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="decmon", description="Decentralized monitoring of regular languages")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="monitor one trace")
    spec = run.add_mutually_exclusive_group(required=True)
    spec.add_argument("--spec", help="automaton spec file")
    spec.add_argument("--formula", help="LTL formula, inline or a file path")
    trace = run.add_mutually_exclusive_group()
    trace.add_argument("--trace", help="trace file (one line per instant, '|' between components)")
    trace.add_argument("--trace-len", type=int, default=100)
    run.add_argument("--log-rounds", action="store_true", help="print the round-by-round log")
    _common(run, "both")

    gold = sub.add_parser("golden", help="replay the worked example and diff against its transcript")
    gold.add_argument("--emit-transcript", nargs="?", const="-", help="write the replay transcript")
    gold.add_argument("--fixture", help="compare against this transcript instead of the built-in one")

    bench = sub.add_parser("bench", help="benchmark batches, CSV output")
    bench.add_argument("--sizes", help="formula sizes, e.g. 1..6")
    bench.add_argument("--patterns", help="comma-separated pattern kinds, or 'all'")
    bench.add_argument("--runs", type=int, default=100)
    bench.add_argument("--trace-len", type=int, default=1000)
    bench.add_argument("--per-run", action="store_true")
    bench.add_argument("--jobs", type=int, default=1, help="worker processes")
    _common(bench, "decent")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    handlers = {"run": cmd_run, "golden": cmd_golden, "bench": cmd_bench}
    try:
        return handlers[args.command](args)
    except CapExceeded as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_RUNTIME
    except RejectionRateExceeded as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_RUNTIME
    except (
        UsageError,
        ConfigError,
        SpecError,
        AlphabetError,
        TraceFormatError,
        UnknownPattern,
        ltl.LTLSyntaxError,
        ltl.StateExplosion,
        OSError,
        ValueError,
    ) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
