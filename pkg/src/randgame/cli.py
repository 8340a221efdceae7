"""Command line entry point: ``randgame <subcommand> [flags]``."""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

from . import __version__
from .asymptotics import joint_poisson_pmf, table, tv_distance
from .branching import Binomial, Poisson, extinction_fixed_point, gw_batch
from .census import bad_sink_probability, census
from .dynamics import DynamicsConfig, convergence_survey
from .grid import (
    SizingError,
    WinnerTable,
    make_shape,
    sample_rank_table,
    sample_winner_table,
    substream,
)
from .harness import (
    ExperimentConfig,
    ExperimentError,
    KINDS,
    _records_csv,
    _summary_csv,
    exhaustive_oracle,
    record_line,
    run_and_emit,
)
from .response import better_sinks, classify_better, classify_br, sinks
from .slices import (
    all_good_cycles,
    all_good_cycles_one_scc,
    cycles_and_basins,
    good_sinks_reached_from_good_cycle,
    iter_slices,
    nonsinks_reach_good_cycle,
    slice_stats,
)


# --- argument types -------------------------------------------------------------


def int_at_least(lo: int):
    def parse(text: str) -> int:
        try:
            v = int(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
        if v < lo:
            raise argparse.ArgumentTypeError(f"must be >= {lo}, got {v}")
        return v

    parse.__name__ = f"int>={lo}"
    return parse


def float_in(lo: float, hi: float, lo_open: bool = True, hi_open: bool = True):
    def parse(text: str) -> float:
        try:
            v = float(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"expected a number, got {text!r}") from None
        bad_lo = v <= lo if lo_open else v < lo
        bad_hi = v >= hi if hi_open else v > hi
        if bad_lo or bad_hi or v != v:
            left, right = "(" if lo_open else "[", ")" if hi_open else "]"
            raise argparse.ArgumentTypeError(f"must lie in {left}{lo}, {hi}{right}, got {v}")
        return v

    parse.__name__ = "float"
    return parse


def int_list(text: str) -> tuple[int, ...]:
    parse = int_at_least(2)
    return tuple(parse(t) for t in text.split(",") if t.strip())


def starts_arg(text: str) -> str | int:
    return "all" if text == "all" else int_at_least(1)(text)


GLOBAL_FLAGS = (
    ("--n", dict(type=int_at_least(2), default=3, help="number of players (>= 2)")),
    ("--k", dict(type=int_at_least(2), default=8, help="actions per player (>= 2)")),
    ("--samples", dict(type=int_at_least(1), default=1, help="number of samples or runs (>= 1)")),
    ("--seed", dict(type=int_at_least(0), default=0, help="master seed (>= 0)")),
    ("--epsilon", dict(type=float_in(0.0, 0.5), default=0.1, help="good-sink exponent in (0, 0.5)")),
    ("--workers", dict(type=int_at_least(1), default=1, help="worker processes (>= 1)")),
    ("--out", dict(default=None, help="output file (directory for `experiment`); stdout if omitted")),
    ("--format", dict(choices=("jsonl", "csv", "json"), default=None, help="output format")),
)


def _add_globals(p: argparse.ArgumentParser, suppress: bool) -> None:
    for flag, kw in GLOBAL_FLAGS:
        kw = dict(kw)
        if suppress:
            # on subparsers: only override what the top-level parser already set
            kw["default"] = argparse.SUPPRESS
        p.add_argument(flag, **kw)


# --- output ------------------------------------------------------------------------


def _write(args, text: str) -> None:
    if args.out is None:
        sys.stdout.write(text)
        return
    path = Path(args.out)
    if not path.parent.is_dir():
        raise ExperimentError(f"parent directory {path.parent} of output path does not exist")
    if path.is_dir():
        raise ExperimentError(f"output path {path} is a directory")
    path.write_text(text)


def _emit_records(args, records: list[dict], default: str = "jsonl") -> None:
    fmt = args.format or default
    if fmt == "jsonl":
        text = "".join(record_line(r) + "\n" for r in records)
    elif fmt == "csv":
        text = _records_csv(records)
    else:
        text = json.dumps(records, indent=2) + "\n"
    _write(args, text)


def _table(args) -> WinnerTable | None:
    if getattr(args, "table", None) is None:
        return None
    return WinnerTable.from_json(Path(args.table).read_text())


def _games(args):
    """Yield ``(j, table)`` for each sample, or the single table from ``--table``."""
    given = _table(args)
    if given is not None:
        yield 0, given
        return
    shape = make_shape(args.n, args.k)
    for j in range(args.samples):
        yield j, sample_winner_table(shape, substream(args.seed, j))


# --- subcommands -----------------------------------------------------------------


def cmd_classify(args) -> None:
    records = []
    if args.better:
        shape = make_shape(args.n, args.k)
        for j in range(args.samples):
            r = sample_rank_table(shape, substream(args.seed, j))
            records.append({
                "sample": j, "seed": args.seed, "n": args.n, "k": args.k,
                "flags": classify_better(r).as_dict(),
                "sinks": [int(s) for s in better_sinks(r)],
            })
    else:
        for j, w in _games(args):
            records.append({
                "sample": j, "seed": args.seed, "n": w.shape.n, "k": w.shape.k,
                "flags": classify_br(w).as_dict(),
                "sinks": [int(s) for s in sinks(w)],
            })
    _emit_records(args, records)


def cmd_census(args) -> None:
    records = []
    for j, w in _games(args):
        c = census(w, args.epsilon)
        records.append({
            "sample": j, "seed": args.seed, "n": w.shape.n, "k": w.shape.k,
            "epsilon": args.epsilon, "threshold": c.threshold,
            "X": c.X, "Y": c.Y, "good": c.good, "bad": c.bad,
        })
    _emit_records(args, records)
    if args.n >= 3 and records:
        p = bad_sink_probability(args.n)
        hist: dict = {}
        for r in records:
            hist[(r["X"], r["Y"])] = hist.get((r["X"], r["Y"]), 0) + 1
        tv = tv_distance(hist, lambda ab: joint_poisson_pmf(ab[0], ab[1], p))
        print(f"samples={len(records)} p={p:.6g} tv={tv:.4f}", file=sys.stderr)


def cmd_slices(args) -> None:
    records = []
    for j, w in _games(args):
        base = {"sample": j, "seed": args.seed, "n": w.shape.n, "k": w.shape.k}
        if args.stats:
            rec = dict(base, **slice_stats(w).to_json())
            if w.shape.n >= 3:
                cycles = all_good_cycles(w)
                rec["lemma8"] = all_good_cycles_one_scc(w, cycles).holds
                rec["lemma9"] = nonsinks_reach_good_cycle(w, cycles).holds
                if args.epsilon < 1 / 6:
                    rec["lemma10"] = good_sinks_reached_from_good_cycle(w, args.epsilon, cycles).holds
            records.append(rec)
            continue
        for sl in iter_slices(w.shape):
            for c in cycles_and_basins(w, sl):
                records.append(dict(base, **c.to_json()))
    _emit_records(args, records)


def cmd_gw(args) -> None:
    if args.offspring == "poisson":
        spec = Poisson(args.mean)
    else:
        spec = Binomial(args.trials, args.success)
    batch = gw_batch(spec, args.init, args.cap, args.samples, substream(args.seed, 0))
    eta = extinction_fixed_point(spec)
    out = {
        "offspring": args.offspring,
        "mean": spec.expectation,
        "init": args.init,
        "cap": args.cap,
        "runs": args.samples,
        "seed": args.seed,
        "extinction_frequency": batch.extinction_frequency,
        "extinction_probability": eta**args.init,
        "cap_hits": int(batch.cap_hit.sum()),
    }
    _write(args, json.dumps(out) + "\n")


def cmd_asymptotics(args) -> None:
    lo, hi = args.n_min, args.n_max
    if hi < lo:
        raise ValueError(f"--n-max ({hi}) must be >= --n-min ({lo})")
    rows = table(range(lo, hi + 1))
    fmt = args.format or "csv"
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
        writer.writeheader()
        for r in rows:
            writer.writerow({key: repr(v) if isinstance(v, float) else v for key, v in r.items()})
        _write(args, buf.getvalue())
    elif fmt == "json":
        _write(args, json.dumps(rows, indent=2) + "\n")
    else:
        _write(args, "".join(record_line(r) + "\n" for r in rows))


def cmd_dynamics(args) -> None:
    cfg = DynamicsConfig(args.q, args.max_steps, args.seed)
    shape = make_shape(args.n, args.k)
    records = []
    kept = j = 0
    limit = args.samples * args.max_tries
    while kept < args.samples:
        if j >= limit:
            raise ExperimentError(
                f"only {kept} of {args.samples} games met --condition {args.condition} "
                f"in {limit} draws"
            )
        w = sample_winner_table(shape, substream(args.seed, j))
        flags = classify_br(w) if args.condition != "any" else None
        if args.condition == "connected" and not flags.connected:
            j += 1
            continue
        if args.condition == "no_pne" and flags.has_pne:
            j += 1
            continue
        _, runs = convergence_survey(w, cfg, args.starts, key=(j,))
        for start, r in runs:
            records.append({
                "seed": args.seed, "n": args.n, "k": args.k, "q": args.q, "sample": j,
                "start": start, "converged": r.converged, "steps": r.steps,
                "sink": r.absorbing_profile,
            })
        kept += 1
        j += 1
    _emit_records(args, records)


def cmd_experiment(args) -> None:
    fmt = args.format or "jsonl"
    if fmt == "json":
        raise ValueError("experiment output format must be jsonl or csv")
    cfg = ExperimentConfig(
        kind=args.kind, n=args.n, k=args.k, k_sweep=args.k_sweep, samples=args.samples,
        epsilon=args.epsilon, q=args.q, max_steps=args.max_steps, starts=args.starts,
        seed=args.seed, workers=args.workers, out=args.out, fmt=fmt,
    )
    if cfg.kind == "oracle":
        results = [exhaustive_oracle(make_shape(cfg.n, k)) for k in cfg.ks]
        text = "".join(json.dumps(r) + "\n" for r in results)
        if args.out is None:
            sys.stdout.write(text)
        else:
            out = Path(args.out)
            out.mkdir(exist_ok=True)
            (out / "oracle.jsonl").write_text(text)
        return
    summary, _ = run_and_emit(cfg)
    sys.stdout.write(_summary_csv(summary))


def cmd_oracle(args) -> None:
    _write(args, json.dumps(exhaustive_oracle(make_shape(args.n, args.k), args.rank_cap)) + "\n")


# --- parser ------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="randgame",
        description="Random best-response games: classification, sink census, slices, "
        "branching processes, limiting constants and dynamics.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    _add_globals(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    def add(name: str, fn, help: str) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help, description=help)
        _add_globals(p, suppress=True)
        p.set_defaults(func=fn)
        return p

    p = add("classify", cmd_classify, "classify sampled games (JSONL, one line per sample)")
    p.add_argument("--better", action="store_true", help="sample rank tables and classify the better-response graph")
    p.add_argument("--table", help="classify the winner table in this JSON file instead of sampling")

    p = add("census", cmd_census, "count good and bad sinks of sampled games")
    p.add_argument("--table", help="winner table JSON file instead of sampling")

    p = add("slices", cmd_slices, "list cycles and basins in every two-dimensional slice")
    p.add_argument("--table", help="winner table JSON file instead of sampling")
    p.add_argument("--stats", action="store_true", help="one summary line per sample instead of one per cycle")

    p = add("gw", cmd_gw, "simulate Galton-Watson processes (--samples runs)")
    p.add_argument("--offspring", choices=("poisson", "binomial"), default="poisson")
    p.add_argument("--mean", type=float_in(0.0, 1e6), default=2.0, help="Poisson mean (> 0)")
    p.add_argument("--trials", type=int_at_least(1), default=2, help="binomial trials (>= 1)")
    p.add_argument("--success", type=float_in(0.0, 1.0, False, False), default=0.5, help="binomial success probability in [0, 1]")
    p.add_argument("--init", type=int_at_least(1), default=1, help="initial population (>= 1)")
    p.add_argument("--cap", type=int_at_least(1), default=100_000, help="total population cap (>= 1)")

    p = add("asymptotics", cmd_asymptotics, "table of limiting constants over a range of n")
    p.add_argument("--n-min", type=int_at_least(3), default=3)
    p.add_argument("--n-max", type=int_at_least(3), default=12)

    def dyn_flags(p):
        p.add_argument("--q", type=float_in(0.0, 1.0, True, False), default=0.5, help="selection probability in (0, 1]")
        p.add_argument("--max-steps", type=int_at_least(0), default=100_000, help="step cap per run (>= 0)")
        p.add_argument("--starts", type=starts_arg, default=10, help="random starts per game (>= 1) or 'all'")

    p = add("dynamics", cmd_dynamics, "run best response with inertia on sampled games")
    dyn_flags(p)
    p.add_argument("--condition", choices=("any", "connected", "no_pne"), default="any",
                   help="keep only games of this class (later sample indices are drawn until --samples games qualify)")
    p.add_argument("--max-tries", type=int_at_least(1), default=100, help="draws allowed per wanted game")

    p = add("experiment", cmd_experiment, "reproducible Monte Carlo experiment; writes records, summary and manifest")
    p.add_argument("--kind", choices=KINDS, required=True)
    p.add_argument("--k-sweep", type=int_list, default=(), help="comma-separated k values (overrides --k)")
    dyn_flags(p)

    p = add("oracle", cmd_oracle, "exact class counts by enumerating every table")
    p.add_argument("--rank-cap", type=int_at_least(0), default=100_000,
                   help="enumerate rank tables only if there are at most this many")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "experiment" and args.starts == "all":
        parser.error("experiment --starts must be a number")
    try:
        args.func(args)
    except (ValueError, SizingError, ExperimentError, OSError) as exc:
        print(f"randgame: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
