"""Reproducible Monte Carlo experiments, exhaustive oracle counts, and output files.

Sample ``j`` of an experiment draws everything from ``substream(seed, j)``
(or keys extending ``(j,)``), so records are a pure function of the config
whatever the worker count. Records are merged in sample order.
"""
from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
import time
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
from scipy.stats import binomtest

from . import __version__, _kernels
from .asymptotics import joint_poisson_pmf, tv_distance
from .census import bad_sink_probability, census
from .dynamics import DynamicsConfig, convergence_survey
from .grid import (
    DEFAULT_ENUMERATION_CAP,
    enumerate_rank_tables,
    enumerate_winner_tables,
    GridShape,
    make_shape,
    sample_winner_table,
    SizingError,
    substream,
)
from .response import classify_better, classify_br, sinks
from .slices import (
    all_good_cycles,
    all_good_cycles_one_scc,
    good_sinks_reached_from_good_cycle,
    nonsinks_reach_good_cycle,
    slice_stats,
)

KINDS = ("connectivity", "sink_census", "slices", "dynamics", "oracle")
FORMATS = ("jsonl", "csv")
MIN_CONDITIONING_COUNT = 30

SUMMARY_COLUMNS = (
    "kind",
    "n",
    "k",
    "metric",
    "successes",
    "trials",
    "estimate",
    "ci_low",
    "ci_high",
    "status",
)

# Finite-k tolerances used by the acceptance suite; copied into every manifest.
TOLERANCES = {
    "pne_fraction_abs": 0.03,
    "connected_given_pne_abs": 0.03,
    "census_tv_max": 0.1,
    "census_no_sink_abs": 0.02,
    "lemma_pass_floor": 0.95,
    "good_cycle_slice_floor": 0.01,
    "oracle_sigma": 3.0,
}


class ExperimentError(RuntimeError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    kind: str
    n: int
    k: int | None = None
    k_sweep: tuple[int, ...] = ()
    samples: int = 1000
    epsilon: float = 0.1
    q: float = 0.5
    max_steps: int = 100_000
    starts: int = 10
    seed: int = 0
    workers: int = 1
    out: str | None = None
    fmt: str = "jsonl"

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ValueError(f"unknown experiment kind {self.kind!r}; expected one of {KINDS}")
        if self.fmt not in FORMATS:
            raise ValueError(f"unknown format {self.fmt!r}; expected one of {FORMATS}")
        if not self.ks:
            raise ValueError("give k or a non-empty k_sweep")
        if self.kind != "oracle" and self.samples < 1:
            raise ValueError("samples must be >= 1")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        if not 0 < self.epsilon < 0.5:
            raise ValueError("epsilon must lie in (0, 1/2)")
        for k in self.ks:
            shape = make_shape(self.n, k)
            if self.kind == "oracle" and k**shape.line_count > DEFAULT_ENUMERATION_CAP:
                raise SizingError(f"n={self.n}, k={k} is too large to enumerate")
        if self.kind == "slices" and self.n >= 3 and self.epsilon >= 1 / 6:
            raise ValueError("the good-sink check needs epsilon < 1/6")

    @property
    def ks(self) -> tuple[int, ...]:
        return tuple(self.k_sweep) if self.k_sweep else ((self.k,) if self.k is not None else ())

    def to_json(self) -> dict:
        d = asdict(self)
        d["k_sweep"] = list(self.k_sweep)
        return d


# --- per-sample work -----------------------------------------------------------


def _connectivity(cfg: ExperimentConfig, shape: GridShape, j: int) -> dict:
    w = sample_winner_table(shape, substream(cfg.seed, j))
    return {
        "sample": j,
        "seed": cfg.seed,
        "n": shape.n,
        "k": shape.k,
        "flags": classify_br(w).as_dict(),
        "sinks": [int(s) for s in sinks(w)],
    }


def _sink_census(cfg: ExperimentConfig, shape: GridShape, j: int) -> dict:
    w = sample_winner_table(shape, substream(cfg.seed, j))
    c = census(w, cfg.epsilon)
    return {
        "sample": j,
        "seed": cfg.seed,
        "n": shape.n,
        "k": shape.k,
        "epsilon": cfg.epsilon,
        "flags": classify_br(w).as_dict(),
        "sinks": sorted(c.good + c.bad),
        "X": c.X,
        "Y": c.Y,
    }


def _slices(cfg: ExperimentConfig, shape: GridShape, j: int) -> dict:
    w = sample_winner_table(shape, substream(cfg.seed, j))
    stats = slice_stats(w)
    rec = {"sample": j, "seed": cfg.seed, "n": shape.n, "k": shape.k}
    rec.update(stats.to_json())
    if shape.n >= 3:
        cycles = all_good_cycles(w)
        rec["lemma8"] = all_good_cycles_one_scc(w, cycles).holds
        rec["lemma9"] = nonsinks_reach_good_cycle(w, cycles).holds
        rec["lemma10"] = good_sinks_reached_from_good_cycle(w, cfg.epsilon, cycles).holds
    return rec


def _dynamics(cfg: ExperimentConfig, shape: GridShape, j: int) -> dict:
    w = sample_winner_table(shape, substream(cfg.seed, j))
    dcfg = DynamicsConfig(cfg.q, cfg.max_steps, cfg.seed)
    _, runs = convergence_survey(w, dcfg, cfg.starts, key=(j,))
    return {
        "sample": j,
        "seed": cfg.seed,
        "n": shape.n,
        "k": shape.k,
        "q": cfg.q,
        "flags": classify_br(w).as_dict(),
        "sinks": [int(s) for s in sinks(w)],
        "dynamics": {
            "start": [s for s, _ in runs],
            "converged": [r.converged for _, r in runs],
            "steps": [r.steps for _, r in runs],
            "sink": [r.absorbing_profile for _, r in runs],
        },
    }


_SAMPLERS = {
    "connectivity": _connectivity,
    "sink_census": _sink_census,
    "slices": _slices,
    "dynamics": _dynamics,
}


def _run_chunk(args) -> list[dict]:
    cfg, k, lo, hi = args
    shape = make_shape(cfg.n, k)
    fn = _SAMPLERS[cfg.kind]
    return [fn(cfg, shape, j) for j in range(lo, hi)]


def _chunks(samples: int, workers: int) -> list[tuple[int, int]]:
    size = max(1, min(256, math.ceil(samples / (8 * workers))))
    return [(lo, min(samples, lo + size)) for lo in range(0, samples, size)]


def run_samples(cfg: ExperimentConfig, k: int) -> list[dict]:
    tasks = [(cfg, k, lo, hi) for lo, hi in _chunks(cfg.samples, cfg.workers)]
    if cfg.workers == 1:
        parts = map(_run_chunk, tasks)
        return [r for part in parts for r in part]
    with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
        return [r for part in pool.map(_run_chunk, tasks) for r in part]


# --- summaries ------------------------------------------------------------------


@dataclass(frozen=True)
class Estimate:
    metric: str
    successes: int | None
    trials: int
    estimate: float | None
    ci_low: float | None
    ci_high: float | None
    status: str = "ok"


def wilson(successes: int, trials: int) -> tuple[float, float]:
    ci = binomtest(successes, trials).proportion_ci(confidence_level=0.95, method="wilson")
    return float(ci.low), float(ci.high)


def proportion(metric: str, successes: int, trials: int, conditional: bool = False) -> Estimate:
    if trials == 0 or (conditional and trials < MIN_CONDITIONING_COUNT):
        return Estimate(metric, successes, trials, None, None, None, "insufficient")
    lo, hi = wilson(successes, trials)
    return Estimate(metric, successes, trials, successes / trials, lo, hi)


def mean_estimate(metric: str, values) -> Estimate:
    x = np.asarray(values, dtype=float)
    if len(x) == 0:
        return Estimate(metric, None, 0, None, None, None, "insufficient")
    m = float(x.mean())
    half = 1.96 * float(x.std(ddof=1)) / math.sqrt(len(x)) if len(x) > 1 else math.nan
    return Estimate(metric, None, len(x), m, m - half, m + half)


def _flag_estimates(records: list[dict]) -> list[Estimate]:
    N = len(records)
    pne = [r for r in records if r["flags"]["pne"]]
    out = [proportion("has_pne", len(pne), N)]
    for flag in ("connected", "weakly_acyclic", "acyclic"):
        hits = sum(r["flags"][flag] for r in pne)
        out.append(proportion(f"{flag}_given_pne", hits, len(pne), conditional=True))
    out.append(mean_estimate("mean_sinks", [len(r["sinks"]) for r in records]))
    return out


def summarize(cfg: ExperimentConfig, k: int, records: list[dict]) -> list[Estimate]:
    N = len(records)
    if cfg.kind == "connectivity":
        return _flag_estimates(records)
    if cfg.kind == "sink_census":
        out = _flag_estimates(records)
        hist = Counter((r["X"], r["Y"]) for r in records)
        p = bad_sink_probability(cfg.n)
        tv = tv_distance(hist, lambda ab: joint_poisson_pmf(ab[0], ab[1], p))
        out += [
            mean_estimate("mean_good_sinks", [r["X"] for r in records]),
            mean_estimate("mean_bad_sinks", [r["Y"] for r in records]),
            proportion("no_sinks", hist.get((0, 0), 0), N),
            proportion("some_bad_sink", sum(r["Y"] > 0 for r in records), N),
            Estimate("census_tv", None, N, tv, None, None),
        ]
        return out
    if cfg.kind == "slices":
        slices = sum(r["slices"] for r in records)
        good = sum(r["good_cycle_slices"] for r in records)
        out = [proportion("good_cycle_slice_freq", good, slices)]
        for r_ in (2, 3, 4):
            key = str(2 * r_)
            out.append(
                Estimate(
                    f"cycles_len_{2 * r_}_per_slice",
                    None,
                    slices,
                    sum(r["cycle_lengths"].get(key, 0) for r in records) / slices,
                    None,
                    None,
                )
            )
        if cfg.n >= 3:
            for lemma in ("lemma8", "lemma9", "lemma10"):
                out.append(proportion(f"{lemma}_pass", sum(r[lemma] for r in records), N))
        return out
    if cfg.kind == "dynamics":
        out = _flag_estimates(records)
        for label, pick in (
            ("connected", lambda r: r["flags"]["connected"]),
            ("no_pne", lambda r: not r["flags"]["pne"]),
        ):
            runs = [c for r in records if pick(r) for c in r["dynamics"]["converged"]]
            out.append(proportion(f"convergence_rate_{label}", sum(runs), len(runs)))
        return out
    raise ExperimentError(f"no summary for kind {cfg.kind!r}")


@dataclass
class Summary:
    config: ExperimentConfig
    rows: dict[int, list[Estimate]] = field(default_factory=dict)

    def get(self, k: int, metric: str) -> Estimate:
        for e in self.rows[k]:
            if e.metric == metric:
                return e
        raise KeyError(metric)

    def table(self) -> list[dict]:
        out = []
        for k, ests in self.rows.items():
            for e in ests:
                row = {"kind": self.config.kind, "n": self.config.n, "k": k}
                row.update(asdict(e))
                out.append(row)
        return out


def run_experiment(cfg: ExperimentConfig) -> tuple[Summary, list[dict]]:
    if cfg.kind == "oracle":
        raise ExperimentError("use exhaustive_oracle for the oracle kind")
    summary = Summary(cfg)
    records: list[dict] = []
    for k in cfg.ks:
        recs = run_samples(cfg, k)
        summary.rows[k] = summarize(cfg, k, recs)
        records.extend(recs)
    return summary, records


# --- exhaustive oracle ------------------------------------------------------------


def exhaustive_oracle(shape: GridShape, rank_cap: int = 100_000) -> dict:
    """Exact class counts over every winner table (and every rank table when at most ``rank_cap``)."""
    counts = Counter()
    for w in enumerate_winner_tables(shape):
        f = classify_br(w)
        counts["tables"] += 1
        counts["with_pne"] += f.has_pne
        counts["connected"] += f.connected
        counts["weakly_acyclic"] += f.weakly_acyclic
        counts["acyclic"] += f.acyclic
        counts["total_sinks"] += len(sinks(w))
    out = {"n": shape.n, "k": shape.k, **{key: counts[key] for key in (
        "tables", "with_pne", "connected", "weakly_acyclic", "acyclic", "total_sinks")}}
    if math.factorial(shape.k) ** shape.line_count <= rank_cap:
        better = Counter()
        for r in enumerate_rank_tables(shape):
            f = classify_better(r)
            better["tables"] += 1
            better["with_pne"] += f.has_pne
            better["connected"] += f.connected
            better["weakly_acyclic"] += f.weakly_acyclic
            better["acyclic"] += f.acyclic
        out["better"] = dict(better)
    return out


# --- output -------------------------------------------------------------------------


def record_line(rec: dict) -> str:
    return json.dumps(rec, separators=(",", ":"))


def _flatten(rec: dict, prefix: str = "") -> dict:
    out = {}
    for key, val in rec.items():
        name = f"{prefix}{key}"
        if isinstance(val, dict):
            out.update(_flatten(val, f"{name}."))
        elif isinstance(val, list):
            out[name] = json.dumps(val, separators=(",", ":"))
        else:
            out[name] = val
    return out


def _records_csv(records: list[dict]) -> str:
    rows = [_flatten(r) for r in records]
    cols: list[str] = []
    for r in rows:
        for c in r:
            if c not in cols:
                cols.append(c)
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=cols, lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    return buf.getvalue()


def _summary_csv(summary: Summary) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=SUMMARY_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for row in summary.table():
        writer.writerow({c: ("" if row[c] is None else row[c]) for c in SUMMARY_COLUMNS})
    return buf.getvalue()


def _check_out_dir(out: str | os.PathLike) -> Path:
    path = Path(out)
    if path.exists() and not path.is_dir():
        raise ExperimentError(f"output path {path} exists and is not a directory")
    parent = path.parent
    if not parent.is_dir():
        raise ExperimentError(f"parent directory {parent} of output path does not exist")
    if not os.access(parent if not path.exists() else path, os.W_OK):
        raise ExperimentError(f"output path {path} is not writable")
    return path


def _failure_manifest(path: Path, manifest: dict, exc: OSError) -> None:
    # best effort: if even this fails the caller still gets the original error
    failed = dict(manifest, status="failed", error=str(exc), files=[])
    try:
        (path / "manifest.json").write_text(json.dumps(failed, indent=2) + "\n")
    except OSError:
        pass


def emit(
    summary: Summary, records: list[dict], out: str | os.PathLike, fmt: str = "jsonl",
    wall_time: float | None = None,
) -> dict[str, Path]:
    """Write records, the CSV summary and a manifest into directory ``out``.

    Every file is staged to a temporary name and moved into place only after
    all of them were written, so a failure leaves no partial output.
    """
    if fmt not in FORMATS:
        raise ExperimentError(f"unknown format {fmt!r}")
    path = _check_out_dir(out)
    if fmt == "jsonl":
        rec_name, rec_text = "records.jsonl", "".join(record_line(r) + "\n" for r in records)
    else:
        rec_name, rec_text = "records.csv", _records_csv(records)
    manifest = {
        "config": summary.config.to_json(),
        "master_seed": summary.config.seed,
        "artifact_version": __version__,
        "kernel_backend": _kernels.BACKEND,
        "wall_time_s": wall_time,
        "tolerances": TOLERANCES,
        "summary_columns": list(SUMMARY_COLUMNS),
        "files": [rec_name, "summary.csv", "manifest.json"],
        "status": "complete",
    }
    payloads = {
        rec_name: rec_text,
        "summary.csv": _summary_csv(summary),
        "manifest.json": json.dumps(manifest, indent=2) + "\n",
    }
    path.mkdir(exist_ok=True)
    staged = {}
    try:
        for name, text in payloads.items():
            fd, tmp = tempfile.mkstemp(prefix=f".{name}.", dir=path)
            with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
            os.chmod(tmp, 0o644)
            staged[name] = tmp
    except OSError as exc:
        for tmp in staged.values():
            os.unlink(tmp)
        _failure_manifest(path, manifest, exc)
        raise ExperimentError(f"failed writing output to {path}: {exc}") from exc
    written = {}
    for name, tmp in staged.items():
        os.replace(tmp, path / name)
        written[name] = path / name
    return written


def run_and_emit(cfg: ExperimentConfig) -> tuple[Summary, list[dict]]:
    if cfg.out is not None:
        _check_out_dir(cfg.out)
    t0 = time.perf_counter()
    summary, records = run_experiment(cfg)
    if cfg.out is not None:
        emit(summary, records, cfg.out, cfg.fmt, time.perf_counter() - t0)
    return summary, records
