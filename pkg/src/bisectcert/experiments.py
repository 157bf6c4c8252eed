"""Seeded trial runners, parameter sweeps and the adversary pipeline.

Trial ``i`` of a run uses seed ``base_seed + i`` for instance generation, so a
trial is a pure function of its configuration and index and sweeps can run
trials in any order or in parallel. Aggregate CSVs contain no timings and use
fixed float formatting, so identical configurations give byte-identical files.
"""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from .graph import (
    Graph,
    MoveKind,
    PlantedInstance,
    apply_monotone_moves,
    canonical_sign,
    cut_width,
    gen_hypercube,
    gen_planted_bisection,
    gen_planted_regular,
    sample_monotone_moves,
)
from .solver import SolveOptions, SolveReport, eval_g, solve
from .structure import tight_update

CSV_VERSION = 1
FAMILIES = ("planted", "planted_regular", "hypercube", "adversarial", "fixture")


@dataclass
class ExperimentConfig:
    family: str
    params: dict
    trials: int = 1
    base_seed: int = 0
    solver: SolveOptions = field(default_factory=SolveOptions)
    jobs: int = 1

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")

    def seed(self, trial: int) -> int:
        return self.base_seed + trial


@dataclass
class TrialRecord:
    trial: int
    seed: int
    n: int
    params: dict
    h_hat: float
    best_cut: int
    status: str
    planted_cut: int | None = None
    recovered_planted: bool | None = None
    wall_ms: int = 0

    def to_json(self) -> dict:
        return asdict(self)


def recovered(report: SolveReport, planted) -> bool:
    target = canonical_sign(np.asarray(planted, dtype=np.int64))
    return any(np.array_equal(y, target) for y in report.bisections)


def make_instance(family: str, params: dict, seed: int) -> tuple[Graph, np.ndarray | None]:
    if family in ("planted", "adversarial"):
        inst = gen_planted_bisection(int(params["n"]), float(params["p"]), float(params["q"]), seed)
        return inst.graph, inst.planted
    if family == "planted_regular":
        inst = gen_planted_regular(int(params["n"]), int(params["r"]), int(params["b"]), seed)
        return inst.graph, inst.planted
    if family == "hypercube":
        return gen_hypercube(int(params["k"])), None
    if family == "fixture":
        from .fixtures import FIXTURES

        g, _ = FIXTURES[params["name"]]()
        return g, None
    raise ValueError(f"unknown family {family!r}")


def run_trial(family: str, params: dict, trial: int, seed: int, opts: SolveOptions) -> TrialRecord:
    g, planted = make_instance(family, params, seed)
    rep = solve(g, opts)
    rec = TrialRecord(
        trial=trial,
        seed=seed,
        n=g.n,
        params=dict(params),
        h_hat=rep.h_hat,
        best_cut=rep.best_cut,
        status=rep.status.value,
        wall_ms=int(rep.diagnostics.get("wall_ms", 0)),
    )
    if planted is not None:
        rec.planted_cut = cut_width(g, planted)
        rec.recovered_planted = recovered(rep, planted)
    return rec


def _run_one(args) -> TrialRecord:
    return run_trial(*args)


def run_trials(config: ExperimentConfig) -> list[TrialRecord]:
    tasks = [(config.family, config.params, i, config.seed(i), config.solver) for i in range(config.trials)]
    if config.jobs > 1:
        with ProcessPoolExecutor(max_workers=config.jobs) as pool:
            records = list(pool.map(_run_one, tasks))
    else:
        records = [_run_one(t) for t in tasks]
    return sorted(records, key=lambda r: r.trial)


# -- sweeps ----------------------------------------------------------------------


THRESHOLD_COLUMNS = ["alpha", "beta", "n", "trials", "certified_rate", "recovered_rate", "mean_h_hat", "mean_cut", "skipped"]
SUBCRITICAL_COLUMNS = [
    "mean_degree", "gamma", "n", "p", "q", "trials",
    "fail_rate", "certified_rate", "recovered_rate", "mean_h_hat", "mean_cut", "skipped",
]  # fmt: skip


def _fmt(v) -> str:
    if isinstance(v, bool):
        return str(int(v))
    if isinstance(v, float):
        return "nan" if math.isnan(v) else f"{v:.6f}"
    return str(v)


def _write_csv(kind: str, columns: list[str], rows: list[dict]) -> str:
    buf = io.StringIO()
    buf.write(f"# bisectcert {kind} v{CSV_VERSION}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_fmt(row[c]) for c in columns])
    return buf.getvalue()


def read_sweep_csv(text: str) -> tuple[str, list[dict]]:
    """Parse a sweep CSV back into ``(kind, rows)``; values stay strings."""
    lines = text.splitlines()
    if not lines or not lines[0].startswith("# bisectcert "):
        raise ValueError("not a sweep CSV (missing header line)")
    kind = lines[0].split()[2]
    rows = list(csv.DictReader(lines[1:]))
    if not rows:
        raise ValueError("sweep CSV has no data rows")
    return kind, rows


def _summary(records: Sequence[TrialRecord]) -> dict:
    t = len(records)
    return {
        "trials": t,
        "certified_rate": sum(r.status == "CertifiedOptimum" for r in records) / t,
        "recovered_rate": sum(bool(r.status == "CertifiedOptimum" and r.recovered_planted) for r in records) / t,
        "mean_h_hat": float(np.mean([r.h_hat for r in records])),
        "mean_cut": float(np.mean([r.best_cut for r in records])),
    }


def threshold_probs(alpha: float, beta: float, n: int) -> tuple[float, float]:
    """``p = alpha ln(n)/n`` and ``q = beta ln(n)/n`` (natural log)."""
    scale = math.log(n) / n
    return alpha * scale, beta * scale


def run_threshold_sweep(
    grid: Sequence[tuple[float, float]], n: int, trials: int, base_seed: int = 0,
    opts: SolveOptions | None = None, jobs: int = 1,
) -> tuple[str, list[TrialRecord]]:  # fmt: skip
    """Certified-recovery rate per ``(alpha, beta)`` cell. Returns the CSV text and all trial records."""
    opts = opts or SolveOptions()
    rows, all_records = [], []
    for alpha, beta in grid:
        p, q = threshold_probs(alpha, beta, n)
        row = {"alpha": float(alpha), "beta": float(beta), "n": n}
        if not (0 < p < 1 and 0 < q < 1):
            row.update(trials=0, certified_rate=math.nan, recovered_rate=math.nan, mean_h_hat=math.nan, mean_cut=math.nan, skipped=True)
            rows.append(row)
            continue
        cfg = ExperimentConfig("planted", {"n": n, "p": p, "q": q}, trials, base_seed, opts, jobs)
        recs = run_trials(cfg)
        all_records += recs
        row.update(_summary(recs), skipped=False)
        rows.append(row)
    return _write_csv("threshold", THRESHOLD_COLUMNS, rows), all_records


def subcritical_probs(mean_degree: float, gamma: float, n: int) -> tuple[float, float]:
    """``p = mean_degree/n`` and ``q = p - sqrt(p gamma ln(n) / n)``."""
    p = mean_degree / n
    return p, p - math.sqrt(p * gamma * math.log(n) / n)


def run_subcritical_sweep(
    grid: Sequence[tuple[float, float]], n: int, trials: int, base_seed: int = 0,
    opts: SolveOptions | None = None, jobs: int = 1,
) -> tuple[str, list[TrialRecord]]:  # fmt: skip
    """Failure rate per ``(mean_degree, gamma)`` cell."""
    opts = opts or SolveOptions()
    rows, all_records = [], []
    for mean_degree, gamma in grid:
        p, q = subcritical_probs(mean_degree, gamma, n)
        row = {"mean_degree": float(mean_degree), "gamma": float(gamma), "n": n, "p": p, "q": q}
        if q <= 0 or not 0 < p < 1:
            row.update(trials=0, fail_rate=math.nan, certified_rate=math.nan, recovered_rate=math.nan, mean_h_hat=math.nan, mean_cut=math.nan, skipped=True)
            rows.append(row)
            continue
        cfg = ExperimentConfig("planted", {"n": n, "p": p, "q": q}, trials, base_seed, opts, jobs)
        recs = run_trials(cfg)
        all_records += recs
        summ = _summary(recs)
        row.update(summ, fail_rate=1.0 - summ["certified_rate"], skipped=False)
        rows.append(row)
    return _write_csv("subcritical", SUBCRITICAL_COLUMNS, rows), all_records


def trials_csv(records: Sequence[TrialRecord]) -> str:
    """Per-trial table, including wall time (so not byte-reproducible)."""
    cols = ["trial", "seed", "n", "h_hat", "best_cut", "status", "planted_cut", "recovered_planted", "wall_ms"]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for r in records:
        d = r.to_json()
        w.writerow(["" if d[c] is None else _fmt(d[c]) for c in cols])
    return buf.getvalue()


# -- adversary pipeline ----------------------------------------------------------


@dataclass
class AdversaryReport:
    before: SolveReport
    after: SolveReport
    moves: list
    removed: int
    expected_bw: int | None
    bw_consistent: bool | None
    update_value: float | None  # bound of the updated graph at the explicitly updated d
    update_max_err: float | None  # worst |g(G_t, d_t) - bw_t| over every prefix of the moves

    def to_json(self) -> dict:
        return {
            "before": self.before.to_json(),
            "after": self.after.to_json(),
            "moves": [m.to_json() for m in self.moves],
            "removed_cut_edges": self.removed,
            "expected_bw": self.expected_bw,
            "bw_consistent": self.bw_consistent,
            "update_value": self.update_value,
            "update_max_err": self.update_max_err,
        }


def run_adversary(
    g: Graph, count: int, seed: int, kinds: str = "both", opts: SolveOptions | None = None, y=None,
    check_prefixes: bool = True,
) -> AdversaryReport:  # fmt: skip
    """Solve, apply sampled monotone moves against an optimal bisection, solve again.

    The optimal bisection is ``y`` if given, else the first certified bisection
    of the initial solve. With a certified start the bound stays tight under
    every move; this is checked both by re-solving and through the explicit
    correction-vector update, which needs no optimization.
    """
    opts = opts or SolveOptions()
    before = solve(g, opts)
    if y is None:
        if not before.certified:
            raise ValueError("initial solve did not certify; pass an optimal bisection explicitly")
        y = before.bisections[0]
    moves = sample_monotone_moves(g, y, count, seed, kinds)
    g2 = apply_monotone_moves(g, y, moves)
    after = solve(g2, opts) if moves else before
    removed = sum(1 for m in moves if MoveKind(m.kind) is MoveKind.REMOVE_CUT_EDGE)
    expected = bw_ok = value = worst = None
    if before.certified:
        expected = before.best_cut - removed
        bw_ok = after.certified and after.best_cut == expected
        prefixes = range(1, len(moves) + 1) if check_prefixes else [len(moves)]
        worst = 0.0
        for t in prefixes:
            gt = apply_monotone_moves(g, y, moves[:t]) if t < len(moves) else g2
            dt, bwt = tight_update(g, y, before.d_best, moves[:t], before.best_cut)
            val = eval_g(gt, dt)[0]
            worst = max(worst, abs(val - bwt))
            value = val
        if not moves:
            value = eval_g(g, tight_update(g, y, before.d_best, [], before.best_cut)[0])[0]
            worst = abs(value - before.best_cut)
    return AdversaryReport(before, after, moves, removed, expected, bw_ok, value, worst)
