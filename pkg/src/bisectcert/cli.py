"""Command line interface.

Exit codes: 0 when the requested solve certifies an optimum (or the command
has no certification outcome), 2 when it does not, 1 on usage or I/O errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from pathlib import Path

from . import __version__
from .certificates import build_fk_dual_cert, build_primal_cert, build_rank_one_point, duality_gap
from .experiments import (
    run_adversary,
    run_subcritical_sweep,
    run_threshold_sweep,
    trials_csv,
)
from .fixtures import FIXTURES
from .graph import (
    GraphFormatError,
    InfeasibleParameters,
    gen_hypercube,
    gen_planted_bisection,
    gen_planted_regular,
    graph_to_edge_list,
    read_graph,
)
from .oracle import brute_force_bw
from .plotting import emit_plot_script, render_figure
from .solver import SolveOptions, solve
from .structure import analyze

EXIT_OK, EXIT_USAGE, EXIT_FAIL = 0, 1, 2

log = logging.getLogger("bisectcert")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _options(args) -> SolveOptions:
    return SolveOptions(max_iters=args.max_iters, k_cap=args.k_cap, seed=args.seed, restarts=args.restarts)


def _csv_line(fields: dict) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=list(fields), lineterminator="\n")
    w.writeheader()
    w.writerow(fields)
    return buf.getvalue()


def _report_text(doc: dict, fmt: str) -> str:
    if fmt == "csv":
        flat = {k: v for k, v in doc.items() if not isinstance(v, (list, dict))}
        return _csv_line(flat)
    return json.dumps(doc, indent=2) + "\n"


def cmd_gen(args) -> int:
    planted = None
    if args.family == "hypercube":
        g = gen_hypercube(args.k)
        meta = {"family": "hypercube", "k": args.k}
    elif args.family == "planted":
        inst = gen_planted_bisection(args.n, args.p, args.q, args.seed)
        g, planted, meta = inst.graph, inst, inst.params
    elif args.family == "planted_regular":
        inst = gen_planted_regular(args.n, args.r, args.b, args.seed)
        g, planted, meta = inst.graph, inst, inst.params
    else:
        g, y = FIXTURES[args.name]()
        meta = {"family": "fixture", "name": args.name, "bisection": [int(v) for v in y]}
    _emit(graph_to_edge_list(g), args.out)
    if args.out:
        doc = planted.to_json() if planted else {"n": g.n, "params": meta, "edges": [list(e) for e in g.edges]}
        Path(args.out).with_suffix(".json").write_text(json.dumps(doc, sort_keys=True) + "\n", encoding="utf-8")
    print(f"{meta.get('family')}: n={g.n} m={g.m}", file=sys.stderr)
    return EXIT_OK


def cmd_solve(args) -> int:
    g = read_graph(args.graph)
    rep = solve(g, _options(args))
    _emit(_report_text(rep.to_json(with_trace=args.trace), args.format), args.out)
    return EXIT_OK if rep.certified else EXIT_FAIL


def cmd_certify(args) -> int:
    g = read_graph(args.graph)
    rep = solve(g, _options(args))
    primal = build_primal_cert(g, rep.d_best)
    dual = build_fk_dual_cert(g, rep.d_best)
    rank_one = build_rank_one_point(rep.bisections[0], g)
    doc = {
        "status": rep.status.value,
        "h_hat": rep.h_hat,
        "best_cut": rep.best_cut,
        "primal_h_equiv": primal.h_equiv,
        "primal_min_eig": primal.min_eig_constraint,
        "fk_dual_objective": dual.objective,
        "fk_dual_x0": dual.x0,
        "fk_dual_min_eig": dual.min_eig_M,
        "rank_one_hY": rank_one.hY,
        "duality_gap": duality_gap(primal.h_equiv, rank_one),
    }
    if args.format == "json":
        doc["solve"] = rep.to_json()
        doc["primal"] = primal.to_json()
        doc["fk_dual"] = dual.to_json()
        doc["rank_one"] = rank_one.to_json()
        doc["structure"] = analyze(g, rep.bisections[0], rep.d_best).to_json()
    _emit(_report_text(doc, args.format), args.out)
    return EXIT_OK if rep.certified else EXIT_FAIL


def cmd_adversary(args) -> int:
    g = read_graph(args.graph)
    rep = run_adversary(g, args.moves, args.seed, args.kind, _options(args), check_prefixes=False)
    doc = rep.to_json()
    if args.format == "csv":
        doc = {
            "moves": len(rep.moves),
            "removed_cut_edges": rep.removed,
            "before_status": rep.before.status.value,
            "before_cut": rep.before.best_cut,
            "after_status": rep.after.status.value,
            "after_cut": rep.after.best_cut,
            "expected_bw": rep.expected_bw,
            "update_value": rep.update_value,
        }
    _emit(_report_text(doc, args.format), args.out)
    return EXIT_OK if rep.after.certified else EXIT_FAIL


def cmd_oracle(args) -> int:
    g = read_graph(args.graph)
    res = brute_force_bw(g)
    doc = res.to_json()
    if args.format == "csv":
        doc = {"bw": res.bw, "count": res.count}
    _emit(_report_text(doc, args.format), args.out)
    return EXIT_OK


def _parse_grid(text: str) -> list[tuple[float, float]]:
    cells = []
    for part in text.split(","):
        a, _, b = part.partition(":")
        try:
            cells.append((float(a), float(b)))
        except ValueError:
            raise argparse.ArgumentTypeError(f"bad grid cell {part!r}, expected A:B") from None
    return cells


def _write_sweep(args, text: str, records) -> None:
    if args.format == "json":
        _emit(json.dumps([r.to_json() for r in records], indent=2) + "\n", args.out)
    else:
        _emit(text, args.out)
    if args.trials_out:
        Path(args.trials_out).write_text(trials_csv(records), encoding="utf-8")
    if args.out and not args.no_figure:
        stem = Path(args.out).with_suffix("")
        png = stem.with_suffix(".png")
        Path(f"{stem}.plot.py").write_text(emit_plot_script(text, png.name), encoding="utf-8")
        try:
            render_figure(text, png)
        except ValueError as exc:
            log.warning("no figure: %s", exc)


def cmd_sweep_threshold(args) -> int:
    text, recs = run_threshold_sweep(args.grid, args.n, args.trials, args.seed, _options(args), args.jobs)
    _write_sweep(args, text, recs)
    return EXIT_OK


def cmd_sweep_subcritical(args) -> int:
    text, recs = run_subcritical_sweep(args.grid, args.n, args.trials, args.seed, _options(args), args.jobs)
    _write_sweep(args, text, recs)
    return EXIT_OK


def cmd_plot(args) -> int:
    text = Path(args.csv).read_text(encoding="utf-8")
    target = Path(args.out) if args.out else None
    png = Path(args.figure) if args.figure else (target.with_suffix(".png") if target else None)
    _emit(emit_plot_script(text, png.name if png else "figure.png"), args.out)
    if png:
        render_figure(text, png)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="bisectcert", description="Certified minimum bisection via a spectral lower bound.")
    p.add_argument("--version", action="version", version=__version__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, fmt="json"):
        sp.add_argument("--out", help="output file (default: stdout)")
        sp.add_argument("--seed", type=int, default=0)
        if fmt:
            sp.add_argument("--format", choices=("json", "csv"), default=fmt)

    def solver_flags(sp):
        sp.add_argument("--max-iters", type=int, default=SolveOptions.max_iters)
        sp.add_argument("--k-cap", type=int, default=SolveOptions.k_cap)
        sp.add_argument("--restarts", type=int, default=0)

    sp = sub.add_parser("gen", help="generate an instance as an edge list")
    common(sp, fmt=None)
    sp.add_argument("--family", required=True, choices=("planted", "planted_regular", "hypercube", "fixture"))
    sp.add_argument("--n", type=int)
    sp.add_argument("--p", type=float)
    sp.add_argument("--q", type=float)
    sp.add_argument("--r", type=int, help="degree (planted_regular)")
    sp.add_argument("--b", type=int, help="planted cut size (planted_regular)")
    sp.add_argument("--k", type=int, help="hypercube dimension")
    sp.add_argument("--name", choices=sorted(FIXTURES))
    sp.set_defaults(func=cmd_gen)

    for name, func, text in (
        ("solve", cmd_solve, "maximize the bound and try to certify a bisection"),
        ("certify", cmd_certify, "solve and build the SDP certificates"),
    ):
        sp = sub.add_parser(name, help=text)
        sp.add_argument("graph")
        common(sp)
        solver_flags(sp)
        if name == "solve":
            sp.add_argument("--trace", action="store_true", help="include the per-iteration trace")
        sp.set_defaults(func=func)

    sp = sub.add_parser("adversary", help="apply monotone moves and re-solve")
    sp.add_argument("graph")
    common(sp)
    solver_flags(sp)
    sp.add_argument("--moves", type=int, default=10)
    sp.add_argument("--kind", choices=("both", "add", "remove"), default="both")
    sp.set_defaults(func=cmd_adversary)

    sp = sub.add_parser("oracle", help="exact bisection width by enumeration (n <= 28)")
    sp.add_argument("graph")
    common(sp)
    sp.set_defaults(func=cmd_oracle)

    for name, func, grid_help, default in (
        ("sweep-threshold", cmd_sweep_threshold, "ALPHA:BETA cells", "16:1,2:1"),
        ("sweep-subcritical", cmd_sweep_subcritical, "MEAN_DEGREE:GAMMA cells", "10:0.5"),
    ):
        sp = sub.add_parser(name, help=f"sweep over {grid_help}")
        common(sp, fmt="csv")
        solver_flags(sp)
        sp.add_argument("--grid", type=_parse_grid, default=_parse_grid(default), help=f"comma-separated {grid_help}")
        sp.add_argument("--n", type=int, default=300 if name == "sweep-threshold" else 500)
        sp.add_argument("--trials", type=int, default=20)
        sp.add_argument("--jobs", type=int, default=1)
        sp.add_argument("--trials-out", help="also write per-trial records (CSV)")
        sp.add_argument("--no-figure", action="store_true", help="skip the plot script and PNG next to --out")
        sp.set_defaults(func=func)

    sp = sub.add_parser("plot", help="plot script (and figure) from a sweep CSV")
    sp.add_argument("csv")
    sp.add_argument("--out", help="script path (default: stdout)")
    sp.add_argument("--figure", help="also render the figure to this image file")
    sp.set_defaults(func=cmd_plot)
    return p


def _validate(args) -> None:
    if args.command == "gen":
        need = {"planted": ("n", "p", "q"), "planted_regular": ("n", "r", "b"), "hypercube": ("k",), "fixture": ("name",)}
        missing = [f"--{a}" for a in need[args.family] if getattr(args, a) is None]
        if missing:
            raise ValueError(f"--family {args.family} needs {' '.join(missing)}")
    if getattr(args, "trials", 1) < 1:
        raise ValueError("--trials must be >= 1")


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        _validate(args)
        return args.func(args)
    except (OSError, GraphFormatError, InfeasibleParameters, ValueError) as exc:
        print(f"bisectcert: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
