"""Command-line front end.

Exit status: 0 success, 1 invalid input, 2 numerical failure, 3 failed
repro assertion.
"""

from __future__ import annotations

import argparse
import sys
import warnings

import numpy as np

from . import repro as repro_mod
from .domains import contains, interior_grid
from .errors import HyperlabError, UndefinedDerivative, ValidationError
from .kobayashi import BracketConfig, kobayashi_bracket
from .parallel import thread_count
from .pushforward import numeric_inverse, pushforward_blocks
from .qi import STRATEGIES, PipelineConfig, pair_table, theorem_pipeline
from .report import Report, jsonable
from .specfiles import parse_domain, parse_map, parse_point
from .wirtinger import qc_field


def _bracket_config(args):
    return BracketConfig(
        degree=args.degree,
        boundary_samples=args.samples,
        functional_count=args.functionals,
        restarts=args.restarts,
        seed=args.seed,
        closed_form=not args.numeric,
    )


def _common(p, domain=True, solver=False):
    if domain:
        p.add_argument("--domain", required=True, help="domain spec file (JSON)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="directory for report files (default: print to stdout)")
    p.add_argument("--format", choices=("csv", "structured-text"), default="csv")
    if solver:
        p.add_argument("--degree", type=int, default=8, help="disc degree")
        p.add_argument("--samples", type=int, default=256, help="boundary samples per disc")
        p.add_argument("--functionals", type=int, default=32, help="supporting functionals")
        p.add_argument("--restarts", type=int, default=1)
        p.add_argument("--numeric", action="store_true",
                       help="use the disc solver even where a closed form exists")


class _Parser(argparse.ArgumentParser):
    # usage errors are input errors (status 1); 2 is reserved for numerical failure
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def build_parser():
    ap = _Parser(prog="hyperlab", description="Kobayashi distance brackets and quasi-isometry checks.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("distance", help="bracket the Kobayashi distance between two points")
    _common(p, solver=True)
    p.add_argument("--p", required=True, help="x1,y1,x2,y2,...")
    p.add_argument("--q", required=True, help="x1,y1,x2,y2,...")

    p = sub.add_parser("qc-analyze", help="generalized qc constant of a map on a grid")
    _common(p)
    p.add_argument("--map", required=True)
    p.add_argument("--grid", type=int, default=64)
    p.add_argument("--qc-method", choices=("exact", "sphere"), default="exact")

    p = sub.add_parser("qi-estimate", help="fit a quasi-isometry envelope for a map")
    _common(p, solver=True)
    p.add_argument("--map", required=True)
    p.add_argument("--target", help="target domain spec (default: same as --domain)")
    p.add_argument("--pairs", type=int, default=200)
    p.add_argument("--strategy", choices=STRATEGIES, default="uniform-interior")
    p.add_argument("--grid", type=int, default=64)

    p = sub.add_parser("pushforward", help="pushed-forward structure blocks on a grid")
    _common(p)
    p.add_argument("--map", required=True)
    p.add_argument("--target", help="domain carrying the grid (default: same as --domain)")
    p.add_argument("--grid", type=int, default=64)

    p = sub.add_parser("repro", help="regenerate and check every derived table")
    _common(p, domain=False)
    p.add_argument("--case", action="append", choices=repro_mod.CASES,
                   help="run only this stage (repeatable; default all)")
    p.add_argument("--n-max", type=int, default=500)
    p.add_argument("--pairs", type=int, default=repro_mod.ReproConfig.sweep_pairs,
                   help="pairs per epsilon in the sweep")
    p.add_argument("--degree", type=int, default=8)
    p.add_argument("--samples", type=int, default=256)
    return ap


def _emit(rep, args):
    if args.out:
        for path in rep.write(args.out, args.format):
            print(path)
    else:
        sys.stdout.write(rep.structured_text())


def cmd_distance(args):
    dom = parse_domain(args.domain)
    p = parse_point(args.p, dom.dimension, "p")
    q = parse_point(args.q, dom.dimension, "q")
    for name, z in (("p", p), ("q", q)):
        if not contains(dom, z):
            raise ValidationError(f"{name} is not inside the domain", stage="input", witness=z)
    cfg = _bracket_config(args)
    br = kobayashi_bracket(dom, p, q, cfg)
    rep = Report("distance", metadata={"domain": dom.describe(), "p": p, "q": q, "seed": args.seed})
    rec = br.to_record()
    rep.add_table("bracket", ["lower", "upper", "width", "exact"], [rec])
    rep.metadata["witnesses"] = {"lower": rec["lower_witness"], "upper": rec["upper_witness"]}
    rep.metadata["config"] = rec["config"]
    rep.verdict = {"status": "ok"}
    return rep


def cmd_qc(args):
    dom = parse_domain(args.domain)
    F = parse_map(args.map)
    field_ = qc_field(F, dom, args.grid, method=args.qc_method)
    rows = [{"z": z, "c": c} for z, c in field_.samples]
    rep = Report("qc", metadata={"domain": dom.describe(), "map": F.describe(), "grid": args.grid})
    rep.add_table("field", ["z", "c"], rows)
    rep.verdict = {"sup": field_.sup, "sup_witness": field_.sup_witness,
                   "skipped": field_.skipped, "degenerate": field_.degenerate}
    return rep


def cmd_qi(args):
    src = parse_domain(args.domain)
    tgt = parse_domain(args.target) if args.target else src
    F = parse_map(args.map)
    cfg = PipelineConfig(pairs=args.pairs, strategy=args.strategy, seed=args.seed, grid_count=args.grid,
                         bracket=_bracket_config(args), workers=thread_count())
    out = theorem_pipeline(F, src, tgt, cfg)
    rep = Report("qi", metadata={k: v for k, v in out["report"].items() if k != "envelope"})
    rep.metadata["config"] = {"pairs": args.pairs, "strategy": args.strategy, "seed": args.seed,
                              "bracket": _bracket_config(args).__dict__}
    rows = pair_table(out["samples"])
    rep.add_table("pairs", ["p", "q", "source_distance", "image_lower", "image_upper"], rows)
    env = out["envelope"]
    rep.add_table("trend", ["prefix", "c"], [{"prefix": n, "c": c} for n, c in env.violation_trend])
    rep.verdict = env.to_record()
    return rep


def cmd_pushforward(args):
    src = parse_domain(args.domain)
    tgt = parse_domain(args.target) if args.target else src
    F = parse_map(args.map)
    inv = F.inverse_map() or numeric_inverse(F, src, seed=args.seed)
    rows, skipped = [], 0
    for z in interior_grid(tgt, args.grid):
        try:
            b = pushforward_blocks(F, inv, z)
        except UndefinedDerivative:
            skipped += 1
            continue
        rows.append({"z": z, "A": b.A, "B": b.B, "deviation": b.deviation(), "square_defect": b.square_defect()})
    rep = Report("pushforward", metadata={"domain": src.describe(), "target": tgt.describe(), "map": F.describe()})
    rep.add_table("blocks", ["z", "A", "B", "deviation", "square_defect"], rows)
    rep.verdict = {"sup_deviation": max((r["deviation"] for r in rows), default=0.0),
                   "max_square_defect": max((r["square_defect"] for r in rows), default=0.0),
                   "skipped": skipped}
    return rep


def cmd_repro(args):
    cfg = repro_mod.ReproConfig(seed=args.seed, n_max=args.n_max, sweep_pairs=args.pairs,
                                degree=args.degree, boundary_samples=args.samples)
    return repro_mod.repro_suite(cfg, args.case)


COMMANDS = {
    "distance": cmd_distance,
    "qc-analyze": cmd_qc,
    "qi-estimate": cmd_qi,
    "pushforward": cmd_pushforward,
    "repro": cmd_repro,
}


def _error_report(args, exc):
    rep = Report("error", metadata={"command": args.command})
    rep.verdict = {"error": type(exc).__name__, "message": str(exc), "stage": exc.stage,
                   "witness": jsonable(np.asarray(exc.witness)) if exc.witness is not None else None,
                   "exit_status": exc.exit_code}
    return rep


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        thread_count()
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            rep = COMMANDS[args.command](args)
    except HyperlabError as exc:
        return _fail(args, exc)
    except FileNotFoundError as exc:
        err = ValidationError(f"cannot read {exc.filename}", stage="input")
        return _fail(args, err)
    _emit(rep, args)
    return 0


def _fail(args, exc):
    where = f" [{exc.stage}]" if exc.stage else ""
    print(f"hyperlab: {type(exc).__name__}{where}: {exc}", file=sys.stderr)
    if getattr(args, "out", None):
        _error_report(args, exc).write(args.out, "structured-text")
    return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
