"""Command-line entry point: ``elproofs prove|classify|metrics|bench|compare|chains``."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import bench
from .metrics import StepWeights, measure
from .ontology import CALCULI, UnsupportedFeatureError
from .parser import ParseError, load_tbox, parse_axiom
from .proofs import ProofDag, ProofError, validate_proof
from .saturation import ResourceLimitError, UnsupportedGoalError, classify

EXIT_OK, EXIT_USAGE, EXIT_FAILED = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _calculus_list(text: str) -> list:
    names = [c.strip() for c in text.split(",") if c.strip()]
    valid = {c.value for c in CALCULI}
    bad = [c for c in names if c not in valid]
    if bad or not names:
        raise argparse.ArgumentTypeError(f"calculi must be among {', '.join(sorted(valid))}")
    return names


def _load_weights(path) -> StepWeights:
    if path is None:
        return StepWeights()
    return StepWeights.from_json(json.loads(Path(path).read_text(encoding="utf-8")))


def _write(path, text: str):
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def cmd_prove(args) -> int:
    tbox = load_tbox(args.tbox)
    goal = parse_axiom(args.goal)
    try:
        dag = bench.prove(tbox, goal, args.calculus, args.mode, goal_directed=args.goal_directed)
    except (UnsupportedFeatureError, UnsupportedGoalError, ResourceLimitError, ProofError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILED
    if dag is None:
        print(f"not entailed: {goal}", file=sys.stderr)
        return EXIT_FAILED
    violations = validate_proof(dag, tbox, goal, args.calculus)
    for v in violations:
        print(f"invalid proof: {v}", file=sys.stderr)
    _write(args.out, dag.dumps(goal))
    return EXIT_FAILED if violations else EXIT_OK


def cmd_classify(args) -> int:
    tbox = load_tbox(args.tbox)
    try:
        pairs = classify(tbox, args.calculus)
    except (UnsupportedFeatureError, ResourceLimitError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILED
    _write(args.out, "".join(f"SubClassOf({a} {b})\n" for a, b in sorted(pairs)))
    return EXIT_OK


def cmd_metrics(args) -> int:
    dag = ProofDag.loads(Path(args.proof).read_text(encoding="utf-8"))
    if args.tbox:
        violations = validate_proof(dag, load_tbox(args.tbox), dag.goal, dag.calculus)
        for v in violations:
            print(f"invalid proof: {v}", file=sys.stderr)
        if violations:
            return EXIT_FAILED
    _write(args.out, measure(dag, _load_weights(args.weights)).dumps())
    return EXIT_OK


def cmd_bench(args) -> int:
    summary = bench.run_benchmark(
        args.tasks,
        args.calculi,
        args.mode,
        args.out,
        weights=_load_weights(args.weights),
        jobs=args.jobs,
        timeout=args.timeout,
        goal_directed=args.goal_directed,
        timing=args.timing,
        proof_dir=args.proofs,
    )
    for r in summary.results:
        if r.row.status != "ok":
            print(f"{r.row.task} [{r.row.calculus}] {r.row.status}: {r.row.message}", file=sys.stderr)
    counts = ", ".join(f"{k} {v}" for k, v in summary.counts.items() if v)
    print(f"{len(summary.results)} rows: {counts}", file=sys.stderr)
    if args.out is None:
        sys.stdout.write(bench.rows_to_csv(summary.rows))
    return EXIT_FAILED if summary.errored else EXIT_OK


def _pair_path(base: str, pc, single: bool) -> Path:
    base = Path(base)
    return base if single else base.with_name(f"{base.stem}.{pc.left}-{pc.right}{base.suffix}")


def cmd_compare(args) -> int:
    pairs = [tuple(args.pair)] if args.pair else None
    results = bench.compare_results(args.results, args.metric, pairs)
    single = len(results) == 1
    lines = ["left,right,metric,higher,lower,equal"]
    for pc in results:
        lines.append(f"{pc.left},{pc.right},{pc.metric},{pc.higher},{pc.lower},{pc.equal}")
        if args.scatter:
            _pair_path(args.scatter, pc, single).write_text(bench.scatter_data(pc), encoding="utf-8")
        if args.svg:
            _pair_path(args.svg, pc, single).write_text(bench.scatter_svg(pc), encoding="utf-8")
    print("\n".join(lines))
    return EXIT_OK


def cmd_chains(args) -> int:
    tasks = bench.write_chain_suite(args.out, args.sizes)
    for t in tasks:
        print(t.id)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    calculi = [c.value for c in CALCULI]
    p = _Parser(prog="elproofs", description="Classify EL ontologies and extract and measure proofs.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sp = sub.add_parser("prove", help="extract a proof of one goal")
    sp.add_argument("--tbox", required=True)
    sp.add_argument("--goal", required=True, help='e.g. "SubClassOf(A B)"')
    sp.add_argument("--calculus", choices=calculi, default="elk")
    sp.add_argument("--mode", choices=bench.MODES, default="minimal")
    sp.add_argument("--goal-directed", action="store_true", help="elk: initialize only the goal's left side")
    sp.add_argument("--out", help="proof JSON file (default stdout)")
    sp.set_defaults(func=cmd_prove)

    sp = sub.add_parser("classify", help="print all entailed subsumptions between concept names")
    sp.add_argument("--tbox", required=True)
    sp.add_argument("--calculus", choices=calculi, default="elk")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_classify)

    sp = sub.add_parser("metrics", help="measure a proof JSON file")
    sp.add_argument("--proof", required=True)
    sp.add_argument("--weights", help="JSON object of step-complexity weights")
    sp.add_argument("--tbox", help="validate the proof against this TBox first")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_metrics)

    sp = sub.add_parser("bench", help="run a task suite and write a results CSV")
    sp.add_argument("--tasks", required=True, help="directory with one subdirectory per task")
    sp.add_argument("--calculi", type=_calculus_list, default=calculi)
    sp.add_argument("--mode", choices=bench.MODES, default="minimal")
    sp.add_argument("--out", help="results CSV (default stdout)")
    sp.add_argument("--jobs", type=int, default=1)
    sp.add_argument("--timeout", type=float, default=bench.DEFAULT_TIMEOUT, help="seconds per task")
    sp.add_argument("--weights")
    sp.add_argument("--goal-directed", action="store_true")
    sp.add_argument("--timing", action="store_true", help="fill the runtime_ms column")
    sp.add_argument("--proofs", help="directory to write proof JSON files to")
    sp.set_defaults(func=cmd_bench)

    sp = sub.add_parser("compare", help="pairwise metric comparison of a results CSV")
    sp.add_argument("--results", required=True)
    sp.add_argument("--metric", choices=list(bench.METRIC_COLUMNS), required=True)
    sp.add_argument("--pair", nargs=2, metavar=("LEFT", "RIGHT"))
    sp.add_argument("--scatter", help="two-column data file (one per pair unless --pair is given)")
    sp.add_argument("--svg", help="scatter plot (one per pair unless --pair is given)")
    sp.set_defaults(func=cmd_compare)

    sp = sub.add_parser("chains", help="write the A0 ⊑ ... ⊑ An chain suite")
    sp.add_argument("--out", required=True)
    sp.add_argument("--sizes", type=lambda s: [int(x) for x in s.split(",")], default=[8, 16, 32])
    sp.set_defaults(func=cmd_chains)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (OSError, ParseError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
