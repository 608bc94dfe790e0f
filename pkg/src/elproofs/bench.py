"""Task suites: run the full pipeline per (task, calculus), tabulate, compare."""

from __future__ import annotations

import csv
import io
import itertools
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Optional, Sequence

from .metrics import MetricsReport, StepWeights, decimal4, measure
from .ontology import CALCULI, Calculus, UnsupportedFeatureError, normalize
from .parser import ParseError, load_tbox, parse_axiom
from .proofs import ProofDag, ProofError, extract_first_proof, extract_min_proof, lift_to_dl, validate_proof
from .saturation import ResourceLimitError, UnsupportedGoalError, entails
from .syntax import Axiom, ConceptInclusion, Named, TBox

CSV_COLUMNS = (
    "task",
    "calculus",
    "mode",
    "status",
    "size",
    "depth",
    "justification",
    "bushiness",
    "cutwidth",
    "avg_step_complexity",
    "runtime_ms",
)
MODES = ("minimal", "first")
STATUSES = ("ok", "unsupported", "limit", "goal-not-entailed", "error")
DEFAULT_TIMEOUT = 30.0

METRIC_COLUMNS = {
    "size": "size",
    "depth": "depth",
    "justification": "justification",
    "cutwidth": "cutwidth",
    "bushiness": "bushiness",
    "avgStepComplexity": "avg_step_complexity",
}


@dataclass(frozen=True)
class Task:
    id: str
    tbox_path: Path
    goal: Axiom

    @classmethod
    def load(cls, directory) -> "Task":
        directory = Path(directory)
        lines = [
            ln for ln in (directory / "goal.elt").read_text(encoding="utf-8").splitlines()
            if ln.split("#", 1)[0].strip()
        ]
        if len(lines) != 1:
            raise ParseError("goal.elt must hold exactly one axiom line", 1, 1)
        return cls(directory.name, directory / "tbox.elt", parse_axiom(lines[0]))


def load_suite(directory) -> list:
    """Every subdirectory holding a tbox.elt, sorted by task id."""
    directory = Path(directory)
    if not directory.is_dir():
        raise FileNotFoundError(f"no task directory {directory}")
    tasks = [Task.load(d) for d in sorted(directory.iterdir()) if (d / "tbox.elt").is_file()]
    ids = [t.id for t in tasks]
    if len(set(ids)) != len(ids):
        raise ValueError("task ids must be unique")
    return tasks


def bundled_suite() -> Path:
    """Directory of the example tasks shipped with the package."""
    return Path(str(resources.files("elproofs") / "data" / "tasks"))


@dataclass(frozen=True)
class ResultRow:
    task: str
    calculus: str
    mode: str
    status: str
    size: Optional[int] = None
    depth: Optional[int] = None
    justification: Optional[int] = None
    bushiness: Optional[Fraction] = None
    cutwidth: Optional[int] = None
    avg_step_complexity: Optional[Fraction] = None
    runtime_ms: Optional[int] = None
    message: str = ""

    def csv_fields(self) -> list:
        def cell(x):
            if x is None:
                return ""
            return decimal4(x) if isinstance(x, Fraction) else str(x)

        return [cell(getattr(self, c)) for c in CSV_COLUMNS]


@dataclass
class TaskResult:
    row: ResultRow
    proof: Optional[ProofDag] = None
    report: Optional[MetricsReport] = None


def prove(
    tbox: TBox,
    goal: Axiom,
    calculus,
    mode: str = "minimal",
    *,
    goal_directed: bool = False,
    deadline: Optional[float] = None,
) -> Optional[ProofDag]:
    """Proof of ``goal`` from ``tbox``, or None when the goal does not follow."""
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}")
    nt = normalize(tbox, calculus)
    result = entails(tbox, nt.calculus, goal, goal_directed=goal_directed, deadline=deadline, ntbox=nt)
    if not result.holds:
        return None
    dl = lift_to_dl(result.graph, nt)
    extract = extract_min_proof if mode == "minimal" else extract_first_proof
    return extract(dl, goal)


def run_task(
    task: Task,
    calculus,
    mode: str = "minimal",
    weights: StepWeights = StepWeights(),
    *,
    timeout: Optional[float] = DEFAULT_TIMEOUT,
    goal_directed: bool = False,
    timing: bool = False,
) -> TaskResult:
    """Run one task end to end; failures become a status, never an exception."""
    calc = Calculus(calculus)
    start = time.monotonic()
    deadline = start + timeout if timeout else None

    def row(status, message="", **metrics):
        elapsed = round((time.monotonic() - start) * 1000) if timing else None
        return ResultRow(task.id, calc.value, mode, status, runtime_ms=elapsed, message=message, **metrics)

    try:
        tbox = load_tbox(task.tbox_path)
        dag = prove(tbox, task.goal, calc, mode, goal_directed=goal_directed, deadline=deadline)
        if dag is None:
            return TaskResult(row("goal-not-entailed", f"{task.goal} does not follow"))
        violations = validate_proof(dag, tbox, task.goal, calc)
        if violations:
            return TaskResult(row("error", "; ".join(map(str, violations))), dag)
        report = measure(dag, weights)
        if deadline is not None and time.monotonic() > deadline:
            raise ResourceLimitError("time limit exceeded")
    except (UnsupportedFeatureError, UnsupportedGoalError) as exc:
        return TaskResult(row("unsupported", str(exc)))
    except ResourceLimitError as exc:
        return TaskResult(row("limit", str(exc)))
    except (OSError, ParseError, ProofError, ValueError, KeyError) as exc:
        return TaskResult(row("error", f"{type(exc).__name__}: {exc}"))
    ok = row(
        "ok",
        size=report.size,
        depth=report.depth,
        justification=report.justification_size,
        bushiness=report.bushiness,
        cutwidth=report.cutwidth,
        avg_step_complexity=report.avg_step_complexity,
    )
    return TaskResult(ok, dag, report)


def _run_job(args) -> TaskResult:
    task, calc, mode, weights, timeout, goal_directed, timing = args
    return run_task(task, calc, mode, weights, timeout=timeout, goal_directed=goal_directed, timing=timing)


@dataclass
class SuiteSummary:
    results: list
    counts: dict

    @property
    def rows(self) -> list:
        return [r.row for r in self.results]

    @property
    def errored(self) -> bool:
        return self.counts.get("error", 0) > 0


def proof_filename(task_id: str, calculus: str, mode: str) -> str:
    return f"{task_id}.{calculus}.{mode}.json"


def run_benchmark(
    suite_dir,
    calculi: Sequence = CALCULI,
    mode: str = "minimal",
    out_csv=None,
    *,
    weights: StepWeights = StepWeights(),
    jobs: int = 1,
    timeout: Optional[float] = DEFAULT_TIMEOUT,
    goal_directed: bool = False,
    timing: bool = False,
    proof_dir=None,
) -> SuiteSummary:
    tasks = load_suite(suite_dir)
    calcs = [Calculus(c).value for c in calculi]
    jobs_args = [
        (task, calc, mode, weights, timeout, goal_directed, timing)
        for task, calc in itertools.product(tasks, calcs)
    ]
    if jobs > 1 and len(jobs_args) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_run_job, jobs_args))
    else:
        results = [_run_job(a) for a in jobs_args]
    results.sort(key=lambda r: (r.row.task, r.row.calculus))
    counts = {s: 0 for s in STATUSES}
    for r in results:
        counts[r.row.status] += 1
    if out_csv is not None:
        Path(out_csv).write_text(rows_to_csv([r.row for r in results]), encoding="utf-8")
    if proof_dir is not None:
        proof_dir = Path(proof_dir)
        proof_dir.mkdir(parents=True, exist_ok=True)
        for r in results:
            if r.row.status == "ok":
                task = next(t for t in tasks if t.id == r.row.task)
                path = proof_dir / proof_filename(r.row.task, r.row.calculus, mode)
                path.write_text(r.proof.dumps(task.goal), encoding="utf-8")
    return SuiteSummary(results, counts)


def rows_to_csv(rows: Sequence[ResultRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for r in rows:
        writer.writerow(r.csv_fields())
    return buf.getvalue()


# -- comparison ---------------------------------------------------------------


class MalformedResultsError(ValueError):
    pass


@dataclass(frozen=True)
class PairCount:
    left: str
    right: str
    metric: str
    higher: int
    lower: int
    equal: int
    points: tuple = ()

    @property
    def total(self) -> int:
        return self.higher + self.lower + self.equal


def read_results(path) -> list:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(header) != CSV_COLUMNS:
            raise MalformedResultsError(f"{path}: header must be {','.join(CSV_COLUMNS)}")
        rows = []
        for lineno, rec in enumerate(reader, start=2):
            if len(rec) != len(CSV_COLUMNS):
                raise MalformedResultsError(f"{path}:{lineno}: expected {len(CSV_COLUMNS)} fields")
            rows.append(dict(zip(CSV_COLUMNS, rec)))
    return rows


def compare_results(path, metric: str, pairs: Optional[Sequence] = None) -> list:
    """Per ordered calculus pair, count tasks where the left value is higher, lower, equal.

    Only tasks with status ok for both calculi count; rows of different
    modes are never compared with each other.
    """
    if metric not in METRIC_COLUMNS:
        raise ValueError(f"unknown metric {metric!r}; choose from {', '.join(METRIC_COLUMNS)}")
    column = METRIC_COLUMNS[metric]
    values: dict = {}
    for rec in read_results(path):
        if rec["status"] != "ok":
            continue
        try:
            value = Fraction(rec[column])
        except (ValueError, ZeroDivisionError) as exc:
            raise MalformedResultsError(f"bad {column} value {rec[column]!r}") from exc
        values.setdefault(rec["calculus"], {})[(rec["task"], rec["mode"])] = value
    if pairs is None:
        present = [c.value for c in CALCULI if c.value in values]
        present += sorted(set(values) - set(present))
        pairs = list(itertools.permutations(present, 2))
    out = []
    for left, right in pairs:
        lv, rv = values.get(left, {}), values.get(right, {})
        common = sorted(set(lv) & set(rv))
        points = tuple((task, mode, lv[(task, mode)], rv[(task, mode)]) for task, mode in common)
        out.append(
            PairCount(
                left,
                right,
                metric,
                higher=sum(x > y for _, _, x, y in points),
                lower=sum(x < y for _, _, x, y in points),
                equal=sum(x == y for _, _, x, y in points),
                points=points,
            )
        )
    return out


def scatter_data(pc: PairCount) -> str:
    lines = [f"# {pc.metric}: x = {pc.left}, y = {pc.right}"]
    lines += [f"{decimal4(x)} {decimal4(y)}" for _, _, x, y in pc.points]
    return "\n".join(lines) + "\n"


def scatter_svg(pc: PairCount, width: int = 320) -> str:
    """A bare scatter plot with the diagonal, sized ``width`` pixels square."""
    margin = 40
    span = width - 2 * margin
    hi = max([Fraction(1)] + [max(x, y) for _, _, x, y in pc.points])

    def px(v, flip=False):
        pos = float(Fraction(v) / hi) * span
        return round(margin + (span - pos if flip else pos), 2)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{width}" '
        f'viewBox="0 0 {width} {width}">',
        f'<rect x="{margin}" y="{margin}" width="{span}" height="{span}" fill="none" stroke="black"/>',
        f'<line x1="{px(0)}" y1="{px(0, True)}" x2="{px(hi)}" y2="{px(hi, True)}" stroke="gray" '
        'stroke-dasharray="4 3"/>',
        f'<text x="{width // 2}" y="{width - 10}" text-anchor="middle" font-size="12">{pc.left} {pc.metric}</text>',
        f'<text x="12" y="{width // 2}" text-anchor="middle" font-size="12" '
        f'transform="rotate(-90 12 {width // 2})">{pc.right} {pc.metric}</text>',
        f'<text x="{margin}" y="{width - margin + 14}" font-size="10">0</text>',
        f'<text x="{width - margin}" y="{width - margin + 14}" font-size="10" text-anchor="end">'
        f"{decimal4(hi)}</text>",
    ]
    for _, _, x, y in pc.points:
        parts.append(f'<circle cx="{px(x)}" cy="{px(y, True)}" r="3" fill="steelblue" fill-opacity="0.6"/>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


# -- generated suites -----------------------------------------------------------


def chain_tbox(n: int) -> TBox:
    """A0 ⊑ A1 ⊑ ... ⊑ An."""
    return TBox.of(ConceptInclusion(Named(f"A{i}"), Named(f"A{i + 1}")) for i in range(n))


def write_chain_suite(directory, sizes: Sequence[int] = (8, 16, 32)) -> list:
    directory = Path(directory)
    tasks = []
    for n in sizes:
        task_dir = directory / f"chain-{n:03d}"
        task_dir.mkdir(parents=True, exist_ok=True)
        (task_dir / "tbox.elt").write_text(chain_tbox(n).serialize(), encoding="utf-8")
        goal = ConceptInclusion(Named("A0"), Named(f"A{n}"))
        (task_dir / "goal.elt").write_text(f"{goal}\n", encoding="utf-8")
        tasks.append(Task(task_dir.name, task_dir / "tbox.elt", goal))
    return tasks
