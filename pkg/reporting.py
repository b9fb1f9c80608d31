"""Benchmark reporting.

Turns solutions into table rows, writes bench and trace CSV files and
renders the text table printed by ``itlp bench``. Costs are stored raw;
only the rendered table scales them by 10^7.
"""
import csv
import logging
from pathlib import Path
from typing import Iterable, List, Optional, Sequence, Union

from jinja2 import Environment, FileSystemLoader
from pydantic import BaseModel

from models.instance import VariantKind
from models.solution import Engine, Solution, SolveStatus, TracePoint

logger = logging.getLogger(__name__)


COST_SCALE = 1e7
LIMIT_MARKER = "*"
CSV_COLUMNS = (
    "name", "n", "p", "seed", "variant", "engine", "status", "objective", "time",
    "reported_count", "limit_hit", "node_count", "lp_count", "best_bound", "gap", "error",
)
TRACE_COLUMNS = ("iteration", "best_objective", "elapsed")

_LINK_COUNTED = {VariantKind.MIN_LINKS.value, VariantKind.HANDLING.value}


class BenchRow(BaseModel):
    """One cell of a benchmark table."""
    name: str
    n: Optional[int] = None
    p: Optional[int] = None
    seed: Optional[int] = None
    variant: str
    variant_kind: str
    engine: str
    status: str
    objective: Optional[float] = None
    time: float = 0.0
    reported_count: Optional[int] = None
    limit_hit: bool = False
    node_count: int = 0
    lp_count: int = 0
    best_bound: Optional[float] = None
    gap: Optional[float] = None
    error: Optional[str] = None

    # Limit-hit rows print only the marker in every column; the CSV keeps
    # the raw values.
    @property
    def cost_display(self) -> str:
        if self.limit_hit:
            return LIMIT_MARKER
        return "-" if self.objective is None else f"{self.objective / COST_SCALE:.2f}"

    @property
    def time_display(self) -> str:
        return LIMIT_MARKER if self.limit_hit else f"{self.time:.2f}"

    @property
    def count_display(self) -> str:
        if self.limit_hit:
            return LIMIT_MARKER
        return "-" if self.reported_count is None else str(self.reported_count)


def bench_row_from_solution(name: str, solution: Solution, n: Optional[int] = None, p: Optional[int] = None,
                            seed: Optional[int] = None) -> BenchRow:
    """Row for a finished solve.

    A row is limit-hit when the exact engine stopped before proving
    optimality: Feasible with an incumbent or TimeLimit without one.
    """
    metadata = solution.metadata
    limit_hit = metadata.engine == Engine.EXACT and metadata.status in (SolveStatus.FEASIBLE, SolveStatus.TIME_LIMIT)
    return BenchRow(
        name=name,
        n=n,
        p=p,
        seed=seed,
        variant=solution.variant.label(),
        variant_kind=solution.variant.kind.value,
        engine=metadata.engine.value,
        status=metadata.status.value,
        objective=solution.objective,
        time=metadata.wall_time,
        reported_count=solution.reported_count() if solution.has_objective else None,
        limit_hit=limit_hit,
        node_count=metadata.node_count,
        lp_count=metadata.lp_count,
        best_bound=metadata.best_bound,
        gap=metadata.gap,
        error=metadata.message if metadata.status == SolveStatus.INFEASIBLE else None,
    )


def error_row(name: str, variant: str, variant_kind: str, engine: str, message: str,
              n: Optional[int] = None, p: Optional[int] = None, seed: Optional[int] = None) -> BenchRow:
    """Row for a cell whose solve raised."""
    return BenchRow(name=name, n=n, p=p, seed=seed, variant=variant, variant_kind=variant_kind,
                    engine=engine, status="Error", error=message)


def format_row(row: BenchRow) -> str:
    """Tab-separated row as printed by ``itlp solve``."""
    fields = [row.name, row.variant, row.engine, row.cost_display, row.time_display, row.count_display, row.status]
    if row.error:
        fields.append(row.error)
    return "\t".join(fields)


def _csv_value(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


class BenchReporter:
    """Writer for bench CSV files, trace CSV files and rendered tables."""

    def __init__(self):
        """Initialize the reporter and its template environment."""
        self.template_dir = Path(__file__).parent / "generators" / "templates"
        self.jinja_env = Environment(loader=FileSystemLoader(self.template_dir), keep_trailing_newline=True)

    def render_table(self, rows: Sequence[BenchRow], title: Optional[str] = None) -> str:
        """Render rows in the benchmark tables' layout.

        The count column is headed ``# terminals`` or ``# links`` when every
        row counts the same thing.
        """
        kinds = {row.variant_kind in _LINK_COUNTED for row in rows}
        if kinds == {True}:
            count_header = "# links"
        elif kinds == {False}:
            count_header = "# terminals"
        else:
            count_header = "# count"
        template = self.jinja_env.get_template("bench_table.txt.j2")
        return template.render(
            title=title,
            rows=rows,
            count_header=count_header,
            starred=any(row.limit_hit for row in rows),
        )

    def write_bench_csv(self, rows: Iterable[BenchRow], output_file: Union[str, Path]) -> Path:
        """Write rows with raw unscaled values in a fixed column order."""
        output_file = Path(output_file)
        output_file.parent.mkdir(parents=True, exist_ok=True)
        count = 0
        with open(output_file, 'w', newline='', encoding='utf-8') as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(CSV_COLUMNS)
            for row in rows:
                data = row.model_dump()
                writer.writerow([_csv_value(data[column]) for column in CSV_COLUMNS])
                count += 1
        logger.info(f"Wrote {count} bench rows to {output_file}")
        return output_file

    def write_trace_csv(self, trace: Iterable[TracePoint], output_file: Union[str, Path]) -> Path:
        """Write an anytime trace as ``iteration,best_objective,elapsed``."""
        output_file = Path(output_file)
        output_file.parent.mkdir(parents=True, exist_ok=True)
        with open(output_file, 'w', newline='', encoding='utf-8') as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(TRACE_COLUMNS)
            for point in trace:
                writer.writerow([point.iteration, repr(point.best_objective), repr(point.elapsed)])
        logger.info(f"Wrote trace to {output_file}")
        return output_file


def read_bench_csv(input_file: Union[str, Path]) -> List[dict]:
    """Rows of a bench CSV as dictionaries of strings."""
    with open(input_file, 'r', newline='', encoding='utf-8') as f:
        return list(csv.DictReader(f))
