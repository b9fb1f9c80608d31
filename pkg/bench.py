"""Engine dispatch and benchmark sweeps.

A sweep is the cross product of customer counts, site counts, seeds and
link/terminal counts. Each cell generates its instance, solves it with the
chosen engine and becomes one BenchRow. A cell that raises is recorded as an
error row and the sweep continues. Rows always come back in sweep order,
whether cells ran in this process or in a process pool.
"""
import logging
from concurrent.futures import ProcessPoolExecutor
from itertools import product
from pathlib import Path
from typing import List, NamedTuple, Optional, Union

import yaml
from pydantic import BaseModel, ConfigDict, Field, model_validator

from generators import GenSpec, generate, generate_handling_costs, name_for_variant
from generators.instance_gen import HANDLING_MAX
from models.instance import DEFAULT_ALPHA, Instance, LinkMode, VariantKind, VariantSpec
from models.solution import BnbParams, Engine, HeuristicParams, Solution
from reporting import BenchRow, bench_row_from_solution, error_row
from solvers import brute_force, solve_bnb, solve_heuristic

logger = logging.getLogger(__name__)


ENGINES = (Engine.EXACT.value, Engine.HEURISTIC.value, Engine.ORACLE.value)
DEFAULT_TIME_LIMIT = 3600.0


class BenchError(Exception):
    """Raised when a sweep document cannot be loaded."""
    pass


def make_variant(kind: Union[VariantKind, str], l: Optional[int] = None, q_terminals: Optional[int] = None,
                 link_mode: Union[LinkMode, str, None] = None, p: Optional[int] = None,
                 t_seed: Optional[int] = None, t_max: float = HANDLING_MAX) -> VariantSpec:
    """Build a variant from command-line style parameters.

    The handling variant draws its t matrix from ``t_seed`` (default 0) and
    therefore needs ``p``. Parameters a variant does not take are rejected.

    Raises:
        ValueError: If the parameters do not fit the variant
    """
    kind = VariantKind(kind)
    if kind == VariantKind.MIN_LINKS and link_mode is not None and LinkMode(link_mode) != LinkMode.EXACT:
        raise ValueError("min-links has no link-count row, so --link-mode does not apply")
    if kind != VariantKind.HANDLING and t_seed is not None:
        raise ValueError("--t-seed only applies to the handling variant")
    mode = LinkMode(link_mode) if link_mode is not None else LinkMode.EXACT

    handling_cost = None
    if kind == VariantKind.HANDLING:
        if p is None:
            raise ValueError("the handling variant needs the site count to draw t")
        handling_cost = generate_handling_costs(p, t_seed or 0, t_max)
    return VariantSpec(
        kind=kind,
        l=l,
        q_terminals=q_terminals,
        link_mode=mode if l is not None else LinkMode.EXACT,
        handling_cost=handling_cost,
    )


def solve_with(engine: str, instance: Instance, variant: VariantSpec,
               bnb_params: Optional[BnbParams] = None,
               heuristic_params: Optional[HeuristicParams] = None) -> Solution:
    """Run one engine.

    Raises:
        EnumerationCapError: From the oracle on oversized instances
    """
    if engine == Engine.EXACT.value:
        return solve_bnb(instance, variant, bnb_params)
    if engine == Engine.HEURISTIC.value:
        return solve_heuristic(instance, variant, heuristic_params)
    if engine == Engine.ORACLE.value:
        return brute_force(instance, variant)
    raise ValueError(f"unknown engine {engine!r}")


class BenchCell(NamedTuple):
    index: int
    n: int
    p: int
    seed: int
    l: Optional[int]
    q_terminals: Optional[int]


class BenchSweep(BaseModel):
    """A benchmark sweep, as read from YAML or assembled from options."""
    model_config = ConfigDict(extra="forbid")

    n: List[int] = Field(default_factory=lambda: [10])
    p: List[int] = Field(default_factory=lambda: [10])
    l: List[int] = Field(default_factory=list)
    q: List[int] = Field(default_factory=list)
    seeds: List[int] = Field(default_factory=lambda: [1])
    variant: VariantKind = VariantKind.BASE
    link_mode: LinkMode = LinkMode.EXACT
    engine: str = Engine.EXACT.value
    time_limit: float = Field(DEFAULT_TIME_LIMIT, gt=0.0)
    node_limit: int = Field(1_000_000, gt=0)
    gap: float = Field(0.0, ge=0.0)
    budget: float = Field(5.0, gt=0.0)
    max_evaluations: int = Field(2000, ge=1)
    restarts: int = Field(10, ge=0)
    t_seed: int = 0
    t_max: float = Field(HANDLING_MAX, ge=0.0)
    alpha: float = Field(DEFAULT_ALPHA, gt=0.0, le=1.0)
    workers: int = Field(1, ge=1)

    @model_validator(mode="after")
    def _check_counts(self) -> "BenchSweep":
        if self.engine not in ENGINES:
            raise ValueError(f"engine must be one of {', '.join(ENGINES)}")
        needs_l = self.variant in (VariantKind.BASE, VariantKind.HANDLING, VariantKind.PL)
        needs_q = self.variant in (VariantKind.MIN_LINKS, VariantKind.PL)
        if needs_l != bool(self.l):
            raise ValueError(f"variant {self.variant.value} {'needs' if needs_l else 'takes no'} l values")
        if needs_q != bool(self.q):
            raise ValueError(f"variant {self.variant.value} {'needs' if needs_q else 'takes no'} q values")
        if not (self.n and self.p and self.seeds):
            raise ValueError("n, p and seeds must each list at least one value")
        return self

    @classmethod
    def from_yaml(cls, path: Union[str, Path]) -> "BenchSweep":
        """Load a sweep document.

        Raises:
            BenchError: If the file is unreadable or not a mapping
        """
        try:
            with open(path, 'r', encoding='utf-8') as f:
                data = yaml.safe_load(f) or {}
        except (OSError, yaml.YAMLError) as e:
            raise BenchError(f"cannot load sweep {path}: {e}") from e
        if not isinstance(data, dict):
            raise BenchError(f"sweep {path} must be a mapping of option names to values")
        data = {key.replace("-", "_"): value for key, value in data.items()}
        for key in ("n", "p", "l", "q", "seeds"):
            if key in data and not isinstance(data[key], list):
                data[key] = [data[key]]
        return cls.model_validate(data)

    def cells(self) -> List[BenchCell]:
        """Cells in sweep order: n, p, seed, then q, then l."""
        ls = self.l or [None]
        qs = self.q or [None]
        return [
            BenchCell(index, n, p, seed, l, q)
            for index, (n, p, seed, q, l) in enumerate(product(self.n, self.p, self.seeds, qs, ls))
        ]


def run_cell(sweep: BenchSweep, cell: BenchCell) -> BenchRow:
    """Generate, solve and report one cell; failures become error rows."""
    variant = None
    name = f"{cell.n}C{cell.p}L-s{cell.seed}"
    try:
        instance = generate(GenSpec(n=cell.n, p=cell.p, seed=cell.seed, alpha=sweep.alpha))
        variant = make_variant(sweep.variant, cell.l, cell.q_terminals, sweep.link_mode, p=cell.p,
                               t_seed=sweep.t_seed if sweep.variant == VariantKind.HANDLING else None,
                               t_max=sweep.t_max)
        name = name_for_variant(cell.n, cell.p, variant)
        solution = solve_with(
            sweep.engine, instance, variant,
            bnb_params=BnbParams(time_limit=sweep.time_limit, node_limit=sweep.node_limit,
                                 relative_gap=sweep.gap),
            heuristic_params=HeuristicParams(time_budget=sweep.budget, max_evaluations=sweep.max_evaluations,
                                             restarts=sweep.restarts, seed=cell.seed),
        )
        row = bench_row_from_solution(name, solution, n=cell.n, p=cell.p, seed=cell.seed)
        logger.info(f"Cell {cell.index}: {name} seed={cell.seed} {row.status} {row.cost_display}")
        return row
    except Exception as e:
        logger.error(f"Cell {cell.index} ({name}, seed={cell.seed}) failed: {e}")
        label = variant.label() if variant is not None else sweep.variant.value
        return error_row(name, label, sweep.variant.value, sweep.engine, str(e),
                         n=cell.n, p=cell.p, seed=cell.seed)


def run_sweep(sweep: BenchSweep) -> List[BenchRow]:
    """Run every cell and return rows in sweep order."""
    cells = sweep.cells()
    logger.info(f"Running {len(cells)} bench cells with {sweep.workers} worker(s)")
    if sweep.workers == 1 or len(cells) <= 1:
        return [run_cell(sweep, cell) for cell in cells]
    with ProcessPoolExecutor(max_workers=sweep.workers) as executor:
        return list(executor.map(run_cell, [sweep] * len(cells), cells))
