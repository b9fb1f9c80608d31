"""Command-line interface for the intermodal terminal location solver.

Usage:
    itlp gen --n 10 --p 10 --seed 1 --out 10C10-s1.json
    itlp solve 10C10-s1.json --variant base --l 4 --engine exact
    itlp verify 10C10-s1.json 10C10-s1.solution.json
    itlp bench --sweep sweep.yaml --csv results.csv

Exit codes: 0 optimal (or verify clean), 1 error, 2 usage, 3 infeasible,
4 feasible, 5 time limit without incumbent, 6 verify violations,
7 oracle enumeration cap.
"""
import logging
import sys
import traceback
from pathlib import Path
from typing import Optional

import click
from click.core import ParameterSource

from bench import (
    DEFAULT_TIME_LIMIT, ENGINES, BenchError, BenchSweep, make_variant, run_sweep, solve_with,
)
from formats import InstanceFileError, read_instance, read_solution, write_instance, write_solution
from formulation import build_model, model_stats, closed_form_counts
from generators import GenSpec, LpExporter, generate, name_for_variant
from generators.instance_gen import CAPACITY_MAX, COORD_MAX, DEMAND_MAX, FIXED_MAX, HANDLING_MAX
from models.instance import DEFAULT_ALPHA, LinkMode, VariantError, VariantKind, max_links
from models.solution import BnbParams, HeuristicParams, SolveStatus
from reporting import BenchReporter, bench_row_from_solution, format_row
from solvers import EnumerationCapError, check_solution
from solvers.checker import DEFAULT_FEAS_TOL

logger = logging.getLogger(__name__)


EXIT_OK = 0
EXIT_ERROR = 1
EXIT_USAGE = 2
EXIT_INFEASIBLE = 3
EXIT_FEASIBLE = 4
EXIT_TIME_LIMIT = 5
EXIT_VIOLATIONS = 6
EXIT_ENUMERATION_CAP = 7

STATUS_EXIT_CODES = {
    SolveStatus.OPTIMAL: EXIT_OK,
    SolveStatus.INFEASIBLE: EXIT_INFEASIBLE,
    SolveStatus.FEASIBLE: EXIT_FEASIBLE,
    SolveStatus.TIME_LIMIT: EXIT_TIME_LIMIT,
}

VARIANTS = [kind.value for kind in VariantKind]
LINK_MODES = [mode.value for mode in LinkMode]


def _configure_logging(verbose: bool, log_file: Optional[Path]) -> None:
    handlers = [logging.StreamHandler(sys.stderr)]
    if log_file is not None:
        handlers.append(logging.FileHandler(log_file))
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.INFO,
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        handlers=handlers,
        force=True,
    )


def _fail(ctx: click.Context, message: str, code: int = EXIT_ERROR) -> None:
    logger.error(message)
    if ctx.obj.get("verbose") and sys.exc_info()[0] is not None:
        traceback.print_exc()
    ctx.exit(code)


def variant_options(func):
    """Options shared by every command that picks a model variant."""
    options = [
        click.option('--variant', 'variant_kind', type=click.Choice(VARIANTS), default=VariantKind.BASE.value,
                     show_default=True, help='Model variant'),
        click.option('--l', 'l', type=click.IntRange(min=0), help='Number of inter-terminal links'),
        click.option('--q', 'q_terminals', type=click.IntRange(min=0), help='Number of open terminals'),
        click.option('--link-mode', type=click.Choice(LINK_MODES),
                     help='Link count as an equality (exact) or an upper bound (atmost)'),
        click.option('--t-seed', type=click.IntRange(min=0), help='Seed of the handling-cost matrix'),
        click.option('--t-max', type=click.FloatRange(min=0.0), default=HANDLING_MAX, show_default=True,
                     help='Upper end of the handling-cost range'),
    ]
    for option in reversed(options):
        func = option(func)
    return func


@click.group()
@click.option('--verbose', '-v', is_flag=True, help='Enable verbose logging')
@click.option('--log-file', type=click.Path(dir_okay=False, path_type=Path), help='Also write the log to this file')
@click.pass_context
def cli(ctx: click.Context, verbose: bool, log_file: Optional[Path]):
    """Incomplete intermodal terminal location solver."""
    ctx.ensure_object(dict)
    ctx.obj["verbose"] = verbose
    _configure_logging(verbose, log_file)


@cli.command()
@click.option('--n', type=click.IntRange(min=1), required=True, help='Number of customers')
@click.option('--p', type=click.IntRange(min=1), required=True, help='Number of candidate sites')
@click.option('--seed', type=click.IntRange(min=0), required=True, help='Generator seed')
@click.option('--coord-max', type=float, default=COORD_MAX, show_default=True, help='Side of the square')
@click.option('--demand-max', type=float, default=DEMAND_MAX, show_default=True, help='Upper end of demands')
@click.option('--fixed-max', type=float, default=FIXED_MAX, show_default=True, help='Upper end of opening costs')
@click.option('--capacity-max', type=float, default=CAPACITY_MAX, show_default=True,
              help='Upper end of capacities')
@click.option('--alpha', type=float, default=DEFAULT_ALPHA, show_default=True, help='Rail discount factor')
@click.option('--name', type=str, help='Instance name (default derived from n, p and seed)')
@click.option('--out', 'out_path', type=click.Path(dir_okay=False, path_type=Path),
              help='Output file (default <n>C<p>-s<seed>.json)')
@click.pass_context
def gen(ctx: click.Context, n: int, p: int, seed: int, coord_max: float, demand_max: float, fixed_max: float,
        capacity_max: float, alpha: float, name: Optional[str], out_path: Optional[Path]):
    """Generate a seeded random instance."""
    try:
        spec = GenSpec(n=n, p=p, seed=seed, coord_max=coord_max, demand_max=demand_max, fixed_max=fixed_max,
                       capacity_max=capacity_max, alpha=alpha, name=name)
    except ValueError as e:
        raise click.UsageError(str(e))
    out_path = out_path or Path(f"{n}C{p}-s{seed}.json")
    try:
        written = write_instance(generate(spec), out_path)
    except InstanceFileError as e:
        _fail(ctx, f"Generation failed: {e}")
        return
    click.echo(str(written))


@cli.command()
@click.argument('instance_file', type=click.Path(exists=True, dir_okay=False, path_type=Path))
@variant_options
@click.option('--engine', type=click.Choice(ENGINES), default='exact', show_default=True, help='Solver engine')
@click.option('--time-limit', type=click.FloatRange(min=0.0, min_open=True), default=DEFAULT_TIME_LIMIT,
              show_default=True, help='Branch-and-bound time limit in seconds')
@click.option('--node-limit', type=click.IntRange(min=1), default=1_000_000, show_default=True,
              help='Branch-and-bound node limit')
@click.option('--gap', type=click.FloatRange(min=0.0), default=0.0, show_default=True,
              help='Relative gap at which branch-and-bound stops')
@click.option('--budget', type=click.FloatRange(min=0.0, min_open=True), default=5.0, show_default=True,
              help='Heuristic time budget in seconds')
@click.option('--max-evals', 'max_evaluations', type=click.IntRange(min=1), default=2000, show_default=True,
              help='Heuristic configuration evaluations before stopping')
@click.option('--seed', type=int, default=0, show_default=True, help='Heuristic seed')
@click.option('--restarts', type=click.IntRange(min=0), default=10, show_default=True,
              help='Heuristic perturbation restarts')
@click.option('--out', 'out_path', type=click.Path(dir_okay=False, path_type=Path),
              help='Solution file (default <instance>.solution.json)')
@click.option('--trace', 'trace_path', type=click.Path(dir_okay=False, path_type=Path),
              help='Write the heuristic trace as CSV')
@click.pass_context
def solve(ctx: click.Context, instance_file: Path, variant_kind: str, l: Optional[int], q_terminals: Optional[int],
          link_mode: Optional[str], t_seed: Optional[int], t_max: float, engine: str, time_limit: float,
          node_limit: int, gap: float, budget: float, max_evaluations: int, seed: int, restarts: int,
          out_path: Optional[Path], trace_path: Optional[Path]):
    """Solve an instance and print one table row."""
    try:
        instance = read_instance(instance_file)
    except InstanceFileError as e:
        _fail(ctx, str(e))
        return
    try:
        variant = make_variant(variant_kind, l, q_terminals, link_mode, p=instance.p, t_seed=t_seed, t_max=t_max)
        variant.check_against(instance)
    except (ValueError, VariantError) as e:
        raise click.UsageError(str(e))

    try:
        solution = solve_with(
            engine, instance, variant,
            bnb_params=BnbParams(time_limit=time_limit, node_limit=node_limit, relative_gap=gap),
            heuristic_params=HeuristicParams(time_budget=budget, max_evaluations=max_evaluations, seed=seed,
                                             restarts=restarts),
        )
    except EnumerationCapError as e:
        _fail(ctx, f"Oracle refused: {e}", EXIT_ENUMERATION_CAP)
        return
    except KeyboardInterrupt:
        logger.info("Solve cancelled by user")
        ctx.exit(130)
        return
    except Exception as e:
        _fail(ctx, f"Solve failed: {e}")
        return

    if solution.status == SolveStatus.INFEASIBLE:
        logger.error(f"Infeasible: {solution.metadata.message}")

    out_path = out_path or instance_file.with_name(f"{instance_file.stem}.solution.json")
    try:
        write_solution(solution, out_path)
        if trace_path is not None:
            BenchReporter().write_trace_csv(solution.metadata.trace, trace_path)
    except (InstanceFileError, OSError) as e:
        _fail(ctx, f"Cannot write results: {e}")
        return

    row = bench_row_from_solution(name_for_variant(instance.n, instance.p, variant), solution,
                                  n=instance.n, p=instance.p)
    click.echo(format_row(row))
    ctx.exit(STATUS_EXIT_CODES[solution.status])


@cli.command()
@click.argument('instance_file', type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.argument('solution_file', type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option('--feas-tol', type=click.FloatRange(min=0.0), default=DEFAULT_FEAS_TOL, show_default=True,
              help='Absolute residual tolerance')
@click.pass_context
def verify(ctx: click.Context, instance_file: Path, solution_file: Path, feas_tol: float):
    """Check a solution against every constraint family."""
    try:
        instance = read_instance(instance_file)
        solution = read_solution(solution_file)
        report = check_solution(instance, solution.variant, solution, feas_tol)
    except (InstanceFileError, VariantError) as e:
        _fail(ctx, str(e))
        return

    if not solution.has_objective:
        click.echo(f"Solution status {solution.status.value}: no routing to verify")
        ctx.exit(EXIT_OK)
        return

    for family, residual in report.residuals.items():
        where = report.worst_location.get(family, "")
        click.echo(f"{family}\t{residual:.3e}\t{where}")
    if report.prop1_checked:
        click.echo(f"Prop1\t{'ok' if report.prop1_ok else 'violated'}\tdiagonal flow {report.diagonal_flow:.6g}")
    if report.objective_ok is not None:
        click.echo(f"objective\t{'ok' if report.objective_ok else 'mismatch'}\t"
                   f"claimed {report.objective_claimed!r} recomputed {report.objective_recomputed!r}")

    if report.ok:
        click.echo("OK: no violations")
        ctx.exit(EXIT_OK)
        return
    for violation in report.violations:
        click.echo(f"VIOLATION: {violation}")
    ctx.exit(EXIT_VIOLATIONS)


@cli.command()
@click.option('--sweep', 'sweep_file', type=click.Path(exists=True, dir_okay=False, path_type=Path),
              help='YAML sweep document; command-line options override its values')
@click.option('--n', 'n', type=click.IntRange(min=1), multiple=True, help='Customer counts')
@click.option('--p', 'p', type=click.IntRange(min=1), multiple=True, help='Site counts')
@click.option('--l', 'l', type=click.IntRange(min=0), multiple=True, help='Link counts')
@click.option('--q', 'q', type=click.IntRange(min=0), multiple=True, help='Terminal counts')
@click.option('--seeds', 'seeds', type=click.IntRange(min=0), multiple=True, help='Instance seeds')
@click.option('--variant', type=click.Choice(VARIANTS), default=VariantKind.BASE.value, show_default=True)
@click.option('--link-mode', type=click.Choice(LINK_MODES), default=LinkMode.EXACT.value, show_default=True)
@click.option('--engine', type=click.Choice(ENGINES), default='exact', show_default=True)
@click.option('--time-limit', type=click.FloatRange(min=0.0, min_open=True), default=DEFAULT_TIME_LIMIT,
              show_default=True)
@click.option('--node-limit', type=click.IntRange(min=1), default=1_000_000, show_default=True)
@click.option('--gap', type=click.FloatRange(min=0.0), default=0.0, show_default=True)
@click.option('--budget', type=click.FloatRange(min=0.0, min_open=True), default=5.0, show_default=True)
@click.option('--max-evals', 'max_evaluations', type=click.IntRange(min=1), default=2000, show_default=True)
@click.option('--restarts', type=click.IntRange(min=0), default=10, show_default=True)
@click.option('--t-seed', type=click.IntRange(min=0), default=0, show_default=True)
@click.option('--t-max', type=click.FloatRange(min=0.0), default=HANDLING_MAX, show_default=True)
@click.option('--alpha', type=float, default=DEFAULT_ALPHA, show_default=True)
@click.option('--workers', type=click.IntRange(min=1), default=1, show_default=True,
              help='Cells solved in parallel')
@click.option('--csv', 'csv_path', type=click.Path(dir_okay=False, path_type=Path), help='Write rows as CSV')
@click.option('--title', type=str, help='Table title')
@click.pass_context
def bench(ctx: click.Context, sweep_file: Optional[Path], csv_path: Optional[Path], title: Optional[str],
          **options):
    """Run a benchmark sweep and render the table."""
    overrides = {}
    for key, value in options.items():
        if ctx.get_parameter_source(key) == ParameterSource.DEFAULT:
            continue
        overrides[key] = list(value) if isinstance(value, tuple) else value
    try:
        if sweep_file is not None:
            sweep = BenchSweep.from_yaml(sweep_file)
            sweep = BenchSweep.model_validate({**sweep.model_dump(), **overrides})
        else:
            defaults = {key: list(value) if isinstance(value, tuple) else value for key, value in options.items()}
            sweep = BenchSweep.model_validate({key: value for key, value in defaults.items()
                                               if value != [] or key in ("l", "q")})
    except BenchError as e:
        _fail(ctx, str(e))
        return
    except ValueError as e:
        raise click.UsageError(str(e))

    rows = run_sweep(sweep)
    reporter = BenchReporter()
    if csv_path is not None:
        reporter.write_bench_csv(rows, csv_path)
    click.echo(reporter.render_table(rows, title), nl=False)
    failed = sum(1 for row in rows if row.error and row.status == "Error")
    if failed:
        logger.warning(f"{failed} of {len(rows)} cells failed")


@cli.command()
@click.argument('instance_file', required=False, type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option('--n', type=click.IntRange(min=1), help='Customer count (without an instance file)')
@click.option('--p', type=click.IntRange(min=1), help='Site count (without an instance file)')
@variant_options
@click.pass_context
def info(ctx: click.Context, instance_file: Optional[Path], n: Optional[int], p: Optional[int], variant_kind: str,
         l: Optional[int], q_terminals: Optional[int], link_mode: Optional[str], t_seed: Optional[int],
         t_max: float):
    """Show model sizes, as built and under the closed-form counts.

    Missing link or terminal counts default to 0.
    """
    instance = None
    if instance_file is not None:
        if n is not None or p is not None:
            raise click.UsageError("give either an instance file or --n/--p, not both")
        try:
            instance = read_instance(instance_file)
        except InstanceFileError as e:
            _fail(ctx, str(e))
            return
        n, p = instance.n, instance.p
    elif n is None or p is None:
        raise click.UsageError("give an instance file or both --n and --p")

    kind = VariantKind(variant_kind)
    if l is None and kind in (VariantKind.BASE, VariantKind.HANDLING, VariantKind.PL):
        l = 0
    if q_terminals is None and kind in (VariantKind.MIN_LINKS, VariantKind.PL):
        q_terminals = 0
    try:
        variant = make_variant(kind, l, q_terminals, link_mode, p=p, t_seed=t_seed, t_max=t_max)
    except ValueError as e:
        raise click.UsageError(str(e))

    click.echo(f"n={n} p={p} variant: {variant.label()}")
    click.echo(f"link bound p(p-1)/2 = {max_links(p)}")
    reason = variant.structural_infeasibility(p)
    if reason is not None:
        click.echo(f"structurally infeasible: {reason}")

    closed = closed_form_counts(n, p, variant)
    click.echo(f"closed-form: {closed.num_constraints} constraints, {closed.num_variables} variables, "
               f"{closed.num_binaries} binaries")
    click.echo(f"  base formulas: n^2p^2+3p^2+n^2+p+1 = {n*n*p*p + 3*p*p + n*n + p + 1}, "
               f"n^2p^2+n^2+p^2 = {n*n*p*p + n*n + p*p}")
    for tag, count in closed.constraints_by_tag.items():
        click.echo(f"  {tag}\t{count}")

    if instance is not None:
        try:
            built = model_stats(build_model(instance, variant))
        except VariantError as e:
            raise click.UsageError(str(e))
        click.echo(f"as built: {built.num_constraints} constraints, {built.num_variables} variables, "
                   f"{built.num_binaries} binaries")
        for tag, count in built.constraints_by_tag.items():
            click.echo(f"  {tag}\t{count}")
        for role, count in built.variables_by_role.items():
            click.echo(f"  {role}\t{count}")


@cli.command('export-lp')
@click.argument('instance_file', type=click.Path(exists=True, dir_okay=False, path_type=Path))
@variant_options
@click.option('--out', 'out_path', type=click.Path(dir_okay=False, path_type=Path),
              help='LP file (default: standard output)')
@click.pass_context
def export_lp_command(ctx: click.Context, instance_file: Path, variant_kind: str, l: Optional[int],
                      q_terminals: Optional[int], link_mode: Optional[str], t_seed: Optional[int], t_max: float,
                      out_path: Optional[Path]):
    """Write the model in CPLEX LP format."""
    try:
        instance = read_instance(instance_file)
    except InstanceFileError as e:
        _fail(ctx, str(e))
        return
    try:
        variant = make_variant(variant_kind, l, q_terminals, link_mode, p=instance.p, t_seed=t_seed, t_max=t_max)
        model = build_model(instance, variant)
    except (ValueError, VariantError) as e:
        raise click.UsageError(str(e))

    exporter = LpExporter()
    if out_path is None:
        click.echo(exporter.render(model), nl=False)
        return
    result = exporter.export(model, out_path)
    if not result["success"]:
        _fail(ctx, f"LP export failed: {'; '.join(result['errors'])}")
        return
    click.echo(result["path"])


def main():
    cli(obj={})


if __name__ == '__main__':
    main()
