"""CLI entry point for the SBN tree-probability toolkit.

Subcommands:
- fit: estimate SRF, CCD or SBN parameters from a tree sample
- eval: per-tree probabilities under a stored model
- kl: KL divergence between a target distribution and a stored model
- audit: exhaustive total probability of a stored model
- simulate: the seeded Dirichlet-target experiment, written as CSV
- enumerate: list or count every tree on N taxa

Command results go to standard output as plain lines; panels, progress and
logs go to standard error.
"""

import argparse
import math
import sys
from pathlib import Path
from typing import Any, Callable, Sequence

from pydantic import ValidationError as PydanticValidationError
from rich.console import Console
from rich.panel import Panel
from rich.progress import (
    BarColumn,
    Progress,
    SpinnerColumn,
    TaskProgressColumn,
    TextColumn,
    TimeElapsedColumn,
)
from rich.table import Table
from rich.text import Text

from src.config import KlDirection, KlSupport
from src.core import TaxonSet
from src.counting import collect_rooted_counts
from src.errors import EmptySampleError, SbnError
from src.estimators import (
    EmConfig,
    EmDiagnostics,
    EmEngine,
    EmInit,
    fit_ccd,
    fit_em,
    fit_ml_rooted,
    fit_sa,
    fit_srf,
)
from src.evaluation import (
    KlOptions,
    RootingSpace,
    kl_divergence,
    make_evaluator,
    normalization_audit,
)
from src.logging_config import get_logger, setup_logging
from src.simulation import (
    ExperimentConfig,
    ResultRow,
    default_taxa,
    run_experiment,
    summarize,
    write_results_csv,
    write_summary_csv,
)
from src.storage import load_model, read_target_file, read_tree_file, store_model
from src.treespace import (
    as_unrooted,
    check_enumeration_cap,
    count_rooted,
    count_unrooted,
    enumerate_rooted,
    enumerate_unrooted,
    write_newick,
)

logger = get_logger(__name__)

FIT_METHODS = ("srf", "ccd", "sbn-ml", "sbn-sa", "sbn-em")


def _comma_list(cast: Callable[[str], Any]) -> Callable[[str], list[Any]]:
    def parse(text: str) -> list[Any]:
        try:
            return [cast(part) for part in text.split(",") if part.strip()]
        except ValueError as e:
            raise argparse.ArgumentTypeError(str(e)) from None

    return parse


def _taxa_arg(text: str) -> TaxonSet:
    try:
        return TaxonSet.from_names(name.strip() for name in text.split(","))
    except SbnError as e:
        raise argparse.ArgumentTypeError(str(e)) from None


def _alpha_rule(text: str) -> str | float:
    if text == "50/K":
        return text
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError("expected '50/K' or a number") from None


def build_parser() -> argparse.ArgumentParser:
    """Build the argument parser with one subparser per command."""
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--verbose", "-v",
        action="store_true",
        default=argparse.SUPPRESS,
        help="Enable verbose (DEBUG) logging",
    )

    parser = argparse.ArgumentParser(
        prog="sbn",
        description="Estimate and evaluate tree probabilities with subsplit Bayesian networks",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  python -m src.main fit trees.nwk --method sbn-em --alpha 0.0001 -o model.sbn
  python -m src.main eval model.sbn trees.nwk
  python -m src.main kl target.tsv model.sbn --direction target_to_estimate
  python -m src.main audit model.sbn --space rooted
  python -m src.main simulate --seed 7 --no-timings -o results.csv
  python -m src.main enumerate --n 8 --count-only
        """,
    )
    parser.add_argument(
        "--verbose", "-v",
        action="store_true",
        help="Enable verbose (DEBUG) logging",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    fit = sub.add_parser("fit", parents=[common], help="Fit a model to a tree sample")
    fit.add_argument("trees", type=Path, help="Tree file: '<newick>' or '<weight><TAB><newick>' lines")
    fit.add_argument("--method", "-m", choices=FIT_METHODS, default="sbn-em")
    fit.add_argument("--output", "-o", type=Path, required=True, help="Model file to write")
    fit.add_argument("--alpha", type=float, default=0.0, help="EM regularization weight (default: 0)")
    fit.add_argument("--max-iters", type=int, default=None, help="EM iteration limit")
    fit.add_argument("--rel-tol", type=float, default=None, help="EM per-tree stopping tolerance")
    fit.add_argument("--init", choices=[EmInit.SA.value, EmInit.UNIFORM.value], default=EmInit.SA.value)
    fit.add_argument(
        "--em-engine",
        choices=[e.value for e in EmEngine],
        default=EmEngine.INDEX.value,
        help="E-step over array-indexed trees or per-tree count tables",
    )
    fit.add_argument("--trace", action="store_true", help="Print the EM log-likelihood trace")
    fit.add_argument("--taxa", type=_taxa_arg, default=None, help="Comma-separated taxon order")

    ev = sub.add_parser("eval", parents=[common], help="Evaluate tree probabilities")
    ev.add_argument("model", type=Path)
    ev.add_argument("trees", type=Path)

    kl = sub.add_parser("kl", parents=[common], help="KL divergence against a target")
    kl.add_argument("target", type=Path, help="Target file: '<prob><TAB><newick>' lines")
    kl.add_argument("model", type=Path)
    kl.add_argument("--direction", choices=[d.value for d in KlDirection], default=None)
    kl.add_argument("--support", choices=[s.value for s in KlSupport], default=None)
    kl.add_argument("--epsilon-floor", type=float, default=None)

    audit = sub.add_parser("audit", parents=[common], help="Sum a model over every tree")
    audit.add_argument("model", type=Path)
    audit.add_argument(
        "--space",
        choices=[s.value for s in RootingSpace],
        default=RootingSpace.UNROOTED.value,
    )

    sim = sub.add_parser("simulate", parents=[common], help="Run the simulation experiment")
    sim.add_argument("--output", "-o", type=Path, required=True, help="Result CSV")
    sim.add_argument("--summary", type=Path, default=None, help="Per-cell summary CSV")
    sim.add_argument("--n-taxa", type=int, default=8)
    sim.add_argument("--betas", type=_comma_list(float), default=None)
    sim.add_argument("--sample-sizes", type=_comma_list(int), default=None)
    sim.add_argument("--methods", type=_comma_list(str), default=None)
    sim.add_argument("--replicates", type=int, default=10)
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument("--alpha-rule", type=_alpha_rule, default="50/K")
    sim.add_argument(
        "--kl-direction",
        choices=[d.value for d in KlDirection],
        default=KlDirection.ESTIMATE_TO_TARGET.value,
        help="Direction of the scored divergence (default: estimate_to_target)",
    )
    sim.add_argument("--no-timings", action="store_true", help="Write fit_seconds as 0")

    enum = sub.add_parser("enumerate", parents=[common], help="List every tree on N taxa")
    enum.add_argument("--n", type=int, required=True, help="Number of taxa")
    enum.add_argument("--count-only", action="store_true")
    enum.add_argument("--rooted", action="store_true", help="Rooted instead of unrooted trees")

    return parser


def _number(value: float) -> str:
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    if float(value).is_integer() and abs(value) < 2**53:
        return str(int(value))
    return repr(float(value))


def _value(value: float) -> str:
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return repr(float(value))


def _emit(key: str, value: Any) -> None:
    print(f"{key}={value}")


def display_fit_summary(console: Console, summary: dict[str, Any]) -> None:
    text = Text()
    for key, value in summary.items():
        text.append(f"{key}: ", style="dim")
        text.append(f"{value}\n", style="bold")
    text.rstrip()
    console.print(Panel(text, title="[bold]Fit Summary[/bold]", border_style="green"))


def cmd_fit(args: argparse.Namespace, console: Console) -> int:
    em_cfg = None
    if args.method == "sbn-em":
        overrides: dict[str, Any] = {
            "alpha": args.alpha,
            "init": EmInit(args.init),
            "engine": EmEngine(args.em_engine),
        }
        if args.max_iters is not None:
            overrides["max_iters"] = args.max_iters
        if args.rel_tol is not None:
            overrides["rel_tol"] = args.rel_tol
        em_cfg = EmConfig(**overrides)

    taxa, trees = read_tree_file(args.trees, args.taxa)
    if not trees:
        raise EmptySampleError(f"No trees in {args.trees}")

    diagnostics: EmDiagnostics | None = None
    if args.method == "srf":
        params: Any = fit_srf(trees)
    elif args.method == "ccd":
        params = fit_ccd(trees)
    elif args.method == "sbn-ml":
        params = fit_ml_rooted(collect_rooted_counts(trees))
    elif args.method == "sbn-sa":
        params = fit_sa(trees)
    else:
        params, diagnostics = fit_em(trees, em_cfg)

    store_model(params, args.output)

    summary: dict[str, Any] = {
        "method": args.method,
        "taxa": taxa.size,
        "trees": _number(sum(weight for _, weight in trees)),
        **params.support_size(),
    }
    if diagnostics is not None:
        summary["iterations"] = diagnostics.iterations
        summary["converged"] = str(diagnostics.converged).lower()
        summary["loglik"] = _value(diagnostics.final_loglik)
    for key, value in summary.items():
        _emit(key, value)
    if args.trace and diagnostics is not None:
        for i, value in enumerate(diagnostics.loglik_trace):
            print(f"trace[{i}]={_value(value)}")
    display_fit_summary(console, summary)
    return 0


def cmd_eval(args: argparse.Namespace, console: Console) -> int:
    model = load_model(args.model)
    _, trees = read_tree_file(args.trees, model.taxa)
    evaluator = make_evaluator(model)
    for tree, _ in trees:
        print(f"{_value(evaluator.prob(tree))}\t{write_newick(as_unrooted(tree))}")
    return 0


def cmd_kl(args: argparse.Namespace, console: Console) -> int:
    overrides: dict[str, Any] = {}
    if args.direction is not None:
        overrides["direction"] = KlDirection(args.direction)
    if args.support is not None:
        overrides["support"] = KlSupport(args.support)
    if args.epsilon_floor is not None:
        overrides["epsilon_floor"] = args.epsilon_floor
    opts = KlOptions(**overrides)

    model = load_model(args.model)
    target = read_target_file(args.target, model.taxa)
    value = kl_divergence(target, model, opts)
    print(_value(value))
    return 0


def cmd_audit(args: argparse.Namespace, console: Console) -> int:
    model = load_model(args.model)
    total = normalization_audit(model, RootingSpace(args.space))
    print(_value(total))
    return 0


def create_progress(console: Console) -> Progress:
    return Progress(
        SpinnerColumn(),
        TextColumn("[bold blue]{task.description}"),
        BarColumn(bar_width=40),
        TaskProgressColumn(),
        TimeElapsedColumn(),
        console=console,
    )


def display_simulation_summary(console: Console, rows: list[Any]) -> None:
    table = Table(title="[bold]Mean KL per cell[/bold]", show_header=True, header_style="bold cyan")
    table.add_column("Method", style="cyan", no_wrap=True)
    table.add_column("beta", justify="right")
    table.add_column("K", justify="right")
    table.add_column("n", justify="right")
    table.add_column("KL mean", justify="right")
    table.add_column("KL std", justify="right")
    for row in rows:
        table.add_row(
            row.method,
            f"{row.beta:g}",
            str(row.K),
            str(row.n),
            f"{row.kl_mean:.4g}",
            f"{row.kl_std:.2g}",
        )
    console.print(table)


def cmd_simulate(args: argparse.Namespace, console: Console) -> int:
    fields: dict[str, Any] = {
        "n_taxa": args.n_taxa,
        "replicates": args.replicates,
        "seed": args.seed,
        "alpha_rule": args.alpha_rule,
        "record_timings": not args.no_timings,
    }
    fields["kl"] = KlOptions(direction=KlDirection(args.kl_direction))
    if args.betas is not None:
        fields["betas"] = args.betas
    if args.sample_sizes is not None:
        fields["sample_sizes"] = args.sample_sizes
    if args.methods is not None:
        fields["methods"] = args.methods
    cfg = ExperimentConfig(**fields)

    total = len(cfg.betas) * len(cfg.sample_sizes) * cfg.replicates * len(cfg.methods)
    with create_progress(console) as progress:
        task = progress.add_task("Simulating", total=total)

        def advance(row: ResultRow) -> None:
            progress.update(
                task,
                advance=1,
                description=f"{row.method} beta={row.beta:g} K={row.K} rep={row.replicate}",
            )

        table = run_experiment(cfg, on_row=advance)
        progress.update(task, description=f"[green]Complete: {len(table)} rows[/green]")

    write_results_csv(table, args.output)
    summary = summarize(table)
    if args.summary is not None:
        write_summary_csv(summary, args.summary)
    display_simulation_summary(console, summary)
    _emit("rows", len(table))
    _emit("failed", sum(1 for row in table.rows if math.isnan(row.kl)))
    return 0


def cmd_enumerate(args: argparse.Namespace, console: Console) -> int:
    count = count_rooted(args.n) if args.rooted else count_unrooted(args.n)
    if args.count_only:
        print(count)
        return 0
    check_enumeration_cap(args.n)
    taxa = default_taxa(args.n)
    trees = enumerate_rooted(taxa) if args.rooted else enumerate_unrooted(taxa)
    for tree in trees:
        print(write_newick(tree))
    return 0


COMMANDS: dict[str, Callable[[argparse.Namespace, Console], int]] = {
    "fit": cmd_fit,
    "eval": cmd_eval,
    "kl": cmd_kl,
    "audit": cmd_audit,
    "simulate": cmd_simulate,
    "enumerate": cmd_enumerate,
}


def main(argv: Sequence[str] | None = None) -> int:
    """Main entry point for the CLI.

    Returns:
        Exit code: 0 on success, 2 for unparsable input, 3 for invalid input,
        1 for internal errors, 130 when interrupted.
    """
    args = build_parser().parse_args(argv)
    console = Console(stderr=True)

    log_level = "DEBUG" if args.verbose else None
    setup_logging(log_level=log_level)

    try:
        return COMMANDS[args.command](args, console)

    except KeyboardInterrupt:
        console.print("\n[yellow]Interrupted by user.[/yellow]")
        return 130

    except SbnError as e:
        logger.debug("Command failed", exc_info=True)
        console.print(Text.assemble(("Error: ", "bold red"), str(e)))
        return e.exit_code

    except PydanticValidationError as e:
        console.print(Text.assemble(("Invalid options: ", "bold red"), str(e)))
        return 3

    except Exception as e:
        logger.exception("Unexpected error", extra={"command": args.command})
        console.print(Text.assemble(("Error: ", "bold red"), str(e)))
        return 1


if __name__ == "__main__":
    sys.exit(main())
