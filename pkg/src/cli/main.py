"""markov-pql command-line entry point."""
import argparse
import json
import logging
import sys
from typing import Any, Optional, Sequence

from pydantic import ValidationError

from ..chain import TupleCounts, count_tuples
from ..config import Settings, configure_logging, load_settings
from ..models import Family, ModelSpec, state_count
from ..utils.errors import ConvergenceError, DataError, InvalidSpec, MarkovInferenceError
from .commands import (
    REPRODUCIBLE,
    SWEEPS,
    cmd_avar,
    cmd_fit,
    cmd_reproduce,
    cmd_simulate,
    cmd_sweep,
)
from .fixtures import FIXTURES, load_fixture
from .io import Alphabet, read_counts_csv, read_sequence, write_csv, write_json
from .run_config import RunConfig

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_DATA = 2
EXIT_CONVERGENCE = 3
EXIT_CONFIG = 4


def exit_code(error: MarkovInferenceError) -> int:
    if isinstance(error, DataError):
        return EXIT_DATA
    if isinstance(error, ConvergenceError):
        return EXIT_CONVERGENCE
    return EXIT_CONFIG


def format_table(rows: Sequence[dict[str, Any]], columns: Optional[Sequence[str]] = None) -> str:
    """Aligned text table; floats printed with 4 significant digits."""
    if not rows:
        return "(no rows)"
    if columns is None:
        columns = []
        for row in rows:
            columns.extend(k for k in row if k not in columns and k != "error")

    def cell(value: Any) -> str:
        if isinstance(value, float):
            return f"{value:.4g}"
        return str(value)

    table = [list(columns)] + [[cell(row.get(c, "")) for c in columns] for row in rows]
    widths = [max(len(r[i]) for r in table) for i in range(len(columns))]
    lines = ["  ".join(v.rjust(w) for v, w in zip(r, widths)) for r in table]
    errors = [f"{i}: {row['error']}" for i, row in enumerate(rows) if row.get("error")]
    return "\n".join(lines + errors)


def _parse_floats(text: Optional[str]) -> Optional[list[float]]:
    if text is None:
        return None
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise InvalidSpec(f"Expected comma-separated numbers, got {text!r}") from None


def build_run_config(args: argparse.Namespace) -> RunConfig:
    """Run configuration from --config, with command-line flags taking precedence."""
    if args.config:
        config = RunConfig.load(args.config)
    elif args.family:
        try:
            spec = ModelSpec(
                family=Family(args.family),
                n_states=args.n_states,
                k_states=args.k_states,
                p_known=_parse_floats(args.p_known),
            )
        except ValueError as e:
            raise InvalidSpec(f"Invalid model flags: {e}") from e
        config = RunConfig(model=spec)
    else:
        raise InvalidSpec("Give a run configuration (--config) or a model family (--family)")

    updates: dict[str, Any] = {}
    if args.theta is not None:
        updates["theta"] = _parse_floats(args.theta)
    if getattr(args, "method", None):
        updates["method"] = args.method
    if getattr(args, "methods", None):
        updates["methods"] = args.methods.split(",")
    if getattr(args, "n", None) is not None:
        updates["n"] = args.n
    if getattr(args, "seed", None) is not None:
        updates["seed"] = args.seed
    if updates:
        try:
            config = RunConfig.model_validate({**config.model_dump(), **updates})
        except ValidationError as e:
            raise InvalidSpec(f"Invalid command-line values: {e}") from e
    return config


def _load_counts(args: argparse.Namespace, config: RunConfig) -> TupleCounts:
    if args.fixture:
        return load_fixture(args.fixture)
    if args.counts:
        return read_counts_csv(args.counts)
    if args.sequence:
        alphabet = Alphabet(args.alphabet)
        n_states = None if alphabet == Alphabet.DNA else state_count(config.model)
        chain = read_sequence(args.sequence, alphabet, n_states)
        return count_tuples(chain, config.method_spec.required_order)
    raise InvalidSpec("fit needs --sequence, --counts or --fixture")


def run_simulate(args: argparse.Namespace, settings: Settings) -> int:
    config = build_run_config(args)
    chain = cmd_simulate(config, args.output)
    if not (args.output or config.output):
        print(" ".join(chain.labels()))
    return EXIT_OK


def run_fit(args: argparse.Namespace, settings: Settings) -> int:
    config = build_run_config(args)
    if not args.config:
        config = config.model_copy(update={"fit": settings.inference.fit_options()})
    counts = _load_counts(args, config)
    doc = cmd_fit(counts, config)
    if args.json:
        write_json(args.json, doc)
    print(json.dumps(doc, indent=2) if args.json_stdout else format_table([doc]))
    if not doc["converged"]:
        print(
            f"fit did not converge: gradient {doc['gradient_norm']:.3g}",
            file=sys.stderr,
        )
        return EXIT_CONVERGENCE
    return EXIT_OK


def run_avar(args: argparse.Namespace, settings: Settings) -> int:
    rows = cmd_avar(build_run_config(args))
    if args.output:
        write_csv(args.output, rows)
    print(format_table(rows))
    return EXIT_OK


def run_sweep(args: argparse.Namespace, settings: Settings) -> int:
    rows = cmd_sweep(args.kind, build_run_config(args))
    if args.output:
        write_csv(args.output, rows)
    print(format_table(rows))
    return EXIT_OK


def run_reproduce(args: argparse.Namespace, settings: Settings) -> int:
    seed = args.seed if args.seed is not None else settings.simulation.seed
    workers = args.workers or settings.simulation.workers
    paths = cmd_reproduce(
        args.table,
        args.outdir,
        args.reps,
        seed,
        workers,
        monte_carlo=not args.no_monte_carlo,
        max_failure_rate=settings.simulation.max_failure_rate,
    )
    for path in paths:
        print(path)
    return EXIT_OK


def run_serve(args: argparse.Namespace, settings: Settings) -> int:
    import uvicorn

    host = args.host or settings.server.host
    port = args.port or settings.server.port
    uvicorn.run("src.server:app", host=host, port=port, log_level=settings.logging.level.lower())
    return EXIT_OK


def _model_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="Run configuration (YAML)")
    parser.add_argument("--family", choices=[f.value for f in Family], help="Model family")
    parser.add_argument("--n-states", type=int, help="State count (saturated, equicorrelation)")
    parser.add_argument("--k-states", type=int, help="Reflecting walk state count")
    parser.add_argument("--p-known", help="Known equilibrium for equicorrelation, comma-separated")
    parser.add_argument("--theta", help="Parameter values, comma-separated")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="markov-pql",
        description="ML, pseudo- and quasi-likelihood inference for Markov chains",
    )
    parser.add_argument("--settings", help="Settings file (default config/config.yaml)")
    parser.add_argument("--log-level", help="Override the configured log level")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="Simulate a chain and write it as a sequence file")
    _model_flags(p)
    p.add_argument("--n", type=int, help="Number of transitions")
    p.add_argument("--seed", type=int, help="Random seed")
    p.add_argument("--output", help="Sequence file to write (stdout if omitted)")
    p.set_defaults(handler=run_simulate)

    p = sub.add_parser("fit", help="Fit a model to a sequence, a count matrix or a fixture")
    _model_flags(p)
    p.add_argument("--method", help="ml, qlK or plM")
    source = p.add_mutually_exclusive_group()
    source.add_argument("--sequence", help="Sequence file")
    source.add_argument("--counts", help="Pair-count CSV")
    source.add_argument("--fixture", choices=sorted(FIXTURES), help="Shipped count matrix")
    p.add_argument("--alphabet", choices=[a.value for a in Alphabet], default="integers")
    p.add_argument("--json", help="Write the flat JSON report here")
    p.add_argument("--json-stdout", action="store_true", help="Print JSON instead of a table")
    p.set_defaults(handler=run_fit)

    p = sub.add_parser("avar", help="Limit standard deviations per method at theta")
    _model_flags(p)
    p.add_argument("--methods", help="Comma-separated methods (default ml,ql2,pl)")
    p.add_argument("--output", help="CSV file to write")
    p.set_defaults(handler=run_avar)

    p = sub.add_parser("sweep", help="Efficiency grids, QL order sweeps and least-false curves")
    p.add_argument("kind", choices=sorted(SWEEPS))
    _model_flags(p)
    p.add_argument("--methods", help="Comma-separated methods (default ml,ql2,pl)")
    p.add_argument("--output", help="CSV file to write")
    p.set_defaults(handler=run_sweep)

    p = sub.add_parser("reproduce", help="Regenerate a reference table")
    p.add_argument("table", choices=list(REPRODUCIBLE))
    p.add_argument("--outdir", default="results", help="Output directory")
    p.add_argument("--reps", type=int, default=1000, help="Monte Carlo replications")
    p.add_argument("--seed", type=int, help="Monte Carlo seed (default from settings)")
    p.add_argument("--workers", type=int, help="Monte Carlo worker threads")
    p.add_argument("--no-monte-carlo", action="store_true", help="Skip Monte Carlo columns")
    p.set_defaults(handler=run_reproduce)

    p = sub.add_parser("serve", help="Run the JSON-RPC service")
    p.add_argument("--host", help="Bind address")
    p.add_argument("--port", type=int, help="Port")
    p.set_defaults(handler=run_serve)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        settings = load_settings(args.settings)
        if args.log_level:
            settings.logging.level = args.log_level
        configure_logging(settings)
        logger.info(f"markov-pql {args.command} started")
        code = args.handler(args, settings)
        logger.info(f"markov-pql {args.command} finished with exit code {code}")
        return code
    except MarkovInferenceError as e:
        print(f"error: {e}", file=sys.stderr)
        return exit_code(e)
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
