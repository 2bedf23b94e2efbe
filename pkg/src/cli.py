"""
Command-line interface: eval, fuzz, demo and version subcommands.

Exit codes: 0 success, 1 violations found, 2 input error.
"""

import argparse
import logging
import sys
from typing import Any, Dict, List, Optional

import pandas as pd
from pydantic import ValidationError

from src import __version__
from src.campaign import CampaignConfig, run_campaign
from src.demos import DEMO_CASES, run_demo
from src.exceptions import UncertaintyError, UnknownRelationError
from src.problem_io import dumps_report, load_problem, save_report
from src.quantum_model import center, moment_matrices
from src.relations import BLOCK_RELATIONS, DEFAULT_TOL, RELATION_IDS, RelationEvaluator
from src.sampling import StateKind

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_VIOLATIONS = 1
EXIT_INPUT_ERROR = 2


def parse_relations(value: Optional[str]) -> Optional[List[str]]:
    """'all' or a comma-separated list of relation ids."""
    if value is None:
        return None
    if value.strip() == "all":
        return list(RELATION_IDS)
    names = [name.strip() for name in value.split(",") if name.strip()]
    unknown = [name for name in names if name not in RELATION_IDS]
    if unknown or not names:
        raise UnknownRelationError(
            f"Unknown relations {unknown or [value]}; choose from {', '.join(RELATION_IDS)}"
        )
    return names


def parse_int_list(value: Optional[str]) -> Optional[List[int]]:
    if value is None:
        return None
    try:
        return [int(part) for part in value.split(",") if part.strip()]
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got '{value}'") from e


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ur",
        description="Compute and numerically verify uncertainty relations for tuples of observables.",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="Enable debug logging")
    subparsers = parser.add_subparsers(dest="command", required=True)

    eval_parser = subparsers.add_parser("eval", help="Evaluate relations on a problem file")
    eval_parser.add_argument("--input", required=True, help="Problem file (JSON)")
    eval_parser.add_argument("--relations", default="all", help="'all' or name,name")
    eval_parser.add_argument("--tol", type=float, default=DEFAULT_TOL, help="Verdict tolerance")
    eval_parser.add_argument("--output", help="Report file (JSON); printed when omitted")

    fuzz_parser = subparsers.add_parser("fuzz", help="Run a seeded verification campaign")
    fuzz_parser.add_argument("--dims", type=parse_int_list, help="Dimensions, e.g. 2,3,4")
    fuzz_parser.add_argument(
        "--num-obs", type=parse_int_list, dest="num_observables", help="Tuple sizes, e.g. 2,3"
    )
    fuzz_parser.add_argument("--trials", type=int, help="Number of trials")
    fuzz_parser.add_argument("--seed", type=int, help="Campaign seed (64-bit unsigned)")
    fuzz_parser.add_argument(
        "--state",
        dest="state_kind",
        choices=[kind.value for kind in StateKind],
        help="Random state kind",
    )
    fuzz_parser.add_argument("--relations", help="'all' or name,name")
    fuzz_parser.add_argument("--tol", type=float, help="Verdict tolerance")
    fuzz_parser.add_argument("--config", help="Campaign config file (JSON); flags override it")
    fuzz_parser.add_argument("--output", help="Report file (JSON); printed when omitted")
    fuzz_parser.add_argument("--csv", help="Per-trial tightness ratios (CSV)")

    demo_parser = subparsers.add_parser("demo", help="Reproduce a named phenomenon")
    demo_parser.add_argument("--case", required=True, choices=list(DEMO_CASES))
    demo_parser.add_argument("--theta", type=float, default=0.0, help="Angle for gram-example")
    demo_parser.add_argument("--seed", type=int, default=0, help="Seed for randomized cases")

    subparsers.add_parser("version", help="Print the version")
    return parser


def cmd_eval(args: argparse.Namespace) -> int:
    relations = parse_relations(args.relations)
    state, observables = load_problem(args.input)
    centered = center(state, observables)
    moments = moment_matrices(state, centered)
    pair = (moments.gram, moments.gram.T)
    evaluator = RelationEvaluator(tol=args.tol)

    results: Dict[str, List[Dict[str, Any]]] = {}
    rows = []
    for relation in relations:
        target = observables if relation in BLOCK_RELATIONS else centered
        reports = evaluator.evaluate(relation, state, target, pair)
        results[relation] = [report.to_dict() for report in reports]
        for report in reports:
            rows.append(
                {
                    "relation": relation,
                    "lhs": report.lhs,
                    "rhs": report.rhs,
                    "margin": report.margin,
                    "satisfied": report.satisfied,
                }
            )

    violations = sum(1 for row in rows if not row["satisfied"])
    report = {
        "config": {"input": str(args.input), "relations": relations, "tol": args.tol},
        "relations": results,
        "violations": violations,
    }
    if rows:
        print(pd.DataFrame(rows).to_string(index=False))
    if args.output:
        save_report(args.output, report)
        logger.info("Report written to %s", args.output)
    else:
        print(dumps_report({**report, "version": "1"}))
    return EXIT_VIOLATIONS if violations else EXIT_OK


def _campaign_config(args: argparse.Namespace) -> CampaignConfig:
    overrides = {
        "dims": args.dims,
        "num_observables": args.num_observables,
        "trials": args.trials,
        "seed": args.seed,
        "state_kind": args.state_kind,
        "relations": parse_relations(args.relations),
        "tol": args.tol,
    }
    if args.config:
        return CampaignConfig.from_file(args.config, **overrides)
    return CampaignConfig(**{k: v for k, v in overrides.items() if v is not None})


def cmd_fuzz(args: argparse.Namespace) -> int:
    config = _campaign_config(args)
    result = run_campaign(config)
    if args.output:
        save_report(args.output, result.to_report())
        logger.info("Report written to %s", args.output)
    else:
        print(dumps_report(result.to_report()))
    if args.csv:
        result.export_tightness_csv(args.csv)
        logger.info("Tightness ratios written to %s", args.csv)
    return EXIT_VIOLATIONS if result.has_violations else EXIT_OK


def cmd_demo(args: argparse.Namespace) -> int:
    print(run_demo(args.case, theta=args.theta, seed=args.seed))
    return EXIT_OK


def cmd_version(args: argparse.Namespace) -> int:
    print(f"uncertainty-relations {__version__}")
    return EXIT_OK


COMMANDS = {
    "eval": cmd_eval,
    "fuzz": cmd_fuzz,
    "demo": cmd_demo,
    "version": cmd_version,
}


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        # argparse exits with 2 on usage errors and 0 on --help
        return int(e.code or 0)

    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(asctime)s - %(levelname)s - %(message)s",
    )
    try:
        return COMMANDS[args.command](args)
    except ValidationError as e:
        print(f"Error: invalid configuration: {e.errors()[0].get('msg')}", file=sys.stderr)
    except (UncertaintyError, ValueError, OSError) as e:
        print(f"Error: {e}", file=sys.stderr)
    return EXIT_INPUT_ERROR


if __name__ == "__main__":
    sys.exit(main())
