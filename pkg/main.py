"""
Main Application Entry Point
Command-line front end of the RCCS equivalence workbench
"""
import sys
import logging
import argparse
from src.config import OUTPUT_FORMATS, RunConfig
from src.cli import (EXIT_QUERY, cmd_check, cmd_diverge, cmd_lts, cmd_minimize, cmd_proptest,
                     cmd_witness, collect_terms, guarded)
from src.errors import QueryError


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        description='RCCS workbench - codivergent branching bisimilarity for randomized CCS',
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  python main.py check -e "mu X.(a + b + tau.X)" -e "mu X.((1/2)tau.(a + tau.X) (+) (1/2)tau.(b + tau.X))"
  python main.py lts -e "mu X. ((1/2)tau.X (+) (1/2)tau.X)" --format dot
  python main.py minimize first.rccs second.rccs
  python main.py witness -e "mu X. ((1/2)tau.a (+) (1/2)tau.X)" --label a --target "0"
  python main.py diverge -e "mu X. (tau.a + tau.X)"
  python main.py proptest --seed 42 --cases 200
        """
    )
    parser.add_argument('--verbose', action='store_true', help='Enable debug logging')

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('inputs', nargs='*', metavar='FILE', help='Files holding one term each')
    common.add_argument('-e', '--expr', action='append', default=[], metavar='TERM',
                        help='Inline term (repeatable; inline terms come before files)')
    common.add_argument('--bound', type=int, help='State bound (default: 10000)')
    common.add_argument('--oracle-bound', type=int, help='Oracle state bound (default: 8, at most 11)')
    common.add_argument('--format', choices=OUTPUT_FORMATS, help='Output format (default: text)')
    common.add_argument('--depth', type=int, help='Tree truncation depth (default: 12)')

    sub = parser.add_subparsers(dest='command', required=True)

    check = sub.add_parser('check', parents=[common], help='Decide equality of two terms')
    check.add_argument('--ccs', action='store_true', help='Use the classical CCS checker')

    sub.add_parser('lts', parents=[common], help='Export the state space of a term')

    minimize = sub.add_parser('minimize', parents=[common], help='Quotient the joint state space of terms')
    minimize.add_argument('--chart', metavar='PNG', help='Save a refinement chart')

    witness = sub.add_parser('witness', parents=[common], help='Render a witness epsilon-tree')
    witness.add_argument('--label', help="Action of an l-transition: a, 'a or tau")
    witness.add_argument('--q', help='Weighted probability of a q-transition, e.g. 1/2')
    witness.add_argument('--target', metavar='TERM', help='A member of the target class')
    witness.add_argument('--divergence', action='store_true', help='Ask for a divergent tree')
    witness.add_argument('--chart', metavar='PNG', help='Save the finite-mass curve')

    sub.add_parser('diverge', parents=[common], help='Does the term have a divergent epsilon-tree?')

    proptest = sub.add_parser('proptest', parents=[common], help='Run the seeded property suite')
    proptest.add_argument('--seed', type=int, help='Generator seed (default: 42)')
    proptest.add_argument('--cases', type=int, help='Number of cases (default: 200)')
    proptest.add_argument('--workers', type=int, help='Worker threads (default: 1)')
    return parser


def _expect(terms, count: int):
    if len(terms) != count:
        raise QueryError(f"expected {count} term(s), got {len(terms)}")
    return terms


@guarded
def dispatch(args: argparse.Namespace):
    """Run one subcommand; returns (exit code, report)"""
    config = RunConfig.from_args(args)
    if args.command == 'proptest':
        return cmd_proptest(config)

    terms = collect_terms(args.inputs, args.expr)
    if args.command == 'check':
        first, second = _expect(terms, 2)
        return cmd_check(first, second, config, ccs=args.ccs)
    if args.command == 'lts':
        return cmd_lts(_expect(terms, 1)[0], config)
    if args.command == 'minimize':
        return cmd_minimize(terms, config, chart=args.chart)
    if args.command == 'witness':
        target = collect_terms([], [args.target])[0] if args.target else None
        return cmd_witness(_expect(terms, 1)[0], config, label=args.label, q=args.q, target=target,
                           divergence=args.divergence, chart=args.chart)
    if args.command == 'diverge':
        return cmd_diverge(_expect(terms, 1)[0], config)
    return EXIT_QUERY, f"unknown command {args.command}\n"


def main(argv=None) -> int:
    """Main application entry point"""
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.verbose:
        logging.basicConfig(level=logging.DEBUG, format='%(levelname)s %(name)s: %(message)s')

    code, report = dispatch(args)
    stream = sys.stderr if report.startswith("error:") else sys.stdout
    stream.write(report)
    return code


if __name__ == "__main__":
    sys.exit(main())
