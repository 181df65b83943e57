"""Command-line verification driver.

Batch-only by design: load a scenario file, run checks, print a report, and
exit 0 when everything passed, 1 when at least one check failed, and 2 when
a check errored or the input was invalid.

Commands:
  check FILE                 run every declared check (optionally filtered)
  validate-theory FILE       validate one theory exhaustively
  compute FILE               run one compute cycle on a validated theory
  check-stack FILE           verify a refinement stack down to its device
  classify FILE              classify a joint system (optionally vs oracle)
  scenarios emit NAME        print a built-in scenario document
  report FILE                re-render a saved JSON report

State literals on the command line: bitstrings are quoted ("01"), tuples are
parenthesized, labels are bare words, integers are bare digits, so the input
pair of machine registers reads as ("01","10","000").
"""

from __future__ import annotations

import argparse
import sys

from .document import emit_scenario, parse_scenario
from .dynamics import TrialSeed
from .errors import ModelError
from .runner import (
    render_report_text,
    report_from_json,
    report_to_json,
    report_to_text,
    run_checks,
)
from .scenarios import BUILTIN_SCENARIOS, CheckSpec
from .spaces import METRICS


def parse_state_literal(text: str):
    """Parse a command-line state literal into a raw canonical value."""
    tokens = _tokenize(text)
    value, rest = _parse_tokens(tokens)
    if rest:
        raise ValueError(f"trailing input in state literal: {rest!r}")
    return value


def _tokenize(text: str) -> list[str]:
    tokens: list[str] = []
    i = 0
    while i < len(text):
        c = text[i]
        if c.isspace():
            i += 1
        elif c in "(),":
            tokens.append(c)
            i += 1
        elif c == '"':
            j = text.find('"', i + 1)
            if j < 0:
                raise ValueError("unterminated quote in state literal")
            tokens.append(text[i : j + 1])
            i = j + 1
        else:
            j = i
            while j < len(text) and text[j] not in '(),"' and not text[j].isspace():
                j += 1
            tokens.append(text[i:j])
            i = j
    return tokens


def _parse_tokens(tokens: list[str]):
    if not tokens:
        raise ValueError("empty state literal")
    head, rest = tokens[0], tokens[1:]
    if head == "(":
        items = []
        while True:
            value, rest = _parse_tokens(rest)
            items.append(value)
            if not rest:
                raise ValueError("unterminated tuple in state literal")
            sep, rest = rest[0], rest[1:]
            if sep == ")":
                return tuple(items), rest
            if sep != ",":
                raise ValueError(f"expected ',' or ')' in state literal, got {sep!r}")
    if head.startswith('"'):
        return head[1:-1], rest
    try:
        return int(head), rest
    except ValueError:
        pass
    try:
        return float(head), rest
    except ValueError:
        pass
    return head, rest


def _load_bundle(path: str):
    with open(path, "r", encoding="utf-8") as f:
        return parse_scenario(f.read())


def _print_report(report, fmt: str) -> int:
    if fmt == "json":
        sys.stdout.write(report_to_json(report))
    else:
        sys.stdout.write(report_to_text(report))
    return report.exit_code


def _common_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--seed", type=int, default=0, help="trial seed (default 0)")
    sub.add_argument("--format", choices=("text", "json"), default="text")


def _tolerance_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--epsilon", type=float, default=None, help="tolerance override")
    sub.add_argument("--trials", type=int, default=None, help="trial-count override")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="abrep", description=__doc__.split("\n")[0])
    commands = parser.add_subparsers(dest="command", required=True)

    check = commands.add_parser("check", help="run every declared check")
    check.add_argument("file")
    check.add_argument("--filter", default=None, help="glob pattern on check names")
    _tolerance_flags(check)
    _common_flags(check)

    validate = commands.add_parser("validate-theory", help="validate one theory")
    validate.add_argument("file")
    validate.add_argument("--theory", required=True)
    validate.add_argument("--metric", choices=sorted(METRICS), default="discrete")
    validate.add_argument("--required-success", type=float, default=1.0)
    _tolerance_flags(validate)
    _common_flags(validate)

    compute = commands.add_parser("compute", help="run one compute cycle")
    compute.add_argument("file")
    compute.add_argument("--theory", required=True)
    compute.add_argument("--input", required=True, help="abstract state literal")
    compute.add_argument("--prediction", default=None, help="program name (default: first)")
    compute.add_argument("--expect", default=None, help="expected output literal")
    _common_flags(compute)

    stack = commands.add_parser("check-stack", help="verify a stack down to the device")
    stack.add_argument("file")
    stack.add_argument("--stack", required=True)
    stack.add_argument("--metric", choices=sorted(METRICS), default="discrete")
    _tolerance_flags(stack)
    _common_flags(stack)

    classify = commands.add_parser("classify", help="classify a joint system")
    classify.add_argument("file")
    classify.add_argument("--joint", required=True)
    classify.add_argument("--oracle", action="store_true", help="compare with the brute-force oracle")
    _common_flags(classify)

    scen = commands.add_parser("scenarios", help="built-in scenarios")
    scen_sub = scen.add_subparsers(dest="scenario_command", required=True)
    emit = scen_sub.add_parser("emit", help="print a built-in scenario document")
    emit.add_argument("name", help=f"one of: {', '.join(sorted(BUILTIN_SCENARIOS))}")

    report = commands.add_parser("report", help="re-render a saved JSON report")
    report.add_argument("file")
    report.add_argument("--format", choices=("text", "json"), default="text")

    return parser


def _override_checks(bundle, epsilon, trials):
    from dataclasses import replace

    if epsilon is None and trials is None:
        return bundle.checks
    out = []
    for check in bundle.checks:
        if epsilon is not None:
            check = replace(check, epsilon=epsilon)
        if trials is not None:
            check = replace(check, trials=trials)
        out.append(check)
    return tuple(out)


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _run(args)
    except ModelError as err:
        print(f"error: {type(err).__name__}: {err}", file=sys.stderr)
        return 2
    except OSError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except ValueError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2


def _run(args: argparse.Namespace) -> int:
    if args.command == "scenarios":
        builder = BUILTIN_SCENARIOS.get(args.name)
        if builder is None:
            print(
                f"error: unknown scenario {args.name!r};"
                f" available: {', '.join(sorted(BUILTIN_SCENARIOS))}",
                file=sys.stderr,
            )
            return 2
        sys.stdout.write(emit_scenario(builder()))
        return 0

    if args.command == "report":
        with open(args.file, "r", encoding="utf-8") as f:
            data = report_from_json(f.read())
        if args.format == "json":
            import json

            sys.stdout.write(json.dumps(data, indent=2, sort_keys=True) + "\n")
        else:
            sys.stdout.write(render_report_text(data))
        return 0

    bundle = _load_bundle(args.file)
    seed = TrialSeed(args.seed)

    if args.command == "check":
        checks = _override_checks(bundle, args.epsilon, args.trials)
        report = run_checks(bundle, seed, name_filter=args.filter, checks=checks)
        return _print_report(report, args.format)

    if args.command == "validate-theory":
        check = CheckSpec(
            name=f"validate:{args.theory}",
            kind="validate-theory",
            theory=args.theory,
            epsilon=args.epsilon if args.epsilon is not None else 0.0,
            metric=args.metric,
            trials=args.trials if args.trials is not None else 1,
            required_success=args.required_success,
        )
        report = run_checks(bundle, seed, checks=(check,))
        return _print_report(report, args.format)

    if args.command == "compute":
        check = CheckSpec(
            name=f"compute:{args.theory}",
            kind="compute",
            theory=args.theory,
            prediction=args.prediction,
            input=parse_state_literal(args.input),
            expect=parse_state_literal(args.expect) if args.expect else None,
        )
        validate = CheckSpec(
            name=f"validate:{args.theory}", kind="validate-theory", theory=args.theory
        )
        report = run_checks(bundle, seed, checks=(validate, check))
        return _print_report(report, args.format)

    if args.command == "check-stack":
        check = CheckSpec(
            name=f"stack:{args.stack}",
            kind="stack",
            stack=args.stack,
            epsilon=args.epsilon if args.epsilon is not None else 0.0,
            metric=args.metric,
            trials=args.trials if args.trials is not None else 1,
        )
        report = run_checks(bundle, seed, checks=(check,))
        return _print_report(report, args.format)

    if args.command == "classify":
        check = CheckSpec(
            name=f"classify:{args.joint}",
            kind="classify",
            joint=args.joint,
            oracle=args.oracle,
        )
        report = run_checks(bundle, seed, checks=(check,))
        return _print_report(report, args.format)

    raise AssertionError(f"unhandled command {args.command!r}")


if __name__ == "__main__":
    sys.exit(main())
