"""Declared-check execution and run reports.

Checks run in declaration order; each check's randomness is derived from the
run seed and the check's declaration index, so filtering does not perturb
the checks that do run, and identical (bundle, seed) pairs produce
byte-identical machine-readable reports. A failing check marks the run
failed; a check that cannot run at all (bad reference, precondition error)
marks it errored, without stopping the remaining checks.

Theories validated by a ``validate-theory`` check stay validated for the
checks that follow it, which is how a scenario earns the right to run
compute cycles.
"""

from __future__ import annotations

import fnmatch
import json
from dataclasses import dataclass
from typing import Any

from .composition import brute_force_classify, classify
from .document import value_to_json
from .dynamics import TrialSeed, derive_seed
from .errors import ModelError, UnknownReference
from .refinement import check_layer, check_stack_to_device
from .relations import Theory, instantiate
from .scenarios import CheckSpec, ScenarioBundle
from .spaces import METRICS, AbstractState, PhysicalState
from .verification import (
    CommutationReport,
    DiagramSpec,
    check_commutation,
    check_history,
    run_compute_cycle,
    run_experiment,
    validate_theory,
)

PASS = "pass"
FAIL = "fail"
ERROR = "error"

EXIT_CODES = {PASS: 0, FAIL: 1, ERROR: 2}


@dataclass(frozen=True)
class CheckResult:
    name: str
    kind: str
    status: str
    detail: dict
    error: dict | None = None


@dataclass(frozen=True)
class RunReport:
    format_version: str
    seed: int
    results: tuple[CheckResult, ...]
    coverage: dict
    overall: str

    @property
    def exit_code(self) -> int:
        return EXIT_CODES[self.overall]


def _state_json(state: AbstractState | PhysicalState) -> dict:
    return {"space": state.space.id, "value": value_to_json(state.space, state.value)}


def _commutation_detail(report: CommutationReport) -> dict:
    return {
        "initial": _state_json(report.initial_physical),
        "expected": _state_json(report.upper_path_result),
        "distances": list(report.distances),
        "success_fraction": report.success_fraction,
        "epsilon": report.epsilon,
        "required_success": report.required_success,
        "passed": report.passed,
    }


class _Run:
    def __init__(self, bundle: ScenarioBundle, seed: TrialSeed):
        self.bundle = bundle
        self.seed = seed
        self.theories: dict[str, Theory] = {t.id: t for t in bundle.theories}
        self.coverage: dict[str, int] = {}

    def _count_coverage(self, theory_id: str, cells: int) -> None:
        self.coverage[theory_id] = self.coverage.get(theory_id, 0) + cells

    def _theory(self, check: CheckSpec) -> Theory:
        if check.theory is None or check.theory not in self.theories:
            raise UnknownReference(f"check {check.name!r}", str(check.theory))
        return self.theories[check.theory]

    def _stack(self, check: CheckSpec):
        try:
            return self.bundle.stack(check.stack)
        except KeyError:
            raise UnknownReference(f"check {check.name!r}", str(check.stack)) from None

    def _joint(self, check: CheckSpec):
        try:
            return self.bundle.joint(check.joint)
        except KeyError:
            raise UnknownReference(f"check {check.name!r}", str(check.joint)) from None

    def _diagram_spec(self, theory: Theory, check: CheckSpec) -> DiagramSpec:
        name = check.prediction or theory.predictions[0].name
        try:
            prediction = theory.prediction(name)
        except KeyError:
            raise UnknownReference(f"check {check.name!r}", name) from None
        return DiagramSpec(
            theory=theory,
            abstract_dynamics=prediction.abstract,
            physical_dynamics=prediction.physical,
            epsilon=check.epsilon,
            metric=METRICS[check.metric],
            trials=check.trials,
            required_success=check.required_success,
        )

    def _initial_state(self, theory: Theory, check: CheckSpec) -> PhysicalState:
        relation = theory.representation
        if check.input is not None:
            return instantiate(theory, AbstractState(relation.codomain, check.input))
        if check.state is not None:
            return PhysicalState(relation.domain, check.state)
        raise UnknownReference(f"check {check.name!r}", "<state or input>")

    def execute(self, check: CheckSpec, seed: TrialSeed) -> CheckResult:
        try:
            status, detail = self._dispatch(check, seed)
            return CheckResult(check.name, check.kind, status, detail)
        except ModelError as err:
            return CheckResult(
                check.name,
                check.kind,
                ERROR,
                {},
                {"type": type(err).__name__, "message": str(err)},
            )

    def _dispatch(self, check: CheckSpec, seed: TrialSeed) -> tuple[str, dict]:
        kind = check.kind
        if kind in ("commutation", "experiment"):
            theory = self._theory(check)
            spec = self._diagram_spec(theory, check)
            state = self._initial_state(theory, check)
            if kind == "experiment":
                report = run_experiment(theory, state, spec, seed)
            else:
                report = check_commutation(spec, state, seed)
            self._count_coverage(theory.id, 1)
            return (PASS if report.passed else FAIL), _commutation_detail(report)
        if kind == "history":
            theory = self._theory(check)
            spec = self._diagram_spec(theory, check)
            state = AbstractState(theory.representation.codomain, check.input)
            report = check_history(spec, state, METRICS[check.physical_metric], seed)
            return (PASS if report.passed else FAIL), _commutation_detail(report)
        if kind == "validate-theory":
            theory = self._theory(check)
            graded, evidence = validate_theory(
                theory,
                check.epsilon,
                METRICS[check.metric],
                check.trials,
                check.required_success,
                seed,
            )
            self.theories[theory.id] = graded
            self._count_coverage(theory.id, evidence.coverage)
            failing = [
                {"state": _state_json(cell.state), "prediction": cell.prediction}
                for cell in evidence.cells
                if not cell.report.passed
            ]
            detail = {
                "validity": graded.validity.status,
                "coverage": evidence.coverage,
                "failing_cells": failing,
            }
            return (PASS if evidence.all_passed else FAIL), detail
        if kind == "compute":
            theory = self._theory(check)
            program = check.prediction or theory.predictions[0].name
            try:
                prediction = theory.prediction(program)
            except KeyError:
                raise UnknownReference(f"check {check.name!r}", program) from None
            state = AbstractState(theory.representation.codomain, check.input)
            result = run_compute_cycle(theory, state, program, prediction.physical, seed)
            detail = {
                "input": _state_json(result.input),
                "output": _state_json(result.output),
                "program": result.program,
            }
            if check.expect is not None:
                detail["expected"] = value_to_json(
                    theory.representation.codomain, check.expect
                )
                ok = result.output.value == check.expect
            else:
                ok = True
            return (PASS if ok else FAIL), detail
        if kind == "layer":
            stack = self._stack(check)
            relation = next(
                (r for r in stack.relations if r.id == check.relation), None
            )
            if relation is None:
                raise UnknownReference(f"check {check.name!r}", str(check.relation))
            report = check_layer(relation, check.epsilon, METRICS[check.metric])
            failing = [
                {
                    "state": _state_json(e.state),
                    "via_upper": _state_json(e.mapped_after_upper),
                    "via_lower": _state_json(e.lower_after_mapped),
                    "distance": e.distance,
                }
                for e in report.entries
                if not e.passed
            ]
            detail = {"states": len(report.entries), "failing": failing}
            return (PASS if report.passed else FAIL), detail
        if kind == "stack":
            stack = self._stack(check)
            report = check_stack_to_device(
                stack,
                check.epsilon,
                METRICS[check.metric],
                seed,
                trials=check.trials,
                required_success=check.required_success,
            )
            self._count_coverage(stack.theory.id, len(report.device_entries))
            detail = {
                "layers": {
                    r.relation_id: r.passed for r in report.layer_reports
                },
                "device_states": len(report.device_entries),
                "device_failures": [
                    _state_json(e.state)
                    for e in report.device_entries
                    if not e.report.passed
                ],
            }
            return (PASS if report.passed else FAIL), detail
        if kind == "classify":
            joint = self._joint(check)
            decision = classify(joint)
            detail: dict[str, Any] = {
                "class": decision.value,
                "witness": _witness_json(joint, decision.witness),
            }
            ok = check.expect_class is None or decision.value == check.expect_class
            if check.oracle:
                oracle_decision = brute_force_classify(joint)
                detail["oracle_class"] = oracle_decision.value
                detail["oracle_agrees"] = oracle_decision.value == decision.value
                ok = ok and detail["oracle_agrees"]
            return (PASS if ok else FAIL), detail
        raise UnknownReference(f"check {check.name!r}", kind)


def _witness_json(joint, witness) -> dict:
    out: dict[str, Any] = {"representation_factors": None, "dynamics_factors": None}
    if witness.representation_factors is not None:
        fmap, gmap = witness.representation_factors
        left_space = joint.left.theory.representation.domain
        right_space = joint.right.theory.representation.domain
        out["representation_factors"] = {
            "left": [
                [value_to_json(left_space, k), value_to_json(v.space, v.value)]
                for k, v in fmap.items()
            ],
            "right": [
                [value_to_json(right_space, k), value_to_json(v.space, v.value)]
                for k, v in gmap.items()
            ],
        }
    if witness.dynamics_factors is not None:
        space = joint.joint_dynamics.space
        space_a, space_b = space.components
        fmap, gmap = witness.dynamics_factors
        out["dynamics_factors"] = {
            "left": [
                [value_to_json(space_a, k), value_to_json(space_a, v)]
                for k, v in fmap.items()
            ],
            "right": [
                [value_to_json(space_b, k), value_to_json(space_b, v)]
                for k, v in gmap.items()
            ],
        }
    return out


def run_checks(
    bundle: ScenarioBundle,
    seed: TrialSeed = TrialSeed(0),
    name_filter: str | None = None,
    checks: tuple[CheckSpec, ...] | None = None,
) -> RunReport:
    """Execute declared checks (or an explicit list) and assemble the report.

    ``name_filter`` is a glob pattern on check names; filtered runs report
    exactly the matching subset, in declaration order.
    """
    run = _Run(bundle, seed)
    selected = []
    source = bundle.checks if checks is None else checks
    for index, check in enumerate(source):
        if name_filter is not None and not fnmatch.fnmatch(check.name, name_filter):
            continue
        selected.append(run.execute(check, derive_seed(seed, index)))
    if any(r.status == ERROR for r in selected):
        overall = ERROR
    elif any(r.status == FAIL for r in selected):
        overall = FAIL
    else:
        overall = PASS
    return RunReport(
        format_version=bundle.format_version,
        seed=seed.value,
        results=tuple(selected),
        coverage=dict(sorted(run.coverage.items())),
        overall=overall,
    )


def report_to_dict(report: RunReport) -> dict:
    counts = {
        "total": len(report.results),
        "passed": sum(1 for r in report.results if r.status == PASS),
        "failed": sum(1 for r in report.results if r.status == FAIL),
        "errors": sum(1 for r in report.results if r.status == ERROR),
    }
    return {
        "format_version": report.format_version,
        "seed": report.seed,
        "overall": report.overall,
        "summary": counts,
        "coverage": report.coverage,
        "checks": [
            {
                "name": r.name,
                "kind": r.kind,
                "status": r.status,
                "detail": r.detail,
                "error": r.error,
            }
            for r in report.results
        ],
    }


def report_to_json(report: RunReport) -> str:
    """Canonical machine-readable serialization; byte-stable per (bundle, seed)."""
    return json.dumps(report_to_dict(report), indent=2, sort_keys=True) + "\n"


def report_from_json(text: str) -> dict:
    return json.loads(text)


def render_report_text(data: dict) -> str:
    """Human-readable rendering of a report dictionary."""
    lines = []
    for check in data["checks"]:
        line = f"{check['status'].upper():5s} {check['name']} ({check['kind']})"
        if check["status"] == ERROR and check.get("error"):
            line += f": {check['error']['type']}: {check['error']['message']}"
        elif check["kind"] == "classify" and check["status"] != ERROR:
            line += f": {check['detail'].get('class')}"
        lines.append(line)
    summary = data["summary"]
    lines.append(
        f"overall: {data['overall'].upper()}"
        f" ({summary['passed']}/{summary['total']} passed,"
        f" {summary['failed']} failed, {summary['errors']} errors;"
        f" seed {data['seed']})"
    )
    return "\n".join(lines) + "\n"


def report_to_text(report: RunReport) -> str:
    return render_report_text(report_to_dict(report))
