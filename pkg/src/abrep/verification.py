"""Commutation checks, theory validation, and the compute cycle.

The central object is the square built from one representation relation, a
program, and a device update. Its upper path represents first and then runs
the program; its lower path runs the device and represents the outcome. The
square commutes when the two abstract endpoints agree to within a tolerance
under a chosen metric. For stochastic devices the lower path is sampled over
seeded trials and the square passes when enough trials land inside the
tolerance.

Everything here is pure given the seeds: batch validation visits its cells
in a canonical order, so reports are deterministic however the work is
scheduled.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Mapping

from .dynamics import (
    AbstractDynamics,
    PhysicalDynamics,
    TrialSeed,
    derive_seed,
    evolve_abstract,
    evolve_physical,
)
from .errors import DeclarationError, EmptyDomain, OutOfDomain, TheoryNotValidated, UnknownReference
from .relations import (
    INVALID,
    VALID,
    Theory,
    Validity,
    instantiate,
    represent,
)
from .spaces import (
    AbstractSpace,
    AbstractState,
    Metric,
    PhysicalState,
    Value,
    contains,
    distance,
)


@dataclass(frozen=True)
class DiagramSpec:
    """Everything needed to test one commuting square.

    ``epsilon`` is the tolerance on the abstract endpoint distance,
    ``trials`` the number of seeded device runs, and ``required_success``
    the fraction of trials that must land within tolerance.
    """

    theory: Theory
    abstract_dynamics: AbstractDynamics
    physical_dynamics: PhysicalDynamics
    epsilon: float = 0.0
    metric: Metric = Metric("discrete")
    trials: int = 1
    required_success: float = 1.0

    def __post_init__(self):
        if self.epsilon < 0:
            raise DeclarationError("epsilon must be non-negative")
        if self.trials < 1:
            raise DeclarationError("at least one trial is required")
        if not (0.0 < self.required_success <= 1.0):
            raise DeclarationError("required success must lie in (0, 1]")


@dataclass(frozen=True)
class CommutationReport:
    """Both paths of one square, per-trial distances, and the verdict.

    A trial succeeds when its distance is at most epsilon; the square passes
    when the success fraction reaches the required fraction. For history
    checks the endpoints are physical rather than abstract states.
    """

    initial_physical: PhysicalState
    upper_path_result: AbstractState | PhysicalState
    lower_path_results: tuple[AbstractState | PhysicalState, ...]
    distances: tuple[float, ...]
    success_fraction: float
    passed: bool
    epsilon: float
    required_success: float


def _verdict(distances: list[float], epsilon: float, required: float) -> tuple[float, bool]:
    successes = sum(1 for d in distances if d <= epsilon)
    fraction = successes / len(distances)
    return fraction, fraction >= required


def check_commutation(
    spec: DiagramSpec, p: PhysicalState, base_seed: TrialSeed
) -> CommutationReport:
    """Test the square at configuration ``p`` in the prediction direction.

    Representing both ends and comparing abstractly is the scientific use of
    the theory: the program's answer is the prediction the device must hit.
    """
    if p not in spec.theory.domain:
        raise OutOfDomain(
            f"configuration is outside the declared domain of theory {spec.theory.id!r}"
        )
    relation = spec.theory.representation
    upper = evolve_abstract(spec.abstract_dynamics, represent(relation, p))
    lowers: list[AbstractState] = []
    distances: list[float] = []
    for k in range(spec.trials):
        evolved = evolve_physical(spec.physical_dynamics, p, derive_seed(base_seed, k))
        outcome = represent(relation, evolved)
        lowers.append(outcome)
        distances.append(distance(spec.metric, outcome, upper))
    fraction, passed = _verdict(distances, spec.epsilon, spec.required_success)
    return CommutationReport(
        initial_physical=p,
        upper_path_result=upper,
        lower_path_results=tuple(lowers),
        distances=tuple(distances),
        success_fraction=fraction,
        passed=passed,
        epsilon=spec.epsilon,
        required_success=spec.required_success,
    )


def check_history(
    spec: DiagramSpec,
    m: AbstractState,
    physical_metric: Metric,
    base_seed: TrialSeed,
) -> CommutationReport:
    """Test the square at abstract state ``m`` in the engineering direction.

    Both paths end in the physical domain: prepare-then-evolve must land on
    the same configuration as evolve-then-prepare, measured by a metric on
    physical states. This is the technology use of the theory.
    """
    theory = spec.theory
    start = instantiate(theory, m)
    target = instantiate(theory, evolve_abstract(spec.abstract_dynamics, m))
    lowers: list[PhysicalState] = []
    distances: list[float] = []
    for k in range(spec.trials):
        evolved = evolve_physical(spec.physical_dynamics, start, derive_seed(base_seed, k))
        lowers.append(evolved)
        distances.append(distance(physical_metric, evolved, target))
    fraction, passed = _verdict(distances, spec.epsilon, spec.required_success)
    return CommutationReport(
        initial_physical=start,
        upper_path_result=target,
        lower_path_results=tuple(lowers),
        distances=tuple(distances),
        success_fraction=fraction,
        passed=passed,
        epsilon=spec.epsilon,
        required_success=spec.required_success,
    )


@dataclass(frozen=True)
class ValidityCell:
    """One (domain state, prediction) square inside a validation run."""

    state: PhysicalState
    prediction: str
    report: CommutationReport


@dataclass(frozen=True)
class ValidityReport:
    """Evidence from exhaustively checking the declared validation grid."""

    theory_id: str
    cells: tuple[ValidityCell, ...]
    all_passed: bool
    coverage: int


def validate_theory(
    theory: Theory,
    epsilon: float,
    metric: Metric,
    trials: int,
    required_success: float,
    base_seed: TrialSeed,
) -> tuple[Theory, ValidityReport]:
    """Check every (domain state, prediction) square and grade the theory.

    Returns a new Theory whose validity records the evidence; the input
    value is left untouched. Validity is relative to exactly this grid:
    coverage is reported, extrapolation is never assumed.
    """
    if not theory.domain:
        raise EmptyDomain(f"theory {theory.id!r} declares no domain states")
    if not theory.predictions:
        raise EmptyDomain(f"theory {theory.id!r} declares no predictions")
    cells: list[ValidityCell] = []
    for si, state in enumerate(theory.domain):
        for pi, pred in enumerate(theory.predictions):
            spec = DiagramSpec(
                theory=theory,
                abstract_dynamics=pred.abstract,
                physical_dynamics=pred.physical,
                epsilon=epsilon,
                metric=metric,
                trials=trials,
                required_success=required_success,
            )
            report = check_commutation(spec, state, derive_seed(base_seed, si, pi))
            cells.append(ValidityCell(state, pred.name, report))
    all_passed = all(cell.report.passed for cell in cells)
    evidence = ValidityReport(
        theory_id=theory.id,
        cells=tuple(cells),
        all_passed=all_passed,
        coverage=len(cells),
    )
    graded = replace(
        theory, validity=Validity(VALID if all_passed else INVALID, evidence)
    )
    return graded, evidence


@dataclass(frozen=True)
class ProblemEmbedding:
    """A total map taking problem statements to machine input states."""

    id: str
    problem_space: AbstractSpace
    machine_space: AbstractSpace
    entries: Mapping[Value, Value]

    def __post_init__(self):
        from .spaces import enumerate_values, is_finite

        if not is_finite(self.problem_space):
            raise DeclarationError(
                f"embedding {self.id!r}: problem space must be finite"
            )
        seen = 0
        for value in enumerate_values(self.problem_space):
            if value not in self.entries:
                raise DeclarationError(f"embedding {self.id!r}: no image for {value!r}")
            if not contains(self.machine_space, self.entries[value]):
                raise DeclarationError(
                    f"embedding {self.id!r}: image of {value!r} leaves the machine space"
                )
            seen += 1
        if len(self.entries) != seen:
            raise DeclarationError(f"embedding {self.id!r}: extraneous table keys")


def embed_problem(d: ProblemEmbedding, m_s: AbstractState) -> AbstractState:
    """Machine input state for the problem statement ``m_s``."""
    if not contains(d.problem_space, m_s):
        raise OutOfDomain(f"state is not in the problem space of embedding {d.id!r}")
    return AbstractState(d.machine_space, d.entries[m_s.value])


@dataclass(frozen=True)
class TraceStep:
    stage: str
    state: AbstractState | PhysicalState


@dataclass(frozen=True)
class ComputeResult:
    """Record of one compute cycle: encode, evolve, decode."""

    input: AbstractState
    prepared: PhysicalState
    final_physical: PhysicalState
    output: AbstractState
    program: str
    trace: tuple[TraceStep, ...]


def run_compute_cycle(
    theory: Theory,
    input_state: AbstractState,
    program: str,
    h: PhysicalDynamics,
    seed: TrialSeed,
) -> ComputeResult:
    """Use the device to predict the named program's outcome on ``input_state``.

    The program itself is never executed: the input is encoded into the
    device, the device evolves, and the result is decoded. A theory that has
    not been validated cannot be used this way.
    """
    if not theory.is_valid:
        raise TheoryNotValidated(
            f"theory {theory.id!r} has validity {theory.validity.status!r};"
            " validate it before computing"
        )
    try:
        theory.prediction(program)
    except KeyError:
        raise UnknownReference(f"theory {theory.id!r}", program) from None
    prepared = instantiate(theory, input_state)
    final = evolve_physical(h, prepared, seed)
    output = represent(theory.representation, final)
    trace = (
        TraceStep("input", input_state),
        TraceStep("prepared", prepared),
        TraceStep("evolved", final),
        TraceStep("output", output),
    )
    return ComputeResult(
        input=input_state,
        prepared=prepared,
        final_physical=final,
        output=output,
        program=program,
        trace=trace,
    )


def run_experiment(
    theory: Theory, p0: PhysicalState, spec: DiagramSpec, base_seed: TrialSeed
) -> CommutationReport:
    """Run one controlled experiment on the device.

    The computation is exactly a commutation check; the difference is
    bookkeeping, since an experiment's report is eligible as evidence toward
    the theory's coverage.
    """
    if spec.theory.id != theory.id:
        raise DeclarationError(
            "experiment spec was built for a different theory than the one named"
        )
    return check_commutation(spec, p0, base_seed)
