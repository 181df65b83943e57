"""Declarative modeling and verification of simulated physical computers.

Declare device substrates, abstract programs, and the representation
relations that connect them; then check commuting diagrams within a
tolerance, validate device theories, run compute cycles, verify refinement
stacks down to the device, and classify composed systems as hybrid or
heterotic.
"""

from .composition import (
    Component,
    CompositionClass,
    FactorizationWitness,
    HETEROTIC,
    HYBRID,
    JointSystem,
    brute_force_classify,
    classify,
    componentwise_joint,
    compose_parallel,
    compose_sequential,
    factorize_dynamics,
    factorize_representation,
)
from .document import emit_scenario, parse_scenario
from .dynamics import (
    AbstractDynamics,
    BinarySumUpdate,
    BuiltinRule,
    ChainRule,
    ConstantUpdate,
    CoordinateFlipNoise,
    CoordinateUpdateRule,
    LabelFlipNoise,
    PhysicalChainRule,
    PhysicalDynamics,
    TableRule,
    TrialSeed,
    compose_dynamics,
    derive_seed,
    evolve_abstract,
    evolve_physical,
    identity_dynamics,
)
from .errors import (
    DeclarationError,
    DuplicateIdentifier,
    EmptyDomain,
    MetricMismatch,
    MissingInstantiation,
    ModelError,
    NotEnumerable,
    NotInstantiable,
    NotProductSpace,
    OutOfDomain,
    ScenarioError,
    ScenarioSyntaxError,
    SpaceMismatch,
    TheoryNotValidated,
    TooLarge,
    UnknownReference,
    VersionUnsupported,
)
from .refinement import (
    LayerReport,
    RefinementLayer,
    RefinementStack,
    SimulationRelation,
    StackReport,
    check_layer,
    check_stack_to_device,
)
from .relations import (
    InstantiationProcedure,
    LookupRule,
    Prediction,
    RepresentationRelation,
    RepresentationalTriple,
    Theory,
    ThresholdRule,
    TupleWiseRule,
    Validity,
    instantiate,
    make_triple,
    represent,
)
from .runner import RunReport, report_to_json, report_to_text, run_checks
from .scenarios import (
    BUILTIN_SCENARIOS,
    CheckSpec,
    ScenarioBundle,
    build_refinement_stack,
    build_social_machine,
    build_swap_device,
    build_voltage_adder,
    build_xor_joint,
)
from .spaces import (
    ABSOLUTE_DIFFERENCE,
    AbstractSpace,
    AbstractState,
    BitSpace,
    DISCRETE,
    HAMMING,
    IntSpace,
    LabelSpace,
    MAX_COORDINATE,
    METRICS,
    Metric,
    PhysicalLabelSpace,
    PhysicalSpace,
    PhysicalState,
    PhysicalTupleSpace,
    RealVectorSpace,
    TupleSpace,
    cardinality,
    contains,
    distance,
    enumerate_states,
    enumerate_values,
)
from .verification import (
    CommutationReport,
    ComputeResult,
    DiagramSpec,
    ProblemEmbedding,
    ValidityReport,
    check_commutation,
    check_history,
    embed_problem,
    run_compute_cycle,
    run_experiment,
    validate_theory,
)

__version__ = "0.1.0"
