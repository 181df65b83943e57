"""Scenario documents: parsing, resolution, and emission.

A scenario file is a UTF-8 JSON document with a fixed section order
(spaces, relations, dynamics, theories, embeddings, stacks, compositions,
checks). Identifiers must be declared before they are referenced and are
unique per section. Parsing yields a fully resolved bundle; emission writes
a document that parses back to a structurally equal bundle. Check
declarations keep their object references as identifiers so that a check
naming a missing object degrades to a per-check error at run time instead
of poisoning the whole document.
"""

from __future__ import annotations

import json
from typing import Any

from .composition import Component, JointSystem, componentwise_joint
from .dynamics import (
    AbstractDynamics,
    BUILTIN_NAMES,
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
)
from .errors import (
    DeclarationError,
    DuplicateIdentifier,
    ModelError,
    ScenarioSyntaxError,
    UnknownReference,
    VersionUnsupported,
)
from .refinement import RefinementLayer, RefinementStack, SimulationRelation
from .relations import (
    InstantiationProcedure,
    LookupRule,
    Prediction,
    RepresentationRelation,
    Theory,
    ThresholdRule,
    TupleWiseRule,
)
from .scenarios import CHECK_KINDS, CheckSpec, ScenarioBundle
from .spaces import (
    AbstractSpace,
    BitSpace,
    IntSpace,
    LabelSpace,
    METRICS,
    PhysicalLabelSpace,
    PhysicalSpace,
    PhysicalState,
    PhysicalTupleSpace,
    RealVectorSpace,
    TupleSpace,
    Value,
    enumerate_values,
)
from .verification import ProblemEmbedding

SUPPORTED_VERSIONS = ("1",)

_SECTIONS = (
    "format_version",
    "spaces",
    "relations",
    "dynamics",
    "theories",
    "embeddings",
    "stacks",
    "compositions",
    "checks",
)


def value_to_json(space, value: Value) -> Any:
    """Encode a canonical state value as a JSON value for its space."""
    if isinstance(space, (TupleSpace, PhysicalTupleSpace)):
        return [value_to_json(c, v) for c, v in zip(space.components, value)]
    if isinstance(space, RealVectorSpace):
        return list(value)
    return value


def raw_value(v: Any) -> Any:
    """Normalize a JSON value structurally (arrays become tuples)."""
    if isinstance(v, list):
        return tuple(raw_value(x) for x in v)
    return v


def _expect(obj: Any, path: str, kind: type, what: str) -> Any:
    if not isinstance(obj, kind):
        raise ScenarioSyntaxError(f"{path}: expected {what}")
    return obj


def _get(obj: dict, key: str, path: str) -> Any:
    if not isinstance(obj, dict) or key not in obj:
        raise ScenarioSyntaxError(f"{path}: missing key {key!r}")
    return obj[key]


def _checked(parser, decl, path: str, *args):
    """Run one declaration parser, folding shape errors into diagnostics."""
    try:
        return parser(decl, path, *args)
    except (ScenarioSyntaxError, UnknownReference, DuplicateIdentifier, VersionUnsupported):
        raise
    except DeclarationError as err:
        raise ScenarioSyntaxError(f"{path}: {err}") from err
    except (TypeError, ValueError, AttributeError, KeyError) as err:
        raise ScenarioSyntaxError(f"{path}: malformed declaration ({err})") from err


class _Registry:
    """Scoped identifier table with declare-before-use resolution."""

    def __init__(self):
        self.spaces: dict[str, AbstractSpace | PhysicalSpace] = {}
        self.relations: dict[str, RepresentationRelation] = {}
        self.abstract_dynamics: dict[str, AbstractDynamics] = {}
        self.physical_dynamics: dict[str, PhysicalDynamics] = {}
        self.theories: dict[str, Theory] = {}
        self.embeddings: dict[str, ProblemEmbedding] = {}
        self.stacks: dict[str, RefinementStack] = {}
        self.joints: dict[str, JointSystem] = {}

    def declare(self, table: dict, ident: str, obj: Any, path: str) -> None:
        if ident in table:
            raise DuplicateIdentifier(path, ident)
        table[ident] = obj

    def resolve(self, table: dict, ident: str, path: str) -> Any:
        if not isinstance(ident, str) or ident not in table:
            raise UnknownReference(path, str(ident))
        return table[ident]


def _parse_space(decl: dict, path: str, physical: bool, reg: _Registry):
    ident = _expect(_get(decl, "id", path), f"{path}.id", str, "a string identifier")
    kind = _get(decl, "kind", path)
    try:
        if kind == "labels":
            labels = tuple(_expect(_get(decl, "labels", path), f"{path}.labels", list, "a list"))
            space = PhysicalLabelSpace(ident, labels) if physical else LabelSpace(ident, labels)
        elif kind == "bits" and not physical:
            space = BitSpace(ident, _get(decl, "width", path))
        elif kind == "ints" and not physical:
            space = IntSpace(ident, _get(decl, "lo", path), _get(decl, "hi", path))
        elif kind == "vector" and physical:
            bounds = tuple(
                (float(lo), float(hi)) for lo, hi in _get(decl, "bounds", path)
            )
            space = RealVectorSpace(ident, bounds)
        elif kind == "tuple":
            comps = []
            for i, ref in enumerate(_get(decl, "components", path)):
                comp = reg.resolve(reg.spaces, ref, f"{path}.components[{i}]")
                if physical != isinstance(comp, PhysicalSpace):
                    raise ScenarioSyntaxError(
                        f"{path}.components[{i}]: component is on the wrong side"
                    )
                comps.append(comp)
            cls = PhysicalTupleSpace if physical else TupleSpace
            space = cls(ident, tuple(comps))
        else:
            raise ScenarioSyntaxError(f"{path}.kind: unknown space kind {kind!r}")
    except (TypeError, DeclarationError) as err:
        raise ScenarioSyntaxError(f"{path}: {err}") from err
    reg.declare(reg.spaces, ident, space, path)
    return space


def _state_value(space, encoded: Any, path: str) -> Value:
    from .spaces import normalize_value
    from .errors import OutOfDomain

    try:
        return normalize_value(space, raw_value(encoded))
    except OutOfDomain as err:
        raise ScenarioSyntaxError(f"{path}: {err}") from err


def _parse_entries(entries: Any, key_space, value_space, path: str) -> dict:
    table = {}
    for i, pair in enumerate(_expect(entries, path, list, "a list of pairs")):
        if not (isinstance(pair, list) and len(pair) == 2):
            raise ScenarioSyntaxError(f"{path}[{i}]: expected a [key, value] pair")
        k = _state_value(key_space, pair[0], f"{path}[{i}][0]")
        v = _state_value(value_space, pair[1], f"{path}[{i}][1]")
        table[k] = v
    return table


def _parse_relation(decl: dict, path: str, reg: _Registry) -> RepresentationRelation:
    ident = _get(decl, "id", path)
    domain = reg.resolve(reg.spaces, _get(decl, "domain", path), f"{path}.domain")
    codomain = reg.resolve(reg.spaces, _get(decl, "codomain", path), f"{path}.codomain")
    rule_decl = _get(decl, "rule", path)
    kind = _get(rule_decl, "kind", f"{path}.rule")
    if kind == "lookup":
        rule = LookupRule(
            _parse_entries(_get(rule_decl, "entries", f"{path}.rule"), domain, codomain, f"{path}.rule.entries")
        )
    elif kind == "threshold":
        rule = ThresholdRule(tuple(float(t) for t in _get(rule_decl, "thresholds", f"{path}.rule")))
    elif kind == "tuple-wise":
        parts = tuple(
            reg.resolve(reg.relations, ref, f"{path}.rule.parts[{i}]")
            for i, ref in enumerate(_get(rule_decl, "parts", f"{path}.rule"))
        )
        rule = TupleWiseRule(parts)
    else:
        raise ScenarioSyntaxError(f"{path}.rule.kind: unknown rule kind {kind!r}")
    try:
        relation = RepresentationRelation(ident, domain, codomain, rule)
    except DeclarationError as err:
        raise ScenarioSyntaxError(f"{path}: {err}") from err
    reg.declare(reg.relations, ident, relation, path)
    return relation


def _parse_abstract_dynamics(decl: dict, path: str, reg: _Registry) -> AbstractDynamics:
    ident = _get(decl, "id", path)
    if ident in BUILTIN_NAMES:
        raise ScenarioSyntaxError(f"{path}.id: {ident!r} is a reserved builtin name")
    space = reg.resolve(reg.spaces, _get(decl, "space", path), f"{path}.space")
    rule_decl = _get(decl, "rule", path)
    kind = _get(rule_decl, "kind", f"{path}.rule")
    if kind == "table":
        rule = TableRule(
            _parse_entries(_get(rule_decl, "entries", f"{path}.rule"), space, space, f"{path}.rule.entries")
        )
    elif kind == "builtin":
        rule = BuiltinRule(_get(rule_decl, "name", f"{path}.rule"))
    elif kind == "chain":
        parts = tuple(
            reg.resolve(reg.abstract_dynamics, ref, f"{path}.rule.parts[{i}]")
            for i, ref in enumerate(_get(rule_decl, "parts", f"{path}.rule"))
        )
        rule = ChainRule(parts)
    else:
        raise ScenarioSyntaxError(f"{path}.rule.kind: unknown rule kind {kind!r}")
    try:
        dyn = AbstractDynamics(ident, space, rule)
    except DeclarationError as err:
        raise ScenarioSyntaxError(f"{path}: {err}") from err
    reg.declare(reg.abstract_dynamics, ident, dyn, path)
    return dyn


def _parse_physical_dynamics(decl: dict, path: str, reg: _Registry) -> PhysicalDynamics:
    ident = _get(decl, "id", path)
    if ident in BUILTIN_NAMES:
        raise ScenarioSyntaxError(f"{path}.id: {ident!r} is a reserved builtin name")
    space = reg.resolve(reg.spaces, _get(decl, "space", path), f"{path}.space")
    rule_decl = _get(decl, "rule", path)
    kind = _get(rule_decl, "kind", f"{path}.rule")
    if kind == "table":
        rule = TableRule(
            _parse_entries(_get(rule_decl, "entries", f"{path}.rule"), space, space, f"{path}.rule.entries")
        )
    elif kind == "coordinate-update":
        assignments = []
        for i, a in enumerate(_get(rule_decl, "assignments", f"{path}.rule")):
            apath = f"{path}.rule.assignments[{i}]"
            op = _get(a, "op", apath)
            if op == "binary-sum":
                assignments.append(
                    BinarySumUpdate(
                        tuple(_get(a, "a", apath)),
                        tuple(_get(a, "b", apath)),
                        tuple(_get(a, "out", apath)),
                        float(_get(a, "threshold", apath)),
                        float(_get(a, "low", apath)),
                        float(_get(a, "high", apath)),
                    )
                )
            elif op == "constant":
                assignments.append(
                    ConstantUpdate(
                        tuple(_get(a, "lines", apath)),
                        tuple(float(v) for v in _get(a, "values", apath)),
                    )
                )
            else:
                raise ScenarioSyntaxError(f"{apath}.op: unknown assignment op {op!r}")
        rule = CoordinateUpdateRule(tuple(assignments))
    elif kind == "chain":
        parts = tuple(
            reg.resolve(reg.physical_dynamics, ref, f"{path}.rule.parts[{i}]")
            for i, ref in enumerate(_get(rule_decl, "parts", f"{path}.rule"))
        )
        rule = PhysicalChainRule(parts)
    else:
        raise ScenarioSyntaxError(f"{path}.rule.kind: unknown rule kind {kind!r}")
    noise_decl = decl.get("noise")
    noise = None
    if noise_decl is not None:
        npath = f"{path}.noise"
        nkind = _get(noise_decl, "kind", npath)
        if nkind == "coordinate-flip":
            noise = CoordinateFlipNoise(
                float(_get(noise_decl, "probability", npath)),
                tuple(_get(noise_decl, "coordinates", npath)),
                float(_get(noise_decl, "threshold", npath)),
                float(_get(noise_decl, "low", npath)),
                float(_get(noise_decl, "high", npath)),
            )
        elif nkind == "label-flip":
            noise = LabelFlipNoise(
                float(_get(noise_decl, "probability", npath)),
                {k: v for k, v in _get(noise_decl, "partners", npath)},
            )
        else:
            raise ScenarioSyntaxError(f"{npath}.kind: unknown noise kind {nkind!r}")
    try:
        dyn = PhysicalDynamics(ident, space, rule, noise)
    except DeclarationError as err:
        raise ScenarioSyntaxError(f"{path}: {err}") from err
    reg.declare(reg.physical_dynamics, ident, dyn, path)
    return dyn


def _parse_theory(decl: dict, path: str, reg: _Registry) -> Theory:
    ident = _get(decl, "id", path)
    relation = reg.resolve(reg.relations, _get(decl, "representation", path), f"{path}.representation")
    domain = tuple(
        PhysicalState(relation.domain, _state_value(relation.domain, v, f"{path}.domain[{i}]"))
        for i, v in enumerate(_get(decl, "domain", path))
    )
    predictions = []
    for i, pd in enumerate(_get(decl, "predictions", path)):
        ppath = f"{path}.predictions[{i}]"
        predictions.append(
            Prediction(
                _get(pd, "name", ppath),
                reg.resolve(reg.abstract_dynamics, _get(pd, "abstract", ppath), f"{ppath}.abstract"),
                reg.resolve(reg.physical_dynamics, _get(pd, "physical", ppath), f"{ppath}.physical"),
            )
        )
    inst_decl = decl.get("instantiation")
    instantiation = None
    if inst_decl is not None:
        ipath = f"{path}.instantiation"
        seeds = tuple(
            PhysicalState(relation.domain, _state_value(relation.domain, v, f"{ipath}.seeds[{i}]"))
            for i, v in enumerate(_get(inst_decl, "seeds", ipath))
        )
        engineering = reg.resolve(
            reg.physical_dynamics, _get(inst_decl, "engineering", ipath), f"{ipath}.engineering"
        )
        instantiation = InstantiationProcedure(seeds, engineering)
    try:
        theory = Theory(ident, relation, domain, tuple(predictions), instantiation)
    except DeclarationError as err:
        raise ScenarioSyntaxError(f"{path}: {err}") from err
    reg.declare(reg.theories, ident, theory, path)
    return theory


def _parse_embedding(decl: dict, path: str, reg: _Registry) -> ProblemEmbedding:
    ident = _get(decl, "id", path)
    problem = reg.resolve(reg.spaces, _get(decl, "problem_space", path), f"{path}.problem_space")
    machine = reg.resolve(reg.spaces, _get(decl, "machine_space", path), f"{path}.machine_space")
    entries = _parse_entries(_get(decl, "entries", path), problem, machine, f"{path}.entries")
    try:
        embedding = ProblemEmbedding(ident, problem, machine, entries)
    except DeclarationError as err:
        raise ScenarioSyntaxError(f"{path}: {err}") from err
    reg.declare(reg.embeddings, ident, embedding, path)
    return embedding


def _parse_stack(decl: dict, path: str, reg: _Registry) -> RefinementStack:
    ident = _get(decl, "id", path)
    layers = []
    layer_table: dict[str, RefinementLayer] = {}
    for i, ld in enumerate(_get(decl, "layers", path)):
        lpath = f"{path}.layers[{i}]"
        layer = RefinementLayer(
            _get(ld, "id", lpath),
            reg.resolve(reg.spaces, _get(ld, "space", lpath), f"{lpath}.space"),
            reg.resolve(reg.abstract_dynamics, _get(ld, "dynamics", lpath), f"{lpath}.dynamics"),
        )
        if layer.id in layer_table:
            raise DuplicateIdentifier(lpath, layer.id)
        layer_table[layer.id] = layer
        layers.append(layer)
    relations = []
    for i, rd in enumerate(_get(decl, "relations", path)):
        rpath = f"{path}.relations[{i}]"
        upper = layer_table.get(_get(rd, "upper", rpath))
        lower = layer_table.get(_get(rd, "lower", rpath))
        if upper is None:
            raise UnknownReference(f"{rpath}.upper", rd["upper"])
        if lower is None:
            raise UnknownReference(f"{rpath}.lower", rd["lower"])
        entries = _parse_entries(
            _get(rd, "entries", rpath), upper.space, lower.space, f"{rpath}.entries"
        )
        try:
            relations.append(SimulationRelation(_get(rd, "id", rpath), upper, lower, entries))
        except DeclarationError as err:
            raise ScenarioSyntaxError(f"{rpath}: {err}") from err
    theory = reg.resolve(reg.theories, _get(decl, "theory", path), f"{path}.theory")
    device = reg.resolve(reg.physical_dynamics, _get(decl, "device", path), f"{path}.device")
    try:
        stack = RefinementStack(ident, tuple(layers), tuple(relations), theory, device)
    except DeclarationError as err:
        raise ScenarioSyntaxError(f"{path}: {err}") from err
    reg.declare(reg.stacks, ident, stack, path)
    return stack


def _parse_component(decl: dict, path: str, reg: _Registry) -> Component:
    return Component(
        reg.resolve(reg.theories, _get(decl, "theory", path), f"{path}.theory"),
        reg.resolve(reg.abstract_dynamics, _get(decl, "dynamics", path), f"{path}.dynamics"),
    )


def _parse_composition(decl: dict, path: str, reg: _Registry) -> JointSystem:
    ident = _get(decl, "id", path)
    mode = _get(decl, "mode", path)
    left = _parse_component(_get(decl, "left", path), f"{path}.left", reg)
    right = _parse_component(_get(decl, "right", path), f"{path}.right", reg)
    try:
        if mode in ("parallel", "sequential"):
            joint = componentwise_joint(ident, left, right, f"composed-{mode}")
        elif mode == "declared":
            joint = JointSystem(
                ident,
                left,
                right,
                reg.resolve(reg.spaces, _get(decl, "joint_space", path), f"{path}.joint_space"),
                reg.resolve(
                    reg.relations, _get(decl, "joint_representation", path), f"{path}.joint_representation"
                ),
                reg.resolve(
                    reg.abstract_dynamics, _get(decl, "joint_dynamics", path), f"{path}.joint_dynamics"
                ),
                "declared",
            )
        else:
            raise ScenarioSyntaxError(f"{path}.mode: unknown composition mode {mode!r}")
    except ModelError as err:
        if isinstance(err, (ScenarioSyntaxError, UnknownReference, DuplicateIdentifier)):
            raise
        raise ScenarioSyntaxError(f"{path}: {err}") from err
    reg.declare(reg.joints, ident, joint, path)
    return joint


def _parse_check(decl: dict, path: str, seen: set) -> CheckSpec:
    name = _get(decl, "name", path)
    if name in seen:
        raise DuplicateIdentifier(path, name)
    seen.add(name)
    kind = _get(decl, "kind", path)
    if kind not in CHECK_KINDS:
        raise ScenarioSyntaxError(f"{path}.kind: unknown check kind {kind!r}")
    metric = decl.get("metric", "discrete")
    if metric not in METRICS:
        raise ScenarioSyntaxError(f"{path}.metric: unknown metric {metric!r}")
    physical_metric = decl.get("physical_metric")
    if kind == "history" and physical_metric is None:
        raise ScenarioSyntaxError(f"{path}: history checks must declare a physical metric")
    if physical_metric is not None and physical_metric not in METRICS:
        raise ScenarioSyntaxError(f"{path}.physical_metric: unknown metric {physical_metric!r}")
    return CheckSpec(
        name=name,
        kind=kind,
        theory=decl.get("theory"),
        prediction=decl.get("prediction"),
        state=raw_value(decl.get("state")),
        input=raw_value(decl.get("input")),
        expect=raw_value(decl.get("expect")),
        physical_metric=physical_metric,
        stack=decl.get("stack"),
        relation=decl.get("relation"),
        joint=decl.get("joint"),
        expect_class=decl.get("expect_class"),
        oracle=bool(decl.get("oracle", False)),
        epsilon=float(decl.get("epsilon", 0.0)),
        metric=metric,
        trials=int(decl.get("trials", 1)),
        required_success=float(decl.get("required_success", 1.0)),
    )


def parse_scenario(text: str) -> ScenarioBundle:
    """Parse document text into a fully resolved bundle.

    Raises a diagnostic carrying the position (line and column for syntax
    problems, the document path otherwise) and the offending identifier.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as err:
        raise ScenarioSyntaxError(err.msg, err.lineno, err.colno) from err
    _expect(doc, "document", dict, "a JSON object")
    for key in doc:
        if key not in _SECTIONS:
            raise ScenarioSyntaxError(f"document: unknown section {key!r}")
    version = doc.get("format_version")
    if version not in SUPPORTED_VERSIONS:
        raise VersionUnsupported(f"unsupported format version {version!r}")

    reg = _Registry()
    spaces_decl = _expect(doc.get("spaces", {}), "spaces", dict, "an object")
    abstract_spaces = [
        _checked(_parse_space, d, f"spaces.abstract[{i}]", False, reg)
        for i, d in enumerate(_expect(spaces_decl.get("abstract", []), "spaces.abstract", list, "a list"))
    ]
    physical_spaces = [
        _checked(_parse_space, d, f"spaces.physical[{i}]", True, reg)
        for i, d in enumerate(_expect(spaces_decl.get("physical", []), "spaces.physical", list, "a list"))
    ]
    relations = [
        _checked(_parse_relation, d, f"relations[{i}]", reg)
        for i, d in enumerate(_expect(doc.get("relations", []), "relations", list, "a list"))
    ]
    dynamics_decl = _expect(doc.get("dynamics", {}), "dynamics", dict, "an object")
    abstract_dynamics = [
        _checked(_parse_abstract_dynamics, d, f"dynamics.abstract[{i}]", reg)
        for i, d in enumerate(_expect(dynamics_decl.get("abstract", []), "dynamics.abstract", list, "a list"))
    ]
    physical_dynamics = [
        _checked(_parse_physical_dynamics, d, f"dynamics.physical[{i}]", reg)
        for i, d in enumerate(_expect(dynamics_decl.get("physical", []), "dynamics.physical", list, "a list"))
    ]
    theories = [
        _checked(_parse_theory, d, f"theories[{i}]", reg)
        for i, d in enumerate(_expect(doc.get("theories", []), "theories", list, "a list"))
    ]
    embeddings = [
        _checked(_parse_embedding, d, f"embeddings[{i}]", reg)
        for i, d in enumerate(_expect(doc.get("embeddings", []), "embeddings", list, "a list"))
    ]
    stacks = [
        _checked(_parse_stack, d, f"stacks[{i}]", reg)
        for i, d in enumerate(_expect(doc.get("stacks", []), "stacks", list, "a list"))
    ]
    joints = [
        _checked(_parse_composition, d, f"compositions[{i}]", reg)
        for i, d in enumerate(_expect(doc.get("compositions", []), "compositions", list, "a list"))
    ]
    seen_names: set = set()
    checks = [
        _checked(_parse_check, d, f"checks[{i}]", seen_names)
        for i, d in enumerate(_expect(doc.get("checks", []), "checks", list, "a list"))
    ]
    return ScenarioBundle(
        format_version=version,
        abstract_spaces=tuple(abstract_spaces),
        physical_spaces=tuple(physical_spaces),
        relations=tuple(relations),
        abstract_dynamics=tuple(abstract_dynamics),
        physical_dynamics=tuple(physical_dynamics),
        theories=tuple(theories),
        embeddings=tuple(embeddings),
        stacks=tuple(stacks),
        joints=tuple(joints),
        checks=tuple(checks),
    )


def _emit_space(space) -> dict:
    if isinstance(space, (LabelSpace, PhysicalLabelSpace)):
        return {"id": space.id, "kind": "labels", "labels": list(space.labels)}
    if isinstance(space, BitSpace):
        return {"id": space.id, "kind": "bits", "width": space.width}
    if isinstance(space, IntSpace):
        return {"id": space.id, "kind": "ints", "lo": space.lo, "hi": space.hi}
    if isinstance(space, RealVectorSpace):
        return {"id": space.id, "kind": "vector", "bounds": [list(b) for b in space.bounds]}
    return {"id": space.id, "kind": "tuple", "components": [c.id for c in space.components]}


def _emit_entries(entries: dict, key_space, value_space) -> list:
    return [
        [value_to_json(key_space, k), value_to_json(value_space, entries[k])]
        for k in enumerate_values(key_space)
    ]


def _emit_relation(relation: RepresentationRelation) -> dict:
    rule = relation.rule
    if isinstance(rule, LookupRule):
        encoded = {
            "kind": "lookup",
            "entries": _emit_entries(rule.entries, relation.domain, relation.codomain),
        }
    elif isinstance(rule, ThresholdRule):
        encoded = {"kind": "threshold", "thresholds": list(rule.thresholds)}
    else:
        encoded = {"kind": "tuple-wise", "parts": [p.id for p in rule.parts]}
    return {
        "id": relation.id,
        "domain": relation.domain.id,
        "codomain": relation.codomain.id,
        "rule": encoded,
    }


def _emit_abstract_dynamics(dyn: AbstractDynamics) -> dict:
    rule = dyn.rule
    if isinstance(rule, TableRule):
        encoded = {"kind": "table", "entries": _emit_entries(rule.entries, dyn.space, dyn.space)}
    elif isinstance(rule, BuiltinRule):
        encoded = {"kind": "builtin", "name": rule.name}
    else:
        encoded = {"kind": "chain", "parts": [p.id for p in rule.parts]}
    return {"id": dyn.id, "space": dyn.space.id, "rule": encoded}


def _emit_physical_dynamics(dyn: PhysicalDynamics) -> dict:
    rule = dyn.rule
    if isinstance(rule, TableRule):
        encoded = {"kind": "table", "entries": _emit_entries(rule.entries, dyn.space, dyn.space)}
    elif isinstance(rule, CoordinateUpdateRule):
        assignments = []
        for a in rule.assignments:
            if isinstance(a, BinarySumUpdate):
                assignments.append(
                    {
                        "op": "binary-sum",
                        "a": list(a.a_lines),
                        "b": list(a.b_lines),
                        "out": list(a.out_lines),
                        "threshold": a.threshold,
                        "low": a.low,
                        "high": a.high,
                    }
                )
            else:
                assignments.append(
                    {"op": "constant", "lines": list(a.lines), "values": list(a.values)}
                )
        encoded = {"kind": "coordinate-update", "assignments": assignments}
    else:
        encoded = {"kind": "chain", "parts": [p.id for p in rule.parts]}
    out = {"id": dyn.id, "space": dyn.space.id, "rule": encoded}
    if dyn.noise is not None:
        if isinstance(dyn.noise, CoordinateFlipNoise):
            out["noise"] = {
                "kind": "coordinate-flip",
                "probability": dyn.noise.probability,
                "coordinates": list(dyn.noise.coordinates),
                "threshold": dyn.noise.threshold,
                "low": dyn.noise.low,
                "high": dyn.noise.high,
            }
        else:
            out["noise"] = {
                "kind": "label-flip",
                "probability": dyn.noise.probability,
                "partners": [[k, dyn.noise.partners[k]] for k in sorted(dyn.noise.partners)],
            }
    return out


def _emit_theory(theory: Theory) -> dict:
    space = theory.representation.domain
    out = {
        "id": theory.id,
        "representation": theory.representation.id,
        "domain": [value_to_json(space, s.value) for s in theory.domain],
        "predictions": [
            {"name": p.name, "abstract": p.abstract.id, "physical": p.physical.id}
            for p in theory.predictions
        ],
    }
    if theory.instantiation is not None:
        out["instantiation"] = {
            "seeds": [value_to_json(space, s.value) for s in theory.instantiation.seeds],
            "engineering": theory.instantiation.engineering.id,
        }
    return out


def _emit_embedding(embedding: ProblemEmbedding) -> dict:
    return {
        "id": embedding.id,
        "problem_space": embedding.problem_space.id,
        "machine_space": embedding.machine_space.id,
        "entries": _emit_entries(embedding.entries, embedding.problem_space, embedding.machine_space),
    }


def _emit_stack(stack: RefinementStack) -> dict:
    return {
        "id": stack.id,
        "layers": [
            {"id": l.id, "space": l.space.id, "dynamics": l.dynamics.id} for l in stack.layers
        ],
        "relations": [
            {
                "id": r.id,
                "upper": r.upper.id,
                "lower": r.lower.id,
                "entries": _emit_entries(r.entries, r.upper.space, r.lower.space),
            }
            for r in stack.relations
        ],
        "theory": stack.theory.id,
        "device": stack.device.id,
    }


def _emit_composition(joint: JointSystem) -> dict:
    out = {
        "id": joint.id,
        "mode": {
            "composed-parallel": "parallel",
            "composed-sequential": "sequential",
            "declared": "declared",
        }[joint.provenance],
        "left": {"theory": joint.left.theory.id, "dynamics": joint.left.dynamics.id},
        "right": {"theory": joint.right.theory.id, "dynamics": joint.right.dynamics.id},
    }
    if joint.provenance == "declared":
        out["joint_space"] = joint.joint_space.id
        out["joint_representation"] = joint.joint_representation.id
        out["joint_dynamics"] = joint.joint_dynamics.id
    return out


def _raw_to_json(v: Any) -> Any:
    if isinstance(v, tuple):
        return [_raw_to_json(x) for x in v]
    return v


def _emit_check(check: CheckSpec) -> dict:
    out: dict[str, Any] = {"name": check.name, "kind": check.kind}
    for key in ("theory", "prediction", "stack", "relation", "joint", "expect_class", "physical_metric"):
        value = getattr(check, key)
        if value is not None:
            out[key] = value
    for key in ("state", "input", "expect"):
        value = getattr(check, key)
        if value is not None:
            out[key] = _raw_to_json(value)
    if check.oracle:
        out["oracle"] = True
    out["epsilon"] = check.epsilon
    out["metric"] = check.metric
    out["trials"] = check.trials
    out["required_success"] = check.required_success
    return out


def emit_scenario(bundle: ScenarioBundle) -> str:
    """Serialize a bundle as document text that parses back equal."""
    doc = {
        "format_version": bundle.format_version,
        "spaces": {
            "abstract": [_emit_space(s) for s in bundle.abstract_spaces],
            "physical": [_emit_space(s) for s in bundle.physical_spaces],
        },
        "relations": [_emit_relation(r) for r in bundle.relations],
        "dynamics": {
            "abstract": [_emit_abstract_dynamics(d) for d in bundle.abstract_dynamics],
            "physical": [_emit_physical_dynamics(d) for d in bundle.physical_dynamics],
        },
        "theories": [_emit_theory(t) for t in bundle.theories],
        "embeddings": [_emit_embedding(e) for e in bundle.embeddings],
        "stacks": [_emit_stack(s) for s in bundle.stacks],
        "compositions": [_emit_composition(j) for j in bundle.joints],
        "checks": [_emit_check(c) for c in bundle.checks],
    }
    return json.dumps(doc, indent=2) + "\n"
