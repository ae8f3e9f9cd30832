"""Agent-kind hierarchy, model types and structural validation.

A model is a plain immutable value: an environment, a list of agents, the
actions they can perform on the environment and the interactions allowed
between them. :func:`validate_model` checks it against the structural rules
of the meta-model and :func:`flatten` turns a valid model into flat classes
(one attributes section, one operations section per class) for code
generation.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Iterable, Iterator

from . import expr as ex
from .errors import ModelError


class AgentKind(str, Enum):
    AGENT = "agent"  # abstract root, never instantiated
    REACTIVE = "reactive"
    COGNITIVE = "cognitive"
    COMMUNICATIVE = "communicative"
    ADAPTIVE = "adaptive"
    INTENTIONAL = "intentional"
    RATIONAL = "rational"

    @property
    def title(self) -> str:
        return self.value.capitalize()

    @property
    def abstract(self) -> bool:
        return self is AgentKind.AGENT


CONCRETE_KINDS = tuple(k for k in AgentKind if not k.abstract)

_PARENT = {
    AgentKind.REACTIVE: AgentKind.AGENT,
    AgentKind.COGNITIVE: AgentKind.AGENT,
    AgentKind.COMMUNICATIVE: AgentKind.AGENT,
    AgentKind.ADAPTIVE: AgentKind.COGNITIVE,
    AgentKind.INTENTIONAL: AgentKind.COGNITIVE,
    AgentKind.RATIONAL: AgentKind.COGNITIVE,
}


def parent(kind: AgentKind) -> AgentKind | None:
    return _PARENT.get(kind)


def kind_family(kind: AgentKind) -> list[AgentKind]:
    """Ancestor chain of ``kind``, child first, ending at the abstract root."""
    chain = [kind]
    while (p := parent(chain[-1])) is not None:
        chain.append(p)
    return chain


def cognitive_family(kind: AgentKind) -> bool:
    return AgentKind.COGNITIVE in kind_family(kind)


# Which kinds may carry each optional agent section.
SECTION_KINDS: dict[str, frozenset[AgentKind]] = {
    "beliefs": frozenset({AgentKind.INTENTIONAL, AgentKind.RATIONAL}),
    "intentions": frozenset({AgentKind.INTENTIONAL, AgentKind.RATIONAL}),
    "desire_rules": frozenset({AgentKind.INTENTIONAL, AgentKind.RATIONAL}),
    "representations": frozenset(
        {AgentKind.COMMUNICATIVE} | {k for k in CONCRETE_KINDS if cognitive_family(k)}
    ),
    "knowledge": frozenset(
        {AgentKind.ADAPTIVE, AgentKind.INTENTIONAL, AgentKind.RATIONAL}
    ),
    "stimulus_rules": frozenset({AgentKind.REACTIVE}),
    "goals": frozenset({AgentKind.COGNITIVE, AgentKind.ADAPTIVE}),
    "scores": frozenset({AgentKind.RATIONAL}),
}
CORE_SECTIONS = (
    "beliefs",
    "intentions",
    "desire_rules",
    "representations",
    "knowledge",
    "stimulus_rules",
)

KIND_OPERATIONS: dict[AgentKind, tuple[str, ...]] = {
    AgentKind.AGENT: ("Run", "Perceive", "Act"),
    AgentKind.REACTIVE: (),
    AgentKind.COGNITIVE: ("Decide",),
    AgentKind.COMMUNICATIVE: ("Communicate",),
    AgentKind.ADAPTIVE: ("Change_information",),
    AgentKind.INTENTIONAL: (
        "Revise_beliefs",
        "Generate_desires",
        "Filter",
        "Actions_selection",
    ),
    AgentKind.RATIONAL: ("Mesure_performance",),
}
ENVIRONMENT_OPERATIONS = ("Run", "Perceive", "ModifState")


class Performative(str, Enum):
    INFORM = "Inform"
    GET_INFORMATION = "GetInformation"
    INFORM_ABOUT_CONSTRAINTS = "InformAboutConstraints"
    ACCEPT_PARTNERSHIP = "AcceptPartnership"
    REPLY = "Reply"


INTERACTION_PERFORMATIVES = (
    Performative.INFORM,
    Performative.GET_INFORMATION,
    Performative.INFORM_ABOUT_CONSTRAINTS,
    Performative.ACCEPT_PARTNERSHIP,
)
# Operation names of the Interaction association class.
INTERACTION_FUNCTIONS = {
    Performative.INFORM: "inform",
    Performative.GET_INFORMATION: "getInformation",
    Performative.INFORM_ABOUT_CONSTRAINTS: "informaboutConstraints",
    Performative.ACCEPT_PARTNERSHIP: "acceptPartnerShip",
}

# Calls a rule may target besides declared actions, with their arity
# (None = variadic, at least one argument).
BUILTIN_CALLS: dict[str, int | None] = {
    "set": 2,
    "inform": 3,
    "get_information": 2,
    "inform_about_constraints": None,
    "accept_partnership": 1,
}
RESERVED_NAMES = frozenset(BUILTIN_CALLS) | frozenset(
    op for ops in KIND_OPERATIONS.values() for op in ops
) | frozenset(ENVIRONMENT_OPERATIONS) | frozenset(ex.FUNCTIONS)

AGENT_COUNT = "agent_count"
STATE_KINDS = ("int", "symbol", "real")


# -- model types ------------------------------------------------------------

@dataclass(frozen=True)
class PerceptDecl:
    name: str
    kind: str
    source: str = "environment"  # or "agent"


@dataclass(frozen=True)
class AttributeDecl:
    name: str
    kind: str
    default: Any


@dataclass(frozen=True)
class Fact:
    key: str
    value: Any


@dataclass(frozen=True)
class DesireRule:
    """A candidate goal: fires when ``guard`` holds.

    ``action`` is only used by cognitive and adaptive agents, whose goals map
    directly to an action; BDI agents reach actions through intention plans.
    """

    goal_id: str
    priority: int
    guard: ex.Expr | None = None
    conflicts: tuple[str, ...] = ()
    action: ex.Call | None = None


@dataclass(frozen=True)
class IntentionDecl:
    goal_id: str
    plan: tuple[str, ...]


@dataclass(frozen=True)
class ReactiveRule:
    trigger: str
    params: tuple[str, ...]
    action: ex.Call
    cond: ex.Expr | None = None


@dataclass(frozen=True)
class ScoreEntry:
    action: str
    score: float
    cond: ex.Expr | None = None


@dataclass(frozen=True)
class AgentSpec:
    name: str
    kind: AgentKind
    roles: tuple[str, ...] = ()
    perceptions: tuple[PerceptDecl, ...] = ()
    attributes: tuple[AttributeDecl, ...] = ()
    representations: tuple[str, ...] = ()
    beliefs: tuple[Fact, ...] = ()
    knowledge: tuple[Fact, ...] = ()
    desire_rules: tuple[DesireRule, ...] = ()
    goals: tuple[DesireRule, ...] = ()
    intentions: tuple[IntentionDecl, ...] = ()
    stimulus_rules: tuple[ReactiveRule, ...] = ()
    scores: tuple[ScoreEntry, ...] = ()

    def sections_present(self) -> list[str]:
        return [s for s in SECTION_KINDS if getattr(self, s)]


@dataclass(frozen=True)
class StateVar:
    name: str
    kind: str
    initial: Any


@dataclass(frozen=True)
class EnvPerception:
    name: str
    kind: str


@dataclass(frozen=True)
class DriftRule:
    var: str
    expr: ex.Expr


@dataclass(frozen=True)
class EnvironmentSpec:
    name: str
    deterministic: bool = True
    static: bool = True
    continuous: bool = False
    state_vars: tuple[StateVar, ...] = ()
    perceptions: tuple[EnvPerception, ...] = ()
    drift_rules: tuple[DriftRule, ...] = ()

    def var(self, name: str) -> StateVar | None:
        return next((v for v in self.state_vars if v.name == name), None)

    def perception(self, name: str) -> EnvPerception | None:
        if name == AGENT_COUNT:
            return EnvPerception(AGENT_COUNT, "int")
        return next((p for p in self.perceptions if p.name == name), None)


@dataclass(frozen=True)
class Param:
    name: str
    kind: str


@dataclass(frozen=True)
class Effect:
    var: str
    expr: ex.Expr


@dataclass(frozen=True)
class ActionSpec:
    name: str
    actor: str
    params: tuple[Param, ...] = ()
    effects: tuple[Effect, ...] = ()


@dataclass(frozen=True)
class InteractionSpec:
    initiator: str
    responder: str
    allowed: tuple[Performative, ...]
    reflexive: bool = False

    @property
    def title(self) -> str:
        return f"Interaction_{self.initiator}_{self.responder}"

    def links(self, a: str, b: str) -> bool:
        return {a, b} == {self.initiator, self.responder} and (
            a != b or self.reflexive
        )


@dataclass(frozen=True)
class ModelSpec:
    name: str
    environment: EnvironmentSpec
    agents: tuple[AgentSpec, ...] = ()
    actions: tuple[ActionSpec, ...] = ()
    interactions: tuple[InteractionSpec, ...] = ()

    def agent(self, name: str) -> AgentSpec | None:
        return next((a for a in self.agents if a.name == name), None)

    def action(self, name: str) -> ActionSpec | None:
        return next((a for a in self.actions if a.name == name), None)

    def permits(self, sender: str, receiver: str, performative: Performative) -> bool:
        return any(
            i.links(sender, receiver) and performative in i.allowed
            for i in self.interactions
        )

    def peers(self, name: str, performative: Performative) -> list[str]:
        """Agents ``name`` may address with ``performative``, sorted."""
        return sorted(
            a.name for a in self.agents if self.permits(name, a.name, performative)
        )


# -- diagnostics ------------------------------------------------------------

@dataclass(frozen=True)
class Diagnostic:
    severity: str  # "error" | "warning"
    code: str
    message: str
    location: str = ""

    def as_dict(self) -> dict[str, str]:
        return {
            "severity": self.severity,
            "code": self.code,
            "message": self.message,
            "location": self.location,
        }

    def __str__(self) -> str:
        where = f" [{self.location}]" if self.location else ""
        return f"{self.severity} {self.code}{where}: {self.message}"


@dataclass(frozen=True)
class ValidationReport:
    diagnostics: tuple[Diagnostic, ...] = ()

    @property
    def errors(self) -> list[Diagnostic]:
        return [d for d in self.diagnostics if d.severity == "error"]

    @property
    def warnings(self) -> list[Diagnostic]:
        return [d for d in self.diagnostics if d.severity == "warning"]

    @property
    def passed(self) -> bool:
        return not self.errors

    def codes(self) -> list[str]:
        return [d.code for d in self.diagnostics]


class _Collector:
    def __init__(self) -> None:
        self.items: list[Diagnostic] = []

    def error(self, code: str, message: str, location: str = "") -> None:
        self.items.append(Diagnostic("error", code, message, location))

    def warning(self, code: str, message: str, location: str = "") -> None:
        self.items.append(Diagnostic("warning", code, message, location))


def _duplicates(names: Iterable[str]) -> Iterator[str]:
    seen: set[str] = set()
    for n in names:
        if n in seen:
            yield n
        seen.add(n)


def _check_literal(out: _Collector, value: Any, kind: str, what: str, where: str) -> None:
    try:
        ex.coerce(value, kind)
    except TypeError:
        out.error("E-KIND-MISMATCH", f"{what} expects {kind}, got {value!r}", where)


def _check_expr(
    out: _Collector,
    e: ex.Expr | None,
    scope: set[str],
    where: str,
    *,
    code: str = "E-UNRESOLVED-NAME",
    allow_choice: bool = False,
) -> None:
    if e is None:
        return
    for name in sorted(ex.names(e) - scope):
        out.error(code, f"unresolved name {name!r}", where)
    for func in sorted(ex.calls(e)):
        if func not in ex.FUNCTIONS:
            out.error("E-UNRESOLVED-NAME", f"unknown function {func!r}", where)
        elif func == "choice" and not allow_choice:
            out.error(
                "E-NONDET-CHOICE",
                "choice() is only allowed in non-deterministic environments",
                where,
            )


def _validate_environment(out: _Collector, env: EnvironmentSpec) -> None:
    where = f"environment {env.name}"
    for dup in _duplicates(v.name for v in env.state_vars):
        out.error("E-DUP-NAME", f"state variable {dup!r} declared twice", where)
    for dup in _duplicates(p.name for p in env.perceptions):
        out.error("E-DUP-NAME", f"perception {dup!r} declared twice", where)
    for v in env.state_vars:
        if v.kind not in STATE_KINDS:
            out.error("E-BAD-KIND", f"state variable {v.name!r} has kind {v.kind}", where)
        else:
            _check_literal(out, v.initial, v.kind, f"state variable {v.name!r}", where)
    has_real = any(v.kind == "real" for v in env.state_vars)
    if env.continuous and not has_real:
        out.error("E-CONTINUOUS", "continuous environment needs a real state variable", where)
    if not env.continuous and has_real:
        out.error("E-CONTINUOUS", "discrete environment cannot hold real state variables", where)
    if env.static and env.drift_rules:
        out.error("E-STATIC-DRIFT", "static environment cannot declare drift rules", where)
    state = {v.name for v in env.state_vars}
    for dup in _duplicates(d.var for d in env.drift_rules):
        out.error("E-DUP-NAME", f"drift rule for {dup!r} declared twice", where)
    for d in env.drift_rules:
        dwhere = f"{where}/drift {d.var}"
        if d.var not in state:
            out.error("E-UNRESOLVED-VAR", f"drift targets undeclared variable {d.var!r}", dwhere)
        _check_expr(
            out, d.expr, state | {"dt"}, dwhere,
            code="E-UNRESOLVED-VAR", allow_choice=not env.deterministic,
        )
    for p in env.perceptions:
        if p.kind not in ex.VALUE_KINDS:
            out.error("E-BAD-KIND", f"perception {p.name!r} has kind {p.kind}", where)
        backing = env.var(p.name)
        if backing is not None and backing.kind != p.kind:
            out.error(
                "E-KIND-MISMATCH",
                f"perception {p.name!r} is {p.kind} but its state variable is {backing.kind}",
                where,
            )
        if p.name == AGENT_COUNT and p.kind != "int":
            out.error("E-KIND-MISMATCH", "agent_count is an int perception", where)


def _check_call(
    out: _Collector,
    model: ModelSpec,
    agent: AgentSpec,
    call: ex.Call,
    scope: set[str],
    where: str,
    *,
    builtins: bool,
) -> None:
    name, argc = call.func, len(call.args)
    if builtins and name in BUILTIN_CALLS:
        expected = BUILTIN_CALLS[name]
        if (expected is None and argc < 1) or (expected is not None and argc != expected):
            out.error("E-ARITY", f"{name} called with {argc} arguments", where)
            return
        args = call.args
        if name == "set":
            target = call.args[0]
            attrs = {a.name for a in agent.attributes}
            if not isinstance(target, ex.Name) or target.id not in attrs:
                out.error("E-UNRESOLVED-NAME", "set() needs a declared attribute", where)
            args = call.args[1:]
        for a in args:
            _check_expr(out, a, scope, where)
        return
    action = model.action(name)
    if action is None:
        out.error("E-UNRESOLVED-ACTION", f"unknown action {name!r}", where)
        return
    if action.actor != agent.name:
        out.error(
            "E-ACTOR-MISMATCH",
            f"action {name!r} belongs to {action.actor!r}",
            where,
        )
    if argc != len(action.params):
        out.error(
            "E-ARITY",
            f"action {name!r} takes {len(action.params)} arguments, got {argc}",
            where,
        )
    for a in call.args:
        _check_expr(out, a, scope, where)


def _validate_agent(out: _Collector, model: ModelSpec, agent: AgentSpec) -> None:
    where = f"agent {agent.name}"
    kind = agent.kind
    if kind.abstract:
        out.error("E-ABSTRACT-KIND", "the abstract Agent root cannot be instantiated", where)
    for section in agent.sections_present():
        if kind not in SECTION_KINDS[section]:
            out.error(
                "E-KIND-SECTION",
                f"{kind.title} agents cannot declare {section}",
                f"{where}/{section}",
            )
    for label, items in (
        ("role", agent.roles),
        ("perception", [p.name for p in agent.perceptions]),
        ("attribute", [a.name for a in agent.attributes]),
        ("representation", agent.representations),
        ("belief", [b.key for b in agent.beliefs]),
        ("knowledge fact", [k.key for k in agent.knowledge]),
        ("desire", [d.goal_id for d in agent.desire_rules]),
        ("goal", [g.goal_id for g in agent.goals]),
        ("intention", [i.goal_id for i in agent.intentions]),
    ):
        for dup in _duplicates(items):
            out.error("E-DUP-NAME", f"{label} {dup!r} declared twice", where)

    env = model.environment
    for p in agent.perceptions:
        if p.kind not in ex.VALUE_KINDS:
            out.error("E-BAD-KIND", f"perception {p.name!r} has kind {p.kind}", where)
        if p.source == "environment":
            exposed = env.perception(p.name)
            if exposed is None:
                out.error(
                    "E-UNRESOLVED-PERCEPT",
                    f"environment {env.name!r} exposes no perception {p.name!r}",
                    where,
                )
            elif exposed.kind != p.kind:
                out.error(
                    "E-KIND-MISMATCH",
                    f"perception {p.name!r} is {exposed.kind} in the environment",
                    where,
                )
        elif p.source != "agent":
            out.error("E-BAD-SOURCE", f"perception source {p.source!r}", where)
    for a in agent.attributes:
        if a.kind not in ex.VALUE_KINDS:
            out.error("E-BAD-KIND", f"attribute {a.name!r} has kind {a.kind}", where)
        else:
            _check_literal(out, a.default, a.kind, f"attribute {a.name!r}", where)

    attrs = {a.name for a in agent.attributes}
    percepts = {p.name for p in agent.perceptions} | {AGENT_COUNT}
    knowledge = {k.key for k in agent.knowledge}
    beliefs = {b.key for b in agent.beliefs}
    cognitive_scope = attrs | percepts | knowledge | set(agent.representations)
    bdi_scope = attrs | percepts | knowledge | beliefs

    for i, rule in enumerate(agent.stimulus_rules, 1):
        rwhere = f"{where}/rule {i}"
        for dup in _duplicates(rule.params):
            out.error("E-DUP-NAME", f"rule parameter {dup!r} declared twice", rwhere)
        scope = attrs | set(rule.params)
        _check_expr(out, rule.cond, scope, rwhere)
        _check_call(out, model, agent, rule.action, scope, rwhere, builtins=True)

    for g in agent.goals:
        gwhere = f"{where}/goal {g.goal_id}"
        _check_expr(out, g.guard, cognitive_scope, gwhere)
        if g.action is None:
            out.error("E-NO-ACTION", f"goal {g.goal_id!r} names no action", gwhere)
        else:
            _check_call(out, model, agent, g.action, cognitive_scope, gwhere, builtins=False)

    goal_ids = {d.goal_id for d in agent.desire_rules} | {g.goal_id for g in agent.goals}
    plans = {i.goal_id for i in agent.intentions}
    for d in (*agent.desire_rules, *agent.goals):
        dwhere = f"{where}/desire {d.goal_id}"
        if d.priority < 0:
            out.error("E-PRIORITY", f"priority {d.priority} is negative", dwhere)
        if d.goal_id in d.conflicts:
            out.error("E-CONFLICT-SELF", f"goal {d.goal_id!r} conflicts with itself", dwhere)
        for c in d.conflicts:
            if c not in goal_ids:
                out.warning("W-UNKNOWN-GOAL", f"conflict with undeclared goal {c!r}", dwhere)
    for d in agent.desire_rules:
        dwhere = f"{where}/desire {d.goal_id}"
        _check_expr(out, d.guard, bdi_scope, dwhere)
        if d.goal_id not in plans:
            out.warning("W-NO-PLAN", f"desire {d.goal_id!r} has no intention plan", dwhere)

    for intention in agent.intentions:
        iwhere = f"{where}/intention {intention.goal_id}"
        for step in intention.plan:
            action = model.action(step)
            if action is None:
                out.error("E-UNRESOLVED-ACTION", f"plan step {step!r} is not an action", iwhere)
            elif action.actor != agent.name:
                out.error("E-ACTOR-MISMATCH", f"action {step!r} belongs to {action.actor!r}", iwhere)
            else:
                for p in action.params:
                    if p.name not in bdi_scope:
                        out.warning(
                            "W-UNBOUND-PARAM",
                            f"parameter {p.name!r} of {step!r} falls back to its default",
                            iwhere,
                        )

    for s in agent.scores:
        swhere = f"{where}/score {s.action}"
        if not 0.0 <= s.score <= 1.0:
            out.error("E-SCORE-RANGE", f"score {s.score} outside [0, 1]", swhere)
        if model.action(s.action) is None:
            out.error("E-UNRESOLVED-ACTION", f"unknown action {s.action!r}", swhere)
        _check_expr(out, s.cond, bdi_scope, swhere)


def _validate_action(out: _Collector, model: ModelSpec, action: ActionSpec) -> None:
    where = f"action {action.name}"
    env = model.environment
    if action.name in RESERVED_NAMES:
        out.error("E-RESERVED", f"{action.name!r} is a reserved name", where)
    if model.agent(action.actor) is None:
        out.error("E-UNRESOLVED-AGENT", f"unknown actor {action.actor!r}", where)
    for dup in _duplicates(p.name for p in action.params):
        out.error("E-DUP-NAME", f"parameter {dup!r} declared twice", where)
    for p in action.params:
        if p.kind not in ex.VALUE_KINDS:
            out.error("E-BAD-KIND", f"parameter {p.name!r} has kind {p.kind}", where)
    state = {v.name for v in env.state_vars}
    scope = state | {p.name for p in action.params}
    for eff in action.effects:
        if eff.var not in state:
            out.error("E-UNRESOLVED-VAR", f"effect writes undeclared variable {eff.var!r}", where)
        _check_expr(
            out, eff.expr, scope, where,
            code="E-UNRESOLVED-VAR", allow_choice=not env.deterministic,
        )


def _validate_interaction(out: _Collector, model: ModelSpec, inter: InteractionSpec) -> None:
    where = f"interaction {inter.initiator}<->{inter.responder}"
    for end in (inter.initiator, inter.responder):
        if model.agent(end) is None:
            out.error("E-UNRESOLVED-AGENT", f"unknown agent {end!r}", where)
    if inter.initiator == inter.responder and not inter.reflexive:
        out.error("E-REFLEXIVE", "self-interaction must be marked reflexive", where)
    if not inter.allowed:
        out.error("E-BAD-PERFORMATIVE", "interaction allows no performative", where)
    for p in inter.allowed:
        if p not in INTERACTION_PERFORMATIVES:
            out.error("E-BAD-PERFORMATIVE", f"{p!s} cannot be declared", where)


def validate_model(model: ModelSpec) -> ValidationReport:
    """Check ``model`` against the meta-model; never raises.

    Diagnostics come out in declaration order, so the report is a pure
    function of the model.
    """
    out = _Collector()
    top = [model.environment.name, *(a.name for a in model.agents), *(a.name for a in model.actions)]
    for dup in _duplicates(top):
        out.error("E-DUP-NAME", f"top-level name {dup!r} declared twice", f"model {model.name}")
    _validate_environment(out, model.environment)
    for agent in model.agents:
        _validate_agent(out, model, agent)
    for action in model.actions:
        _validate_action(out, model, action)
    for inter in model.interactions:
        _validate_interaction(out, model, inter)
    pairs = [frozenset((i.initiator, i.responder)) for i in model.interactions]
    for dup in _duplicates(pairs):
        out.error(
            "E-DUP-NAME",
            f"interaction {' <-> '.join(sorted(dup))} declared twice",
            f"model {model.name}",
        )
    perceived = {p.name for a in model.agents for p in a.perceptions if p.source == "environment"}
    for p in model.environment.perceptions:
        if p.name not in perceived:
            out.warning(
                "W-UNUSED-PERCEPT",
                f"no agent perceives {p.name!r}",
                f"environment {model.environment.name}",
            )
    return ValidationReport(tuple(out.items))


def require_valid(model: ModelSpec) -> None:
    report = validate_model(model)
    if not report.passed:
        first = report.errors[0]
        raise ModelError(f"model {model.name!r} does not validate ({first})")


# -- flattening -------------------------------------------------------------

@dataclass(frozen=True)
class FlatMember:
    section: str
    name: str
    type: str = ""
    value: str = ""

    def __str__(self) -> str:
        text = f"{self.section} {self.name}"
        if self.type:
            text += f": {self.type}"
        if self.value:
            text += f" = {self.value}"
        return text


@dataclass(frozen=True)
class FlatClass:
    title: str
    stereotype: str  # agent | environment | action | interaction
    kind: str = ""
    attributes: tuple[FlatMember, ...] = ()
    operations: tuple[str, ...] = ()


@dataclass(frozen=True)
class FlatClassModel:
    name: str
    classes: tuple[FlatClass, ...] = field(default_factory=tuple)

    def get(self, title: str) -> FlatClass:
        return next(c for c in self.classes if c.title == title)

    def of(self, stereotype: str) -> list[FlatClass]:
        return [c for c in self.classes if c.stereotype == stereotype]


def agent_operations(model: ModelSpec, agent: AgentSpec) -> tuple[str, ...]:
    ops: list[str] = []
    for k in reversed(kind_family(agent.kind)):
        ops.extend(o for o in KIND_OPERATIONS[k] if o not in ops)
    ops.extend(a.name for a in model.actions if a.actor == agent.name)
    return tuple(ops)


def _flatten_agent(model: ModelSpec, agent: AgentSpec) -> FlatClass:
    members = [FlatMember("role", r) for r in agent.roles]
    members += [FlatMember("perception", p.name, p.kind, f"from {p.source}") for p in agent.perceptions]
    members += [
        FlatMember("attribute", a.name, a.kind, ex.format_literal(a.default))
        for a in agent.attributes
    ]
    members += [FlatMember("belief", b.key, ex.kind_of(b.value), ex.format_literal(b.value)) for b in agent.beliefs]
    members += [FlatMember("intention", i.goal_id, "plan", ", ".join(i.plan)) for i in agent.intentions]
    members += [FlatMember("representation", r) for r in agent.representations]
    return FlatClass(
        agent.name, "agent", agent.kind.value, tuple(members), agent_operations(model, agent)
    )


def flatten(model: ModelSpec) -> FlatClassModel:
    """Flatten a validated model: one class per environment, agent and association."""
    require_valid(model)
    env = model.environment
    env_members = [
        FlatMember("flag", "deterministic", "bool", ex.format_literal(env.deterministic)),
        FlatMember("flag", "static", "bool", ex.format_literal(env.static)),
        FlatMember("flag", "continuous", "bool", ex.format_literal(env.continuous)),
    ]
    env_members += [
        FlatMember("state", v.name, v.kind, ex.format_literal(v.initial)) for v in env.state_vars
    ]
    env_members += [FlatMember("perception", p.name, p.kind) for p in env.perceptions]
    classes = [FlatClass(env.name, "environment", "", tuple(env_members), ENVIRONMENT_OPERATIONS)]
    classes += [_flatten_agent(model, a) for a in model.agents]
    for action in model.actions:
        members = [FlatMember("actor", action.actor)]
        members += [FlatMember("param", p.name, p.kind) for p in action.params]
        members += [FlatMember("effect", e.var, "", ex.to_source(e.expr)) for e in action.effects]
        classes.append(FlatClass(action.name, "action", "", tuple(members), ("Execute",)))
    for inter in model.interactions:
        members = (FlatMember("initiator", inter.initiator), FlatMember("responder", inter.responder))
        ops = tuple(INTERACTION_FUNCTIONS[p] for p in inter.allowed if p in INTERACTION_FUNCTIONS)
        classes.append(FlatClass(inter.title, "interaction", "", members, ops))
    return FlatClassModel(model.name, tuple(classes))
