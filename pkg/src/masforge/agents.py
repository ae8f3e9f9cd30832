"""Agent lifecycle, the interaction bus and sphere-of-influence analysis.

A tick of :class:`MultiAgentSystem` delivers last tick's messages, then runs
every agent in registration order: perceive, react or decide, communicate.
Messages sent during tick ``t`` are delivered at the start of tick ``t + 1``.
"""

from __future__ import annotations

import itertools
import logging
from collections import deque
from dataclasses import dataclass, field
from typing import Any, Iterable, Mapping, Sequence

from . import expr as ex
from .cognition import (
    ChangeEvent,
    CognitionState,
    Represented,
    change_information,
    communicate,
    deliberate,
)
from .environment import (
    DEFAULT_DT,
    DEFAULT_SUBSTEPS,
    ActionInstance,
    EnvState,
    Percept,
    Stimulus,
    Trace,
    perceive_env,
    run_episode,
)
from .errors import InteractionError
from .messages import NOT_KNOWN, Message
from .metamodel import (
    AgentKind,
    AgentSpec,
    EnvironmentSpec,
    Fact,
    ModelSpec,
    Performative,
    cognitive_family,
)

log = logging.getLogger(__name__)

__all__ = [
    "AgentInstance", "Message", "NOT_KNOWN", "MessageBus", "DependencyGraph",
    "TickOutput", "StepRecord", "MultiAgentSystem", "tick_agent", "react",
    "spheres_overlap", "run_model",
]


@dataclass(eq=False)
class AgentInstance:
    id: str
    spec: AgentSpec
    mailbox: deque[Message] = field(default_factory=deque)
    percept_buffer: list[Percept] = field(default_factory=list)
    attribute_store: dict[str, Any] = field(default_factory=dict)
    partnerships: set[str] = field(default_factory=set)
    constraints: set[Any] = field(default_factory=set)
    cognition: CognitionState | None = None
    representations: dict[str, Represented] = field(default_factory=dict)
    tick: int = 0

    @classmethod
    def from_spec(cls, spec: AgentSpec, model: ModelSpec | None = None) -> "AgentInstance":
        return cls(
            id=spec.name,
            spec=spec,
            attribute_store={a.name: a.default for a in spec.attributes},
            cognition=CognitionState.from_spec(spec, model) if cognitive_family(spec.kind) else None,
        )

    @property
    def kind(self) -> AgentKind:
        return self.spec.kind

    def facts(self) -> dict[str, Any]:
        """Attributes overlaid with represented facts: what the agent can answer about."""
        out = dict(self.attribute_store)
        out.update({k: r.value for k, r in self.representations.items()})
        return out

    def lookup(self, key: str) -> Any:
        if key in self.representations:
            return self.representations[key].value
        return self.attribute_store.get(key, NOT_KNOWN)


# -- message bus ------------------------------------------------------------

class MessageBus:
    """Permission-checked, FIFO, one-tick-latency message transport."""

    def __init__(self, model: ModelSpec, agents: Mapping[str, AgentInstance]):
        self.model = model
        self.agents = agents
        self.tick = 0
        self.pending: list[Message] = []
        self.outstanding: dict[int, tuple[str, str, str]] = {}
        self._conversations = itertools.count(1)

    def _check(self, sender: str, receiver: str, performative: Performative) -> None:
        if receiver not in self.agents:
            raise InteractionError(f"{receiver!r} is not a registered agent")
        if not self.model.permits(sender, receiver, performative):
            raise InteractionError(
                f"no interaction permits {performative.value} from {sender} to {receiver}"
            )

    def send(self, message: Message) -> Message:
        """Validate and enqueue ``message``; requests get a fresh conversation id."""
        perf = message.performative
        if perf is Performative.REPLY:
            expected = self.outstanding.get(message.conversation_id)
            if expected is None or expected[:2] != (message.receiver, message.sender):
                raise InteractionError(f"reply to unknown conversation {message.conversation_id}")
            del self.outstanding[message.conversation_id]
        else:
            self._check(message.sender, message.receiver, perf)
        if perf is Performative.GET_INFORMATION:
            conv = next(self._conversations)
            message = Message(message.sender, message.receiver, perf, message.payload, conv, self.tick)
            self.outstanding[conv] = (message.sender, message.receiver, message.payload)
        elif message.sent_tick != self.tick:
            message = Message(
                message.sender, message.receiver, perf, message.payload,
                message.conversation_id, self.tick,
            )
        self.pending.append(message)
        return message

    def inform(self, sender: str, receiver: str, fact: Fact) -> Message:
        return self.send(Message(sender, receiver, Performative.INFORM, fact))

    def get_information(self, sender: str, receiver: str, query: str) -> int:
        return self.send(Message(sender, receiver, Performative.GET_INFORMATION, query)).conversation_id

    def inform_about_constraints(self, sender: str, receiver: str, constraints: Iterable[Any]) -> Message:
        return self.send(
            Message(sender, receiver, Performative.INFORM_ABOUT_CONSTRAINTS, frozenset(constraints))
        )

    def accept_partnership(self, sender: str, receiver: str) -> Message:
        return self.send(Message(sender, receiver, Performative.ACCEPT_PARTNERSHIP))

    def reply(self, request: Message, value: Any) -> Message:
        return self.send(
            Message(
                request.receiver, request.sender, Performative.REPLY,
                Fact(request.payload, value), request.conversation_id,
            )
        )

    def deliver(self) -> list[Message]:
        """Move every message sent before the current tick into its mailbox."""
        due = [m for m in self.pending if m.sent_tick < self.tick]
        self.pending = [m for m in self.pending if m.sent_tick >= self.tick]
        for m in due:
            receiver = self.agents[m.receiver]
            receiver.mailbox.append(m)
            if m.performative is Performative.INFORM_ABOUT_CONSTRAINTS:
                receiver.constraints |= m.payload
            elif m.performative is Performative.ACCEPT_PARTNERSHIP:
                receiver.partnerships.add(m.sender)
                self.agents[m.sender].partnerships.add(m.receiver)
        return due

    def advance(self, tick: int) -> list[Message]:
        self.tick = tick
        return self.deliver()


# -- per-agent behaviour ------------------------------------------------------

@dataclass(frozen=True)
class Firing:
    """One reactive rule firing, before its effect is applied."""

    rule: int
    trigger: str
    call: str
    args: tuple[Any, ...]

    def as_dict(self) -> dict[str, Any]:
        return {"rule": self.rule, "trigger": self.trigger, "call": self.call, "args": list(self.args)}


@dataclass
class TickOutput:
    actions: list[ActionInstance] = field(default_factory=list)
    messages: list[Message] = field(default_factory=list)
    updates: list[tuple[str, Any]] = field(default_factory=list)
    fired: list[Firing] = field(default_factory=list)
    # index into ``fired`` for each message a rule produced
    sources: dict[int, int] = field(default_factory=dict)
    changes: list[dict[str, Any]] = field(default_factory=list)


def _bind(percept: Percept, params: Sequence[str]) -> dict[str, Any] | None:
    if not params:
        return {}
    if len(params) == 1:
        return {params[0]: percept.value}
    value = percept.value
    if isinstance(value, (list, tuple)) and len(value) == len(params):
        return dict(zip(params, value))
    return None


def _firings(agent: AgentInstance, percepts: Sequence[Percept]) -> list[Firing]:
    snapshot = dict(agent.attribute_store)
    out = []
    for index, rule in enumerate(agent.spec.stimulus_rules):
        for p in percepts:
            if p.name != rule.trigger:
                continue
            bound = _bind(p, rule.params)
            if bound is None:
                continue
            scope = {**snapshot, **bound}
            if not ex.holds(rule.cond, scope):
                continue
            call = rule.action
            try:
                if call.func == "set":
                    args = (call.args[0].id, ex.evaluate(call.args[1], scope))
                else:
                    args = tuple(ex.evaluate(a, scope) for a in call.args)
            except ex.EvalError:
                continue
            out.append(Firing(index, rule.trigger, call.func, args))
    return out


def _instance(agent: AgentInstance, name: str, args: Sequence[Any], model: ModelSpec | None) -> ActionInstance:
    spec = model.action(name) if model is not None else None
    if spec is None:
        params = tuple((f"arg{i}", v) for i, v in enumerate(args))
    else:
        params = []
        for p, v in zip(spec.params, args):
            try:
                v = ex.coerce(v, p.kind)
            except TypeError:
                pass
            params.append((p.name, v))
        params = tuple(params)
    return ActionInstance(name, agent.id, params, agent.tick)


def react(
    agent: AgentInstance, percepts: Sequence[Percept], model: ModelSpec | None = None
) -> list[ActionInstance]:
    """Action firings of a reactive agent, in rule then percept order."""
    if agent.kind is not AgentKind.REACTIVE:
        raise ValueError(f"{agent.id} is {agent.kind.title}, not Reactive")
    return [
        _instance(agent, f.call, f.args, model)
        for f in _firings(agent, percepts)
        if f.call not in _BUILTIN_MESSAGES and f.call != "set"
    ]


_BUILTIN_MESSAGES = {
    "inform": Performative.INFORM,
    "get_information": Performative.GET_INFORMATION,
    "inform_about_constraints": Performative.INFORM_ABOUT_CONSTRAINTS,
    "accept_partnership": Performative.ACCEPT_PARTNERSHIP,
}


def _builtin_message(agent: AgentInstance, f: Firing) -> Message:
    perf = _BUILTIN_MESSAGES[f.call]
    to = str(f.args[0])
    if perf is Performative.INFORM:
        payload: Any = Fact(str(f.args[1]), f.args[2])
    elif perf is Performative.GET_INFORMATION:
        payload = str(f.args[1])
    elif perf is Performative.INFORM_ABOUT_CONSTRAINTS:
        payload = frozenset(f.args[1:])
    else:
        payload = None
    return Message(agent.id, to, perf, payload, None, agent.tick)


def _message_percepts(agent: AgentInstance, out: TickOutput) -> list[Percept]:
    """Drain the mailbox: answer queries and turn facts into percepts."""
    wanted = {p.name for p in agent.spec.perceptions if p.source == "agent"}
    wanted |= set(agent.spec.representations)
    percepts = []
    while agent.mailbox:
        m = agent.mailbox.popleft()
        if m.performative is Performative.GET_INFORMATION:
            out.messages.append(
                Message(agent.id, m.sender, Performative.REPLY, Fact(m.payload, agent.lookup(m.payload)),
                        m.conversation_id, agent.tick)
            )
        elif m.performative in (Performative.INFORM, Performative.REPLY):
            fact = m.payload
            if fact.key in wanted and fact.value is not NOT_KNOWN:
                percepts.append(Percept(m.sender, fact.key, fact.value, m.sent_tick))
    return percepts


def tick_agent(
    agent: AgentInstance, percepts: Sequence[Percept], model: ModelSpec | None = None
) -> TickOutput:
    """Run one agent for one tick.

    ``percepts`` are the environment percepts; message percepts from the
    mailbox are appended after them. Nothing is sent here: outgoing messages
    are returned for the scheduler to post.
    """
    out = TickOutput()
    percepts = list(percepts) + _message_percepts(agent, out)
    agent.percept_buffer = percepts
    for p in percepts:
        if p.name in agent.spec.representations:
            origin = None if p.source == "environment" else p.source
            agent.representations[p.name] = Represented(p.value, origin)

    kind = agent.kind
    if kind is AgentKind.REACTIVE:
        for f in _firings(agent, percepts):
            out.fired.append(f)
            if f.call == "set":
                out.updates.append(f.args)
            elif f.call in _BUILTIN_MESSAGES:
                out.sources[len(out.messages)] = len(out.fired) - 1
                out.messages.append(_builtin_message(agent, f))
            else:
                out.actions.append(_instance(agent, f.call, f.args, model))
    elif agent.cognition is not None:
        if kind is AgentKind.ADAPTIVE:
            knowledge = agent.cognition.knowledge
            changed = {
                p.name: p.value for p in percepts
                if p.name in knowledge and p.value != knowledge[p.name]
            }
            if changed:
                event = ChangeEvent(knowledge=changed)
                agent.cognition = change_information(agent.cognition, event)
                out.changes.append({"agent": agent.id, "knowledge": changed})
        before = agent.cognition.intentions
        agent.cognition, actions = deliberate(
            agent.cognition, percepts, actor=agent.id, tick=agent.tick, facts=agent.facts()
        )
        out.actions.extend(actions)
        for goal, it in sorted(agent.cognition.intentions.items()):
            prev = before.get(goal)
            if prev is None or prev.status != it.status:
                out.changes.append(
                    {"agent": agent.id, "intention": goal, "status": it.status, "cursor": it.cursor}
                )

    if kind is AgentKind.COMMUNICATIVE and model is not None:
        peers = model.peers(agent.id, Performative.INFORM)
        out.messages.extend(communicate(agent.id, agent.representations, peers, agent.tick))
    return out


# -- scheduler --------------------------------------------------------------

@dataclass
class StepRecord:
    tick: int
    percepts: dict[str, list[Percept]] = field(default_factory=dict)
    actions: list[ActionInstance] = field(default_factory=list)
    sent: list[Message] = field(default_factory=list)
    delivered: list[Message] = field(default_factory=list)
    fired: list[dict[str, Any]] = field(default_factory=list)
    notices: list[dict[str, Any]] = field(default_factory=list)
    changes: list[dict[str, Any]] = field(default_factory=list)

    def as_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {
            "percepts": {
                a: [[p.source, p.name, p.value] for p in ps] for a, ps in self.percepts.items() if ps
            },
            "actions": [a.as_list() for a in self.actions],
        }
        for name in ("sent", "delivered"):
            msgs = getattr(self, name)
            if msgs:
                out[name] = [m.as_dict() for m in msgs]
        for name in ("fired", "notices", "changes"):
            if getattr(self, name):
                out[name] = getattr(self, name)
        return out


class MultiAgentSystem:
    """All agents of a model, stepped in registration (declaration) order."""

    def __init__(self, model: ModelSpec):
        self.model = model
        self.agents: dict[str, AgentInstance] = {
            a.name: AgentInstance.from_spec(a, model) for a in model.agents
        }
        self.bus = MessageBus(model, self.agents)
        self.action_specs = {a.name: a for a in model.actions}

    def __getitem__(self, name: str) -> AgentInstance:
        return self.agents[name]

    def partnerships_symmetric(self) -> bool:
        return all(
            a.id in self.agents[b].partnerships
            for a in self.agents.values()
            for b in a.partnerships
        )

    def step(self, state: EnvState, spec: EnvironmentSpec, inbox: Sequence[Stimulus] = ()) -> StepRecord:
        tick = state.tick
        record = StepRecord(tick)
        record.delivered = self.bus.advance(tick)
        count = len(self.agents)
        for agent in self.agents.values():
            agent.tick = tick
            env_percepts = perceive_env(state, spec, agent.spec, count, inbox)
            out = tick_agent(agent, env_percepts, self.model)
            record.percepts[agent.id] = agent.percept_buffer
            record.actions.extend(out.actions)
            record.changes.extend(out.changes)
            statuses: dict[int, str] = {}
            for i, message in enumerate(out.messages):
                try:
                    record.sent.append(self.bus.send(message))
                    status = "ok"
                except InteractionError as err:
                    status = "rejected"
                    record.notices.append({"agent": agent.id, "code": err.code, "message": err.message})
                if i in out.sources:
                    statuses[out.sources[i]] = status
            for i, f in enumerate(out.fired):
                entry = {"agent": agent.id, **f.as_dict(), "status": statuses.get(i, "ok")}
                record.fired.append(entry)
            self._apply_updates(agent, out.updates, record)
        return record

    def _apply_updates(self, agent: AgentInstance, updates, record: StepRecord) -> None:
        kinds = {a.name: a.kind for a in agent.spec.attributes}
        for name, value in updates:
            try:
                value = ex.coerce(value, kinds[name])
            except (TypeError, KeyError):
                record.notices.append(
                    {"agent": agent.id, "code": "E-KIND-MISMATCH", "message": f"cannot set {name} to {value!r}"}
                )
                continue
            if agent.attribute_store.get(name) != value:
                agent.attribute_store[name] = value
                record.changes.append({"agent": agent.id, "attribute": name, "value": value})


def run_model(
    model: ModelSpec,
    ticks: int,
    seed: int | None = None,
    *,
    stimuli: Mapping[int, Sequence[Stimulus]] | None = None,
    substeps: int = DEFAULT_SUBSTEPS,
    dt: float = DEFAULT_DT,
) -> tuple[Trace, MultiAgentSystem]:
    system = MultiAgentSystem(model)
    trace = run_episode(
        model.environment, system, ticks, seed, stimuli=stimuli, substeps=substeps, dt=dt
    )
    return trace, system


# -- spheres of influence ------------------------------------------------------

@dataclass(frozen=True)
class DependencyGraph:
    nodes: tuple[str, ...]
    edges: tuple[tuple[str, str, tuple[str, ...]], ...]

    def has_edge(self, a: str, b: str) -> bool:
        a, b = sorted((a, b))
        return any(e[:2] == (a, b) for e in self.edges)

    def label(self, a: str, b: str) -> tuple[str, ...]:
        a, b = sorted((a, b))
        return next((e[2] for e in self.edges if e[:2] == (a, b)), ())

    def edge_lines(self) -> list[str]:
        return [f"{a} -- {b} [{', '.join(shared)}]" for a, b, shared in self.edges]

    def as_dict(self) -> dict[str, Any]:
        return {
            "nodes": list(self.nodes),
            "edges": [{"a": a, "b": b, "shared": list(s)} for a, b, s in self.edges],
        }


def write_sets(model: ModelSpec) -> dict[str, frozenset[str]]:
    sets = {a.name: set() for a in model.agents}
    for action in model.actions:
        sets.setdefault(action.actor, set()).update(e.var for e in action.effects)
    return {name: frozenset(vs) for name, vs in sets.items()}


def spheres_overlap(model: ModelSpec) -> DependencyGraph:
    """Agents are linked when the state variables their actions write intersect."""
    sets = write_sets(model)
    names = sorted(sets)
    edges = []
    for a, b in itertools.combinations(names, 2):
        shared = sets[a] & sets[b]
        if shared:
            edges.append((a, b, tuple(sorted(shared))))
    return DependencyGraph(tuple(names), tuple(edges))
