"""Deliberation engines of the cognitive family.

Cognitive and adaptive agents pick their best applicable goal. Intentional
(BDI) agents run revise -> generate -> filter -> select, and rational agents
additionally keep only the best-scoring candidate action.

All functions here are pure: they take snapshots and return new ones.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from types import MappingProxyType
from typing import Any, Callable, Iterable, Mapping, NamedTuple, Sequence

from . import expr as ex
from .environment import ActionInstance, Percept
from .errors import MasError, NoCandidateError, NoPlanError, UnknownKeyError
from .messages import Message
from .metamodel import (
    AgentKind,
    AgentSpec,
    DesireRule,
    Fact,
    ModelSpec,
    Performative,
    ScoreEntry,
)

log = logging.getLogger(__name__)

DEFAULT_COMMITMENT_BONUS = 1

ACTIVE, SUSPENDED, DONE = "active", "suspended", "done"

__all__ = [
    "Belief", "KnowledgeFact", "Desire", "Intention", "DesireRule", "ChangeEvent",
    "CognitionState", "Selection", "revise_beliefs", "generate_desires",
    "filter_desires", "actions_selection", "measure_performance", "decide",
    "deliberate", "change_information", "communicate", "close_conflicts",
]


@dataclass(frozen=True)
class Belief:
    key: str
    value: Any
    tick: int = 0
    origin: str = "initial"  # percept | message | initial


@dataclass(frozen=True)
class KnowledgeFact:
    key: str
    value: Any


@dataclass(frozen=True)
class Desire:
    goal_id: str
    priority: int
    conflicts: frozenset[str] = frozenset()


@dataclass(frozen=True)
class Intention:
    goal_id: str
    plan: tuple[str, ...]
    cursor: int = 0
    status: str = ACTIVE

    def __post_init__(self):
        if not 0 <= self.cursor <= len(self.plan):
            raise ValueError(f"cursor {self.cursor} outside plan of {len(self.plan)}")
        if (self.status == DONE) != (self.cursor == len(self.plan)):
            raise ValueError("an intention is done exactly when its plan is exhausted")


def close_conflicts(rules: Iterable[DesireRule]) -> tuple[DesireRule, ...]:
    """Symmetric closure of the conflict relation over ``rules``."""
    rules = tuple(rules)
    extra: dict[str, set[str]] = {r.goal_id: set(r.conflicts) for r in rules}
    for r in rules:
        for other in r.conflicts:
            extra.setdefault(other, set()).add(r.goal_id)
    return tuple(
        replace(r, conflicts=tuple(sorted(extra[r.goal_id] - {r.goal_id}))) for r in rules
    )


# -- BDI pipeline -----------------------------------------------------------

def revise_beliefs(
    percepts: Iterable[Percept],
    beliefs: Mapping[str, Belief],
    kb: Mapping[str, Any],
    *,
    rejected: list[Percept] | None = None,
) -> dict[str, Belief]:
    """Fold percepts into the belief set, most recent tick winning per key.

    On equal ticks the later percept wins. Percepts about a knowledge-base
    key never become beliefs; contradicting ones are logged and collected in
    ``rejected``.
    """
    out = dict(beliefs)
    for p in percepts:
        if p.name in kb:
            if p.value != kb[p.name]:
                log.warning("percept %s=%r contradicts knowledge %r", p.name, p.value, kb[p.name])
                if rejected is not None:
                    rejected.append(p)
            continue
        current = out.get(p.name)
        if current is None or p.tick >= current.tick:
            origin = "percept" if p.source == "environment" else "message"
            out[p.name] = Belief(p.name, p.value, p.tick, origin)
    return out


def _scope(beliefs: Mapping[str, Belief], facts: Mapping[str, Any] | None) -> dict[str, Any]:
    scope = dict(facts or {})
    scope.update({k: b.value for k, b in beliefs.items()})
    return scope


def generate_desires(
    beliefs: Mapping[str, Belief],
    intentions: Mapping[str, Intention],
    rules: Iterable[DesireRule],
    *,
    facts: Mapping[str, Any] | None = None,
) -> list[Desire]:
    scope = _scope(beliefs, facts)
    done = {g for g, i in intentions.items() if i.status == DONE}
    desires = [
        Desire(r.goal_id, r.priority, frozenset(r.conflicts))
        for r in rules
        if r.goal_id not in done and ex.holds(r.guard, scope)
    ]
    return sorted(desires, key=lambda d: (-d.priority, d.goal_id))


def _conflict(a: Desire, b: Desire) -> bool:
    return b.goal_id in a.conflicts or a.goal_id in b.conflicts


def filter_desires(
    desires: Sequence[Desire],
    intentions: Mapping[str, Intention],
    *,
    bonus: int = DEFAULT_COMMITMENT_BONUS,
) -> list[Desire]:
    """Greedy maximal consistent subset of ``desires``.

    Desires are swept by effective priority (priority plus ``bonus`` when the
    goal already has an active intention), ties by goal id; each is kept
    unless it conflicts with one already kept.
    """

    def effective(d: Desire) -> int:
        it = intentions.get(d.goal_id)
        return d.priority + (bonus if it is not None and it.status == ACTIVE else 0)

    accepted: list[Desire] = []
    for d in sorted(desires, key=lambda d: (-effective(d), d.goal_id)):
        if not any(_conflict(d, a) for a in accepted):
            accepted.append(d)
    return accepted


class Selection(NamedTuple):
    actions: list[ActionInstance]
    intentions: dict[str, Intention]
    goals: list[str]  # goal behind each action


Binder = Callable[[str], ActionInstance]


def actions_selection(
    filtered: Sequence[Desire],
    intentions: Mapping[str, Intention],
    plans: Mapping[str, Sequence[str]],
    bind: Binder | None = None,
) -> Selection:
    """Advance one plan step for every surviving goal.

    Goals without an intention get one at cursor 0; intentions whose goal was
    filtered out are suspended and keep their cursor.
    """
    bind = bind or (lambda name: ActionInstance(name, ""))
    new = dict(intentions)
    surviving = [d.goal_id for d in filtered]
    for goal, it in intentions.items():
        if goal not in surviving and it.status == ACTIVE:
            new[goal] = replace(it, status=SUSPENDED)
    actions, goals = [], []
    for goal in surviving:
        it = new.get(goal)
        if it is None:
            if goal not in plans:
                raise NoPlanError(f"goal {goal!r} survived filtering but has no plan")
            plan = tuple(plans[goal])
            it = Intention(goal, plan, 0, DONE if not plan else ACTIVE)
        elif it.status == DONE:
            continue
        elif it.status == SUSPENDED:
            it = replace(it, status=ACTIVE)
        if it.cursor < len(it.plan):
            actions.append(bind(it.plan[it.cursor]))
            goals.append(goal)
            cursor = it.cursor + 1
            it = replace(it, cursor=cursor, status=DONE if cursor == len(it.plan) else ACTIVE)
        new[goal] = it
    return Selection(actions, new, goals)


def _score(action: str, scores: Iterable[ScoreEntry], scope: Mapping[str, Any]) -> float:
    matching = [s.score for s in scores if s.action == action and ex.holds(s.cond, scope)]
    return max(matching, default=0.0)


def measure_performance(
    percepts: Iterable[Percept],
    beliefs: Mapping[str, Belief],
    candidate_actions: Sequence[ActionInstance],
    scores: Iterable[ScoreEntry],
) -> ActionInstance:
    """Best-scoring candidate; ties go to the lexicographically least action name."""
    if not candidate_actions:
        raise NoCandidateError("no candidate action to measure")
    scope = _scope(beliefs, None)
    scope.update({p.name: p.value for p in percepts})
    scores = tuple(scores)
    ranked = sorted(
        enumerate(candidate_actions),
        key=lambda ia: (-_score(ia[1].action, scores, scope), ia[1].action, ia[0]),
    )
    return ranked[0][1]


# -- per-agent state --------------------------------------------------------

@dataclass(frozen=True)
class CognitionState:
    kind: AgentKind
    rules: tuple[DesireRule, ...] = ()
    beliefs: Mapping[str, Belief] = field(default_factory=dict)
    knowledge: Mapping[str, Any] = field(default_factory=dict)
    intentions: Mapping[str, Intention] = field(default_factory=dict)
    plans: Mapping[str, tuple[str, ...]] = field(default_factory=dict)
    scores: tuple[ScoreEntry, ...] = ()
    # action name -> ((param, kind), ...), for binding plan steps
    signatures: Mapping[str, tuple[tuple[str, str], ...]] = field(default_factory=dict)
    bonus: int = DEFAULT_COMMITMENT_BONUS

    def __post_init__(self):
        for name in ("beliefs", "knowledge", "intentions", "plans", "signatures"):
            value = getattr(self, name)
            if not isinstance(value, MappingProxyType):
                object.__setattr__(self, name, MappingProxyType(dict(value)))

    @classmethod
    def from_spec(
        cls, spec: AgentSpec, model: ModelSpec | None = None, *, bonus: int = DEFAULT_COMMITMENT_BONUS
    ) -> "CognitionState":
        bdi = spec.kind in (AgentKind.INTENTIONAL, AgentKind.RATIONAL)
        signatures = {}
        if model is not None:
            signatures = {
                a.name: tuple((p.name, p.kind) for p in a.params)
                for a in model.actions
                if a.actor == spec.name
            }
        return cls(
            kind=spec.kind,
            rules=close_conflicts(spec.desire_rules if bdi else spec.goals),
            beliefs={b.key: Belief(b.key, b.value, 0, "initial") for b in spec.beliefs},
            knowledge={k.key: k.value for k in spec.knowledge},
            plans={i.goal_id: i.plan for i in spec.intentions},
            scores=spec.scores,
            signatures=signatures,
            bonus=bonus,
        )

    def as_dict(self) -> dict[str, Any]:
        return {
            "beliefs": {k: [b.value, b.tick] for k, b in sorted(self.beliefs.items())},
            "intentions": {
                g: [i.cursor, i.status] for g, i in sorted(self.intentions.items())
            },
        }


def _bind_by_name(
    state: CognitionState, actor: str, tick: int, scope: Mapping[str, Any]
) -> Binder:
    def bind(name: str) -> ActionInstance:
        params = []
        for pname, kind in state.signatures.get(name, ()):
            value = scope.get(pname, ex.default_for(kind))
            try:
                value = ex.coerce(value, kind)
            except TypeError:
                value = ex.default_for(kind)
            params.append((pname, value))
        return ActionInstance(name, actor, tuple(params), tick)

    return bind


def _bind_call(
    state: CognitionState, call: ex.Call, actor: str, tick: int, scope: Mapping[str, Any]
) -> ActionInstance:
    sig = state.signatures.get(call.func, ())
    values = [ex.evaluate(a, scope) for a in call.args]
    params = []
    for (pname, kind), value in zip(sig, values):
        try:
            value = ex.coerce(value, kind)
        except TypeError:
            pass  # reported as an effect kind error when applied
        params.append((pname, value))
    return ActionInstance(call.func, actor, tuple(params), tick)


def deliberate(
    state: CognitionState,
    percepts: Sequence[Percept],
    *,
    actor: str,
    tick: int,
    facts: Mapping[str, Any] | None = None,
) -> tuple[CognitionState, list[ActionInstance]]:
    """One Decide() step; ``facts`` are the agent's attributes and representations."""
    facts = dict(facts or {})
    if state.kind in (AgentKind.COGNITIVE, AgentKind.ADAPTIVE):
        scope = {**state.knowledge, **facts, **{p.name: p.value for p in percepts}}
        for rule in sorted(state.rules, key=lambda r: (-r.priority, r.goal_id)):
            if rule.action is None or not ex.holds(rule.guard, scope):
                continue
            try:
                return state, [_bind_call(state, rule.action, actor, tick, scope)]
            except ex.EvalError:
                continue
        return state, []
    if state.kind not in (AgentKind.INTENTIONAL, AgentKind.RATIONAL):
        raise MasError(f"{state.kind.title} agents do not decide", code="E-KIND")

    beliefs = revise_beliefs(percepts, state.beliefs, state.knowledge)
    context = {**state.knowledge, **facts}
    desires = generate_desires(beliefs, state.intentions, state.rules, facts=context)
    filtered = filter_desires(desires, state.intentions, bonus=state.bonus)
    scope = _scope(beliefs, context)
    sel = actions_selection(filtered, state.intentions, state.plans, _bind_by_name(state, actor, tick, scope))
    actions, intentions = sel.actions, sel.intentions
    if state.kind is AgentKind.RATIONAL and len(actions) > 1:
        chosen = measure_performance(percepts, beliefs, actions, state.scores)
        keep = actions.index(chosen)
        for i, goal in enumerate(sel.goals):
            if i == keep:
                continue
            prev = state.intentions.get(goal)
            intentions[goal] = (
                replace(prev, status=ACTIVE) if prev is not None
                else Intention(goal, tuple(state.plans[goal]), 0, ACTIVE)
            )
        actions = [chosen]
    return replace(state, beliefs=beliefs, intentions=intentions), actions


def decide(agent, percepts: Sequence[Percept]) -> list[ActionInstance]:
    """Run Decide() for a live agent, updating its cognition state in place."""
    state, actions = deliberate(
        agent.cognition, percepts, actor=agent.id, tick=agent.tick, facts=agent.facts()
    )
    agent.cognition = state
    return actions


# -- adaptation and communication --------------------------------------------

@dataclass(frozen=True)
class ChangeEvent:
    knowledge: Mapping[str, Any] = field(default_factory=dict)
    priorities: Mapping[str, int] = field(default_factory=dict)

    def as_dict(self) -> dict[str, Any]:
        return {"knowledge": dict(self.knowledge), "priorities": dict(self.priorities)}


def change_information(state: CognitionState, event: ChangeEvent) -> CognitionState:
    """Replace knowledge facts and goal priorities; all or nothing."""
    if state.kind is not AgentKind.ADAPTIVE:
        raise MasError(f"{state.kind.title} agents cannot change information", code="E-KIND")
    unknown = [k for k in event.knowledge if k not in state.knowledge]
    goals = {r.goal_id for r in state.rules}
    unknown += [g for g in event.priorities if g not in goals]
    if unknown:
        raise UnknownKeyError(f"unknown keys {sorted(unknown)}")
    if not event.knowledge and not event.priorities:
        return state
    knowledge = {**state.knowledge, **event.knowledge}
    rules = tuple(
        replace(r, priority=event.priorities[r.goal_id]) if r.goal_id in event.priorities else r
        for r in state.rules
    )
    return replace(state, knowledge=knowledge, rules=rules)


@dataclass(frozen=True)
class Represented:
    """A representation fact and who it came from (``None`` for own percepts)."""

    value: Any
    origin: str | None = None


def communicate(
    sender: str,
    representations: Mapping[str, Represented],
    peers: Sequence[str],
    tick: int = 0,
) -> list[Message]:
    """One Inform per (known fact, linked peer), never echoed back to its origin."""
    out = []
    for key in sorted(representations):
        fact = representations[key]
        for peer in sorted(peers):
            if peer == fact.origin or peer == sender:
                continue
            out.append(Message(sender, peer, Performative.INFORM, Fact(key, fact.value), None, tick))
    return out
