"""Syntax tree of ``.mas`` model files.

Every node records where it started; positions are excluded from equality so
that a reformatted file parses to an equal tree.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..expr import Call, Expr, Lit


@dataclass(frozen=True)
class Span:
    line: int
    col: int

    def __str__(self) -> str:
        return f"{self.line}:{self.col}"


NOSPAN = Span(0, 0)


def _span():
    return field(default=NOSPAN, compare=False, repr=False)


@dataclass(frozen=True)
class StateDecl:
    name: str
    kind: str
    value: Lit
    span: Span = _span()


@dataclass(frozen=True)
class EnvPerceptionDecl:
    name: str
    kind: str
    span: Span = _span()


@dataclass(frozen=True)
class DriftDecl:
    var: str
    expr: Expr
    span: Span = _span()


@dataclass(frozen=True)
class EnvBlock:
    name: str
    flags: tuple[tuple[str, bool], ...] = ()
    states: tuple[StateDecl, ...] = ()
    perceptions: tuple[EnvPerceptionDecl, ...] = ()
    drifts: tuple[DriftDecl, ...] = ()
    span: Span = _span()


@dataclass(frozen=True)
class NameDecl:
    """A bare identifier member: ``role x`` or ``representation x``."""

    name: str
    span: Span = _span()


@dataclass(frozen=True)
class PerceptionDecl:
    name: str
    kind: str
    source: str
    span: Span = _span()


@dataclass(frozen=True)
class AttributeDecl:
    name: str
    kind: str
    value: Lit
    span: Span = _span()


@dataclass(frozen=True)
class FactDecl:
    key: str
    value: Lit
    span: Span = _span()


@dataclass(frozen=True)
class DesireDecl:
    goal: str
    priority: int
    guard: Expr | None = None
    conflicts: tuple[str, ...] = ()
    span: Span = _span()


@dataclass(frozen=True)
class GoalDecl:
    goal: str
    priority: int
    action: Call
    guard: Expr | None = None
    conflicts: tuple[str, ...] = ()
    span: Span = _span()


@dataclass(frozen=True)
class IntentionDecl:
    goal: str
    plan: tuple[str, ...]
    span: Span = _span()


@dataclass(frozen=True)
class RuleDecl:
    event: str
    params: tuple[str, ...]
    action: Call
    cond: Expr | None = None
    span: Span = _span()


@dataclass(frozen=True)
class ScoreDecl:
    action: str
    score: Lit
    cond: Expr | None = None
    span: Span = _span()


@dataclass(frozen=True)
class AgentBlock:
    name: str
    kind: str
    roles: tuple[NameDecl, ...] = ()
    perceptions: tuple[PerceptionDecl, ...] = ()
    attributes: tuple[AttributeDecl, ...] = ()
    representations: tuple[NameDecl, ...] = ()
    knowledge: tuple[FactDecl, ...] = ()
    beliefs: tuple[FactDecl, ...] = ()
    desires: tuple[DesireDecl, ...] = ()
    goals: tuple[GoalDecl, ...] = ()
    intentions: tuple[IntentionDecl, ...] = ()
    rules: tuple[RuleDecl, ...] = ()
    scores: tuple[ScoreDecl, ...] = ()
    span: Span = _span()


@dataclass(frozen=True)
class ParamDecl:
    name: str
    kind: str
    span: Span = _span()


@dataclass(frozen=True)
class EffectDecl:
    var: str
    expr: Expr
    span: Span = _span()


@dataclass(frozen=True)
class ActionBlock:
    name: str
    actor: str
    params: tuple[ParamDecl, ...] = ()
    effects: tuple[EffectDecl, ...] = ()
    span: Span = _span()


@dataclass(frozen=True)
class InteractionDecl:
    left: str
    right: str
    performatives: tuple[str, ...]
    reflexive: bool = False
    span: Span = _span()


@dataclass(frozen=True)
class ModelAst:
    name: str
    environment: EnvBlock | None = None
    agents: tuple[AgentBlock, ...] = ()
    actions: tuple[ActionBlock, ...] = ()
    interactions: tuple[InteractionDecl, ...] = ()
    span: Span = _span()
