"""Name resolution from the syntax tree to :class:`~masforge.metamodel.ModelSpec`.

Lowering is total: every problem becomes a diagnostic and the offending
declaration is dropped, so the result can always be handed to
:func:`~masforge.metamodel.validate_model`.
"""

from __future__ import annotations

from .. import expr as ex
from .. import metamodel as mm
from ..metamodel import Diagnostic
from . import ast

FLAG_DEFAULTS = {"deterministic": True, "static": True, "continuous": False}


class _Lowering:
    def __init__(self, path: str):
        self.path = path
        self.diagnostics: list[Diagnostic] = []

    def loc(self, span: ast.Span) -> str:
        return f"{self.path}:{span}"

    def error(self, code: str, message: str, span: ast.Span) -> None:
        self.diagnostics.append(Diagnostic("error", code, message, self.loc(span)))

    def warning(self, code: str, message: str, span: ast.Span) -> None:
        self.diagnostics.append(Diagnostic("warning", code, message, self.loc(span)))

    def value(self, lit: ex.Lit, kind: str):
        try:
            return ex.coerce(lit.value, kind)
        except (TypeError, KeyError):
            return lit.value  # validate_model reports the mismatch

    def environment(self, block: ast.EnvBlock | None) -> mm.EnvironmentSpec:
        if block is None:
            self.error("E-MISSING-ENV", "model declares no environment", ast.Span(1, 1))
            return mm.EnvironmentSpec("Environment")
        flags = dict(block.flags)
        for name, default in FLAG_DEFAULTS.items():
            if name not in flags:
                self.warning(
                    "W-DEFAULT-FLAG", f"{name} not declared, assuming {str(default).lower()}", block.span
                )
                flags[name] = default
        return mm.EnvironmentSpec(
            block.name,
            deterministic=flags["deterministic"],
            static=flags["static"],
            continuous=flags["continuous"],
            state_vars=tuple(
                mm.StateVar(s.name, s.kind, self.value(s.value, s.kind)) for s in block.states
            ),
            perceptions=tuple(mm.EnvPerception(p.name, p.kind) for p in block.perceptions),
            drift_rules=tuple(mm.DriftRule(d.var, d.expr) for d in block.drifts),
        )

    def agent(self, block: ast.AgentBlock) -> mm.AgentSpec | None:
        try:
            kind = mm.AgentKind(block.kind)
        except ValueError:
            self.error("E-BAD-KIND", f"unknown agent kind {block.kind!r}", block.span)
            return None

        def rule(d) -> mm.DesireRule:
            return mm.DesireRule(
                d.goal, d.priority, d.guard, d.conflicts, getattr(d, "action", None)
            )

        return mm.AgentSpec(
            name=block.name,
            kind=kind,
            roles=tuple(r.name for r in block.roles),
            perceptions=tuple(mm.PerceptDecl(p.name, p.kind, p.source) for p in block.perceptions),
            attributes=tuple(
                mm.AttributeDecl(a.name, a.kind, self.value(a.value, a.kind)) for a in block.attributes
            ),
            representations=tuple(r.name for r in block.representations),
            beliefs=tuple(mm.Fact(f.key, f.value.value) for f in block.beliefs),
            knowledge=tuple(mm.Fact(f.key, f.value.value) for f in block.knowledge),
            desire_rules=tuple(rule(d) for d in block.desires),
            goals=tuple(rule(g) for g in block.goals),
            intentions=tuple(mm.IntentionDecl(i.goal, i.plan) for i in block.intentions),
            stimulus_rules=tuple(
                mm.ReactiveRule(r.event, r.params, r.action, r.cond) for r in block.rules
            ),
            scores=tuple(mm.ScoreEntry(s.action, float(s.score.value), s.cond) for s in block.scores),
        )

    def performatives(self, decl: ast.InteractionDecl) -> tuple[mm.Performative, ...]:
        out = []
        for name in decl.performatives:
            try:
                perf = mm.Performative(name)
            except ValueError:
                perf = None
            if perf is None or perf not in mm.INTERACTION_PERFORMATIVES:
                self.error("E-BAD-PERFORMATIVE", f"unknown performative {name!r}", decl.span)
            elif perf not in out:
                out.append(perf)
        return tuple(out)


def lower(tree: ast.ModelAst, path: str = "<string>") -> tuple[mm.ModelSpec, list[Diagnostic]]:
    """Resolve names in ``tree`` and build the model it describes."""
    low = _Lowering(path)
    env = low.environment(tree.environment)

    seen: dict[str, ast.Span] = {}
    if tree.environment is not None:
        seen[env.name] = tree.environment.span

    def claim(name: str, span: ast.Span) -> bool:
        if name in seen:
            low.error(
                "E-DUP-NAME",
                f"{name!r} declared at {low.loc(seen[name])} and {low.loc(span)}",
                span,
            )
            return False
        seen[name] = span
        return True

    agents = []
    for block in tree.agents:
        if claim(block.name, block.span):
            spec = low.agent(block)
            if spec is not None:
                agents.append(spec)
    agent_names = {a.name for a in agents}

    actions = []
    for block in tree.actions:
        if not claim(block.name, block.span):
            continue
        if block.actor not in agent_names:
            low.error("E-UNRESOLVED-AGENT", f"action {block.name!r} names unknown actor {block.actor!r}", block.span)
            continue
        actions.append(
            mm.ActionSpec(
                block.name,
                block.actor,
                tuple(mm.Param(p.name, p.kind) for p in block.params),
                tuple(mm.Effect(e.var, e.expr) for e in block.effects),
            )
        )

    interactions = []
    for decl in tree.interactions:
        missing = [n for n in (decl.left, decl.right) if n not in agent_names]
        for n in dict.fromkeys(missing):
            low.error("E-UNRESOLVED-AGENT", f"interaction names unknown agent {n!r}", decl.span)
        if missing:
            continue
        interactions.append(
            mm.InteractionSpec(decl.left, decl.right, low.performatives(decl), decl.reflexive)
        )

    model = mm.ModelSpec(tree.name, env, tuple(agents), tuple(actions), tuple(interactions))
    return model, low.diagnostics


def raise_model(model: mm.ModelSpec) -> ast.ModelAst:
    """Inverse of :func:`lower`: the syntax tree that lowers back to ``model``."""
    env = model.environment

    def rule(d: mm.DesireRule, goal: bool):
        if goal:
            return ast.GoalDecl(d.goal_id, d.priority, d.action, d.guard, d.conflicts)
        return ast.DesireDecl(d.goal_id, d.priority, d.guard, d.conflicts)

    def agent(a: mm.AgentSpec) -> ast.AgentBlock:
        return ast.AgentBlock(
            a.name,
            a.kind.value,
            roles=tuple(ast.NameDecl(r) for r in a.roles),
            perceptions=tuple(ast.PerceptionDecl(p.name, p.kind, p.source) for p in a.perceptions),
            attributes=tuple(ast.AttributeDecl(x.name, x.kind, ex.Lit(x.default)) for x in a.attributes),
            representations=tuple(ast.NameDecl(r) for r in a.representations),
            knowledge=tuple(ast.FactDecl(f.key, ex.Lit(f.value)) for f in a.knowledge),
            beliefs=tuple(ast.FactDecl(f.key, ex.Lit(f.value)) for f in a.beliefs),
            desires=tuple(rule(d, False) for d in a.desire_rules),
            goals=tuple(rule(g, True) for g in a.goals),
            intentions=tuple(ast.IntentionDecl(i.goal_id, i.plan) for i in a.intentions),
            rules=tuple(ast.RuleDecl(r.trigger, r.params, r.action, r.cond) for r in a.stimulus_rules),
            scores=tuple(ast.ScoreDecl(s.action, ex.Lit(float(s.score)), s.cond) for s in a.scores),
        )

    return ast.ModelAst(
        model.name,
        ast.EnvBlock(
            env.name,
            (("deterministic", env.deterministic), ("static", env.static), ("continuous", env.continuous)),
            tuple(ast.StateDecl(v.name, v.kind, ex.Lit(v.initial)) for v in env.state_vars),
            tuple(ast.EnvPerceptionDecl(p.name, p.kind) for p in env.perceptions),
            tuple(ast.DriftDecl(d.var, d.expr) for d in env.drift_rules),
        ),
        tuple(agent(a) for a in model.agents),
        tuple(
            ast.ActionBlock(
                a.name, a.actor,
                tuple(ast.ParamDecl(p.name, p.kind) for p in a.params),
                tuple(ast.EffectDecl(e.var, e.expr) for e in a.effects),
            )
            for a in model.actions
        ),
        tuple(
            ast.InteractionDecl(i.initiator, i.responder, tuple(p.value for p in i.allowed), i.reflexive)
            for i in model.interactions
        ),
    )
