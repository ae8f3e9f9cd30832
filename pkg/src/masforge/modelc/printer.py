"""Canonical formatter for model ASTs.

``format_model(parse(format_model(tree)))`` equals ``format_model(tree)`` for
every tree the parser produces.
"""

from __future__ import annotations

from ..expr import Call, Expr, Lit, format_literal, to_source
from . import ast

INDENT = "  "


def _lit(value: Lit) -> str:
    return format_literal(value.value)


def _guard(expr: Expr | None) -> str:
    return f" when {to_source(expr)}" if expr is not None else ""


def _call(call: Call) -> str:
    return to_source(call)


def _environment(env: ast.EnvBlock) -> list[str]:
    lines = [f"environment {env.name} {{"]
    lines += [f"{INDENT}{name}: {format_literal(value)}" for name, value in env.flags]
    lines += [f"{INDENT}state {s.name}: {s.kind} = {_lit(s.value)}" for s in env.states]
    lines += [f"{INDENT}perception {p.name}: {p.kind}" for p in env.perceptions]
    lines += [f"{INDENT}drift {d.var} := {to_source(d.expr)}" for d in env.drifts]
    lines.append("}")
    return lines


def _facts(keyword: str, facts: tuple[ast.FactDecl, ...]) -> list[str]:
    if not facts:
        return []
    lines = [f"{INDENT}{keyword} {{"]
    lines += [f"{INDENT * 2}{f.key} = {_lit(f.value)}" for f in facts]
    lines.append(f"{INDENT}}}")
    return lines


def _agent(agent: ast.AgentBlock) -> list[str]:
    lines = [f"agent {agent.name}: {agent.kind} {{"]
    lines += [f"{INDENT}role {r.name}" for r in agent.roles]
    lines += [
        f"{INDENT}perception {p.name}: {p.kind} from {p.source}" for p in agent.perceptions
    ]
    lines += [
        f"{INDENT}attribute {a.name}: {a.kind} = {_lit(a.value)}" for a in agent.attributes
    ]
    lines += [f"{INDENT}representation {r.name}" for r in agent.representations]
    lines += _facts("knowledge", agent.knowledge)
    lines += _facts("beliefs", agent.beliefs)
    for d in agent.desires:
        conflicts = f" conflicts {', '.join(d.conflicts)}" if d.conflicts else ""
        lines.append(f"{INDENT}desire {d.goal} priority {d.priority}{_guard(d.guard)}{conflicts}")
    for g in agent.goals:
        conflicts = f" conflicts {', '.join(g.conflicts)}" if g.conflicts else ""
        lines.append(
            f"{INDENT}goal {g.goal} priority {g.priority}{_guard(g.guard)}{conflicts}"
            f" => {_call(g.action)}"
        )
    lines += [f"{INDENT}intention {i.goal} plan [{', '.join(i.plan)}]" for i in agent.intentions]
    for r in agent.rules:
        lines.append(
            f"{INDENT}rule on {r.event}({', '.join(r.params)}){_guard(r.cond)} => {_call(r.action)}"
        )
    lines += [f"{INDENT}score {s.action}{_guard(s.cond)} = {_lit(s.score)}" for s in agent.scores]
    lines.append("}")
    return lines


def _action(action: ast.ActionBlock) -> list[str]:
    params = ", ".join(f"{p.name}: {p.kind}" for p in action.params)
    lines = [f"action {action.name} by {action.actor} ({params}) {{"]
    lines += [f"{INDENT}{e.var} := {to_source(e.expr)}" for e in action.effects]
    lines.append("}")
    return lines


def _interaction(inter: ast.InteractionDecl) -> str:
    reflexive = " reflexive" if inter.reflexive else ""
    return (
        f"interaction {inter.left} <-> {inter.right}{reflexive} "
        f"allows {', '.join(inter.performatives)}"
    )


def format_model(tree: ast.ModelAst) -> str:
    chunks: list[list[str]] = [[f"model {tree.name}"]]
    if tree.environment is not None:
        chunks.append(_environment(tree.environment))
    chunks += [_agent(a) for a in tree.agents]
    chunks += [_action(a) for a in tree.actions]
    if tree.interactions:
        chunks.append([_interaction(i) for i in tree.interactions])
    return "\n\n".join("\n".join(c) for c in chunks) + "\n"
