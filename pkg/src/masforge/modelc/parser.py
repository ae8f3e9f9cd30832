"""Lexer and recursive-descent parser for the ``.mas`` model language.

The parser never stops at the first error: a bad member is skipped up to the
next member keyword of its block, and a block that runs into a top-level
keyword is reported as unclosed at its opening brace.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field, replace
from pathlib import Path

from .. import expr as ex
from ..metamodel import Diagnostic
from . import ast

TOP_LEVEL = ("model", "environment", "agent", "action", "interaction")
ENV_MEMBERS = ("deterministic", "static", "continuous", "state", "perception", "drift")
AGENT_MEMBERS = (
    "role", "perception", "attribute", "representation", "knowledge", "beliefs",
    "desire", "goal", "intention", "rule", "score",
)

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<comment>\#[^\n]*)
  | (?P<real>\d+\.\d*(?:[eE][+-]?\d+)?|\d+[eE][+-]?\d+)
  | (?P<int>\d+)
  | (?P<string>"(?:[^"\\\n]|\\.)*")
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op><->|:=|=>|==|!=|<=|>=|[<>=+\-*/{}()\[\],:])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class SourceText:
    path: str
    contents: str
    line_starts: tuple[int, ...] = field(default=(), compare=False, repr=False)

    def __post_init__(self):
        starts = [0] + [i + 1 for i, ch in enumerate(self.contents) if ch == "\n"]
        object.__setattr__(self, "line_starts", tuple(starts))

    @classmethod
    def from_file(cls, path: str | Path) -> "SourceText":
        return cls(str(path), Path(path).read_text(encoding="utf-8"))

    def line(self, number: int) -> str:
        start = self.line_starts[number - 1]
        end = self.contents.find("\n", start)
        return self.contents[start:] if end < 0 else self.contents[start:end]


@dataclass(frozen=True)
class Token:
    kind: str  # ident | int | real | string | op | eof
    text: str
    line: int
    col: int

    @property
    def span(self) -> ast.Span:
        return ast.Span(self.line, self.col)

    def describe(self) -> str:
        return "end of input" if self.kind == "eof" else repr(self.text)


def tokenize(source: SourceText) -> tuple[list[Token], list[Diagnostic]]:
    text = source.contents
    tokens: list[Token] = []
    diags: list[Diagnostic] = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        col = pos - line_start + 1
        if m is None:
            bad = text[pos]
            message = "unterminated string" if bad == '"' else f"unexpected character {bad!r}"
            diags.append(
                Diagnostic("error", "E-SYNTAX", message, f"{source.path}:{line}:{col}")
            )
            end = text.find("\n", pos) if bad == '"' else pos + 1
            pos = len(text) if end < 0 else end
            continue
        kind = m.lastgroup
        value = m.group()
        if kind not in ("ws", "comment"):
            tokens.append(Token(kind, value, line, col))
        newlines = value.count("\n")
        if newlines:
            line += newlines
            line_start = pos + value.rfind("\n") + 1
        pos = m.end()
    col = pos - line_start + 1
    tokens.append(Token("eof", "", line, col))
    return tokens, diags


class _Abort(Exception):
    """Unwinds to the nearest recovery point after a diagnostic was recorded."""


class Parser:
    def __init__(self, source: SourceText):
        self.source = source
        self.tokens, self.diagnostics = tokenize(source)
        self.pos = 0

    # -- token helpers --------------------------------------------------

    @property
    def tok(self) -> Token:
        return self.tokens[self.pos]

    def peek(self, offset: int = 1) -> Token:
        return self.tokens[min(self.pos + offset, len(self.tokens) - 1)]

    def advance(self) -> Token:
        tok = self.tok
        if tok.kind != "eof":
            self.pos += 1
        return tok

    def at(self, text: str) -> bool:
        return self.tok.kind in ("op", "ident") and self.tok.text == text

    def at_top_level(self) -> bool:
        tok = self.tok
        if tok.kind != "ident" or tok.text not in TOP_LEVEL:
            return False
        prev = self.tokens[self.pos - 1] if self.pos else None
        return not (prev is not None and prev.kind == "ident" and prev.text == "from")

    def error(self, message: str, tok: Token | None = None, code: str = "E-SYNTAX") -> None:
        tok = tok or self.tok
        self.diagnostics.append(
            Diagnostic("error", code, message, f"{self.source.path}:{tok.line}:{tok.col}")
        )

    def fail(self, expected: str) -> _Abort:
        self.error(f"expected {expected}, found {self.tok.describe()}")
        return _Abort()

    def expect(self, text: str) -> Token:
        if not self.at(text):
            raise self.fail(repr(text))
        return self.advance()

    def ident(self, what: str = "identifier") -> Token:
        if self.tok.kind != "ident" or self.tok.text in TOP_LEVEL:
            raise self.fail(what)
        return self.advance()

    def ident_list(self) -> tuple[str, ...]:
        items = [self.ident().text]
        while self.at(","):
            self.advance()
            items.append(self.ident().text)
        return tuple(items)

    def sync(self, members: tuple[str, ...]) -> None:
        """Skip to the next member keyword or closing brace at this depth."""
        depth = 0
        while self.tok.kind != "eof" and not self.at_top_level():
            if depth == 0 and (self.at("}") or (self.tok.kind == "ident" and self.tok.text in members)):
                return
            if self.at("{"):
                depth += 1
            elif self.at("}"):
                depth -= 1
            self.advance()

    # -- literals and expressions -------------------------------------

    def literal(self) -> ex.Lit:
        tok = self.tok
        if self.at("-") and self.peek().kind in ("int", "real"):
            self.advance()
            return ex.Lit(-self.number(self.advance()))
        if tok.kind in ("int", "real"):
            return ex.Lit(self.number(self.advance()))
        if tok.kind == "string":
            return ex.Lit(self.string(self.advance()))
        if tok.kind == "ident" and tok.text in ("true", "false"):
            return ex.Lit(self.advance().text == "true")
        if tok.kind == "ident" and tok.text not in TOP_LEVEL:
            return ex.Lit(self.advance().text)
        raise self.fail("literal")

    def number(self, tok: Token):
        return float(tok.text) if tok.kind == "real" else int(tok.text)

    def string(self, tok: Token) -> str:
        try:
            return json.loads(tok.text)
        except json.JSONDecodeError:
            self.error("invalid escape in string", tok)
            return tok.text[1:-1]

    def expression(self) -> ex.Expr:
        return self.binary(1)

    def binary(self, level: int) -> ex.Expr:
        if level > 6:
            return self.unary()
        if level == 3:
            if self.at("not"):
                self.advance()
                return ex.Unary("not", self.binary(3))
            return self.binary(4)
        left = self.binary(level + 1)
        ops = [op for op, p in ex.BINARY_PRECEDENCE.items() if p == level]
        while self.tok.kind in ("op", "ident") and self.tok.text in ops:
            op = self.advance().text
            right = self.binary(level + 1)
            left = ex.Binary(op, left, right)
            if level == 4:
                break  # comparisons do not chain
        return left

    def unary(self) -> ex.Expr:
        if self.at("-"):
            if self.peek().kind in ("int", "real"):
                self.advance()
                return ex.Lit(-self.number(self.advance()))
            self.advance()
            return ex.Unary("-", self.unary())
        return self.atom()

    def atom(self) -> ex.Expr:
        tok = self.tok
        if tok.kind in ("int", "real"):
            return ex.Lit(self.number(self.advance()))
        if tok.kind == "string":
            return ex.Lit(self.string(self.advance()))
        if self.at("("):
            self.advance()
            inner = self.expression()
            self.expect(")")
            return inner
        if tok.kind == "ident" and tok.text in ("true", "false"):
            return ex.Lit(self.advance().text == "true")
        if tok.kind == "ident" and tok.text not in TOP_LEVEL and tok.text not in ("and", "or", "not"):
            self.advance()
            if self.at("("):
                return self.call_args(tok.text)
            return ex.Name(tok.text)
        raise self.fail("expression")

    def call_args(self, func: str) -> ex.Call:
        self.expect("(")
        args = []
        if not self.at(")"):
            args.append(self.expression())
            while self.at(","):
                self.advance()
                args.append(self.expression())
        self.expect(")")
        return ex.Call(func, tuple(args))

    def call(self) -> ex.Call:
        name = self.ident("action name").text
        return self.call_args(name)

    def optional_guard(self) -> ex.Expr | None:
        if self.at("when"):
            self.advance()
            return self.expression()
        return None

    # -- blocks ---------------------------------------------------------

    def block(self, members: tuple[str, ...], member_fn) -> None:
        """Parse ``{ member* }`` calling ``member_fn(keyword_token)`` per member."""
        opening = self.expect("{")
        while True:
            if self.at("}"):
                self.advance()
                return
            if self.tok.kind == "eof" or self.at_top_level():
                self.error(
                    "block opened here is never closed",
                    opening,
                    code="E-UNCLOSED-BLOCK",
                )
                return
            if self.tok.kind == "ident" and self.tok.text in members:
                try:
                    member_fn(self.advance())
                except _Abort:
                    self.sync(members)
            else:
                self.fail("member keyword or '}'")
                self.advance()
                self.sync(members)

    def environment(self) -> ast.EnvBlock:
        start = self.advance()
        name = self.ident("environment name").text
        flags: list[tuple[str, bool]] = []
        states, perceptions, drifts = [], [], []

        def member(kw: Token) -> None:
            if kw.text in ("deterministic", "static", "continuous"):
                self.expect(":")
                if not (self.tok.kind == "ident" and self.tok.text in ("true", "false")):
                    raise self.fail("true or false")
                flags.append((kw.text, self.advance().text == "true"))
            elif kw.text == "state":
                n = self.ident("state variable")
                self.expect(":")
                kind = self.ident("value kind").text
                self.expect("=")
                states.append(ast.StateDecl(n.text, kind, self.literal(), kw.span))
            elif kw.text == "perception":
                n = self.ident("perception name")
                self.expect(":")
                perceptions.append(ast.EnvPerceptionDecl(n.text, self.ident("value kind").text, kw.span))
            else:
                var = self.ident("state variable").text
                self.expect(":=")
                drifts.append(ast.DriftDecl(var, self.expression(), kw.span))

        self.block(ENV_MEMBERS, member)
        return ast.EnvBlock(name, tuple(flags), tuple(states), tuple(perceptions), tuple(drifts), start.span)

    def facts(self) -> list[ast.FactDecl]:
        out: list[ast.FactDecl] = []
        opening = self.expect("{")
        while not self.at("}"):
            if self.tok.kind == "eof" or self.at_top_level():
                self.error("block opened here is never closed", opening, code="E-UNCLOSED-BLOCK")
                return out
            try:
                key = self.ident("fact key")
                self.expect("=")
                out.append(ast.FactDecl(key.text, self.literal(), key.span))
            except _Abort:
                while not (self.at("}") or self.tok.kind == "eof" or self.at_top_level()):
                    self.advance()
        self.advance()
        return out

    def priority(self) -> int:
        self.expect("priority")
        if self.tok.kind != "int":
            raise self.fail("integer priority")
        return int(self.advance().text)

    def conflicts(self) -> tuple[str, ...]:
        if self.at("conflicts"):
            self.advance()
            return self.ident_list()
        return ()

    def agent(self) -> ast.AgentBlock:
        start = self.advance()
        name = self.ident("agent name").text
        self.expect(":")
        kind = self.ident("agent kind").text
        sections: dict[str, list] = {k: [] for k in (
            "roles", "perceptions", "attributes", "representations", "knowledge",
            "beliefs", "desires", "goals", "intentions", "rules", "scores",
        )}

        def member(kw: Token) -> None:
            k = kw.text
            if k == "role":
                sections["roles"].append(ast.NameDecl(self.ident("role name").text, kw.span))
            elif k == "representation":
                sections["representations"].append(ast.NameDecl(self.ident("fact key").text, kw.span))
            elif k == "perception":
                n = self.ident("perception name").text
                self.expect(":")
                vkind = self.ident("value kind").text
                self.expect("from")
                if not (self.at("environment") or self.at("agent")):
                    raise self.fail("'environment' or 'agent'")
                source = self.advance().text
                sections["perceptions"].append(ast.PerceptionDecl(n, vkind, source, kw.span))
            elif k == "attribute":
                n = self.ident("attribute name").text
                self.expect(":")
                vkind = self.ident("value kind").text
                self.expect("=")
                sections["attributes"].append(ast.AttributeDecl(n, vkind, self.literal(), kw.span))
            elif k in ("knowledge", "beliefs"):
                sections[k].extend(self.facts())
            elif k == "desire":
                goal = self.ident("goal id").text
                prio = self.priority()
                guard = self.optional_guard()
                sections["desires"].append(ast.DesireDecl(goal, prio, guard, self.conflicts(), kw.span))
            elif k == "goal":
                goal = self.ident("goal id").text
                prio = self.priority()
                guard = self.optional_guard()
                conflicts = self.conflicts()
                self.expect("=>")
                sections["goals"].append(ast.GoalDecl(goal, prio, self.call(), guard, conflicts, kw.span))
            elif k == "intention":
                goal = self.ident("goal id").text
                self.expect("plan")
                self.expect("[")
                plan: tuple[str, ...] = ()
                if not self.at("]"):
                    plan = self.ident_list()
                self.expect("]")
                sections["intentions"].append(ast.IntentionDecl(goal, plan, kw.span))
            elif k == "rule":
                self.expect("on")
                event = self.ident("event name").text
                self.expect("(")
                params: tuple[str, ...] = ()
                if not self.at(")"):
                    params = self.ident_list()
                self.expect(")")
                cond = self.optional_guard()
                self.expect("=>")
                sections["rules"].append(ast.RuleDecl(event, params, self.call(), cond, kw.span))
            elif k == "score":
                action = self.ident("action name").text
                cond = self.optional_guard()
                self.expect("=")
                lit = self.literal()
                if lit.kind not in ("int", "real"):
                    raise self.fail("numeric score")
                sections["scores"].append(ast.ScoreDecl(action, lit, cond, kw.span))

        self.block(AGENT_MEMBERS, member)
        return ast.AgentBlock(name, kind, **{k: tuple(v) for k, v in sections.items()}, span=start.span)

    def action(self) -> ast.ActionBlock:
        start = self.advance()
        name = self.ident("action name").text
        self.expect("by")
        actor = self.ident("agent name").text
        self.expect("(")
        params = []
        while not self.at(")"):
            if params:
                self.expect(",")
            p = self.ident("parameter name")
            self.expect(":")
            params.append(ast.ParamDecl(p.text, self.ident("value kind").text, p.span))
        self.advance()
        effects = []
        opening = self.expect("{")
        while not self.at("}"):
            if self.tok.kind == "eof" or self.at_top_level():
                self.error("block opened here is never closed", opening, code="E-UNCLOSED-BLOCK")
                return ast.ActionBlock(name, actor, tuple(params), tuple(effects), start.span)
            try:
                var = self.ident("state variable")
                self.expect(":=")
                effects.append(ast.EffectDecl(var.text, self.expression(), var.span))
            except _Abort:
                self.advance()
                self.sync(())
        self.advance()
        return ast.ActionBlock(name, actor, tuple(params), tuple(effects), start.span)

    def interaction(self) -> ast.InteractionDecl:
        start = self.advance()
        left = self.ident("agent name").text
        self.expect("<->")
        right = self.ident("agent name").text
        reflexive = False
        if self.at("reflexive"):
            self.advance()
            reflexive = True
        self.expect("allows")
        return ast.InteractionDecl(left, right, self.ident_list(), reflexive, start.span)

    def model(self) -> ast.ModelAst:
        name, span = "", ast.Span(1, 1)
        env = None
        agents, actions, interactions = [], [], []
        if self.at("model"):
            span = self.advance().span
            try:
                name = self.ident("model name").text
            except _Abort:
                pass
        else:
            self.fail("'model' header")
        while self.tok.kind != "eof":
            try:
                if self.at("environment"):
                    block = self.environment()
                    if env is not None:
                        self.error("second environment block", code="E-DUP-NAME")
                    else:
                        env = block
                elif self.at("agent"):
                    agents.append(self.agent())
                elif self.at("action"):
                    actions.append(self.action())
                elif self.at("interaction"):
                    interactions.append(self.interaction())
                elif self.at("model"):
                    self.error("duplicate model header")
                    self.advance()
                    self.advance()
                else:
                    raise self.fail("top-level declaration")
            except _Abort:
                self.advance()
                while self.tok.kind != "eof" and not self.at_top_level():
                    self.advance()
        return ast.ModelAst(name, env, tuple(agents), tuple(actions), tuple(interactions), span)


def parse(source: SourceText | str, path: str = "<string>") -> tuple[ast.ModelAst, list[Diagnostic]]:
    """Parse model text into an AST plus diagnostics (empty on success)."""
    if isinstance(source, str):
        source = SourceText(path, source)
    parser = Parser(source)
    tree = parser.model()
    return tree, parser.diagnostics


def strip_spans(node):
    """Copy of ``node`` with every span reset; handy for debugging equality."""
    if isinstance(node, tuple):
        return tuple(strip_spans(n) for n in node)
    if hasattr(node, "__dataclass_fields__") and hasattr(node, "span"):
        changes = {
            f: strip_spans(getattr(node, f))
            for f in node.__dataclass_fields__
            if f != "span"
        }
        return replace(node, span=ast.NOSPAN, **changes)
    return node
