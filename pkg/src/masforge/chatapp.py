"""Three-chatter application on top of the reactive runtime.

Users act on agents through environment stimuli (``declare``, ``say``,
``clear``). Transcripts are derived from what the runtime actually did:
delivered ``message`` informs become *received* records, successful
informs fired by ``say`` become *sent* records, and ``clear`` firings empty
both areas of their agent.

:func:`apply_chat_event` is an independent reference model of the same
rules, used to cross-check the runtime.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Iterable, Sequence, TextIO

from . import chat_model_path  # noqa: F401  (re-exported)
from .agents import MultiAgentSystem, StepRecord
from .environment import (
    EnvState,
    Stimulus,
    canonical_line,
    drift,
    initial_state,
    modif_state,
)
from .errors import ChatError, ScriptError
from .metamodel import AgentKind, ModelSpec, Performative

log = logging.getLogger(__name__)

DECLARE, SEND, CLEAR = "declare_receiver", "user_send", "user_clear"
SENT, RECEIVED = "sent", "received"
CLEARED = "CLEARED"
MESSAGE_KEY = "message"

_SCRIPT_VERBS = {"declare": DECLARE, "say": SEND, "clear": CLEAR}
_STIMULUS = {DECLARE: "declare", SEND: "say", CLEAR: "clear"}
# Within one tick an agent's sends go before its clears (rule order).
_KIND_RANK = {DECLARE: 0, SEND: 1, CLEAR: 2}


@dataclass(frozen=True)
class ChatEvent:
    kind: str
    agent: str
    tick: int = 0
    receiver: str | None = None
    text: str | None = None
    line: int = field(default=0, compare=False)

    def __post_init__(self):
        if self.kind not in _KIND_RANK:
            raise ValueError(f"unknown chat event kind {self.kind!r}")
        if self.kind == SEND and not self.text:
            raise ValueError("a send carries non-empty text")
        if self.kind == DECLARE and not self.receiver:
            raise ValueError("a declaration names a receiver")
        if self.tick < 0:
            raise ValueError("tick must be non-negative")

    def stimulus(self) -> Stimulus:
        value = {DECLARE: self.receiver, SEND: self.text, CLEAR: ""}[self.kind]
        return Stimulus(self.agent, _STIMULUS[self.kind], value)


@dataclass(frozen=True)
class TranscriptRecord:
    tick: int
    agent: str
    area: str
    text: str
    peer: str | None = None

    def as_dict(self) -> dict[str, Any]:
        return {"tick": self.tick, "agent": self.agent, "area": self.area, "text": self.text, "peer": self.peer}


@dataclass
class Transcript:
    """Append-only chat record list."""

    records: list[TranscriptRecord] = field(default_factory=list)

    def append(self, record: TranscriptRecord) -> None:
        self.records.append(record)

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Transcript) and self.records == other.records

    def lines(self) -> list[str]:
        return [canonical_line(r.as_dict()) for r in self.records]

    def dumps(self) -> str:
        return "".join(line + "\n" for line in self.lines())

    @classmethod
    def loads(cls, text: str) -> "Transcript":
        import json

        return cls([TranscriptRecord(**json.loads(line)) for line in text.splitlines() if line.strip()])

    def areas(self) -> dict[str, dict[str, list[tuple[str | None, str]]]]:
        """Current contents of every agent's sent and received areas."""
        out: dict[str, dict[str, list]] = {}
        for r in self.records:
            area = out.setdefault(r.agent, {SENT: [], RECEIVED: []})
            if r.text == CLEARED and r.peer is None:
                area[r.area] = []
            else:
                area[r.area].append((r.peer, r.text))
        return out


# -- scripts ----------------------------------------------------------------

def parse_script(text: str) -> list[ChatEvent]:
    """Parse ``<tick> <agent> declare|say|clear ...`` lines; ``#`` starts a comment."""
    events = []
    for number, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split(None, 3)
        if len(parts) < 3:
            raise ScriptError("expected '<tick> <agent> <verb> ...'", number)
        tick_text, agent, verb = parts[:3]
        rest = parts[3] if len(parts) > 3 else ""
        try:
            tick = int(tick_text)
        except ValueError:
            raise ScriptError(f"bad tick {tick_text!r}", number) from None
        if tick < 0:
            raise ScriptError("tick must be non-negative", number)
        kind = _SCRIPT_VERBS.get(verb)
        if kind is None:
            raise ScriptError(f"unknown verb {verb!r}", number)
        if kind == DECLARE:
            if len(rest.split()) != 1:
                raise ScriptError("declare takes exactly one receiver", number)
            events.append(ChatEvent(kind, agent, tick, receiver=rest.strip(), line=number))
        elif kind == SEND:
            if not rest.strip():
                raise ScriptError("say needs text", number)
            events.append(ChatEvent(kind, agent, tick, text=rest.strip(), line=number))
        else:
            if rest.strip():
                raise ScriptError("clear takes no arguments", number)
            events.append(ChatEvent(kind, agent, tick, line=number))
    return events


def load_script(path: str | Path) -> list[ChatEvent]:
    return parse_script(Path(path).read_text(encoding="utf-8"))


def check_events(events: Iterable[ChatEvent], agents: Sequence[str]) -> None:
    known = set(agents)
    for e in events:
        where = f" (line {e.line})" if e.line else ""
        if e.agent not in known:
            raise ChatError(f"unknown agent {e.agent!r}{where}")
        if e.kind == DECLARE:
            if e.receiver not in known:
                raise ChatError(f"unknown receiver {e.receiver!r}{where}")
            if e.receiver == e.agent:
                raise ChatError(f"{e.agent} cannot declare itself as receiver{where}")


def canonical_order(events: Iterable[ChatEvent], agents: Sequence[str]) -> list[ChatEvent]:
    index = {a: i for i, a in enumerate(agents)}
    return sorted(events, key=lambda e: (e.tick, index.get(e.agent, len(index)), _KIND_RANK[e.kind]))


def _ordered(records: Iterable[TranscriptRecord], agents: Sequence[str]) -> list[TranscriptRecord]:
    index = {a: i for i, a in enumerate(agents)}
    return sorted(
        records, key=lambda r: (r.tick, index[r.agent], 0 if r.area == RECEIVED and r.text != CLEARED else 1)
    )


# -- reference model ----------------------------------------------------------

@dataclass(frozen=True)
class ChatState:
    agents: tuple[str, ...]
    tick: int = 0
    declared: tuple[tuple[str, int, str], ...] = ()  # (agent, tick, receiver)
    sent: tuple[tuple[str, str, str], ...] = ()  # (agent, peer, text)
    received: tuple[tuple[str, str, str], ...] = ()
    in_flight: tuple[tuple[int, str, str, str], ...] = ()  # (due, sender, receiver, text)
    held: tuple[ChatEvent, ...] = ()
    records: tuple[TranscriptRecord, ...] = ()

    def area(self, agent: str, which: str) -> list[tuple[str, str]]:
        rows = self.sent if which == SENT else self.received
        return [(peer, text) for a, peer, text in rows if a == agent]

    def receiver(self, agent: str, tick: int) -> str | None:
        """Latest receiver declared by ``agent`` before ``tick``."""
        current = None
        for a, t, r in self.declared:
            if a == agent and t < tick:
                current = r
        return current

    def transcript(self) -> Transcript:
        return Transcript(_ordered(self.records, self.agents))


def advance(state: ChatState, tick: int) -> ChatState:
    """Deliver every in-flight message due by ``tick``."""
    if tick < state.tick:
        raise ValueError(f"cannot go back from tick {state.tick} to {tick}")
    due = [m for m in state.in_flight if m[0] <= tick]
    if not due:
        return replace(state, tick=tick)
    received, records = list(state.received), list(state.records)
    for when, sender, receiver, text in due:
        received.append((receiver, sender, text))
        records.append(TranscriptRecord(when, receiver, RECEIVED, text, sender))
    return replace(
        state,
        tick=tick,
        received=tuple(received),
        records=tuple(records),
        in_flight=tuple(m for m in state.in_flight if m[0] > tick),
    )


def apply_chat_event(state: ChatState, event: ChatEvent) -> ChatState:
    check_events([event], state.agents)
    state = advance(state, event.tick)
    t, who = event.tick, event.agent
    if event.kind == DECLARE:
        return replace(state, declared=state.declared + ((who, t, event.receiver),))
    if event.kind == SEND:
        to = state.receiver(who, t)
        if to is None:
            log.info("%s has no receiver yet; message held and dropped", who)
            return replace(state, held=state.held + (event,))
        return replace(
            state,
            sent=state.sent + ((who, to, event.text),),
            in_flight=state.in_flight + ((t + 1, who, to, event.text),),
            records=state.records + (TranscriptRecord(t, who, SENT, event.text, to),),
        )
    cleared = (TranscriptRecord(t, who, SENT, CLEARED), TranscriptRecord(t, who, RECEIVED, CLEARED))
    return replace(
        state,
        sent=tuple(row for row in state.sent if row[0] != who),
        received=tuple(row for row in state.received if row[0] != who),
        records=state.records + cleared,
    )


def replay(agents: Sequence[str], events: Iterable[ChatEvent]) -> ChatState:
    """Reference transcript: apply events in canonical order, then flush deliveries."""
    state = ChatState(tuple(agents))
    events = canonical_order(events, agents)
    for e in events:
        state = apply_chat_event(state, e)
    if events:
        state = advance(state, events[-1].tick + 1)
    return state


# -- runtime ------------------------------------------------------------------

def check_chat_model(model: ModelSpec) -> list[str]:
    """Reasons ``model`` cannot host the chat application (empty when it can)."""
    problems = []
    if not model.agents:
        problems.append("model has no agents")
    for agent in model.agents:
        if agent.kind is not AgentKind.REACTIVE:
            problems.append(f"{agent.name} is not reactive")
            continue
        env_percepts = {p.name for p in agent.perceptions if p.source == "environment"}
        for channel in _STIMULUS.values():
            if channel not in env_percepts:
                problems.append(f"{agent.name} does not perceive {channel}")
        calls = {(r.trigger, r.action.func) for r in agent.stimulus_rules}
        for needed in (("declare", "set"), ("say", "inform")):
            if needed not in calls:
                problems.append(f"{agent.name} lacks an 'on {needed[0]} => {needed[1]}' rule")
        if not any(r.trigger == "clear" for r in agent.stimulus_rules):
            problems.append(f"{agent.name} lacks an 'on clear' rule")
        if not any(p.name == MESSAGE_KEY and p.source == "agent" for p in agent.perceptions):
            problems.append(f"{agent.name} does not perceive {MESSAGE_KEY} from agents")
    return problems


def transcript_records(step: StepRecord, agents: Sequence[str]) -> list[TranscriptRecord]:
    """Chat records implied by one runtime step."""
    out = []
    for agent in agents:
        for m in step.delivered:
            if m.receiver == agent and m.performative is Performative.INFORM and m.payload.key == MESSAGE_KEY:
                out.append(TranscriptRecord(step.tick, agent, RECEIVED, str(m.payload.value), m.sender))
        for f in step.fired:
            if f["agent"] != agent:
                continue
            if f["trigger"] == "say" and f["call"] == "inform" and f["status"] == "ok":
                to, key, text = f["args"]
                if key == MESSAGE_KEY:
                    out.append(TranscriptRecord(step.tick, agent, SENT, str(text), str(to)))
            elif f["trigger"] == "clear":
                out.append(TranscriptRecord(step.tick, agent, SENT, CLEARED))
                out.append(TranscriptRecord(step.tick, agent, RECEIVED, CLEARED))
    return out


class ChatSession:
    """A chat run driven one tick at a time."""

    def __init__(self, model: ModelSpec, seed: int | None = None):
        problems = check_chat_model(model)
        if problems:
            raise ChatError("not a chat model: " + "; ".join(problems), code="E-NOT-CHAT")
        self.model = model
        self.system = MultiAgentSystem(model)
        self.agents = tuple(self.system.agents)
        self.state: EnvState = initial_state(model.environment, seed)
        self.transcript = Transcript()
        self.steps: list[StepRecord] = []

    @property
    def tick(self) -> int:
        return self.state.tick

    def step(self, events: Sequence[ChatEvent] = ()) -> list[TranscriptRecord]:
        check_events(events, self.agents)
        if any(e.tick != self.tick for e in events):
            raise ValueError(f"events must be stamped with the current tick {self.tick}")
        env = self.model.environment
        inbox = [e.stimulus() for e in canonical_order(events, self.agents)]
        state, _ = drift(self.state, env)
        record = self.system.step(state, env, inbox)
        self.state, _ = modif_state(state, env, record.actions, self.system.action_specs)
        self.steps.append(record)
        new = transcript_records(record, self.agents)
        for r in new:
            self.transcript.append(r)
        return new

    def run(self, events: Sequence[ChatEvent]) -> Transcript:
        check_events(events, self.agents)
        by_tick: dict[int, list[ChatEvent]] = {}
        for e in events:
            by_tick.setdefault(e.tick, []).append(e)
        if events:
            last = max(by_tick)
            while self.tick <= last + 1:
                self.step(by_tick.get(self.tick, []))
        return self.transcript


def render_areas(transcript: Transcript, agents: Sequence[str]) -> str:
    areas = transcript.areas()
    lines = []
    for agent in agents:
        area = areas.get(agent, {SENT: [], RECEIVED: []})
        lines.append(f"[{agent}]")
        for which, arrow in ((SENT, "->"), (RECEIVED, "<-")):
            shown = ", ".join(f"{arrow} {peer}: {text}" for peer, text in area[which]) or "(empty)"
            lines.append(f"  {which:<8} {shown}")
    return "\n".join(lines)


HELP = "commands: as <agent> | to <agent> | say <text> | clear | quit (empty line waits a tick)"


def interactive_events(line: str, speaker: str, tick: int) -> tuple[str, ChatEvent | None, bool]:
    """Interpret one terminal line: (speaker, event or None, quit?)."""
    words = line.strip().split(None, 1)
    if not words:
        return speaker, None, False
    verb, rest = words[0], (words[1].strip() if len(words) > 1 else "")
    if verb == "quit":
        return speaker, None, True
    if verb == "as":
        if not rest:
            raise ScriptError("as needs an agent name", 0)
        return rest, None, False
    if verb == "to":
        if len(rest.split()) != 1:
            raise ScriptError("to needs exactly one agent name", 0)
        return speaker, ChatEvent(DECLARE, speaker, tick, receiver=rest), False
    if verb == "say":
        if not rest:
            raise ScriptError("say needs text", 0)
        return speaker, ChatEvent(SEND, speaker, tick, text=rest), False
    if verb == "clear":
        return speaker, ChatEvent(CLEAR, speaker, tick), False
    raise ScriptError(f"unknown command {verb!r}; {HELP}", 0)


def run_interactive(
    session: ChatSession, stdin: TextIO, stdout: TextIO, *, echo_help: bool = True
) -> Transcript:
    """Terminal loop: every command (or empty line) is one tick."""
    speaker = session.agents[0]
    if echo_help:
        print(HELP, file=stdout)
    for line in stdin:
        try:
            chosen, event, done = interactive_events(line, speaker, session.tick)
            if chosen not in session.agents:
                raise ChatError(f"unknown agent {chosen!r}")
        except (ScriptError, ChatError) as err:
            print(f"error: {err}", file=stdout)
            continue
        speaker = chosen
        if done:
            break
        if event is None and line.strip():
            print(f"speaking as {speaker}", file=stdout)
            continue
        try:
            session.step([event] if event else [])
        except ChatError as err:
            print(f"error: {err}", file=stdout)
            continue
        print(f"-- tick {session.tick - 1}", file=stdout)
        print(render_areas(session.transcript, session.agents), file=stdout)
    session.step([])  # let the last messages arrive
    return session.transcript


def run_chat(
    model: ModelSpec,
    mode: str = "script",
    *,
    script: str | Path | None = None,
    events: Sequence[ChatEvent] | None = None,
    seed: int | None = None,
    stdin: TextIO | None = None,
    stdout: TextIO | None = None,
) -> Transcript:
    """Run the chat in ``script`` mode (from ``script`` or ``events``) or ``interactive`` mode."""
    import sys

    session = ChatSession(model, seed)
    if mode == "script":
        if events is None:
            events = load_script(script) if script is not None else []
        check_events(events, session.agents)
        return session.run(events)
    if mode == "interactive":
        return run_interactive(session, stdin or sys.stdin, stdout or sys.stdout)
    raise ValueError(f"unknown chat mode {mode!r}")
