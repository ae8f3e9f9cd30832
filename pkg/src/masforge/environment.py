"""Executable environment: state snapshots, percepts, actions and drift.

Every source of randomness is a generator seeded by ``(rng_seed, tick,
phase)``, so a run is fully determined by the model, the seed and the
injected stimuli.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Any, Iterable, Mapping, Protocol, Sequence

import numpy as np

from . import expr as ex
from .errors import EffectKindError, PerceptionError, ScriptError
from .metamodel import AGENT_COUNT, ActionSpec, AgentSpec, EnvironmentSpec

DEFAULT_SUBSTEPS = 4
DEFAULT_DT = 1.0

_DRIFT_PHASE = 0
_EFFECT_PHASE = 1


@dataclass(frozen=True)
class EnvState:
    values: Mapping[str, Any]
    tick: int = 0
    rng_seed: int | None = None

    def __post_init__(self):
        if not isinstance(self.values, MappingProxyType):
            object.__setattr__(self, "values", MappingProxyType(dict(self.values)))
        if self.tick < 0:
            raise ValueError("tick must be non-negative")

    def __getitem__(self, name: str) -> Any:
        return self.values[name]

    def evolve(self, values: Mapping[str, Any] | None = None, tick: int | None = None) -> "EnvState":
        return EnvState(
            dict(self.values) if values is None else values,
            self.tick if tick is None else tick,
            self.rng_seed,
        )

    def as_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {"tick": self.tick, "values": dict(self.values)}
        if self.rng_seed is not None:
            out["rng_seed"] = self.rng_seed
        return out


@dataclass(frozen=True)
class Percept:
    source: str
    name: str
    value: Any
    tick: int

    def as_list(self) -> list[Any]:
        return [self.source, self.name, self.value]


@dataclass(frozen=True)
class Stimulus:
    """An external event (user input) addressed to one agent through the environment."""

    receiver: str
    name: str
    value: Any = None


@dataclass(frozen=True)
class ActionInstance:
    action: str
    actor: str
    params: tuple[tuple[str, Any], ...] = ()
    tick: int = 0

    def as_list(self) -> list[Any]:
        return [self.actor, self.action, dict(self.params)]


@dataclass(frozen=True)
class Trajectory:
    """States visited within one tick.

    ``start`` is the pre-state; ``substates[-1]`` is the post-state. There are
    ``K`` substates for continuous environments and one otherwise.
    """

    start: EnvState
    substates: tuple[EnvState, ...]

    @property
    def end(self) -> EnvState:
        return self.substates[-1]


def initial_state(spec: EnvironmentSpec, seed: int | None = None) -> EnvState:
    values = {v.name: ex.coerce(v.initial, v.kind) for v in spec.state_vars}
    rng_seed = None if spec.deterministic else int(seed or 0) % 2**64
    return EnvState(values, 0, rng_seed)


def stream(seed: int | None, tick: int, phase: int) -> np.random.Generator:
    return np.random.default_rng([int(seed or 0) % 2**64, tick, phase])


def _chooser(state: EnvState, spec: EnvironmentSpec, phase: int):
    if spec.deterministic:
        return None
    rng = stream(state.rng_seed, state.tick, phase)
    return lambda n: int(rng.integers(n))


def _store(spec: EnvironmentSpec, var: str, value: Any) -> Any:
    declared = spec.var(var)
    if declared is None:
        raise EffectKindError(var, "a declared variable", value)
    try:
        return ex.coerce(value, declared.kind)
    except TypeError:
        raise EffectKindError(var, declared.kind, value) from None


# -- perception -------------------------------------------------------------

def perceive_env(
    state: EnvState,
    spec: EnvironmentSpec,
    observer: AgentSpec,
    agent_count: int,
    inbox: Iterable[Stimulus] = (),
) -> list[Percept]:
    """Project ``state`` onto what ``observer`` declares it perceives.

    State-backed perceptions yield exactly one percept each, in declaration
    order, followed by ``agent_count``. Event channels (exposed perceptions
    with no state variable) yield one percept per stimulus addressed to the
    observer, in arrival order.
    """
    percepts: list[Percept] = []
    channels: set[str] = set()
    for decl in observer.perceptions:
        if decl.source != "environment" or decl.name == AGENT_COUNT:
            continue
        if spec.perception(decl.name) is None:
            raise PerceptionError(
                f"{observer.name} perceives {decl.name!r}, which {spec.name} does not expose"
            )
        if decl.name in state.values:
            percepts.append(Percept("environment", decl.name, state.values[decl.name], state.tick))
        else:
            channels.add(decl.name)
    percepts.append(Percept("environment", AGENT_COUNT, agent_count, state.tick))
    for s in inbox:
        if s.receiver == observer.name and s.name in channels:
            percepts.append(Percept("environment", s.name, s.value, state.tick))
    return percepts


def event_channels(spec: EnvironmentSpec) -> dict[str, str]:
    """Exposed perceptions with no backing state variable, with their kinds."""
    state = {v.name for v in spec.state_vars}
    return {p.name: p.kind for p in spec.perceptions if p.name not in state}


def _parse_value(text: str, kind: str):
    if kind == "symbol":
        return text
    if kind == "bool":
        if text not in ("true", "false"):
            raise ValueError(f"expected true or false, got {text!r}")
        return text == "true"
    return int(text) if kind == "int" else float(text)


def parse_stimulus_script(
    text: str, spec: EnvironmentSpec, agents: Sequence[str]
) -> dict[int, list[Stimulus]]:
    """Parse ``<tick> <agent> <channel> [value...]`` lines into stimuli by tick.

    The value is the rest of the line, read as the channel's kind; ``#``
    starts a comment line. Any malformed line aborts the whole script.
    """
    channels = event_channels(spec)
    known = set(agents)
    out: dict[int, list[Stimulus]] = {}
    for number, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split(None, 3)
        if len(parts) < 3:
            raise ScriptError("expected '<tick> <agent> <channel> [value]'", number)
        tick_text, agent, channel = parts[:3]
        rest = parts[3].strip() if len(parts) > 3 else ""
        try:
            tick = int(tick_text)
        except ValueError:
            raise ScriptError(f"bad tick {tick_text!r}", number) from None
        if tick < 0:
            raise ScriptError("tick must be non-negative", number)
        if agent not in known:
            raise ScriptError(f"unknown agent {agent!r}", number, code="E-UNKNOWN-AGENT")
        if channel not in channels:
            raise ScriptError(f"{spec.name} has no event channel {channel!r}", number)
        kind = channels[channel]
        try:
            value = _parse_value(rest, kind) if rest or kind == "symbol" else ex.default_for(kind)
        except ValueError as err:
            raise ScriptError(f"bad {kind} value: {err}", number) from None
        out.setdefault(tick, []).append(Stimulus(agent, channel, value))
    return dict(sorted(out.items()))


# -- state change -----------------------------------------------------------

def order_actions(actions: Iterable[ActionInstance]) -> list[ActionInstance]:
    """Joint-action order within a tick: submission tick, then actor name."""
    return sorted(actions, key=lambda a: (a.tick, a.actor))


def _interpolate(pre: EnvState, post: EnvState, spec: EnvironmentSpec, k: int) -> tuple[EnvState, ...]:
    reals = {v.name for v in spec.state_vars if v.kind == "real"}
    subs = []
    for i in range(1, k + 1):
        if i == k:
            subs.append(post)
            continue
        frac = i / k
        values = dict(pre.values)
        for name in reals:
            values[name] = pre.values[name] + (post.values[name] - pre.values[name]) * frac
        subs.append(EnvState(values, pre.tick, pre.rng_seed))
    return tuple(subs)


def modif_state(
    state: EnvState,
    spec: EnvironmentSpec,
    actions: Sequence[ActionInstance],
    action_specs: Mapping[str, ActionSpec] | Iterable[ActionSpec] = (),
    *,
    substeps: int = DEFAULT_SUBSTEPS,
) -> tuple[EnvState, Trajectory]:
    """Apply ``actions`` in joint-action order and advance the tick by one."""
    if not isinstance(action_specs, Mapping):
        action_specs = {a.name: a for a in action_specs}
    choose = _chooser(state, spec, _EFFECT_PHASE)
    values = dict(state.values)
    for inst in order_actions(actions):
        aspec = action_specs[inst.action]
        if len(inst.params) != len(aspec.params):
            raise ValueError(f"{inst.action} takes {len(aspec.params)} params, got {len(inst.params)}")
        params = dict(inst.params)
        for eff in aspec.effects:
            scope = {**values, **params}
            values[eff.var] = _store(spec, eff.var, ex.evaluate(eff.expr, scope, choose))
    post = EnvState(values, state.tick + 1, state.rng_seed)
    k = substeps if spec.continuous else 1
    return post, Trajectory(state, _interpolate(state, post, spec, k))


def drift(
    state: EnvState,
    spec: EnvironmentSpec,
    *,
    substeps: int = DEFAULT_SUBSTEPS,
    dt: float = DEFAULT_DT,
) -> tuple[EnvState, Trajectory]:
    """Autonomous evolution between two perceptions, with its trajectory.

    All drift rules of a (sub)step read the same pre-values. In a continuous
    environment real variables take ``substeps`` Euler steps of ``dt /
    substeps``; other variables change once, on the first substep.
    """
    if spec.static or not spec.drift_rules:
        return state, Trajectory(state, (state,))
    choose = _chooser(state, spec, _DRIFT_PHASE)
    kinds = {v.name: v.kind for v in spec.state_vars}
    k = substeps if spec.continuous else 1
    h = dt / k
    current = dict(state.values)
    subs = []
    for i in range(k):
        scope = {**current, "dt": h}
        updates = {}
        for rule in spec.drift_rules:
            if i > 0 and kinds[rule.var] != "real":
                continue
            updates[rule.var] = _store(spec, rule.var, ex.evaluate(rule.expr, scope, choose))
        current.update(updates)
        subs.append(EnvState(current, state.tick, state.rng_seed))
    return subs[-1], Trajectory(state, tuple(subs))


def autonomous_step(
    state: EnvState,
    spec: EnvironmentSpec,
    *,
    substeps: int = DEFAULT_SUBSTEPS,
    dt: float = DEFAULT_DT,
) -> EnvState:
    return drift(state, spec, substeps=substeps, dt=dt)[0]


# -- episodes and traces ----------------------------------------------------

def _json_default(value: Any) -> Any:
    if isinstance(value, (set, frozenset)):
        return sorted(value, key=repr)
    if hasattr(value, "as_json"):
        return value.as_json()
    raise TypeError(f"cannot serialize {value!r}")


def canonical_line(record: Mapping[str, Any]) -> str:
    """Key-sorted single-line JSON: the shared trace and transcript format."""
    return json.dumps(record, sort_keys=True, separators=(",", ":"), default=_json_default)


class AgentStep(Protocol):
    def as_dict(self) -> dict[str, Any]: ...

    @property
    def actions(self) -> Sequence[ActionInstance]: ...


class AgentPopulation(Protocol):
    """What :func:`run_episode` needs from the agents side."""

    action_specs: Mapping[str, ActionSpec]

    def step(self, state: EnvState, spec: EnvironmentSpec, inbox: Sequence[Stimulus]) -> AgentStep: ...


@dataclass
class TraceRecord:
    tick: int
    state: EnvState
    step: AgentStep | None = None
    trajectory: Trajectory | None = None
    drift: Trajectory | None = None

    def as_dict(self) -> dict[str, Any]:
        if self.step is None:
            return {"phase": "init", "tick": self.tick, "state": self.state.as_dict()}
        out = {"phase": "step", "tick": self.tick, "state": self.state.as_dict()}
        out.update(self.step.as_dict())
        if self.trajectory is not None and len(self.trajectory.substates) > 1:
            out["trajectory"] = [dict(s.values) for s in self.trajectory.substates]
        if self.drift is not None and len(self.drift.substates) > 1:
            out["drift"] = [dict(s.values) for s in self.drift.substates]
        return out


@dataclass
class Trace:
    records: list[TraceRecord] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    @property
    def final_state(self) -> EnvState:
        return self.records[-1].state

    def lines(self) -> list[str]:
        return [canonical_line(r.as_dict()) for r in self.records]

    def dumps(self) -> str:
        return "".join(line + "\n" for line in self.lines())


def run_episode(
    spec: EnvironmentSpec,
    agents: AgentPopulation,
    ticks: int,
    seed: int | None = None,
    *,
    stimuli: Mapping[int, Sequence[Stimulus]] | None = None,
    substeps: int = DEFAULT_SUBSTEPS,
    dt: float = DEFAULT_DT,
) -> Trace:
    """Run ``ticks`` rounds of drift, perceive, act and state update."""
    if ticks < 0:
        raise ValueError("ticks must be non-negative")
    stimuli = stimuli or {}
    state = initial_state(spec, seed)
    trace = Trace([TraceRecord(state.tick, state)])
    for _ in range(ticks):
        tick = state.tick
        state, drift_path = drift(state, spec, substeps=substeps, dt=dt)
        step = agents.step(state, spec, stimuli.get(tick, ()))
        state, path = modif_state(state, spec, step.actions, agents.action_specs, substeps=substeps)
        trace.records.append(TraceRecord(tick, state, step, path, drift_path))
    return trace
