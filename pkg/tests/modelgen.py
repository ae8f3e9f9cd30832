"""Random ``.mas`` sources built straight from the grammar.

Every generated model is meant to validate cleanly, so that it can also be
run; ``random_model_source(seed)`` is a pure function of ``seed``.
"""

from __future__ import annotations

import random

KINDS = ("reactive", "cognitive", "communicative", "adaptive", "intentional", "rational")
PERFORMATIVES = ("Inform", "GetInformation", "InformAboutConstraints", "AcceptPartnership")


def _real(rng: random.Random) -> str:
    return repr(round(rng.uniform(-5, 5), 2))


def random_model_source(seed: int) -> str:
    rng = random.Random(seed)
    deterministic = rng.random() < 0.5
    static = rng.random() < 0.3
    continuous = (not static) and rng.random() < 0.4
    lines = [f"model M{seed}", "", "environment World {"]
    lines += [
        f"  deterministic: {str(deterministic).lower()}",
        f"  static: {str(static).lower()}",
        f"  continuous: {str(continuous).lower()}",
    ]

    state: dict[str, str] = {"count": "int"}
    kinds_allowed = ("int", "real", "symbol") if continuous else ("int", "symbol")
    for i in range(rng.randint(0, 3)):
        state[f"v{i}"] = rng.choice(kinds_allowed)
    if continuous and "real" not in state.values():
        state["heat"] = "real"
    for name, kind in state.items():
        init = {"int": str(rng.randint(0, 5)), "real": _real(rng), "symbol": '"a"'}[kind]
        lines.append(f"  state {name}: {kind} = {init}")
    exposed = {n: k for n, k in state.items() if rng.random() < 0.8}
    exposed["count"] = "int"
    channels = {f"ev{i}": rng.choice(("int", "symbol")) for i in range(rng.randint(0, 2))}
    for name, kind in {**exposed, **channels}.items():
        lines.append(f"  perception {name}: {kind}")
    if not static:
        for name, kind in state.items():
            if kind == "int":
                step = "choice(0, 1, 2)" if not deterministic else "1"
                lines.append(f"  drift {name} := min({name} + {step}, 40)")
            elif kind == "real":
                rate = "dt * " if continuous else ""
                lines.append(f"  drift {name} := {name} + {rate}(1.0 - 0.25 * {name})")
    lines += ["}", ""]

    int_vars = [n for n, k in state.items() if k == "int"]
    names = [f"a{i}" for i in range(rng.randint(1, 4))]
    kinds = {n: rng.choice(KINDS) for n in names}
    actions: list[str] = []
    own: dict[str, list[tuple[str, bool]]] = {}
    for agent in names:
        own[agent] = []
        for j in range(rng.randint(1, 2)):
            act = f"{agent}_act{j}"
            target = rng.choice(int_vars)
            with_param = kinds[agent] in ("reactive", "cognitive", "adaptive") and rng.random() < 0.5
            params = "(n: int)" if with_param else "()"
            amount = "n" if with_param else str(rng.randint(1, 3))
            body = [f"  {target} := min({target} + {amount}, 60)"]
            others = [n for n, k in state.items() if n != target]
            if others and rng.random() < 0.5:
                other = rng.choice(others)
                value = {"int": f"max({other} - 1, 0)", "real": f"{other} * 0.5", "symbol": '"b"'}[state[other]]
                body.append(f"  {other} := {value}")
            actions += [f"action {act} by {agent} {params} {{", *body, "}", ""]
            own[agent].append((act, with_param))

    def perceive(block: list[str], count: int) -> list[str]:
        chosen = rng.sample(sorted(exposed | channels), min(count, len(exposed) + len(channels)))
        for p in chosen:
            kind = exposed.get(p) or channels[p]
            block.append(f"  perception {p}: {kind} from environment")
        return chosen

    def kind_of(p: str) -> str:
        return exposed.get(p) or channels.get(p) or "int"

    def cond(p: str) -> str:
        return {"int": f"{p} > {rng.randint(0, 6)}", "real": f"{p} < {_real(rng)}", "symbol": f'{p} == "a"'}[kind_of(p)]

    def call(act: str, with_param: bool, arg: str = "1") -> str:
        return f"{act}({arg})" if with_param else f"{act}()"

    agents: list[str] = []
    for agent in names:
        kind = kinds[agent]
        block = [f"agent {agent}: {kind} {{", f"  role r{rng.randint(0, 2)}"]
        seen = perceive(block, rng.randint(1, 3))
        if rng.random() < 0.5:
            block.append(f"  perception news: int from agent")
        block.append(f"  attribute level: int = {rng.randint(0, 3)}")
        acts = own[agent]
        if kind == "reactive":
            for p in seen:
                act, with_param = rng.choice(acts)
                arg = "v" if kind_of(p) == "int" else "level"
                guard = f" when {cond('v')}" if kind_of(p) != "real" and rng.random() < 0.5 and kind_of(p) == "int" else ""
                block.append(f"  rule on {p}(v){guard} => {call(act, with_param, arg)}")
            block.append(f"  rule on count(v) => set(level, min(level + 1, 9))")
            peers = [n for n in names if n != agent]
            if peers:
                block.append(f'  rule on count(v) when level > 2 => inform("{rng.choice(peers)}", "news", v)')
        elif kind in ("cognitive", "adaptive"):
            block.append("  representation news")
            if kind == "adaptive":
                block += ["  knowledge {", f"    limit = {rng.randint(1, 20)}", "  }"]
            for g, (act, with_param) in enumerate(acts):
                guard = f" when {cond(seen[0])}" if seen and rng.random() < 0.7 else ""
                block.append(f"  goal g{g} priority {rng.randint(0, 9)}{guard} => {call(act, with_param, 'level')}")
        elif kind == "communicative":
            block.append("  representation news")
            for p in seen:
                block.append(f"  representation {p}")
        else:
            block += ["  beliefs {", "    mood = 1", "  }"]
            goals = [f"d{i}" for i in range(rng.randint(1, 4))]
            for i, goal in enumerate(goals):
                guard = f" when {cond(seen[0])}" if seen and rng.random() < 0.6 else ""
                others = [x for x in goals if x != goal]
                conflicts = f" conflicts {rng.choice(others)}" if others and rng.random() < 0.4 else ""
                block.append(f"  desire {goal} priority {rng.randint(0, 9)}{guard}{conflicts}")
            plain = [a for a, p in acts if not p]
            for goal in goals:
                steps = [rng.choice(plain) for _ in range(rng.randint(1, 3))] if plain else []
                block.append(f"  intention {goal} plan [{', '.join(steps)}]")
            if kind == "rational":
                for a in plain:
                    block.append(f"  score {a} = {round(rng.random(), 2)}")
                    if seen:
                        block.append(f"  score {a} when {cond(seen[0])} = {round(rng.random(), 2)}")
        block += ["}", ""]
        agents += block

    inters = []
    for i, a in enumerate(names):
        for b in names[i + 1:]:
            if rng.random() < 0.6:
                perfs = rng.sample(PERFORMATIVES, rng.randint(1, 4))
                inters.append(f"interaction {a} <-> {b} allows {', '.join(perfs)}")
    return "\n".join(lines + agents + actions + inters) + "\n"


def random_desires(rng: random.Random, max_desires: int = 12):
    """Goals, priorities 0-9 and a random symmetric conflict graph."""
    from masforge.cognition import Desire

    n = rng.randint(0, max_desires)
    goals = [f"g{i:02d}" for i in range(n)]
    density = rng.random()
    conflicts: dict[str, set[str]] = {g: set() for g in goals}
    for i, a in enumerate(goals):
        for b in goals[i + 1:]:
            if rng.random() < density:
                conflicts[a].add(b)
                conflicts[b].add(a)
    desires = [Desire(g, rng.randint(0, 9), frozenset(conflicts[g])) for g in goals]
    return desires, conflicts


def random_percepts(rng: random.Random, keys: int = 6, length: int = 30, max_tick: int = 10):
    from masforge.environment import Percept

    names = [f"k{i}" for i in range(rng.randint(1, keys))]
    return [
        Percept(rng.choice(("environment", "peer")), rng.choice(names), rng.randint(0, 5), rng.randint(0, max_tick))
        for _ in range(rng.randint(0, length))
    ]
