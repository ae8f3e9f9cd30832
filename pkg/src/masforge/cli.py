"""``masforge`` command line: validate, generate, inspect and run model files.

Diagnostics go to stderr, artifacts and traces to stdout. Exit codes: 0 ok,
1 error diagnostics, 2 usage error, 3 I/O failure.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence, TextIO

from . import __version__
from .agents import MultiAgentSystem, run_model, spheres_overlap
from .chatapp import ChatSession, check_chat_model, run_interactive
from .environment import (
    DEFAULT_DT,
    DEFAULT_SUBSTEPS,
    Stimulus,
    canonical_line,
    drift,
    event_channels,
    initial_state,
    modif_state,
    parse_stimulus_script,
)
from .errors import GenerateError, MasError, ProfileError, ScriptError
from .metamodel import Diagnostic, flatten
from .modelc import DEFAULT_PROFILE, Compilation, compile_file, generate, pim_to_psm

EXIT_OK, EXIT_ERRORS, EXIT_USAGE, EXIT_IO = 0, 1, 2, 3
DEFAULT_TICKS = 10

_COLORS = {"error": "31", "warning": "33"}


@dataclass
class CommandOutcome:
    exit_code: int
    diagnostics: list[str] = field(default_factory=list)
    artifacts: list[str] = field(default_factory=list)


class _Io:
    def __init__(self, fmt: str, stdout: TextIO, stderr: TextIO):
        self.fmt, self.stdout, self.stderr = fmt, stdout, stderr
        self.outcome = CommandOutcome(EXIT_OK)
        self.color = (
            fmt == "text" and "MASFORGE_NO_COLOR" not in os.environ and getattr(stderr, "isatty", lambda: False)()
        )

    @property
    def machine(self) -> bool:
        return self.fmt == "machine"

    def out(self, line: str) -> None:
        print(line, file=self.stdout)

    def record(self, record: dict) -> None:
        self.out(canonical_line(record))

    def diagnostic(self, d: Diagnostic) -> None:
        text = canonical_line(d.as_dict()) if self.machine else str(d)
        if self.color and d.severity in _COLORS:
            shown = f"\033[{_COLORS[d.severity]}m{text}\033[0m"
        else:
            shown = text
        print(shown, file=self.stderr)
        self.outcome.diagnostics.append(text)
        if d.severity == "error":
            self.outcome.exit_code = max(self.outcome.exit_code, EXIT_ERRORS)

    def fail(self, code: str, message: str, location: str = "", exit_code: int = EXIT_ERRORS) -> int:
        self.diagnostic(Diagnostic("error", code, message, location))
        self.outcome.exit_code = exit_code
        return exit_code


def _compile(io: _Io, path: str) -> Compilation | None:
    try:
        result = compile_file(path)
    except (OSError, UnicodeDecodeError) as err:
        io.fail("E-IO", f"cannot read model: {err}", path, EXIT_IO)
        return None
    for d in result.diagnostics:
        io.diagnostic(d)
    return result if result.ok else None


# -- subcommands ------------------------------------------------------------

def _validate(io: _Io, args) -> None:
    result = _compile(io, args.file)
    if result is None:
        return
    model = result.model
    warnings = sum(d.severity == "warning" for d in result.diagnostics)
    if io.machine:
        io.record({"file": args.file, "ok": True, "model": model.name, "agents": len(model.agents), "warnings": warnings})
    else:
        io.out(f"{args.file}: model {model.name} is valid ({len(model.agents)} agents, {warnings} warnings)")


def _generate(io: _Io, args) -> None:
    result = _compile(io, args.file)
    if result is None:
        return
    try:
        plan = pim_to_psm(result.model, args.profile)
    except ProfileError as err:
        io.fail(err.code, err.message)
        return
    try:
        report = generate(plan, args.out)
    except GenerateError as err:
        io.fail(err.code, err.message, str(err.path or ""), EXIT_IO)
        return
    for orphan in report.orphans:
        io.diagnostic(Diagnostic("warning", "W-ORPHAN", "no longer generated; left in place", str(Path(args.out) / orphan)))
    io.outcome.artifacts = [str(Path(args.out) / p) for p in plan.paths]
    if io.machine:
        io.record({"out": args.out, "digest": plan.digest(), **report.as_dict()})
    else:
        io.out(f"{args.out}: {report.summary()}")
        for p in report.created:
            io.out(f"  created {p}")
        for p in report.updated:
            io.out(f"  updated {p}")


def _inspect(io: _Io, args) -> None:
    result = _compile(io, args.file)
    if result is None:
        return
    model = result.model
    if args.classes:
        for cls in flatten(model).classes:
            if io.machine:
                io.record({
                    "class": cls.title, "stereotype": cls.stereotype, "kind": cls.kind,
                    "attributes": [str(m) for m in cls.attributes], "operations": list(cls.operations),
                })
            else:
                label = f"{cls.stereotype} {cls.title}" + (f" ({cls.kind})" if cls.kind else "")
                io.out(label)
                for m in cls.attributes:
                    io.out(f"  {m}")
                for op in cls.operations:
                    io.out(f"  {op}()")
    if args.deps or not args.classes:
        graph = spheres_overlap(model)
        if io.machine:
            for a, b, shared in graph.edges:
                io.record({"a": a, "b": b, "shared": list(shared)})
        else:
            for line in graph.edge_lines():
                io.out(line)
            if not graph.edges:
                io.out("(no overlapping spheres of influence)")


def _describe_step(record: dict) -> str:
    values = " ".join(f"{k}={v!r}" for k, v in sorted(record["state"]["values"].items()))
    acts = ", ".join(
        f"{actor}.{name}({', '.join(f'{k}={v!r}' for k, v in params.items())})"
        for actor, name, params in record.get("actions", [])
    )
    parts = [f"tick {record['tick']:>4} | {values}"]
    if acts:
        parts.append(f"acts: {acts}")
    if record.get("sent"):
        parts.append(f"sent {len(record['sent'])}")
    return " | ".join(parts)


def _emit_trace(io: _Io, records: list[dict]) -> None:
    for r in records:
        if io.machine:
            io.record(r)
        elif r["phase"] == "init":
            io.out("init      | " + " ".join(f"{k}={v!r}" for k, v in sorted(r["state"]["values"].items())))
        else:
            io.out(_describe_step(r))
        for n in r.get("notices", []):
            io.diagnostic(Diagnostic("warning", n["code"], n["message"], f"tick {r['tick']} {n['agent']}"))


def _run(io: _Io, args, stdin: TextIO) -> None:
    result = _compile(io, args.file)
    if result is None:
        return
    model = result.model
    agents = [a.name for a in model.agents]
    if args.interactive:
        _interactive(io, model, args, stdin)
        return
    stimuli: dict[int, list[Stimulus]] = {}
    if args.script:
        try:
            text = Path(args.script).read_text(encoding="utf-8")
        except (OSError, UnicodeDecodeError) as err:
            io.fail("E-IO", f"cannot read script: {err}", args.script, EXIT_IO)
            return
        try:
            stimuli = parse_stimulus_script(text, model.environment, agents)
        except ScriptError as err:
            io.fail(err.code, err.message, args.script)
            return
    ticks = args.ticks
    if ticks is None:
        ticks = max(stimuli) + 2 if stimuli else DEFAULT_TICKS
    try:
        trace, _ = run_model(model, ticks, args.seed, stimuli=stimuli, substeps=args.substeps, dt=args.dt)
    except MasError as err:
        io.fail(err.code, err.message)
        return
    _emit_trace(io, [r.as_dict() for r in trace.records])


def _interactive(io: _Io, model, args, stdin: TextIO) -> None:
    if not check_chat_model(model):
        session = ChatSession(model, args.seed)
        transcript = run_interactive(session, stdin, io.stdout, echo_help=not io.machine)
        if io.machine:
            for line in transcript.lines():
                io.out(line)
        return
    # Generic loop: each line "<agent> <channel> [value]" is one tick; empty line waits.
    env = model.environment
    agents = [a.name for a in model.agents]
    system = MultiAgentSystem(model)
    state = initial_state(env, args.seed)
    _emit_trace(io, [{"phase": "init", "tick": 0, "state": state.as_dict()}])
    if not io.machine:
        io.out(f"channels: {', '.join(event_channels(env)) or '(none)'}; 'quit' ends")
    for line in stdin:
        if line.strip() == "quit":
            break
        stimuli = []
        if line.strip():
            try:
                stimuli = parse_stimulus_script(f"{state.tick} {line.strip()}", env, agents)[state.tick]
            except ScriptError as err:
                print(f"error: {err}", file=io.stderr)  # bad input line; keep going
                continue
        tick = state.tick
        state, drift_path = drift(state, env, substeps=args.substeps, dt=args.dt)
        step = system.step(state, env, stimuli)
        state, _ = modif_state(state, env, step.actions, system.action_specs, substeps=args.substeps)
        _emit_trace(io, [{"phase": "step", "tick": tick, "state": state.as_dict(), **step.as_dict()}])


# -- entry points -------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("text", "machine"), default="text", help="output style")

    parser = argparse.ArgumentParser(prog="masforge", description="Multi-agent model toolchain.")
    parser.add_argument("--version", action="version", version=f"masforge {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="command")
    sub.required = True

    p = sub.add_parser("validate", parents=[common], help="parse, lower and validate a model")
    p.add_argument("file")

    p = sub.add_parser("generate", parents=[common], help="generate a code scaffold")
    p.add_argument("file")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--profile", default=DEFAULT_PROFILE, help="template set")

    p = sub.add_parser("inspect", parents=[common], help="show model structure")
    p.add_argument("file")
    p.add_argument("--deps", action="store_true", help="sphere-of-influence dependency edges")
    p.add_argument("--classes", action="store_true", help="flattened class model")

    p = sub.add_parser("run", parents=[common], help="simulate a model and print its trace")
    p.add_argument("file")
    p.add_argument("--ticks", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--substeps", type=int, default=DEFAULT_SUBSTEPS)
    p.add_argument("--dt", type=float, default=DEFAULT_DT)
    source = p.add_mutually_exclusive_group()
    source.add_argument("--script", help="stimulus script: '<tick> <agent> <channel> [value]' per line")
    source.add_argument("--interactive", action="store_true", help="read stimuli from the terminal")
    return parser


def run_command(
    argv: Sequence[str],
    *,
    stdout: TextIO | None = None,
    stderr: TextIO | None = None,
    stdin: TextIO | None = None,
) -> CommandOutcome:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        old = sys.stdout, sys.stderr
        sys.stdout, sys.stderr = stdout, stderr  # argparse prints help and usage here
        try:
            args = parser.parse_args(list(argv))
        finally:
            sys.stdout, sys.stderr = old
    except SystemExit as exc:
        code = exc.code if isinstance(exc.code, int) else EXIT_USAGE
        return CommandOutcome(code)
    if getattr(args, "ticks", None) is not None and args.ticks < 0:
        print("masforge run: --ticks must be non-negative", file=stderr)
        return CommandOutcome(EXIT_USAGE)
    io = _Io(args.format, stdout, stderr)
    if args.command == "validate":
        _validate(io, args)
    elif args.command == "generate":
        _generate(io, args)
    elif args.command == "inspect":
        _inspect(io, args)
    else:
        _run(io, args, stdin or sys.stdin)
    return io.outcome


def main(argv: Sequence[str] | None = None) -> int:
    return run_command(sys.argv[1:] if argv is None else argv).exit_code


if __name__ == "__main__":
    sys.exit(main())
