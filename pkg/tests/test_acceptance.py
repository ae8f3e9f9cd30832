"""End-to-end acceptance checks, each with its own time budget.

Every check records one PASS/FAIL line, printed again in the terminal summary.
"""

import hashlib
import io
import random
import time
from pathlib import Path

from masforge.chatapp import run_chat
from masforge.cli import run_command
from masforge.cognition import filter_desires, measure_performance, revise_beliefs
from masforge.environment import ActionInstance
from masforge.metamodel import ScoreEntry, validate_model
from masforge.modelc import generate, load_model, pim_to_psm
from masforge.modelc.parser import parse, strip_spans
from masforge.modelc.printer import format_model

from edits import bodies, inject
from matrix import ALLOWED, KINDS, SECTION_VALUES, model_with
from modelgen import random_desires, random_model_source, random_percepts
from oracles import argmax_action, independent, last_writer_wins, maximal_independent

ROOT = Path(__file__).parent.parent
EXAMPLE_CHAT = ROOT / "examples" / "chat.mas"


def cli(*argv):
    out, err = io.StringIO(), io.StringIO()
    outcome = run_command([str(a) for a in argv], stdout=out, stderr=err)
    return outcome.exit_code, out.getvalue(), err.getvalue()


def tree_hash(root: Path) -> str:
    h = hashlib.sha256()
    for path in sorted(p for p in root.rglob("*") if p.is_file() and not p.name.startswith(".masforge.lock")):
        h.update(str(path.relative_to(root)).encode() + b"\0" + path.read_bytes() + b"\0")
    return h.hexdigest()


def finish(acceptance, name, started, budget, problems, detail=""):
    elapsed = time.perf_counter() - started
    if elapsed >= budget:
        problems.append(f"took {elapsed:.2f}s, budget {budget}s")
    passed = not problems
    summary = f"{elapsed:.2f}s (< {budget}s)" + (f"; {detail}" if detail else "")
    if problems:
        summary += "; " + "; ".join(problems[:3])
    acceptance(name, passed, summary)
    assert passed, problems


def test_pipeline_reproduction(acceptance, tmp_path):
    started = time.perf_counter()
    problems = []
    code, _, err = cli("validate", EXAMPLE_CHAT)
    if code != 0:
        problems.append(f"validate exited {code}: {err}")
    out = tmp_path / "build" / "chat"
    code, _, err = cli("generate", EXAMPLE_CHAT, "--out", out)
    if code != 0:
        problems.append(f"generate exited {code}: {err}")
    files = sorted(str(p.relative_to(out)) for p in out.rglob("*") if p.is_file())
    agents = [f for f in files if f.startswith("core/agents/")]
    if agents != ["core/agents/alice.py", "core/agents/bob.py", "core/agents/carol.py"]:
        problems.append(f"agent stubs {agents}")
    for needed in ("core/environment/ChatRoom.py", "pyproject.toml", "README.md"):
        if needed not in files:
            problems.append(f"missing {needed}")
    first = tree_hash(out)
    cli("generate", EXAMPLE_CHAT, "--out", out)
    if tree_hash(out) != first:
        problems.append("second generation changed the tree")
    other = tmp_path / "again"
    cli("generate", EXAMPLE_CHAT, "--out", other)
    if tree_hash(other) != first:
        problems.append("generation into a fresh directory differs")
    finish(acceptance, "pipeline reproduction", started, 5, problems, f"{len(files)} files")


def test_kind_section_matrix(acceptance):
    started = time.perf_counter()
    problems = []
    cases = 0
    for kind in KINDS:
        for section in sorted(ALLOWED):
            cases += 1
            report = validate_model(model_with(kind, **{section: SECTION_VALUES[section]}))
            flagged = "E-KIND-SECTION" in report.codes()
            if flagged != (kind not in ALLOWED[section]):
                problems.append(f"{kind.value}/{section}")
    if cases != 36:
        problems.append(f"{cases} cases")
    finish(acceptance, "kind-section matrix", started, 1, problems, f"{cases} cases")


def test_bdi_filter_suite(acceptance):
    started = time.perf_counter()
    rng = random.Random(20240611)
    failures = 0
    for _ in range(10_000):
        desires, conflicts = random_desires(rng)
        kept = {d.goal_id for d in filter_desires(desires, {})}
        if not (independent(kept, conflicts) and maximal_independent(kept, conflicts, conflicts)):
            failures += 1
    problems = [f"{failures} failures"] if failures else []
    finish(acceptance, "BDI filter suite", started, 30, problems, "10000 instances, 0 failures" if not failures else "")


def test_belief_revision_oracle(acceptance):
    started = time.perf_counter()
    rng = random.Random(7)
    mismatches = idempotence = 0
    for _ in range(1_000):
        percepts = random_percepts(rng, keys=8, length=40, max_tick=20)
        out = revise_beliefs(percepts, {}, {})
        oracle = last_writer_wins({}, [(p.name, p.value, p.tick) for p in percepts])
        if {k: (b.value, b.tick) for k, b in out.items()} != oracle:
            mismatches += 1
        if revise_beliefs(percepts, out, {}) != out:
            idempotence += 1
    problems = []
    if mismatches:
        problems.append(f"{mismatches} oracle mismatches")
    if idempotence:
        problems.append(f"{idempotence} idempotence failures")
    finish(acceptance, "belief revision oracle", started, 5, problems, "1000 sequences")


def test_determinism_replay(acceptance, tmp_path):
    started = time.perf_counter()
    problems = []
    for seed in range(100):
        path = tmp_path / f"m{seed}.mas"
        path.write_text(random_model_source(seed))
        first = cli("run", path, "--ticks", 200, "--seed", seed, "--format", "machine")
        second = cli("run", path, "--ticks", 200, "--seed", seed, "--format", "machine")
        if first[0] != 0:
            problems.append(f"model {seed} exited {first[0]}: {first[2][:200]}")
        elif first[1] != second[1] or len(first[1].splitlines()) != 201:
            problems.append(f"model {seed} traces differ")
    finish(acceptance, "determinism/replay", started, 60, problems, "100 models x 200 ticks x 2 runs")


def test_chat_golden_scenario(acceptance, golden):
    started = time.perf_counter()
    transcript = run_chat(load_model(EXAMPLE_CHAT), script=golden / "chat_s1.script")
    expected = (golden / "chat_s1.transcript").read_text()
    problems = [] if transcript.dumps() == expected else ["transcript differs from golden file"]
    finish(acceptance, "chat golden scenario", started, 1, problems, f"{len(transcript)} records")


def test_protected_region_preservation(acceptance, tmp_path):
    started = time.perf_counter()
    rng = random.Random(99)
    models = [load_model(ROOT / "examples" / n) for n in ("chat.mas", "warehouse.mas", "greenhouse.mas")]
    plans = [pim_to_psm(m) for m in models]
    outs = [tmp_path / m.name for m in models]
    for plan, out in zip(plans, outs):
        generate(plan, out)
    altered = 0
    expected: dict[Path, dict[str, str]] = {}
    for i in range(200):
        j = i % len(plans)
        plan, out = plans[j], outs[j]
        candidates = [out / p for p in plan.paths if p.endswith((".py", ".md"))]
        target = rng.choice(candidates)
        if inject(target, rng) is None:
            continue
        expected[target] = bodies(target)
        generate(plan, out)
        for path, regions in expected.items():
            if bodies(path) != regions:
                altered += 1
    problems = [f"{altered} protected regions altered"] if altered else []
    finish(acceptance, "protected-region preservation", started, 10, problems, "200 edits")


def test_parser_roundtrip(acceptance, corpus_paths):
    started = time.perf_counter()
    problems = []
    for path in corpus_paths:
        tree, diags = parse(path.read_text(), str(path))
        if [d for d in diags if d.severity == "error"]:
            problems.append(f"{path.name} does not parse")
            continue
        printed = format_model(tree)
        again, _ = parse(printed)
        if format_model(again) != printed:
            problems.append(f"{path.name}: print is not a fixed point")
        if strip_spans(again) != strip_spans(tree):
            problems.append(f"{path.name}: structure changed")
    finish(acceptance, "parser roundtrip", started, 5, problems, f"{len(corpus_paths)} corpus models")


def test_rational_argmax_invariance(acceptance):
    started = time.perf_counter()
    rng = random.Random(3)
    bad_scale = bad_tie = 0
    for _ in range(2_000):
        names = rng.sample("abcdefghij", rng.randint(1, 8))
        if rng.random() < 0.5:
            table = {n: rng.randint(0, 4) / 4 for n in names}  # ties are common
        else:
            table = {n: rng.random() for n in names}
        c = rng.uniform(1e-3, 1e3)
        cands = [ActionInstance(n, "r") for n in rng.sample(names, len(names))]
        base = measure_performance([], {}, cands, [ScoreEntry(k, v) for k, v in table.items()]).action
        scaled = measure_performance([], {}, cands, [ScoreEntry(k, v * c) for k, v in table.items()]).action
        if base != scaled:
            bad_scale += 1
        if base != argmax_action(table):
            bad_tie += 1
    problems = []
    if bad_scale:
        problems.append(f"{bad_scale} choices changed under scaling")
    if bad_tie:
        problems.append(f"{bad_tie} disagreements with the argmax oracle")
    finish(acceptance, "rational argmax invariance", started, 5, problems, "2000 tables")
