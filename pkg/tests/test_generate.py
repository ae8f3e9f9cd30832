import ast
import json
import os
import random
import re
from dataclasses import replace

import pytest
from filelock import FileLock
from hypothesis import HealthCheck, given, settings, strategies as st

from masforge.errors import GenerateError, ProfileError
from masforge.metamodel import EnvironmentSpec, ModelSpec, flatten
from masforge.modelc import generate, merge, pim_to_psm
import importlib
from masforge.modelc.generate import LOCK, MANIFEST, extract_regions, tree_digest
from masforge.modelc.plan import ScaffoldPlan, TemplateSet

from edits import bodies, inject

generate_module = importlib.import_module("masforge.modelc.generate")


def test_chat_plan_layout(chat_model):
    plan = pim_to_psm(chat_model)
    agents = [p for p in plan.paths if p.startswith("core/agents/")]
    assert agents == ["core/agents/alice.py", "core/agents/bob.py", "core/agents/carol.py"]
    assert "core/environment/ChatRoom.py" in plan.paths
    assert {"README.md", "pyproject.toml", "model/Chat.mas", "common/types.py", "app/main.py"} <= set(plan.paths)
    assert plan.paths == sorted(plan.paths)


def test_environment_only_plan():
    plan = pim_to_psm(ModelSpec("Empty", EnvironmentSpec("Room")))
    assert not [p for p in plan.paths if p.startswith("core/agents/")]
    assert "core/environment/Room.py" in plan.paths and "README.md" in plan.paths


def test_plan_is_pure(chat_model):
    assert pim_to_psm(chat_model) == pim_to_psm(chat_model)
    assert pim_to_psm(chat_model).digest() == pim_to_psm(chat_model).digest()


def test_unknown_profile(chat_model):
    with pytest.raises(ProfileError) as err:
        pim_to_psm(chat_model, "nope")
    assert err.value.code == "E-NO-PROFILE"


def test_plan_paths_must_be_sorted():
    with pytest.raises(ValueError):
        ScaffoldPlan("self", tuple(reversed(pim_to_psm(ModelSpec("M", EnvironmentSpec("E"))).files)))


def test_templates_placeholders_are_known():
    templates = TemplateSet.load("self")
    allowed = {"model_name", "profile", "environment", "agents", "actions", "interactions", "cls"}
    for role in ("agent", "environment", "common", "app", "manifest", "readme"):
        assert templates.placeholders(role) <= allowed


def test_generated_python_parses(chat_model, corpus_paths):
    from masforge.modelc import load_model

    for path in corpus_paths:
        for f in pim_to_psm(load_model(path)).files:
            if f.path.endswith(".py"):
                ast.parse(f.contents, f.path)


def test_each_operation_stubbed_once(corpus_paths):
    from masforge.modelc import load_model

    for path in corpus_paths:
        model = load_model(path)
        plan = pim_to_psm(model)
        for cls in flatten(model).of("agent"):
            text = plan.get(f"core/agents/{cls.title}.py").contents
            for op in cls.operations:
                assert len(re.findall(rf"^    def {re.escape(op)}_?\(", text, re.M)) == 1
                assert text.count(f"// <masforge:keep {cls.title}.{op}>") == 1


def test_fresh_generation(tmp_path, chat_model):
    plan = pim_to_psm(chat_model)
    report = generate(plan, tmp_path / "out")
    assert sorted(report.created) == plan.paths
    assert report.preserved == 0 and not report.updated
    for f in plan.files:
        assert (tmp_path / "out" / f.path).read_bytes() == f.contents.encode()
    manifest = json.loads((tmp_path / "out" / MANIFEST).read_text())
    assert manifest["files"] == plan.paths


def test_regeneration_is_stable(tmp_path, chat_model):
    plan = pim_to_psm(chat_model)
    generate(plan, tmp_path)
    first = tree_digest(tmp_path, plan.paths)
    report = generate(plan, tmp_path)
    assert sorted(report.unchanged) == plan.paths
    assert tree_digest(tmp_path, plan.paths) == first


def test_edit_inside_region_survives(tmp_path, chat_model):
    plan = pim_to_psm(chat_model)
    generate(plan, tmp_path)
    target = tmp_path / "core/agents/bob.py"
    text = target.read_text()
    edited = text.replace('raise NotImplementedError("bob.Run")', "return 'running'")
    target.write_text(edited)
    report = generate(plan, tmp_path)
    assert report.preserved == 1
    assert target.read_text() == edited


def test_edit_outside_region_is_overwritten(tmp_path, chat_model):
    plan = pim_to_psm(chat_model)
    generate(plan, tmp_path)
    target = tmp_path / "core/agents/bob.py"
    target.write_text(target.read_text().replace("class bob:", "class Bob:"))
    report = generate(plan, tmp_path)
    assert report.updated == ["core/agents/bob.py"]
    assert target.read_text() == plan.get("core/agents/bob.py").contents


def test_renamed_agent_leaves_orphan(tmp_path, chat_model):
    generate(pim_to_psm(chat_model), tmp_path)
    carol = chat_model.agent("carol")
    renamed = replace(
        chat_model,
        agents=tuple(replace(a, name="dave") if a is carol else a for a in chat_model.agents),
        actions=tuple(replace(a, actor="dave") if a.actor == "carol" else a for a in chat_model.actions),
        interactions=tuple(
            replace(i, responder="dave") if i.responder == "carol" else i for i in chat_model.interactions
        ),
    )
    report = generate(pim_to_psm(renamed), tmp_path)
    assert report.orphans == ["core/agents/carol.py"]
    assert (tmp_path / "core/agents/carol.py").exists()
    assert "core/agents/dave.py" in report.created


def test_merge_without_existing():
    assert merge("x\n", None) == ("x\n", 0)


def test_merge_ignores_unknown_regions():
    fresh = "# // <masforge:keep a>\nfresh\n# // </masforge:keep>\n"
    old = "# // <masforge:keep b>\nold\n# // </masforge:keep>\n"
    assert merge(fresh, old) == (fresh, 0)


def test_lock_held_elsewhere(tmp_path, chat_model, monkeypatch):
    monkeypatch.setattr(generate_module, "LOCK_TIMEOUT", 0.05)
    tmp_path.mkdir(exist_ok=True)
    with FileLock(str(tmp_path / LOCK)):
        with pytest.raises(GenerateError):
            generate(pim_to_psm(chat_model), tmp_path)


def test_failed_commit_rolls_back(tmp_path, chat_model, monkeypatch):
    plan = pim_to_psm(chat_model)
    generate(plan, tmp_path)
    target = tmp_path / "core/agents/alice.py"
    target.write_text(target.read_text().replace("class alice:", "class Alice:"))
    target2 = tmp_path / "core/agents/bob.py"
    target2.write_text(target2.read_text().replace("class bob:", "class Bob:"))
    before = {p: (tmp_path / p).read_bytes() for p in plan.paths}
    real = os.replace
    calls = []

    def flaky(src, dst):
        calls.append(dst)
        if len(calls) == 2:
            raise OSError("disk full")
        return real(src, dst)

    monkeypatch.setattr(generate_module.os, "replace", flaky)
    with pytest.raises(GenerateError):
        generate(plan, tmp_path)
    monkeypatch.setattr(generate_module.os, "replace", real)
    assert {p: (tmp_path / p).read_bytes() for p in plan.paths} == before
    assert not [p for p in tmp_path.iterdir() if p.name.startswith(".masforge-staging-")]


@settings(max_examples=25, deadline=None, suppress_health_check=[HealthCheck.function_scoped_fixture])
@given(st.integers(0, 2**32 - 1))
def test_random_region_edits_survive(tmp_path_factory, chat_model, seed):
    out = tmp_path_factory.mktemp("gen")
    plan = pim_to_psm(chat_model)
    generate(plan, out)
    rng = random.Random(seed)
    py_files = [p for p in plan.paths if p.endswith(".py") or p.endswith(".md")]
    for _ in range(5):
        inject(out / rng.choice(py_files), rng)
    expected = {p: bodies(out / p) for p in py_files}
    generate(plan, out)
    assert {p: bodies(out / p) for p in py_files} == expected
    for p in py_files:
        assert extract_regions((out / p).read_text()) == expected[p]
