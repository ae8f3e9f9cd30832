from hypothesis import given, settings, strategies as st

from masforge.metamodel import AgentKind
from masforge.modelc import compile_source, load_model, raise_model
from masforge.modelc.lower import lower
from masforge.modelc.parser import SourceText, parse, strip_spans, tokenize
from masforge.modelc.printer import format_model

from modelgen import random_model_source

MINIMAL = "model M  environment E { deterministic: true static: true continuous: false }"


def test_minimal_model():
    tree, diags = parse(MINIMAL)
    assert diags == []
    assert tree.environment.name == "E" and tree.agents == ()


def test_chat_has_three_agent_blocks(corpus_paths):
    chat = next(p for p in corpus_paths if p.name == "chat.mas")
    tree, diags = parse(chat.read_text(), str(chat))
    assert not diags
    assert [a.name for a in tree.agents] == ["alice", "bob", "carol"]


def test_missing_brace_reported_at_opening_line():
    src = "model M\nenvironment E {\n  deterministic: true\nagent a: reactive {\n  role r\n}\n"
    _, diags = parse(src)
    assert diags[0].code == "E-UNCLOSED-BLOCK"
    assert diags[0].location == "<string>:2:15"


def test_parser_recovers_and_reports_several_errors():
    src = (
        "model M\n"
        "environment E { deterministic: maybe static: true continuous: false }\n"
        "agent a: reactive { role }\n"
        "agent b: reactive { role r }\n"
    )
    tree, diags = parse(src)
    assert len([d for d in diags if d.severity == "error"]) >= 2
    assert "b" in [a.name for a in tree.agents]


def test_unexpected_token_is_named():
    _, diags = parse("model M\nenvironment E { deterministic: true static: true continuous: false }\nbanana\n")
    assert diags and "banana" in diags[0].message


def test_duplicate_agent_reports_both_locations():
    src = MINIMAL + "\nagent a: reactive { role r }\nagent a: reactive { role r }\n"
    c = compile_source(src)
    dup = [d for d in c.diagnostics if d.code == "E-DUP-NAME"]
    assert dup and "<string>:2:1" in dup[0].message and "<string>:3:1" in dup[0].message


def test_unresolved_interaction_endpoint():
    src = MINIMAL + "\nagent a: reactive { role r }\ninteraction a <-> ghost allows Inform\n"
    assert "E-UNRESOLVED-AGENT" in [d.code for d in compile_source(src).diagnostics]


def test_reactive_with_beliefs_is_kind_error():
    src = MINIMAL + "\nagent a: reactive { role r\n beliefs { x = 1 } }\n"
    c = compile_source(src)
    assert not c.ok and "E-KIND-SECTION" in [d.code for d in c.diagnostics]


def test_chat_lowers_to_valid_model(chat_model):
    assert all(a.kind is AgentKind.REACTIVE for a in chat_model.agents)
    assert len(chat_model.actions) == 6


def test_tokenizer_keeps_comments_out():
    tokens, diags = tokenize(SourceText("<s>", "model M # note\n"))
    assert not diags
    assert "note" not in [t.text for t in tokens]


def test_spans_nest(corpus_paths):
    tree, _ = parse(corpus_paths[0].read_text())
    for agent in tree.agents:
        assert agent.span.line >= tree.environment.span.line


def _roundtrip(source: str) -> None:
    tree, diags = parse(source)
    assert not [d for d in diags if d.severity == "error"]
    printed = format_model(tree)
    again, diags2 = parse(printed)
    assert not diags2
    assert strip_spans(again) == strip_spans(tree)
    assert format_model(again) == printed


def test_corpus_roundtrip(corpus_paths):
    for path in corpus_paths:
        _roundtrip(path.read_text())


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000))
def test_random_model_roundtrip(seed):
    _roundtrip(random_model_source(seed))


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000))
def test_generated_models_validate(seed):
    c = compile_source(random_model_source(seed))
    assert c.ok, [str(d) for d in c.diagnostics]


def test_raise_then_lower_is_identity(corpus_paths):
    for path in corpus_paths:
        model = load_model(path)
        again, diags = lower(raise_model(model), str(path))
        assert not [d for d in diags if d.severity == "error"]
        assert again == model
