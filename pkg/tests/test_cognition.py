import random

import pytest
from hypothesis import given, settings, strategies as st

from masforge.cognition import (
    ACTIVE,
    DONE,
    SUSPENDED,
    Belief,
    ChangeEvent,
    CognitionState,
    Desire,
    Intention,
    Represented,
    actions_selection,
    change_information,
    close_conflicts,
    communicate,
    deliberate,
    filter_desires,
    generate_desires,
    measure_performance,
    revise_beliefs,
)
from masforge.environment import ActionInstance, Percept
from masforge.errors import MasError, NoCandidateError, NoPlanError, UnknownKeyError
from masforge.expr import Binary, Call, Lit, Name
from masforge.metamodel import AgentKind, DesireRule, ScoreEntry

from modelgen import random_desires, random_percepts
from oracles import argmax_action, greedy_reference, independent, last_writer_wins, maximal_independent


def P(name, value, tick, source="environment"):
    return Percept(source, name, value, tick)


# -- belief revision ---------------------------------------------------------

def test_recency_wins():
    out = revise_beliefs([P("k", 2, 5)], {"k": Belief("k", 1, 2)}, {})
    assert out == {"k": Belief("k", 2, 5, "percept")}


def test_stale_percept_loses():
    out = revise_beliefs([P("k", 2, 1)], {"k": Belief("k", 1, 2)}, {})
    assert out["k"].value == 1


def test_knowledge_contradiction_is_discarded(caplog):
    rejected = []
    beliefs = {"x": Belief("x", 0)}
    out = revise_beliefs([P("door", "open", 3)], beliefs, {"door": "locked"}, rejected=rejected)
    assert out == beliefs
    assert rejected == [P("door", "open", 3)]
    assert "contradicts" in caplog.text


def test_message_origin():
    out = revise_beliefs([P("k", 1, 0, source="bob")], {}, {})
    assert out["k"].origin == "message"


@given(st.integers(0, 2**32 - 1))
def test_revision_matches_last_writer_wins(seed):
    rng = random.Random(seed)
    percepts = random_percepts(rng)
    initial = {"k0": Belief("k0", 9, rng.randint(0, 5))}
    kb = {"k1": 3} if rng.random() < 0.5 else {}
    out = revise_beliefs(percepts, initial, kb)
    oracle = last_writer_wins(
        {k: (b.value, b.tick) for k, b in initial.items()},
        [(p.name, p.value, p.tick) for p in percepts],
        kb,
    )
    assert {k: (b.value, b.tick) for k, b in out.items()} == oracle


@given(st.integers(0, 2**32 - 1))
def test_revision_idempotent(seed):
    rng = random.Random(seed)
    percepts = random_percepts(rng)
    once = revise_beliefs(percepts, {}, {})
    assert revise_beliefs(percepts, once, {}) == once


# -- desires ----------------------------------------------------------------

def test_no_guard_holds():
    rules = [DesireRule("g", 1, Binary(">", Name("x"), Lit(5)))]
    assert generate_desires({"x": Belief("x", 1)}, {}, rules) == []


def test_done_goal_excluded():
    rules = [DesireRule("g1", 1), DesireRule("g2", 2)]
    done = {"g2": Intention("g2", ("a",), 1, DONE)}
    assert [d.goal_id for d in generate_desires({}, done, rules)] == ["g1"]


def test_desires_sorted_by_priority():
    rules = [DesireRule("p5", 5), DesireRule("p3", 3), DesireRule("p4", 4)]
    assert [d.goal_id for d in generate_desires({}, {}, rules)] == ["p5", "p4", "p3"]


def test_close_conflicts_is_symmetric_and_irreflexive():
    rules = close_conflicts([DesireRule("a", 1, conflicts=("b", "a")), DesireRule("b", 1), DesireRule("c", 1, conflicts=("a",))])
    by = {r.goal_id: set(r.conflicts) for r in rules}
    assert by == {"a": {"b", "c"}, "b": {"a"}, "c": {"a"}}


# -- filter -----------------------------------------------------------------

def test_filter_hand_traced_example():
    desires = [Desire("a", 5, frozenset({"c"})), Desire("b", 3), Desire("c", 4, frozenset({"a"}))]
    out = {d.goal_id for d in filter_desires(desires, {})}
    assert out == {"a", "b"}
    conflicts = {"a": {"c"}, "c": {"a"}}
    assert maximal_independent(out, "abc", conflicts)


def test_filter_without_conflicts_is_identity():
    desires = [Desire("a", 1), Desire("b", 9), Desire("c", 4)]
    assert {d.goal_id for d in filter_desires(desires, {})} == {"a", "b", "c"}


def test_filter_all_conflicting_tie():
    goals = "zyx"
    desires = [Desire(g, 4, frozenset(set(goals) - {g})) for g in goals]
    assert [d.goal_id for d in filter_desires(desires, {})] == ["x"]


def test_commitment_bonus_keeps_active_intention():
    desires = [Desire("new", 5, frozenset({"old"})), Desire("old", 5, frozenset({"new"}))]
    active = {"old": Intention("old", ("a", "b"), 1, ACTIVE)}
    assert [d.goal_id for d in filter_desires(desires, active)] == ["old"]
    assert [d.goal_id for d in filter_desires(desires, active, bonus=0)] == ["new"]


@settings(max_examples=300)
@given(st.integers(0, 2**32 - 1))
def test_filter_independent_and_maximal(seed):
    desires, conflicts = random_desires(random.Random(seed))
    out = {d.goal_id for d in filter_desires(desires, {})}
    assert independent(out, conflicts)
    assert maximal_independent(out, conflicts, conflicts)
    assert out == greedy_reference({d.goal_id: d.priority for d in desires}, conflicts)


@given(st.integers(0, 2**32 - 1), st.randoms())
def test_filter_order_invariant(seed, shuffler):
    desires, _ = random_desires(random.Random(seed))
    shuffled = list(desires)
    shuffler.shuffle(shuffled)
    assert filter_desires(shuffled, {}) == filter_desires(desires, {})


# -- selection --------------------------------------------------------------

def test_empty_filter_suspends_everything():
    its = {"g": Intention("g", ("a", "b"), 1, ACTIVE)}
    sel = actions_selection([], its, {"g": ("a", "b")})
    assert sel.actions == [] and sel.intentions["g"].status == SUSPENDED and sel.intentions["g"].cursor == 1


def test_plan_advances_then_done():
    plans = {"g": ("x", "y")}
    first = actions_selection([Desire("g", 1)], {}, plans)
    second = actions_selection([Desire("g", 1)], first.intentions, plans)
    assert [a.action for a in first.actions + second.actions] == ["x", "y"]
    assert second.intentions["g"] == Intention("g", ("x", "y"), 2, DONE)


def test_suspended_goal_resumes_at_cursor():
    plans = {"g": ("x", "y", "z"), "h": ("w",)}
    s1 = actions_selection([Desire("g", 1)], {}, plans)
    s2 = actions_selection([Desire("h", 1)], s1.intentions, plans)
    assert s2.intentions["g"].status == SUSPENDED
    s3 = actions_selection([Desire("g", 1)], s2.intentions, plans)
    assert [a.action for a in s3.actions] == ["y"]


def test_missing_plan():
    with pytest.raises(NoPlanError) as err:
        actions_selection([Desire("g", 1)], {}, {})
    assert err.value.code == "E-NO-PLAN"


@pytest.mark.parametrize("cursor, status", [(0, DONE), (2, ACTIVE), (3, ACTIVE)])
def test_intention_invariant(cursor, status):
    with pytest.raises(ValueError):
        Intention("g", ("a", "b"), cursor, status)


# -- rational choice ---------------------------------------------------------

def acts(*names):
    return [ActionInstance(n, "r") for n in names]


def test_single_candidate():
    assert measure_performance([], {}, acts("only"), [ScoreEntry("only", 0.0)]).action == "only"


def test_argmax_and_tie():
    assert measure_performance([], {}, acts("a", "b"), [ScoreEntry("a", 0.2), ScoreEntry("b", 0.9)]).action == "b"
    assert measure_performance([], {}, acts("b", "a"), [ScoreEntry("a", 0.5), ScoreEntry("b", 0.5)]).action == "a"


def test_conditional_score():
    scores = [ScoreEntry("a", 0.4), ScoreEntry("b", 0.1), ScoreEntry("b", 0.8, Binary(">", Name("load"), Lit(3)))]
    assert measure_performance([P("load", 1, 0)], {}, acts("a", "b"), scores).action == "a"
    assert measure_performance([P("load", 5, 0)], {}, acts("a", "b"), scores).action == "b"


def test_no_candidate():
    with pytest.raises(NoCandidateError) as err:
        measure_performance([], {}, [], [])
    assert err.value.code == "E-NO-CANDIDATE"


@given(
    st.dictionaries(st.sampled_from("abcdefgh"), st.sampled_from([0.0, 0.1, 0.25, 0.5, 0.75, 1.0]), min_size=1),
    st.floats(1e-3, 1e3),
)
def test_scaling_keeps_choice(table, c):
    cands = acts(*sorted(table, reverse=True))
    base = measure_performance([], {}, cands, [ScoreEntry(k, v) for k, v in table.items()])
    scaled = measure_performance([], {}, cands, [ScoreEntry(k, v * c) for k, v in table.items()])
    assert base.action == scaled.action == argmax_action(table)


# -- deliberation -------------------------------------------------------------

def test_cognitive_or_not_branch():
    rules = (DesireRule("g", 1, Binary(">", Name("t"), Lit(5)), action=Call("go", ())),)
    state = CognitionState(AgentKind.COGNITIVE, rules)
    assert deliberate(state, [P("t", 1, 0)], actor="c", tick=0)[1] == []
    assert [a.action for a in deliberate(state, [P("t", 9, 0)], actor="c", tick=0)[1]] == ["go"]


def test_cognitive_picks_highest_priority():
    rules = (DesireRule("low", 1, action=Call("a", ())), DesireRule("high", 7, action=Call("b", ())))
    assert deliberate(CognitionState(AgentKind.COGNITIVE, rules), [], actor="c", tick=0)[1][0].action == "b"


def test_communicative_does_not_decide():
    with pytest.raises(MasError):
        deliberate(CognitionState(AgentKind.COMMUNICATIVE), [], actor="c", tick=0)


def test_intentional_mid_plan():
    state = CognitionState(
        AgentKind.INTENTIONAL,
        rules=(DesireRule("g", 1),),
        plans={"g": ("step1", "step2", "step3")},
        intentions={"g": Intention("g", ("step1", "step2", "step3"), 1, ACTIVE)},
    )
    new, out = deliberate(state, [], actor="i", tick=4)
    assert out == [ActionInstance("step2", "i", (), 4)]
    assert new.intentions["g"].cursor == 2


def _bdi_fixture(rng: random.Random, kind=AgentKind.INTENTIONAL) -> CognitionState:
    desires, conflicts = random_desires(rng, 6)
    rules = tuple(
        DesireRule(d.goal_id, d.priority, Binary(">=", Name(f"k{rng.randint(0, 3)}"), Lit(rng.randint(0, 5))), tuple(sorted(d.conflicts)))
        for d in desires
    )
    plans = {d.goal_id: tuple(f"act{rng.randint(0, 4)}" for _ in range(rng.randint(1, 3))) for d in desires}
    beliefs = {f"k{i}": Belief(f"k{i}", rng.randint(0, 5)) for i in range(4)}
    return CognitionState(kind, close_conflicts(rules), beliefs, {}, {}, plans)


@settings(max_examples=100)
@given(st.integers(0, 2**32 - 1))
def test_fused_equals_staged(seed):
    rng = random.Random(seed)
    state = _bdi_fixture(rng)
    for tick in range(4):
        percepts = random_percepts(rng, keys=4, length=5, max_tick=tick)
        fused_state, fused = deliberate(state, percepts, actor="i", tick=tick)
        beliefs = revise_beliefs(percepts, state.beliefs, state.knowledge)
        desires = generate_desires(beliefs, state.intentions, state.rules)
        kept = filter_desires(desires, state.intentions, bonus=state.bonus)
        staged = actions_selection(kept, state.intentions, state.plans, lambda n: ActionInstance(n, "i", (), tick))
        assert fused == staged.actions
        assert dict(fused_state.intentions) == staged.intentions
        state = fused_state


@settings(max_examples=100)
@given(st.integers(0, 2**32 - 1))
def test_rational_emits_at_most_one(seed):
    rng = random.Random(seed)
    state = _bdi_fixture(rng, AgentKind.RATIONAL)
    state = CognitionState(**{**state.__dict__, "scores": tuple(ScoreEntry(f"act{i}", rng.random()) for i in range(5))})
    for tick in range(5):
        state, out = deliberate(state, random_percepts(rng, keys=4, length=4, max_tick=tick), actor="r", tick=tick)
        assert len(out) <= 1


# -- adaptation ---------------------------------------------------------------

def _adaptive():
    rules = (DesireRule("g", 2, action=Call("g_act", ())), DesireRule("h", 5, action=Call("h_act", ())))
    return CognitionState(AgentKind.ADAPTIVE, rules, knowledge={"limit": 3})


def test_empty_change_is_identity():
    state = _adaptive()
    assert change_information(state, ChangeEvent()) == state


def test_raising_priority_changes_decision():
    state = _adaptive()
    assert deliberate(state, [], actor="a", tick=0)[1][0].action == "h_act"
    changed = change_information(state, ChangeEvent(priorities={"g": 7}))
    assert deliberate(changed, [], actor="a", tick=0)[1][0].action == "g_act"


def test_knowledge_replaced():
    assert change_information(_adaptive(), ChangeEvent({"limit": 9})).knowledge["limit"] == 9


def test_unknown_key_is_atomic():
    state = _adaptive()
    with pytest.raises(UnknownKeyError) as err:
        change_information(state, ChangeEvent({"limit": 9, "ghost": 1}))
    assert err.value.code == "E-UNKNOWN-KEY"
    assert state.knowledge["limit"] == 3


def test_only_adaptive_changes():
    with pytest.raises(MasError):
        change_information(CognitionState(AgentKind.COGNITIVE), ChangeEvent())


# -- communication ------------------------------------------------------------

def test_no_representations_no_messages():
    assert communicate("c", {}, ["a", "b"]) == []


def test_cartesian_order():
    reps = {"y": Represented(2), "x": Represented(1)}
    out = communicate("c", reps, ["p3", "p1", "p2"])
    assert [(m.payload.key, m.receiver) for m in out] == [
        ("x", "p1"), ("x", "p2"), ("x", "p3"), ("y", "p1"), ("y", "p2"), ("y", "p3")
    ]


def test_no_echo_to_origin():
    out = communicate("b", {"k": Represented(1, origin="a")}, ["a", "c"])
    assert [m.receiver for m in out] == ["c"]
