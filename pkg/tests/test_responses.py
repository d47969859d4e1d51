import pytest
from hypothesis import given, strategies as st

from cgdialog import compile_text
from cgdialog.memory import SalienceConfig, WorkingMemory
from cgdialog.responses import (
    PRIORITY_RATINGS,
    identify_candidates,
    score,
    select_compound,
)

SOURCE = """
entity_type/() predicate_type/()
person/entity_type() item/entity_type()
movie/item()
user/person() bot/person()
like/predicate_type() talk/predicate_type() nice/predicate_type()
var/predicate_type()

rule praise_pick react mid:
  L/like(user, M/movie())
  ->
  ()

rule note_pick react low:
  L/like(user, M/movie())
  ->
  ()

rule discuss_pick present high:
  L/like(user, M/movie())
  ->
  ()

rule small_talk present low:
  T/talk(user, user)
  ->
  ()
"""


@pytest.fixture(scope="module")
def compiled():
    result = compile_text(SOURCE)
    assert result.warnings == []
    return result


def make_wm(compiled, like_salience=1.0):
    wm = WorkingMemory(compiled.graph, SalienceConfig())
    utterance = compile_text(
        "user/() movie/()\n"
        "avengers/movie()\n"
        "l_1/like(user, avengers)\n"
        "like/()\n").graph
    wm.ingest_turn(utterance)
    wm.graph.features["l_1"].salience = like_salience
    return wm


class TestScore:
    def test_exact_grid(self):
        grid = {
            ("low", 0.0): 0.075, ("low", 0.5): 0.2, ("low", 1.0): 0.325,
            ("mid", 0.0): 0.3, ("mid", 0.5): 0.425, ("mid", 1.0): 0.55,
            ("high", 0.0): 0.525, ("high", 0.5): 0.65, ("high", 1.0): 0.775,
            ("critical", 0.0): 0.75, ("critical", 0.5): 0.875,
            ("critical", 1.0): 1.0,
        }
        for (priority, salience), expected in grid.items():
            assert abs(score(priority, [salience]) - expected) < 1e-12

    def test_mean_over_d_set(self):
        assert abs(score("high", [0.9, 0.9]) - 0.75) < 1e-12

    def test_empty_d_set_scores_priority_only(self):
        assert abs(score("low", []) - 0.075) < 1e-12

    @given(st.floats(0, 1), st.floats(0, 1))
    def test_critical_outranks_low_and_mid(self, s_critical, s_other):
        assert score("critical", [s_critical]) > score("low", [s_other])
        assert score("critical", [s_critical]) > score("mid", [s_other])

    @given(st.floats(0.001, 1), st.floats(0, 1), st.floats(0, 1))
    def test_scaling_preserves_order_within_priority(self, k, a, b):
        if score("mid", [a]) > score("mid", [b]):
            assert score("mid", [k * a]) >= score("mid", [k * b])


class TestIdentify:
    def test_candidate_shape(self, compiled):
        wm = make_wm(compiled, like_salience=0.6)
        cands = identify_candidates(compiled.rules, wm, fired=set())
        by_rule = {c.rule.name: c for c in cands}
        assert set(by_rule) == {"praise_pick", "note_pick", "discuss_pick"}
        pick = by_rule["discuss_pick"]
        assert pick.d_set == ("l_1",)
        assert abs(pick.mean_salience - 0.6) < 1e-12
        assert abs(pick.score - (0.75 * 0.7 + 0.25 * 0.6)) < 1e-12

    def test_sorted_by_score_then_ties(self, compiled):
        wm = make_wm(compiled)
        cands = identify_candidates(compiled.rules, wm, fired=set())
        scores = [c.score for c in cands]
        assert scores == sorted(scores, reverse=True)
        assert cands[0].rule.name == "discuss_pick"

    def test_fired_key_excluded(self, compiled):
        wm = make_wm(compiled)
        cands = identify_candidates(compiled.rules, wm, fired=set())
        key = (cands[0].rule.name, cands[0].solution.bindings)
        again = identify_candidates(compiled.rules, wm, fired={key})
        assert all((c.rule.name, c.solution.bindings) != key for c in again)
        assert len(again) == len(cands) - 1

    def test_covered_d_set_excluded(self, compiled):
        wm = make_wm(compiled)
        wm.graph.features["l_1"].covered = True
        assert identify_candidates(compiled.rules, wm, fired=set()) == []

    def test_hypothetical_solution_excluded(self, compiled):
        wm = make_wm(compiled)
        wm.graph.add_predicate("v_1", "var", "avengers", None)
        assert identify_candidates(compiled.rules, wm, fired=set()) == []

    def test_worker_count_irrelevant(self, compiled):
        wm = make_wm(compiled)
        runs = [identify_candidates(compiled.rules, wm, fired=set(), workers=w)
                for w in (1, 4, 8)]
        shapes = [[(c.rule.name, c.solution.bindings) for c in r] for r in runs]
        assert shapes[0] == shapes[1] == shapes[2]


class TestSelect:
    def test_top_of_each_kind(self, compiled):
        wm = make_wm(compiled)
        fired = set()
        cands = identify_candidates(compiled.rules, wm, fired)
        reaction, presentation = select_compound(cands, wm, fired)
        assert reaction.rule.name == "praise_pick"
        assert presentation.rule.name == "discuss_pick"

    def test_equal_scores_break_on_rule_name(self, compiled):
        source = SOURCE.replace("praise_pick react mid", "praise_pick react low")
        result = compile_text(source)
        wm = make_wm(result)
        cands = identify_candidates(result.rules, wm, fired=set())
        reaction, _ = select_compound(cands, wm, set())
        # note_pick and praise_pick now tie exactly; lexicographic name wins
        assert reaction.rule.name == "note_pick"

    def test_selection_records_key_and_coverage(self, compiled):
        wm = make_wm(compiled)
        fired = set()
        cands = identify_candidates(compiled.rules, wm, fired)
        reaction, presentation = select_compound(cands, wm, fired)
        assert (reaction.rule.name, reaction.solution.bindings) in fired
        assert (presentation.rule.name, presentation.solution.bindings) in fired
        assert wm.graph.features["l_1"].covered

    def test_missing_pool_yields_none(self, compiled):
        wm = WorkingMemory(compiled.graph, SalienceConfig())
        utterance = compile_text("user/() talk/()\nt_1/talk(user, user)\n").graph
        wm.ingest_turn(utterance)
        cands = identify_candidates(compiled.rules, wm, fired=set())
        reaction, presentation = select_compound(cands, wm, set())
        assert reaction is None
        assert presentation.rule.name == "small_talk"

    def test_unselected_candidate_competes_next_turn(self, compiled):
        wm = make_wm(compiled)
        fired = set()
        select_compound(identify_candidates(compiled.rules, wm, fired), wm, fired)
        # the loser reaction was neither fired nor covered away: l_1 covered
        # excludes it now, but a fresh mention clears the road
        wm.graph.features["l_1"].covered = False
        again = identify_candidates(compiled.rules, wm, fired)
        assert [c.rule.name for c in again] == ["note_pick"]


def test_priority_ratings_are_fixed_constants():
    assert PRIORITY_RATINGS == {
        "low": 0.1, "mid": 0.4, "high": 0.7, "critical": 1.0}
