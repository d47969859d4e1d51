import pytest

from cgdialog import compile_text
from cgdialog.errors import EmptyResponse
from cgdialog.realizer import (
    compose,
    inflect_noun,
    inflect_verb,
    past_tense,
    plural,
    realization_graph,
    render,
    select_template,
)


class TestInflection:
    def test_past_forms(self):
        expected = {
            "walk": "walked",      # plain suffix
            "like": "liked",       # silent e
            "try": "tried",        # consonant + y
            "play": "played",      # vowel + y keeps the y
            "stop": "stopped",     # consonant-vowel-consonant doubles
            "plan": "planned",
            "go": "went",          # irregular
            "be": "was",
            "put": "put",
            "watch": "watched",    # final cluster, no doubling
        }
        for lemma, form in expected.items():
            assert past_tense(lemma) == form

    def test_plural_forms(self):
        expected = {
            "movie": "movies",
            "bus": "buses",
            "box": "boxes",
            "church": "churches",
            "story": "stories",
            "day": "days",
            "person": "people",
            "child": "children",
            "sheep": "sheep",
            "knife": "knives",
        }
        for lemma, form in expected.items():
            assert plural(lemma) == form

    def test_verb_tenses(self):
        assert inflect_verb("go", "past") == "went"
        assert inflect_verb("go", "future") == "will go"
        assert inflect_verb("go", "present") == "go"

    def test_noun_number(self):
        assert inflect_noun("movie", "plural") == "movies"
        assert inflect_noun("movie", "singular") == "movie"


SOURCE = """
entity_type/() predicate_type/()
person/entity_type() item/entity_type() group/entity_type()
movie/item() friends/group()
user/person() bot/person()
like/predicate_type() watch/predicate_type() see/predicate_type()

rule praise template:
  L/like(user, M/movie())
  ->
  template "Great choice, {M}!"

rule recall template:
  W/watch(user, M/movie()) F/friends()
  ->
  template "You {verb:watch@W.tense} {M} with your {noun:friend@F.number}, right?"

rule vague template:
  M/movie()
  ->
  template "Movies are fun."
"""


@pytest.fixture(scope="module")
def unit():
    result = compile_text(SOURCE)
    assert result.warnings == []
    return result


def data_graph(extra=""):
    return compile_text(
        "user/() movie/() group/() friends/group() watch/() like/()\n"
        "avengers/movie()\n"
        "crew/friends()\n" + extra).graph


class TestRealizationGraph:
    def test_induced_neighborhood(self, unit):
        g = data_graph("w_1/watch(user, avengers)\n"
                       "l_1/like(user, crew)\n")
        sub = realization_graph(g, {"w_1"})
        assert set(sub.signatures) == {"w_1"}
        assert {"user", "avengers", "movie"} <= set(sub.features)
        assert "l_1" not in sub.features and "crew" not in sub.features

    def test_features_carried_over(self, unit):
        g = data_graph("w_1/watch(user, avengers) time(w_1, past)\n")
        g.features["avengers"].salience = 0.7
        sub = realization_graph(g, {"w_1"})
        assert sub.features["w_1"].tense == "past"
        assert sub.features["avengers"].salience == 0.7


class TestSelectTemplate:
    def test_name_pairing_wins(self, unit):
        g = data_graph("l_1/like(user, avengers)\n")
        sub = realization_graph(g, {"l_1"})
        found = select_template(unit.rules, "praise", sub)
        assert found is not None and found[0].name == "praise"

    def test_specificity_fallback(self, unit):
        # no template named for this rule; the one-predicate "recall"
        # pattern cannot match, so the bare "vague" pattern steps in
        g = data_graph("l_1/like(user, avengers)\n")
        sub = realization_graph(g, {"l_1"})
        found = select_template(unit.rules, "praise_unnamed", sub)
        assert found is not None and found[0].name == "praise"

    def test_none_when_nothing_matches(self, unit):
        sub = compile_text("thing/()\n").graph
        assert select_template(unit.rules, "praise", sub) is None


class TestRender:
    def rendered(self, unit, name, graph, core):
        sub = realization_graph(graph, core)
        template, solution = select_template(unit.rules, name, sub)
        warnings = []
        text = render(template, solution, sub, warnings)
        return text, warnings

    def test_slot_fills_surface(self, unit):
        g = data_graph("l_1/like(user, avengers)\n")
        g.surfaces["avengers"] = "the Avengers"
        text, warnings = self.rendered(unit, "praise", g, {"l_1"})
        assert text == "Great choice, the Avengers!"
        assert warnings == []

    def test_missing_surface_warns_and_uses_id(self, unit):
        g = data_graph("l_1/like(user, avengers)\n")
        text, warnings = self.rendered(unit, "praise", g, {"l_1"})
        assert text == "Great choice, avengers!"
        assert len(warnings) == 1

    def test_tense_and_number_agreement(self, unit):
        g = data_graph("w_1/watch(user, avengers) time(w_1, past)\n")
        g.surfaces["avengers"] = "the Avengers"
        text, _ = self.rendered(unit, "recall", g, {"w_1", "crew"})
        assert text == "You watched the Avengers with your friends, right?"

    def test_present_tense_default(self, unit):
        g = data_graph("w_1/watch(user, avengers)\n")
        g.surfaces["avengers"] = "the Avengers"
        text, _ = self.rendered(unit, "recall", g, {"w_1", "crew"})
        assert text == "You watch the Avengers with your friends, right?"

    def test_first_letter_capitalized(self, unit):
        g = data_graph("l_1/like(user, avengers)\n")
        g.surfaces["avengers"] = "the Avengers"
        sub = realization_graph(g, {"l_1"})
        template, solution = select_template(unit.rules, "vague", sub)
        assert render(template, solution, sub, []) == "Movies are fun."


class TestCompose:
    def test_both_segments(self):
        assert compose("That sounds fun.", "Tell me more.") == \
            "That sounds fun. Tell me more."

    def test_single_segment(self):
        assert compose(None, "Tell me more.") == "Tell me more."
        assert compose("Nice.", None) == "Nice."

    def test_empty_raises(self):
        with pytest.raises(EmptyResponse):
            compose(None, None)
