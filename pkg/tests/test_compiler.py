import random
import re
from pathlib import Path

import pytest

from cgdialog import compile_pattern, compile_text, serialize
from cgdialog.compiler import IdMint, compile_units, SourceUnit
from cgdialog.errors import (
    ArityError,
    KBSyntaxError,
    RedefinitionError,
    UnknownKindError,
)
from isocheck import isomorphic
from randgraph import random_graph

TRANSLATIONS = Path(__file__).parent.parent / "src/cgdialog/content/examples/translations.kb"


def translation_blocks():
    text = TRANSLATIONS.read_text()
    blocks = []
    for chunk in re.split(r"\n\s*\n", text):
        lines = [l for l in chunk.splitlines() if l.strip() and not l.lstrip().startswith("#")]
        if lines:
            blocks.append("\n".join(lines))
    return blocks


class TestKnowledgeDocuments:
    def test_empty_document(self):
        result = compile_text("")
        assert len(result.graph) == 0
        assert result.rules == []

    def test_concept_and_type_edge(self):
        g = compile_text("dog/animal() fido/dog()").graph
        assert g.types_of("fido") == frozenset({"dog", "animal"})

    def test_unary_and_binary_predicates(self):
        g = compile_text("w/watch(tom, d) bark(d)").graph
        assert g.args_of("w") == ("tom", "d")
        (anon,) = [p for p in g.signatures if p != "w"]
        assert g.args_of(anon) == ("d", None)
        assert g.ptypes[anon] == "bark"

    def test_nested_predicate_auto_named(self):
        g = compile_text("l/like(user, watch(user, m))").graph
        inner = g.args_of("l")[1]
        assert inner in g.signatures
        assert g.ptypes[inner] == "watch"
        assert g.args_of(inner) == ("user", "m")

    def test_negation_sets_truth_and_vanishes(self):
        g = compile_text("e/eat(user, l) not(e)").graph
        assert g.features["e"].truth is False
        assert not any(g.ptypes.get(p) == "not" for p in g.signatures)

    def test_double_negation_normalizes_positive(self):
        result = compile_text("h/happy(tom) not(n) n/not(h)")
        assert result.graph.features["h"].truth is True
        assert any("double negation" in w for w in result.warnings)

    def test_circular_negation_rejected(self):
        with pytest.raises(KBSyntaxError):
            compile_text("a/not(b) b/not(a)")

    def test_time_sets_tense_and_keeps_predicate(self):
        g = compile_text("w/watch(tom, d) time(w, past)").graph
        assert g.features["w"].tense == "past"
        assert any(g.ptypes.get(p) == "time" for p in g.signatures)

    def test_bad_tense_marker(self):
        with pytest.raises(KBSyntaxError):
            compile_text("w/watch(tom, d) time(w, yesterday)")

    def test_arity_above_two(self):
        with pytest.raises(ArityError):
            compile_text("g/give(a, b, c)")

    def test_type_cycle_rejected(self):
        with pytest.raises(Exception):
            compile_text("type(a, b) type(b, a)")

    def test_nine_translations_compile(self):
        blocks = translation_blocks()
        assert len(blocks) == 9
        for block in blocks:
            result = compile_text(block)
            assert result.warnings == []
            assert result.graph.signatures

    def test_translation_features_land(self):
        block = next(b for b in translation_blocks() if "not(e)" in b)
        negated = compile_text(block).graph
        assert negated.features["e"].truth is False
        assert negated.features["e"].tense == "past"


class TestDeterminism:
    def test_same_source_same_ids(self):
        src = "l/like(user, watch(user, m)) bark(m) time(l, now)"
        a = compile_text(src).graph
        b = compile_text(src).graph
        assert serialize(a) == serialize(b)
        assert sorted(a.features) == sorted(b.features)

    def test_mint_skips_taken_ids(self):
        mint = IdMint({"watch_1"})
        assert mint.fresh("watch") == "watch_2"
        assert mint.fresh("watch") == "watch_3"


class TestRules:
    def test_kinds_and_priorities(self):
        src = (
            "rule a infer: X/dog() -> bark(X)\n"
            "rule b present high: X/dog() -> ()\n"
            "rule c react: X/dog() -> ()\n"
        )
        rules = compile_text(src).rules
        kinds = {r.name: r.kind for r in rules}
        assert kinds == {"a": "inference", "b": "presentation", "c": "reaction"}
        assert next(r for r in rules if r.name == "b").priority == "high"
        assert next(r for r in rules if r.name == "c").priority == "mid"

    def test_priority_rejected_off_response_rules(self):
        with pytest.raises(KBSyntaxError):
            compile_text("rule a infer critical: X/dog() -> bark(X)")

    def test_unknown_kind(self):
        with pytest.raises(UnknownKindError):
            compile_text("rule a ponder: X/dog() -> ()")

    def test_duplicate_rule_name(self):
        with pytest.raises(RedefinitionError):
            compile_text(
                "rule a infer: X/dog() -> bark(X)\n"
                "rule a infer: X/cat() -> meow(X)"
            )

    def test_template_shares_response_name(self):
        result = compile_text(
            "rule greet present: U/person() -> ()\n"
            'rule greet template: U/person() -> template "Hello."'
        )
        assert len(result.rules) == 2

    def test_duplicate_template_name(self):
        with pytest.raises(RedefinitionError):
            compile_text(
                'rule greet template: U/person() -> template "Hello."\n'
                'rule greet template: U/person() -> template "Hi."'
            )

    def test_inference_needs_postcondition(self):
        with pytest.raises(KBSyntaxError):
            compile_text("rule a infer: X/dog() -> ()")

    def test_lowercase_variable_warns(self):
        result = compile_text("rule a infer: x/dog() -> bark(x)")
        assert any("lowercase" in w for w in result.warnings)

    def test_template_slot_must_be_pattern_variable(self):
        with pytest.raises(KBSyntaxError):
            compile_text('rule a template: X/dog() -> template "{Y} barks."')

    def test_attach_only_in_transformations(self):
        with pytest.raises(KBSyntaxError):
            compile_text("rule a infer: X/dog() -> attach(X, t, X)")

    def test_anonymous_wildcard_variables_are_distinct(self):
        qg, _ = compile_pattern("w/watch(_, _)")
        assert len(qg.variables) == 3  # w plus two holes


class TestPatterns:
    def test_known_names_are_constants(self):
        kb = compile_text("dog/animal() fido/dog() wag/()").graph
        qg, warnings = compile_pattern("W/wag(fido)", kb=kb)
        assert "fido" not in qg.variables
        assert warnings == []

    def test_unknown_type_warns(self):
        qg, warnings = compile_pattern("W/wiggle(X)")
        assert any("absent from the knowledge base" in w for w in warnings)

    def test_quoted_type_is_word_constraint(self):
        qg, _ = compile_pattern('Y/"It"()')
        assert "word:it" in qg.pattern.features

    def test_pattern_negation_is_truth_requirement(self):
        qg, _ = compile_pattern("L/like(user, X) not(L)")
        assert qg.truth_requirements["L"] is False


class TestRoundTrip:
    def test_empty_graph(self):
        from cgdialog.graph import ConceptGraph

        assert serialize(ConceptGraph()) == "\n"

    def test_handmade_example(self):
        g = compile_text(
            "tom/person() dog_1/dog() w/watch(tom, dog_1) not(w) time(w, past)"
        ).graph
        back = compile_text(serialize(g)).graph
        assert isomorphic(g, back)

    def test_random_graphs(self):
        rng = random.Random(20260816)
        for _ in range(150):
            g = random_graph(rng)
            back = compile_text(serialize(g)).graph
            assert isomorphic(g, back)

    def test_watching_scene_round_trip(self):
        # five predicate lines: watch, a by relation, the time marker, a type
        # line, and a negation survive the trip
        src = (
            "tom/person() d/dog() bs/bus_stop()\n"
            "w/watch(tom, d) time(w, past)\n"
            "w2/by(w, bs)\n"
        )
        g = compile_text(src).graph
        text = serialize(g)
        assert text.count("(") >= 5
        assert isomorphic(g, compile_text(text).graph)


def test_compile_units_spans_files():
    units = [
        SourceUnit(path="a.kb", text="dog/animal()"),
        SourceUnit(path="b.kb", text="rule r infer: X/dog() -> bark(X)"),
    ]
    result = compile_units(units)
    assert "dog" in result.graph.features
    assert result.rules[0].source.startswith("b.kb")
