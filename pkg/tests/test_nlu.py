import pytest

from cgdialog.compiler import IdMint
from cgdialog.graph import ConceptGraph
from cgdialog.errors import CoverageError
from cgdialog.nlu import (
    Lexicon,
    LexiconEntry,
    ParseInput,
    analyze,
    build_parse_cg,
    load_lexicon,
    load_parse_fixtures,
    merge_span_concepts,
    naive_parse,
)
from isocheck import isomorphic

U1 = "Tom watched the dog by the bus stop near Central Park"


def fresh_mint(pack):
    return IdMint(set(pack.kb.features) | {"_"})


def run_u1(pack):
    parse = pack.fixtures[U1]
    mint = fresh_mint(pack)
    warnings = []
    cg, span_map = analyze(
        parse, kb=pack.kb, lexicon=pack.lexicon,
        rules=pack.rules_of_kind("transformation"), mint=mint.fresh,
        canonical=pack.canonical, skip_tags=pack.skip_tags, warnings=warnings)
    return cg, span_map, warnings


class TestSpanMapping:
    def test_u1_exact_map(self, pack):
        _, span_map, _ = run_u1(pack)
        rows = [
            (p.start, p.end, p.source, p.bearing(), p.type_concept or p.ptype)
            for p in span_map.bearing_productions()
        ]
        assert rows == [
            (0, 1, "gazetteer", "tom", None),
            (1, 2, "gazetteer", "watch_1", "watch"),
            (3, 4, "gazetteer", "dog_1", "dog"),
            (4, 5, "gazetteer", "by_1", "by"),
            (6, 8, "gazetteer", "bus_stop_1", "bus_stop"),
            (8, 9, "gazetteer", "near_1", "near"),
            (9, 11, "ner", "loc_1", "loc"),
        ]

    def test_gazetteer_beats_ner_on_overlap(self, pack):
        # the NER hit for "Tom" is span-covered by the gazetteer instance
        _, span_map, _ = run_u1(pack)
        ner = [p for p in span_map.bearing_productions() if p.source == "ner"]
        assert [(p.start, p.end) for p in ner] == [(9, 11)]

    def test_containment_lookup(self, pack):
        _, span_map, _ = run_u1(pack)
        stop = span_map.production_at(7)  # token "stop"
        assert stop is not None and stop.bearing() == "bus_stop_1"

    def test_uncovered_token_raises(self, pack):
        parse = ParseInput("xylophone", ["xylophone"], ["nn"])
        with pytest.raises(CoverageError) as err:
            merge_span_concepts(parse, pack.lexicon, pack.kb,
                                fresh_mint(pack).fresh, pack.skip_tags)
        assert "xylophone" in str(err.value)

    def test_skip_tags_count_as_covered(self, pack):
        parse = ParseInput("the .", ["the", "."], ["dt", "punct"])
        span_map = merge_span_concepts(parse, pack.lexicon, pack.kb,
                                       fresh_mint(pack).fresh, pack.skip_tags)
        assert span_map.bearing_productions() == []


class TestLexicon:
    def test_leftmost_longest(self):
        lex = Lexicon([
            LexiconEntry("bus", "bus"),
            LexiconEntry("bus stop", "bus_stop"),
        ])
        hits = lex.match(["bus", "stop"])
        assert [(a, b, e.concept) for a, b, e in hits] == [(0, 2, "bus_stop")]

    def test_cased_entry_requires_exact_case(self):
        lex = Lexicon([LexiconEntry("Tom", "tom", cased=True)])
        assert lex.match(["Tom"])
        assert lex.match(["tom"]) == []

    def test_file_order_breaks_ties(self):
        lex = Lexicon([
            LexiconEntry("like", "like_verb"),
            LexiconEntry("like", "like_prep"),
        ])
        (hit,) = lex.match(["like"])
        assert hit[2].concept == "like_prep"  # smaller concept id wins

    def test_loader_flags(self):
        lex = load_lexicon(
            "Avengers\tavengers\tinstance,canonical=the Avengers\n"
            "movie\tmovie\n"
        )
        avengers = lex.entries[0]
        assert avengers.instance and avengers.canonical == "the Avengers"
        assert lex.canonical_surfaces() == {"avengers": "the Avengers"}

    def test_loader_rejects_unknown_flag(self):
        with pytest.raises(ValueError):
            load_lexicon("x\ty\tshiny\n")


class TestU1Pipeline:
    def test_four_attachment_solutions(self, pack):
        from cgdialog.matcher import match

        parse = pack.fixtures[U1]
        parse_cg, _ = build_parse_cg(parse, fresh_mint(pack).fresh)
        counts = {}
        for rule in pack.rules_of_kind("transformation"):
            if rule.attachments:
                counts[rule.name] = len(match(rule.pattern, parse_cg))
        assert counts == {
            "subject_attach": 1,
            "object_attach": 1,
            "preposition_attach": 2,
            "possessive_attach": 0,
            "predicative_subject": 0,
            "predicative_type": 0,
        }

    def test_final_graph_matches_expected_logic(self, pack):
        cg, _, warnings = run_u1(pack)
        assert warnings == []
        expected = ConceptGraph()
        for t in ("dog", "bus_stop", "loc", "watch", "by", "near", "tom"):
            expected.add_concept(t)
        for inst, t in (("d", "dog"), ("bs", "bus_stop"), ("cp", "loc")):
            expected.add_concept(inst)
            expected.add_type_edge(inst, t)
        expected.add_predicate("w", "watch", "tom", "d")
        expected.features["w"].tense = "past"
        expected.add_predicate("b", "by", "w", "bs")
        expected.add_predicate("n", "near", "bs", "cp")
        assert isomorphic(cg, expected)

    def test_tense_lands_on_watch(self, pack):
        cg, _, _ = run_u1(pack)
        (watch,) = [p for p in cg.signatures if cg.ptypes[p] == "watch"]
        assert cg.features[watch].tense == "past"


class TestPromotedTokens:
    def test_pronoun_becomes_variable(self, pack):
        parse = pack.fixtures["I watched the Avengers. It's my favorite movie."]
        mint = fresh_mint(pack)
        cg, _ = analyze(
            parse, kb=pack.kb, lexicon=pack.lexicon,
            rules=pack.rules_of_kind("transformation"), mint=mint.fresh,
            canonical=pack.canonical, skip_tags=pack.skip_tags, warnings=[])
        markers = [p for p in cg.signatures if cg.ptypes[p] == "var"]
        assert len(markers) == 1
        focus = cg.args_of(markers[0])[0]
        assert "item" in cg.types_of(focus)
        assert "movie" in cg.types_of(focus)


def test_fixture_loader_round_trip():
    text = (
        "UTT Hi there\n"
        "TOK Hi there\n"
        "POS uh rb\n"
        "\n"
        "UTT Tom runs\n"
        "TOK Tom runs\n"
        "POS nnp vbz\n"
        "NER 0 1 per\n"
        "DEP 1 0 nsbj\n"
    )
    fixtures = load_parse_fixtures(text)
    assert set(fixtures) == {"Hi there", "Tom runs"}
    tom = fixtures["Tom runs"]
    assert tom.ner == [(0, 1, "per")]
    assert tom.deps == [(1, 0, "nsbj")]


def test_naive_parse_positional_slots(pack):
    mint = fresh_mint(pack)
    cg, span_map = naive_parse("I like the Avengers", pack.lexicon, pack.kb,
                               mint.fresh, pack.canonical)
    (like,) = [p for p in cg.signatures if cg.ptypes[p] == "like"]
    assert cg.args_of(like) == ("user", "avengers")
