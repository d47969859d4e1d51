import dataclasses
import json

import pytest

from cgdialog.engine import Engine, EngineConfig, run_script
from cgdialog.nlu import LexiconEntry
from cgdialog.pack import load_pack, parse_golden, validate_pack


class TestLoadPack:
    def test_shipped_pack_loads_clean(self, pack):
        assert pack.name == "movie-small-talk"
        assert pack.warnings == []
        assert pack.rules and pack.templates and pack.goldens
        assert "user" in pack.pinned and "bot" in pack.pinned

    def test_static_validation_clean(self, pack):
        assert validate_pack(pack) == []

    def test_kb_is_well_formed(self, pack):
        pack.kb.validate()

    def test_seeds_compile_against_kb(self, pack):
        for name, seed in pack.seeds.items():
            seed.validate()
            assert seed.features, name

    def test_manifest_round_trips(self, pack):
        manifest = json.loads((pack.root / "manifest.json").read_text())
        assert set(manifest["goldens"]) == {
            f"goldens/{g.name}.convo" for g in pack.goldens}

    def test_explicit_manifest_path(self, pack):
        again = load_pack(pack.root / "manifest.json")
        assert again.name == pack.name
        assert len(again.kb.features) == len(pack.kb.features)


class TestGoldenParsing:
    def test_seed_and_steps(self):
        script = parse_golden("demo", (
            "# a comment\n"
            "SEED weekend\n"
            "BOT Hello there.\n"
            "USER Hi.\n"
            "BOT How are you?\n"
            "USER Fine.\n"))
        assert script.seed == "weekend"
        assert script.turns() == [
            ("", "Hello there."),
            ("Hi.", "How are you?"),
            ("Fine.", None),
        ]

    def test_unknown_line_rejected(self):
        with pytest.raises(ValueError):
            parse_golden("bad", "NARRATOR meanwhile\n")

    def test_no_seed_is_fine(self):
        script = parse_golden("bare", "USER Hi.\n")
        assert script.seed is None


class TestValidation:
    def test_unpaired_template_reported(self, pack):
        ghost = dataclasses.replace(pack.templates[0], name="ghost_template")
        poked = dataclasses.replace(pack, templates=pack.templates + [ghost])
        issues = validate_pack(poked)
        assert any("ghost_template" in issue for issue in issues)

    def test_unknown_lexicon_concept_reported(self, pack):
        entry = LexiconEntry("gizmo", "gizmo_concept")
        poked = dataclasses.replace(
            pack, lexicon=type(pack.lexicon)(pack.lexicon.entries + [entry]))
        issues = validate_pack(poked)
        assert any("gizmo" in issue for issue in issues)

    def test_missing_fixture_reported(self, pack):
        script = parse_golden("offscript", "USER Unscripted words here.\n")
        poked = dataclasses.replace(pack, goldens=pack.goldens + [script])
        issues = validate_pack(poked)
        assert any("offscript" in issue for issue in issues)

    def test_unknown_pinned_reported(self, pack):
        poked = dataclasses.replace(pack, pinned=pack.pinned + ("nobody",))
        issues = validate_pack(poked)
        assert any("nobody" in issue for issue in issues)


def test_every_golden_plays_to_the_letter(pack):
    for script in pack.goldens:
        engine = Engine(pack, EngineConfig())
        run_script(engine, script)
