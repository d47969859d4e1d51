"""Content pack loading and validation.

A pack is a directory with a manifest.json naming the knowledge files, rule
files, lexicon, parse fixtures, seeds, and golden conversations, plus the
salience settings. Everything compiles at load time, so a bad pack fails
before any conversation starts.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .compiler import Rule, SourceUnit, compile_text, compile_units
from .graph import ConceptGraph
from .memory import SalienceConfig
from .nlu import DEFAULT_SKIP_TAGS, Lexicon, ParseInput, load_lexicon, load_parse_fixtures


@dataclass
class GoldenScript:
    """One scripted conversation: optional seed, then BOT/USER lines.

    A leading BOT line is an opener: the engine must produce it for an empty
    user turn. Every other BOT line is the expected response to the USER line
    before it.
    """

    name: str
    seed: str | None
    steps: list[tuple[str, str]]

    def turns(self) -> list[tuple[str, str | None]]:
        out: list[tuple[str, str | None]] = []
        i = 0
        while i < len(self.steps):
            kind, text = self.steps[i]
            if kind == "BOT":
                out.append(("", text))
                i += 1
            else:
                expected = None
                if i + 1 < len(self.steps) and self.steps[i + 1][0] == "BOT":
                    expected = self.steps[i + 1][1]
                    i += 1
                out.append((text, expected))
                i += 1
        return out


@dataclass
class ContentPack:
    name: str
    root: Path
    kb: ConceptGraph
    rules: list[Rule]
    templates: list[Rule]
    lexicon: Lexicon
    canonical: dict[str, str]
    fixtures: dict[str, ParseInput]
    goldens: list[GoldenScript]
    seeds: dict[str, ConceptGraph]
    pinned: tuple[str, ...]
    salience: SalienceConfig
    skip_tags: frozenset
    warnings: list[str] = field(default_factory=list)

    def rules_of_kind(self, *kinds: str) -> list[Rule]:
        return [r for r in self.rules if r.kind in kinds]


def default_content_root() -> Path:
    return Path(__file__).resolve().parent / "content"


def parse_golden(name: str, text: str) -> GoldenScript:
    seed = None
    steps: list[tuple[str, str]] = []
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, _, rest = line.partition(" ")
        if key == "SEED":
            seed = rest.strip()
        elif key in ("BOT", "USER"):
            steps.append((key, rest))
        else:
            raise ValueError(f"golden {name}: unknown line {line!r}")
    return GoldenScript(name=name, seed=seed, steps=steps)


def load_pack(manifest_path: str | Path | None = None) -> ContentPack:
    path = Path(manifest_path) if manifest_path else default_content_root() / "manifest.json"
    root = path.parent
    manifest = json.loads(path.read_text())

    units = [SourceUnit(path=str(root / rel), text=(root / rel).read_text())
             for rel in manifest.get("kb", []) + manifest.get("rules", [])]
    result = compile_units(units)
    kb = result.graph
    rules = [r for r in result.rules if r.kind != "template"]
    templates = [r for r in result.rules if r.kind == "template"]

    lexicon = load_lexicon((root / manifest["lexicon"]).read_text()) \
        if manifest.get("lexicon") else Lexicon([])

    fixtures: dict[str, ParseInput] = {}
    for rel in manifest.get("fixtures", []):
        for utt, parse in load_parse_fixtures((root / rel).read_text()).items():
            fixtures[utt] = parse

    goldens = [parse_golden(Path(rel).stem, (root / rel).read_text())
               for rel in manifest.get("goldens", [])]

    seeds: dict[str, ConceptGraph] = {}
    for key, rel in sorted(manifest.get("seeds", {}).items()):
        seed_result = compile_text((root / rel).read_text(), kb=kb, path=str(root / rel))
        result.warnings.extend(seed_result.warnings)
        seeds[key] = seed_result.graph

    return ContentPack(
        name=manifest.get("name", root.name),
        root=root,
        kb=kb,
        rules=rules,
        templates=templates,
        lexicon=lexicon,
        canonical=lexicon.canonical_surfaces(),
        fixtures=fixtures,
        goldens=goldens,
        seeds=seeds,
        pinned=tuple(manifest.get("pinned", ("user", "bot"))),
        salience=SalienceConfig.from_dict(manifest.get("salience", {})),
        skip_tags=frozenset(manifest.get("skip_tags", DEFAULT_SKIP_TAGS)),
        warnings=result.warnings,
    )


def validate_pack(pack: ContentPack) -> list[str]:
    """Static authoring checks. Returns human-readable issues; empty is clean."""
    issues: list[str] = []
    template_names = {t.name for t in pack.templates}
    for rule in pack.rules_of_kind("reaction", "presentation"):
        if rule.name not in template_names:
            issues.append(f"response rule {rule.name!r} has no name-paired template; "
                          "it will fall back to the most specific matching template")
    response_names = {r.name for r in pack.rules}
    for template in pack.templates:
        if template.name not in response_names:
            issues.append(f"template {template.name!r} pairs with no rule; "
                          "it can still be chosen by specificity")
    for entry in pack.lexicon.entries:
        if entry.concept not in pack.kb.features:
            issues.append(f"lexicon surface {entry.surface!r} maps to {entry.concept!r}, "
                          "which the knowledge base does not declare")
    for golden in pack.goldens:
        if golden.seed and golden.seed not in pack.seeds:
            issues.append(f"golden {golden.name!r} wants seed {golden.seed!r}, "
                          "which the manifest does not define")
        for user_text, _ in golden.turns():
            if user_text and user_text not in pack.fixtures:
                issues.append(f"golden {golden.name!r} turn {user_text!r} has no "
                              "parse fixture")
    for concept in pack.pinned:
        if concept not in pack.kb.features:
            issues.append(f"pinned concept {concept!r} is not in the knowledge base")
    return issues
