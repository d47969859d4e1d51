"""Utterance analysis: span productions, the parse graph, and transformations.

The analyzer never calls an external parser. It consumes a ParseInput, which
is either loaded from a parse fixture (tokens, part-of-speech tags, named
entity spans, dependency edges for one exact utterance string) or produced by
the naive fallback tokenizer. Analysis has four steps:

1. merge_span_concepts: map token spans to concept productions. Gazetteer
   matches win over named-entity spans, which win over part-of-speech
   fallbacks. Tokens covered by nothing raise CoverageError.
2. build_parse_cg: a throwaway graph with one concept per token, typed by its
   part-of-speech tag, its lowercased word form, and the shared token type,
   plus one predicate per dependency edge.
3. apply_transformations: transformation rules matched against the parse
   graph emit attachment directives that fill production argument slots,
   promote pronoun-like tokens into reference variables, and set tense.
4. materialize: assemble the utterance graph, minting placeholder concepts
   for predicate slots nothing filled.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

from .compiler import Rule, REF_PTYPE, VAR_PTYPE
from .errors import CoverageError, DanglingSpan
from .graph import ARG0, ARG1, ConceptGraph
from .matcher import match

TOKEN_TYPE = "token"
WORD_PREFIX = "word:"

# Tags whose tokens need no concept of their own (articles, punctuation and
# similar). They count as covered so CoverageError stays meaningful for
# content words.
DEFAULT_SKIP_TAGS = frozenset((
    "dt", "punct", "prp", "prp$", "vbz", "jj", "uh", "in",
    "vb", "md", "rb", "cc", "to", "ex",
))


@dataclass
class ParseInput:
    text: str
    tokens: list[str]
    pos: list[str]
    ner: list[tuple[int, int, str]] = field(default_factory=list)
    deps: list[tuple[int, int, str]] = field(default_factory=list)


@dataclass(frozen=True)
class LexiconEntry:
    surface: str
    concept: str
    canonical: str | None = None
    instance: bool = False
    force_type: bool = False
    cased: bool = False


class Lexicon:
    def __init__(self, entries: list[LexiconEntry]):
        self.entries = list(entries)
        self._trie: dict = {}
        for order, entry in enumerate(self.entries):
            tokens = entry.surface.split()
            node = self._trie
            for tok in tokens:
                node = node.setdefault(tok.lower(), {})
            node.setdefault(None, []).append((order, entry))

    def canonical_surfaces(self) -> dict[str, str]:
        out: dict[str, str] = {}
        for entry in self.entries:
            if entry.canonical and entry.concept not in out:
                out[entry.concept] = entry.canonical
        return out

    def match(self, tokens: list[str]) -> list[tuple[int, int, LexiconEntry]]:
        """Leftmost-longest non-overlapping gazetteer matches.

        Same-span ties prefer the longer written surface, then the smaller
        concept id, then file order.
        """
        lowered = [t.lower() for t in tokens]
        out: list[tuple[int, int, LexiconEntry]] = []
        i = 0
        while i < len(tokens):
            node = self._trie
            best: tuple[int, LexiconEntry] | None = None
            j = i
            while j < len(tokens) and lowered[j] in node:
                node = node[lowered[j]]
                j += 1
                for order, entry in node.get(None, ()):
                    if entry.cased:
                        words = entry.surface.split()
                        if tokens[i:j] != words:
                            continue
                    if (best is None or j > best[0]
                            or (j == best[0] and self._beats(entry, best[1]))):
                        best = (j, entry)
            if best is None:
                i += 1
            else:
                out.append((i, best[0], best[1]))
                i = best[0]
        return out

    @staticmethod
    def _beats(a: LexiconEntry, b: LexiconEntry) -> bool:
        return (-len(a.surface), a.concept) < (-len(b.surface), b.concept)


def load_lexicon(text: str) -> Lexicon:
    """Tab-separated rows: surface, concept, optional comma-joined flags.

    Flags: instance, type, cased, canonical=<render surface>.
    """
    entries = []
    for ln, raw in enumerate(text.splitlines(), start=1):
        line = raw.rstrip("\n")
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        cols = line.split("\t")
        if len(cols) < 2:
            raise ValueError(f"lexicon line {ln}: expected at least 2 tab-separated columns")
        surface, concept = cols[0].strip(), cols[1].strip()
        canonical = None
        instance = force_type = cased = False
        if len(cols) > 2 and cols[2].strip():
            for flag in cols[2].split(","):
                flag = flag.strip()
                if flag == "instance":
                    instance = True
                elif flag == "type":
                    force_type = True
                elif flag == "cased":
                    cased = True
                elif flag.startswith("canonical="):
                    canonical = flag[len("canonical="):]
                elif flag:
                    raise ValueError(f"lexicon line {ln}: unknown flag {flag!r}")
        entries.append(LexiconEntry(surface, concept, canonical, instance, force_type, cased))
    return Lexicon(entries)


@dataclass
class Production:
    """One token span's contribution to the utterance graph."""
    start: int
    end: int
    source: str                      # gazetteer | ner | pos
    concept: str | None = None       # entity or instance concept
    type_concept: str | None = None  # the type a fresh entity instantiates
    predicate: str | None = None
    ptype: str | None = None
    has_object: bool = False
    filled: dict[str, str] = field(default_factory=dict)
    absorbed: bool = False

    def bearing(self) -> str | None:
        return self.concept or self.predicate

    def describe(self) -> dict:
        out = {"span": [self.start, self.end], "source": self.source}
        if self.predicate:
            out["predicate"] = self.predicate
            out["ptype"] = self.ptype
            out["transitive"] = self.has_object
        elif self.concept:
            out["concept"] = self.concept
            if self.type_concept:
                out["type"] = self.type_concept
        return out


@dataclass
class SpanConceptMap:
    productions: list[Production]

    def bearing_productions(self) -> list[Production]:
        return [p for p in self.productions if p.bearing()]

    def production_at(self, index: int) -> Production | None:
        for p in self.productions:
            if p.start <= index < p.end and p.bearing():
                return p
        return None

    def describe(self) -> list[dict]:
        return [p.describe() for p in self.bearing_productions()]


def transitive_ptypes(kb: ConceptGraph) -> frozenset:
    """Predicate types the knowledge base marks as taking an object slot."""
    out = set()
    for p, (subject, _) in kb.signatures.items():
        if kb.ptypes.get(p) == "transitive":
            out.add(subject)
    return frozenset(out)


def merge_span_concepts(parse: ParseInput, lexicon: Lexicon, kb: ConceptGraph,
                        mint: Callable[[str], str], skip_tags: frozenset = DEFAULT_SKIP_TAGS) -> SpanConceptMap:
    transitive = transitive_ptypes(kb)

    def production_for(start: int, end: int, source: str, concept: str,
                       entry: LexiconEntry | None) -> Production:
        known = concept in kb.features
        ancestors = kb.types_of(concept) if known else frozenset()
        is_type = not (entry and entry.instance) and (
            (entry and entry.force_type)
            or "predicate_type" in ancestors or "entity_type" in ancestors
            or not known)
        if is_type and "predicate_type" in ancestors:
            return Production(start, end, source, predicate=mint(concept),
                              ptype=concept, has_object=concept in transitive)
        if is_type:
            return Production(start, end, source, concept=mint(concept),
                              type_concept=concept)
        return Production(start, end, source, concept=concept)

    spans: list[tuple[int, int, str, str, LexiconEntry | None]] = []
    covered = [False] * len(parse.tokens)
    for start, end, entry in lexicon.match(parse.tokens):
        spans.append((start, end, "gazetteer", entry.concept, entry))
        for i in range(start, end):
            covered[i] = True
    for start, end, label in sorted(parse.ner):
        if any(covered[i] for i in range(start, end)):
            continue
        spans.append((start, end, "ner", label, None))
        for i in range(start, end):
            covered[i] = True

    productions: list[Production] = []
    uncovered: list[str] = []
    spans.sort(key=lambda s: (s[0], s[1]))
    cursor = iter(spans)
    pending = next(cursor, None)
    i = 0
    while i < len(parse.tokens):
        if pending and pending[0] == i:
            start, end, source, concept, entry = pending
            if source == "ner":
                productions.append(Production(start, end, "ner",
                                              concept=mint(concept),
                                              type_concept=concept))
            else:
                productions.append(production_for(start, end, source, concept, entry))
            i = end
            pending = next(cursor, None)
            continue
        tag = parse.pos[i] if i < len(parse.pos) else ""
        if tag in skip_tags:
            productions.append(Production(i, i + 1, "pos"))
        else:
            uncovered.append(f"{parse.tokens[i]}[{i}]({tag})")
        i += 1
    if uncovered:
        raise CoverageError("no concept production covers: " + ", ".join(uncovered))
    return SpanConceptMap(productions)


def build_parse_cg(parse: ParseInput,
                   mint: Callable[[str], str]) -> tuple[ConceptGraph, list[str]]:
    g = ConceptGraph()
    token_ids = []
    for i, word in enumerate(parse.tokens):
        tok = mint("tok")
        token_ids.append(tok)
        g.add_concept(tok, surface=word)
        g.add_type_edge(tok, TOKEN_TYPE)
        if i < len(parse.pos) and parse.pos[i]:
            g.add_type_edge(tok, parse.pos[i])
        g.add_type_edge(tok, WORD_PREFIX + word.lower())
    for head, child, rel in parse.deps:
        g.add_predicate(mint("dep"), rel, token_ids[head], token_ids[child])
    return g, token_ids


@dataclass
class Directives:
    """Everything the transformation pass decided, in application order."""
    attachments: list[tuple[str, str, str, str]] = field(default_factory=list)  # rule, target tok, slot, source tok
    promotions: dict[str, list[str]] = field(default_factory=dict)              # token -> types
    var_marks: list[tuple[str, str]] = field(default_factory=list)              # focus, variable
    ref_marks: list[tuple[str, str]] = field(default_factory=list)              # focus, constraint token
    tenses: list[tuple[str, str]] = field(default_factory=list)                 # token, tense


def apply_transformations(rules: list[Rule], parse_cg: ConceptGraph,
                          warnings: list[str]) -> Directives:
    d = Directives()
    for rule in rules:
        if rule.kind != "transformation":
            continue
        for sol in match(rule.pattern, parse_cg):
            mapping = sol.as_dict()

            def resolve(name: str) -> str:
                return mapping.get(name, name)

            for target, slot, source in rule.attachments:
                d.attachments.append((rule.name, resolve(target), slot, resolve(source)))
            for var, type_name in rule.ref_types:
                d.promotions.setdefault(resolve(var), []).append(type_name)
            for focus, var in rule.post.var_decls:
                tok, target = resolve(focus), resolve(var)
                d.promotions.setdefault(tok, [])
                d.var_marks.append((tok, target))
                if target != tok:
                    d.promotions.setdefault(target, [])
            for focus, constraint in rule.post.ref_decls:
                tok = resolve(focus)
                d.promotions.setdefault(tok, [])
                d.ref_marks.append((tok, resolve(constraint)))
            for subject, tense in rule.post.tenses:
                d.tenses.append((resolve(subject), tense))
    return d


def materialize(span_map: SpanConceptMap, directives: Directives,
                token_ids: list[str], canonical: dict[str, str],
                mint: Callable[[str], str],
                warnings: list[str]) -> ConceptGraph:
    """Assemble the utterance graph from productions and directives."""
    index_of = {tok: i for i, tok in enumerate(token_ids)}
    promoted = set(directives.promotions)

    def anchor(tok: str) -> tuple[Production | None, str]:
        """The graph object a token stands for: its production's concept or
        predicate, or the token itself when a transformation promoted it."""
        prod = span_map.production_at(index_of[tok]) if tok in index_of else None
        if prod is not None:
            return prod, prod.bearing()
        if tok in promoted:
            return None, tok
        raise DanglingSpan(f"token {tok} has no concept production and was not promoted")

    type_links: list[tuple[str, str]] = []
    for rule_name, target_tok, slot, source_tok in directives.attachments:
        tprod, _ = anchor(target_tok)
        sprod, svalue = anchor(source_tok)
        if slot == "T":
            if sprod is not None and sprod.type_concept:
                svalue = sprod.type_concept
                sprod.absorbed = True
            tvalue = tprod.bearing() if tprod is not None else target_tok
            type_links.append((tvalue, svalue))
            continue
        if tprod is None or tprod.predicate is None:
            warnings.append(f"{rule_name}: attachment target {target_tok} is not a predicate production")
            continue
        arg = "arg0" if slot == ARG0 else "arg1"
        if arg == "arg1" and not tprod.has_object:
            tprod.has_object = True
        previous = tprod.filled.get(arg)
        if previous is not None and previous != svalue:
            warnings.append(f"{rule_name}: slot {arg} of {tprod.predicate} already "
                            f"filled with {previous}; keeping it")
            continue
        tprod.filled[arg] = svalue

    out = ConceptGraph()
    for prod in span_map.productions:
        if prod.absorbed or not prod.bearing():
            continue
        if prod.predicate is not None:
            subject = prod.filled.get("arg0") or mint("ph")
            obj = prod.filled.get("arg1")
            if obj is None and prod.has_object:
                obj = mint("ph")
            for c in (subject, obj):
                if c is not None and c not in out.features:
                    out.add_concept(c, surface=canonical.get(c))
            out.add_predicate(prod.predicate, prod.ptype, subject, obj)
        else:
            out.add_concept(prod.concept, surface=canonical.get(prod.concept))
            if prod.type_concept:
                out.add_type_edge(prod.concept, prod.type_concept)

    for tok in sorted(promoted):
        if tok not in out.features:
            out.add_concept(tok)
        for type_name in directives.promotions[tok]:
            out.add_type_edge(tok, type_name)
    for child, parent in type_links:
        if child not in out.features:
            out.add_concept(child)
        try:
            out.add_type_edge(child, parent)
        except Exception as exc:  # a cyclic directive must not kill the turn
            warnings.append(f"type attachment {child} -> {parent} skipped: {exc}")
    for focus, var in directives.var_marks:
        for c in (focus, var):
            if c not in out.features:
                out.add_concept(c)
        out.add_predicate(mint("var"), VAR_PTYPE, focus, var)
    for focus, constraint in directives.ref_marks:
        target = constraint
        prod = span_map.production_at(index_of[constraint]) if constraint in index_of else None
        if prod is not None and prod.bearing():
            target = prod.bearing()
        if target not in out.features:
            out.add_concept(target)
        out.add_predicate(mint("ref"), REF_PTYPE, focus, target)
    for tok, tense in directives.tenses:
        prod = span_map.production_at(index_of[tok]) if tok in index_of else None
        target = prod.predicate if prod is not None else None
        if target is None and tok in out.features:
            target = tok
        if target is None or target not in out.features:
            warnings.append(f"tense {tense} has no predicate to land on for {tok}")
            continue
        out.features[target].tense = tense
    return out


def analyze(parse: ParseInput, *, kb: ConceptGraph, lexicon: Lexicon,
            rules: list[Rule], mint: Callable[[str], str],
            canonical: dict[str, str] | None = None,
            skip_tags: frozenset = DEFAULT_SKIP_TAGS,
            warnings: list[str] | None = None) -> tuple[ConceptGraph, SpanConceptMap]:
    """Run the full pipeline for one utterance."""
    warnings = warnings if warnings is not None else []
    canonical = canonical if canonical is not None else lexicon.canonical_surfaces()
    span_map = merge_span_concepts(parse, lexicon, kb, mint, skip_tags)
    parse_cg, token_ids = build_parse_cg(parse, mint)
    directives = apply_transformations(rules, parse_cg, warnings)
    cg = materialize(span_map, directives, token_ids, canonical, mint, warnings)
    return cg, span_map


def naive_parse(text: str, lexicon: Lexicon, kb: ConceptGraph,
                mint: Callable[[str], str],
                canonical: dict[str, str] | None = None) -> tuple[ConceptGraph, SpanConceptMap]:
    """Gazetteer-only fallback for free text with no fixture.

    Tokenizes on whitespace and punctuation, keeps gazetteer productions, and
    fills predicate slots positionally: nearest concept on the left becomes
    the subject, nearest on the right the object.
    """
    import re
    tokens = re.findall(r"[A-Za-z0-9']+|[^\sA-Za-z0-9]", text)
    parse = ParseInput(text=text, tokens=tokens, pos=["unk"] * len(tokens))
    canonical = canonical if canonical is not None else lexicon.canonical_surfaces()
    transitive = transitive_ptypes(kb)
    productions: list[Production] = []
    for start, end, entry in lexicon.match(tokens):
        known = entry.concept in kb.features
        ancestors = kb.types_of(entry.concept) if known else frozenset()
        if not entry.instance and "predicate_type" in ancestors:
            productions.append(Production(start, end, "gazetteer",
                                          predicate=mint(entry.concept), ptype=entry.concept,
                                          has_object=entry.concept in transitive))
        elif not entry.instance and ("entity_type" in ancestors or not known or entry.force_type):
            productions.append(Production(start, end, "gazetteer",
                                          concept=mint(entry.concept), type_concept=entry.concept))
        else:
            productions.append(Production(start, end, "gazetteer", concept=entry.concept))
    for i, prod in enumerate(productions):
        if prod.predicate is None:
            continue
        for left in reversed(productions[:i]):
            if left.concept:
                prod.filled["arg0"] = left.concept
                break
        if prod.has_object:
            for right in productions[i + 1:]:
                if right.concept:
                    prod.filled["arg1"] = right.concept
                    break
    span_map = SpanConceptMap(productions)
    cg = materialize(span_map, Directives(), [], canonical, mint, [])
    return cg, span_map


def load_parse_fixtures(text: str) -> dict[str, ParseInput]:
    """Parse fixture blocks: UTT, TOK, POS, optional NER and DEP lines.

    Blocks are separated by blank lines; see docs/pack-format.md.
    """
    fixtures: dict[str, ParseInput] = {}
    block: list[str] = []

    def finish(lines: list[str]) -> None:
        if not lines:
            return
        utt = tokens = pos = None
        ner: list[tuple[int, int, str]] = []
        deps: list[tuple[int, int, str]] = []
        for line in lines:
            key, _, rest = line.partition(" ")
            if key == "UTT":
                utt = rest
            elif key == "TOK":
                tokens = rest.split()
            elif key == "POS":
                pos = rest.split()
            elif key == "NER":
                a, b, label = rest.split()
                ner.append((int(a), int(b), label))
            elif key == "DEP":
                h, c, rel = rest.split()
                deps.append((int(h), int(c), rel))
            else:
                raise ValueError(f"unknown parse fixture line: {line!r}")
        if utt is None or tokens is None:
            raise ValueError("parse fixture block needs UTT and TOK lines")
        if pos is None:
            pos = ["unk"] * len(tokens)
        if len(pos) != len(tokens):
            raise ValueError(f"fixture for {utt!r}: POS length differs from TOK length")
        fixtures[utt] = ParseInput(utt, tokens, pos, ner, deps)

    for raw in text.splitlines():
        line = raw.rstrip()
        if not line or line.startswith("#"):
            if not line:
                finish(block)
                block = []
            continue
        block.append(line)
    finish(block)
    return fixtures
