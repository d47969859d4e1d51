"""Turning selected response candidates into English text.

Each selected candidate is rendered through a template rule. Template
preconditions are matched against a realization graph, a small induced
subgraph around the candidate, so the template's slot variables rebind
locally and do not need to share names with the response rule. A template
whose name equals the response rule's name wins outright when it matches;
otherwise the most specific matching template is used.

Inflection is deliberately small: a regular suffix engine with an exception
lexicon for the common irregular verbs and nouns. Tense comes from the tense
feature of the governing predicate, number from whether the governing concept
carries the group type.
"""

from __future__ import annotations

from .compiler import Rule
from .errors import EmptyResponse
from .graph import ConceptGraph
from .matcher import Solution, match

# Irregular past forms. Anything absent falls through to the suffix rules.
IRREGULAR_PAST = {
    "be": "was", "have": "had", "go": "went", "do": "did", "say": "said",
    "get": "got", "make": "made", "know": "knew", "think": "thought",
    "see": "saw", "come": "came", "take": "took", "eat": "ate",
    "run": "ran", "give": "gave", "find": "found", "tell": "told",
    "become": "became", "leave": "left", "feel": "felt", "put": "put",
    "bring": "brought", "begin": "began", "keep": "kept", "hold": "held",
    "write": "wrote", "stand": "stood", "hear": "heard", "let": "let",
    "mean": "meant", "set": "set", "meet": "met", "pay": "paid",
    "sit": "sat", "speak": "spoke", "lead": "led", "read": "read",
    "grow": "grew", "lose": "lost", "fall": "fell", "send": "sent",
    "build": "built", "understand": "understood", "draw": "drew",
    "break": "broke", "spend": "spent", "cut": "cut", "rise": "rose",
    "drive": "drove", "buy": "bought", "wear": "wore", "choose": "chose",
}

# Irregular plurals, same contract as IRREGULAR_PAST.
IRREGULAR_PLURAL = {
    "child": "children", "person": "people", "foot": "feet", "man": "men",
    "woman": "women", "mouse": "mice", "tooth": "teeth", "goose": "geese",
    "ox": "oxen", "sheep": "sheep", "deer": "deer", "fish": "fish",
    "leaf": "leaves", "life": "lives", "knife": "knives", "wife": "wives",
    "half": "halves", "wolf": "wolves", "self": "selves", "shelf": "shelves",
}

_VOWELS = "aeiou"


def past_tense(lemma: str) -> str:
    irregular = IRREGULAR_PAST.get(lemma)
    if irregular is not None:
        return irregular
    if lemma.endswith("e"):
        return lemma + "d"
    if lemma.endswith("y") and len(lemma) > 1 and lemma[-2] not in _VOWELS:
        return lemma[:-1] + "ied"
    # stop -> stopped, plan -> planned: short stems ending
    # consonant-vowel-consonant double the final letter
    if (len(lemma) >= 3 and lemma[-1] not in _VOWELS + "wxy"
            and lemma[-2] in _VOWELS and lemma[-3] not in _VOWELS
            and len(lemma) <= 5):
        return lemma + lemma[-1] + "ed"
    return lemma + "ed"


def plural(lemma: str) -> str:
    irregular = IRREGULAR_PLURAL.get(lemma)
    if irregular is not None:
        return irregular
    if lemma.endswith(("s", "x", "z", "ch", "sh")):
        return lemma + "es"
    if lemma.endswith("y") and len(lemma) > 1 and lemma[-2] not in _VOWELS:
        return lemma[:-1] + "ies"
    return lemma + "s"


def inflect_verb(lemma: str, tense: str) -> str:
    if tense == "past":
        return past_tense(lemma)
    if tense == "future":
        return "will " + lemma
    return lemma


def inflect_noun(lemma: str, number: str) -> str:
    return plural(lemma) if number == "plural" else lemma


def realization_graph(source: ConceptGraph, core: set[str]) -> ConceptGraph:
    """Induced subgraph over the core concepts, their predicate arguments,
    and the full type closure of everything included."""
    include = set(core)
    for c in core:
        sig = source.signatures.get(c)
        if sig:
            include.update(a for a in sig if a is not None)
    for c in list(include):
        include.update(source.types_of(c))
    sub = ConceptGraph()
    for c in sorted(include):
        sub.add_concept(c, surface=source.surfaces.get(c))
        f = source.features[c]
        g = sub.features[c]
        g.salience, g.truth, g.tense = f.salience, f.truth, f.tense
        g.last_mention, g.pinned, g.covered = f.last_mention, f.pinned, f.covered
    for c in sorted(include):
        for parent in source.parents.get(c, ()):  # keep only inside edges
            if parent in include:
                sub.add_type_edge(c, parent)
    for p in sorted(include):
        sig = source.signatures.get(p)
        if sig and sig[0] in include and (sig[1] is None or sig[1] in include):
            sub.signatures[p] = sig
            sub.ptypes[p] = source.ptypes.get(p)
    sub._touch()
    return sub


def select_template(templates: list[Rule], rule_name: str,
                    rgraph: ConceptGraph) -> tuple[Rule, Solution] | None:
    """Name-paired template first, then the most specific match."""
    named = [t for t in templates if t.name == rule_name]
    ranked = named + sorted(
        (t for t in templates if t.name != rule_name),
        key=lambda t: (-len(t.pattern.pattern.signatures),
                       -len(t.pattern.pattern.features),
                       t.name))
    for template in ranked:
        solutions = match(template.pattern, rgraph)
        if solutions:
            return template, solutions[0]
    return None


def render(template: Rule, solution: Solution, rgraph: ConceptGraph,
           warnings: list[str]) -> str:
    mapping = solution.as_dict()

    def surface(concept: str) -> str:
        s = rgraph.surfaces.get(concept)
        if s:
            return s
        warnings.append(f"no surface form for {concept}; using its id")
        return concept

    parts: list[str] = []
    for token in template.template:
        if token.kind == "literal":
            parts.append(token.text)
        elif token.kind == "slot":
            parts.append(surface(mapping.get(token.var, token.var)))
        else:
            governor = mapping.get(token.var, token.var)
            if token.feature == "tense":
                tense = rgraph.features[governor].tense if governor in rgraph.features else None
                form = {"past": "past", "future": "future"}.get(tense or "", "present")
                parts.append(inflect_verb(token.lemma, form))
            else:
                types = rgraph.types_of(governor) if governor in rgraph.features else frozenset()
                parts.append(inflect_noun(token.lemma, "plural" if "group" in types else "singular"))
    # literals carry their own spacing, so concatenate and collapse runs
    text = " ".join("".join(parts).split())
    if text and text[0].islower():
        text = text[0].upper() + text[1:]
    return text


def compose(reaction: str | None, presentation: str | None) -> str:
    segments = [s for s in (reaction, presentation) if s]
    if not segments:
        raise EmptyResponse("both response segments are empty")
    return " ".join(segments)
