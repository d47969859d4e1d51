"""Forward-chaining rule application.

apply_rules runs breadth-style passes: every inference rule is matched
against the current graph, all firings are instantiated, and the next pass
sees the union. A rule plus a specific solution fires at most once per
conversation; callers own the fired-key set and keep it across turns.
Instantiated concepts enter the graph with default features, so inferred
knowledge has no mention salience of its own.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

from .compiler import PostPattern, Rule, REF_PTYPE, VAR_PTYPE
from .errors import KBSyntaxError
from .graph import ConceptGraph
from .matcher import Solution, match_all

FiredKey = tuple[str, tuple[tuple[str, str], ...]]


@dataclass(frozen=True)
class Firing:
    """One trace entry: which rule fired on which bindings, adding what."""

    rule: str
    solution: Solution
    added: tuple[str, ...]


def instantiate(post: PostPattern, bindings: dict[str, str],
                mint: Callable[[str], str]) -> tuple[ConceptGraph, dict[str, str]]:
    """Build the delta graph for one firing.

    Precondition variables substitute from the bindings, knowledge constants
    stay, and every local gets a fresh id from the mint. Returns the delta
    and the local-to-fresh-id map.
    """
    g = ConceptGraph()
    local_map: dict[str, str] = {}

    def resolve(name: str | None) -> str | None:
        if name is None:
            return None
        if name in post.pre_vars:
            return bindings[name]
        if name in post.locals:
            got = local_map.get(name)
            if got is None:
                prefix = name[1:].rsplit("~", 1)[0] if name.startswith("~") else name
                got = local_map[name] = mint(prefix)
            return got
        return name

    for name, types in post.concepts:
        c = resolve(name)
        g.add_concept(c)
        for t in types:
            g.add_type_edge(c, t)
    for name, ptype, subject, obj in post.predicates:
        g.add_predicate(resolve(name), ptype, resolve(subject), resolve(obj))
    for target in post.negated:
        rt = resolve(target)
        if rt not in g:
            raise KBSyntaxError(f"not() target {target!r} is not part of the postcondition")
        g.features[rt].truth = False
    for target, tense in post.tenses:
        g.features[resolve(target)].tense = tense
    for focus, var in post.var_decls:
        g.add_predicate(mint("var"), VAR_PTYPE, resolve(focus), resolve(var))
    for focus, constraint in post.ref_decls:
        g.add_predicate(mint("ref"), REF_PTYPE, resolve(focus), resolve(constraint))
    return g, local_map


def apply_rules(rules: list[Rule], graph: ConceptGraph,
                mint: Callable[[str], str], fired: set[FiredKey],
                passes: int = 2, workers: int = 4) -> list[Firing]:
    """Apply inference rules in place for the configured number of passes.

    Each pass matches every rule against the same snapshot, then applies all
    new firings in rule order. Stops early once a pass adds nothing.
    """
    trace: list[Firing] = []
    for _ in range(max(1, passes)):
        matched = match_all([r.pattern for r in rules], graph, workers=workers)
        progressed = False
        for rule, (_, solutions) in zip(rules, matched):
            assert rule.post is not None
            for sol in solutions:
                key: FiredKey = (rule.name, sol.bindings)
                if key in fired:
                    continue
                fired.add(key)
                delta, _ = instantiate(rule.post, sol.as_dict(), mint)
                graph.absorb(delta)
                trace.append(Firing(rule.name, sol, tuple(delta.features)))
                progressed = True
        if not progressed:
            break
    return trace


def rewrite_fired_keys(fired: set[FiredKey], merges: dict[str, str]) -> None:
    """Rename merged-away concept ids inside recorded fired keys.

    Reference resolution replaces a focus id with its referent; rewriting the
    keys keeps an already-fired rule from firing again on the merged form.
    """
    if not merges:
        return
    stale = [key for key in fired if any(v in merges for _, v in key[1])]
    for key in stale:
        fired.discard(key)
        rule, bindings = key
        fired.add((rule, tuple(sorted((k, merges.get(v, v)) for k, v in bindings))))
