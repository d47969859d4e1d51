"""Working memory and its per-turn dynamics.

Working memory is a concept graph plus bookkeeping. Every turn runs the same
sequence: ingest the utterance, retrieve adjacent knowledge, infer, resolve
references, respond, decay, propagate, prune. This module owns everything in
that sequence except inference and response selection.

Salience: verbalized concepts enter at the mention score; knowledge arriving
by retrieval or inference enters at zero and only gains salience through
propagation. Decay subtracts a constant each turn (clamped at zero), then
propagation relaxes salience(i) = max(salience(i), best_neighbor - delta)
over argument edges in both directions until a fixpoint (type edges do not
propagate). Pruning keeps the top non-protected concepts by salience and
cascades removal so no predicate is left with a missing argument.

References: a var predicate declares a hypothetical variable anchored at a
focus; a ref predicate attaches a constraint predicate to the focus. The
resolver builds a query from each reference's structure, matches it against
working memory minus all hypothetical material, and merges the focus with
the best candidate: highest salience, most recent mention, smallest id.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .compiler import REF_PTYPE, VAR_PTYPE
from .graph import ConceptGraph, FeatureSet
from .matcher import QueryGraph, match

DOMAIN_TYPE_ROOTS = ("entity_type", "predicate_type")


@dataclass
class SalienceConfig:
    mention: float = 1.0
    turn_decay: float = 0.1
    propagation_delta: float = 0.2
    cap: int = 100
    retrieval_threshold: float = 0.8
    retrieval_hops: int = 1
    propagation_passes: int = 0  # 0 means relax to fixpoint

    @classmethod
    def from_dict(cls, raw: dict) -> "SalienceConfig":
        cfg = cls()
        for key, value in raw.items():
            if key == "propagation_passes" and value in ("fixpoint", None):
                value = 0
            if not hasattr(cfg, key):
                raise KeyError(f"unknown salience option {key!r}")
            setattr(cfg, key, value)
        return cfg


@dataclass
class Reference:
    """One pending reference: a focus, its variables, its constraint predicates."""

    focus: str
    variables: tuple[str, ...]
    constraints: tuple[str, ...]
    marker_preds: tuple[str, ...]  # the var/ref predicate instances themselves


@dataclass
class Resolution:
    focus: str
    referent: str
    merges: dict[str, str]


class WorkingMemory:
    def __init__(self, kb: ConceptGraph, config: SalienceConfig | None = None,
                 pinned: tuple[str, ...] = ()):
        self.kb = kb
        self.config = config or SalienceConfig()
        self.graph = ConceptGraph()
        self.turn = 0
        for concept in pinned:
            self.graph.add_concept(concept)
            self.graph.features[concept].pinned = True
        self.import_kb_types(list(pinned))

    # -- helpers -------------------------------------------------------------

    def import_kb_types(self, concepts: list[str]) -> None:
        """Copy knowledge-base type edges (transitively) for the given concepts."""
        kb = self.kb
        queue = [c for c in concepts if c in kb.features]
        seen = set()
        while queue:
            c = queue.pop()
            if c in seen:
                continue
            seen.add(c)
            if c in kb.surfaces:
                self.graph.surfaces.setdefault(c, kb.surfaces[c])
            for parent in kb.parents.get(c, ()):
                self.graph.add_type_edge(c, parent)
                queue.append(parent)

    def reference_markers(self) -> list[str]:
        g = self.graph
        return sorted(p for p in g.signatures
                      if g.ptypes.get(p) in (VAR_PTYPE, REF_PTYPE))

    def references(self) -> list[Reference]:
        g = self.graph
        by_focus: dict[str, dict[str, list[str]]] = {}
        for p in self.reference_markers():
            focus, other = g.signatures[p]
            entry = by_focus.setdefault(focus, {"vars": [], "cons": [], "marks": []})
            entry["marks"].append(p)
            if g.ptypes.get(p) == VAR_PTYPE:
                entry["vars"].append(other if other is not None else focus)
            else:
                if other is not None:
                    entry["cons"].append(other)
        out = []
        for focus in sorted(by_focus):
            entry = by_focus[focus]
            variables = entry["vars"] or [focus]
            out.append(Reference(
                focus=focus,
                variables=tuple(dict.fromkeys(variables)),
                constraints=tuple(dict.fromkeys(entry["cons"])),
                marker_preds=tuple(sorted(entry["marks"])),
            ))
        return out

    def hypothetical_concepts(self) -> set[str]:
        """Reference variables plus everything structurally touching them."""
        g = self.graph
        hypo: set[str] = set()
        for ref in self.references():
            hypo.update(ref.variables)
            hypo.add(ref.focus)
            hypo.update(ref.marker_preds)
        # predicates whose arguments are hypothetical are hypothetical too
        grew = True
        while grew:
            grew = False
            for p, (s, o) in g.signatures.items():
                if p not in hypo and (s in hypo or (o is not None and o in hypo)):
                    hypo.add(p)
                    grew = True
        return hypo

    def domain_types_of(self, concept: str) -> frozenset[str]:
        """The concept's types that belong to the domain ontology.

        Parse-layer tags (part of speech, dependency relations) are attached
        as types but make no sense as reference constraints; only types that
        sit under a domain root count.
        """
        g = self.graph
        out = set()
        for t in g.types_of(concept):
            if t in DOMAIN_TYPE_ROOTS:
                continue
            ancestors = g.types_of(t) if t in g.features else frozenset()
            if any(root in ancestors for root in DOMAIN_TYPE_ROOTS):
                out.add(t)
        return frozenset(out)

    # -- per-turn operations ---------------------------------------------------

    def ingest_turn(self, utterance: ConceptGraph) -> list[str]:
        """Union an utterance graph into memory at full mention salience."""
        for feats in utterance.features.values():
            feats.salience = self.config.mention
            feats.last_mention = self.turn
        self.graph.absorb(utterance)
        self.import_kb_types(list(utterance.features))
        return sorted(utterance.features)

    def mark_verbalized(self, concepts: list[str]) -> None:
        for c in concepts:
            if c in self.graph.features:
                feats = self.graph.features[c]
                feats.salience = max(feats.salience, self.config.mention)
                feats.last_mention = self.turn

    def retrieve_knowledge(self) -> list[str]:
        """Pull knowledge-base predicates adjacent to salient concepts.

        Hop one collects every knowledge predicate touching a salient working
        memory concept; further hops expand from what was just added.
        Retrieved material enters with zero salience.
        """
        kb = self.kb
        g = self.graph
        threshold = self.config.retrieval_threshold
        frontier = {c for c, f in g.features.items()
                    if f.salience >= threshold and c in kb.features}
        added: list[str] = []
        for _ in range(self.config.retrieval_hops):
            new_concepts: set[str] = set()
            for p in sorted(kb.signatures):
                if p in g.features:
                    continue
                s, o = kb.signatures[p]
                if s in frontier or (o is not None and o in frontier):
                    delta = [p, s] + ([o] if o is not None else [])
                    for c in delta:
                        if c not in g.features:
                            new_concepts.add(c)
                            added.append(c)
                        g.add_concept(c)
                    g.signatures[p] = (s, o)
                    if p in kb.ptypes:
                        g.ptypes.setdefault(p, kb.ptypes[p])
                    g.features[p].truth = kb.features[p].truth
                    g.features[p].tense = kb.features[p].tense
            self.import_kb_types(sorted(new_concepts))
            frontier = new_concepts
            if not frontier:
                break
        self.graph._touch()
        return sorted(dict.fromkeys(added))

    def update_salience(self) -> None:
        """Decay, then relax propagation to a fixpoint (or N sweeps)."""
        g = self.graph
        decay = self.config.turn_decay
        if decay:
            for feats in g.features.values():
                feats.salience = max(0.0, feats.salience - decay)
        delta = self.config.propagation_delta
        neighbors: dict[str, list[str]] = {c: [] for c in g.features}
        for p, (s, o) in g.signatures.items():
            neighbors[p].append(s)
            neighbors[s].append(p)
            if o is not None:
                neighbors[p].append(o)
                neighbors[o].append(p)
        passes = self.config.propagation_passes
        limit = passes if passes > 0 else len(g.features) + 1
        for _ in range(limit):
            current = {c: f.salience for c, f in g.features.items()}
            changed = False
            for c, f in g.features.items():
                ns = neighbors[c]
                if not ns:
                    continue
                best = max(current[n] for n in ns) - delta
                if best > f.salience + 1e-15:
                    f.salience = best
                    changed = True
            if not changed:
                break

    def protected_concepts(self) -> set[str]:
        """Concepts exempt from pruning, closed over predicate arguments."""
        g = self.graph
        protected = {c for c, f in g.features.items() if f.pinned}
        protected.update(c for c in ("user", "bot") if c in g.features)
        for plist in g.parents.values():
            protected.update(plist)  # ontology types in use
        hypo = self.hypothetical_concepts()
        protected.update(hypo)
        for p in g.signatures:
            if g.ptypes.get(p) in ("request", "request_truth"):
                protected.add(p)
        # close downward: arguments of protected predicates stay reachable
        grew = True
        while grew:
            grew = False
            for p, (s, o) in g.signatures.items():
                if p in protected:
                    for a in (s, o):
                        if a is not None and a not in protected:
                            protected.add(a)
                            grew = True
        return protected

    def prune(self) -> list[str]:
        """Drop the least salient unprotected concepts beyond the cap.

        Removal can orphan concepts that were only protected as ontology
        types in use, so the trim repeats with a fresh protected set until
        the open pool fits the cap. Each pass removes at least one concept,
        which bounds the loop.
        """
        g = self.graph
        cap = self.config.cap
        removed: list[str] = []
        while True:
            protected = self.protected_concepts()
            open_concepts = [c for c in g.features if c not in protected]
            if len(open_concepts) <= cap:
                break
            ranked = sorted(
                open_concepts,
                key=lambda c: (-g.features[c].salience, -g.features[c].last_mention, c))
            kth_value = g.features[ranked[cap - 1]].salience
            survivors = [c for c in ranked if g.features[c].salience >= kth_value]
            survivors = survivors[:cap]
            doomed = sorted(set(open_concepts) - set(survivors))
            g.remove_concepts(doomed)
            removed.extend(doomed)
        return sorted(removed)

    def resolve_references(self) -> list[Resolution]:
        """Resolve pending references against non-hypothetical memory.

        Runs to quiescence: resolving one reference can unlock another. Each
        resolution merges every variable and constraint predicate of the
        chosen solution into its data counterpart and removes the marker
        predicates.
        """
        out: list[Resolution] = []
        progress = True
        while progress:
            progress = False
            refs = self.references()
            if not refs:
                break
            hypo = self.hypothetical_concepts()
            base = self.graph.copy()
            base.remove_concepts(sorted(hypo))
            for ref in refs:
                resolution = self._resolve_one(ref, base)
                if resolution is not None:
                    out.append(resolution)
                    progress = True
                    break  # memory changed; recompute structures
        return out

    def _resolve_one(self, ref: Reference, data: ConceptGraph) -> Resolution | None:
        g = self.graph
        pattern = ConceptGraph()
        variables: list[str] = []
        for v in dict.fromkeys((ref.focus,) + ref.variables):
            if v not in g.features:
                continue
            variables.append(v)
            pattern.add_concept(v)
            for t in sorted(self.domain_types_of(v)):
                pattern.add_type_edge(v, t)
        truth: dict[str, bool] = {}
        for p in ref.constraints:
            if p not in g.signatures:
                continue
            s, o = g.signatures[p]
            ptype = g.ptypes.get(p)
            if ptype is None:
                continue
            variables.append(p)
            pattern.add_predicate(p, ptype, s, o)
            truth[p] = g.features[p].truth
            for arg in (s, o):
                if arg is not None and arg not in variables and arg not in pattern.features:
                    pattern.add_concept(arg)
        if ref.focus not in variables:
            return None
        query = QueryGraph(name=f"ref:{ref.focus}", pattern=pattern,
                           variables=tuple(variables), truth_requirements=truth)
        solutions = match(query, data)
        if not solutions:
            return None
        feats = self.graph.features

        def referent_rank(sol) -> tuple:
            c = sol[ref.focus]
            f = feats[c]
            return (-f.salience, -f.last_mention, c, sol.bindings)

        best = min(solutions, key=referent_rank)
        referent = best[ref.focus]
        merges: dict[str, str] = {}
        for var, bound in best.bindings:
            if var in self.graph.features and var != bound:
                self.graph.merge_concepts(bound, var)
                merges[var] = bound
        self.graph.remove_concepts([m for m in ref.marker_preds
                                    if m in self.graph.features])
        return Resolution(focus=ref.focus, referent=referent, merges=merges)

    def detect_contradictions(self) -> list[tuple[str, str]]:
        """Pairs of same-shaped predicates with opposite truth classes."""
        g = self.graph
        shapes: dict[tuple, list[str]] = {}
        for p in sorted(g.signatures):
            key = (g.ptypes.get(p),) + g.signatures[p]
            shapes.setdefault(key, []).append(p)
        out: list[tuple[str, str]] = []
        for key, preds in sorted(shapes.items(), key=lambda kv: kv[1]):
            if len(preds) < 2:
                continue
            positives = [p for p in preds if g.features[p].truth]
            negatives = [p for p in preds if not g.features[p].truth]
            for a in positives:
                for b in negatives:
                    out.append((min(a, b), max(a, b)))
        return sorted(set(out))

    def snapshot(self) -> dict:
        """JSON-ready dump of memory state, deterministic key order."""
        g = self.graph
        concepts = []
        for c in sorted(g.features):
            f = g.features[c]
            concepts.append({
                "id": c,
                "surface": g.surfaces.get(c),
                "salience": round(f.salience, 12),
                "truth": "positive" if f.truth else "negative",
                "pinned": f.pinned,
                "covered": f.covered,
                "tense": f.tense,
                "last_mention": f.last_mention,
                "types": sorted(g.types_of(c)),
            })
        predicates = []
        for p in sorted(g.signatures):
            s, o = g.signatures[p]
            predicates.append({
                "id": p,
                "ptype": g.ptypes.get(p),
                "subject": s,
                "object": o,
                "truth": "positive" if g.features[p].truth else "negative",
                "salience": round(g.features[p].salience, 12),
            })
        edges = []
        for p in sorted(g.signatures):
            s, o = g.signatures[p]
            edges.append({"source": p, "target": s, "label": "ARG0"})
            if o is not None:
                edges.append({"source": p, "target": o, "label": "ARG1"})
        for c in sorted(g.features):
            for t in sorted(g.parents.get(c, ())):
                edges.append({"source": c, "target": t, "label": "T"})
        return {"turn": self.turn, "concepts": concepts,
                "predicates": predicates, "edges": edges}
