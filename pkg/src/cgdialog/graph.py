"""Concept graph data model.

A concept graph holds a set of concept ids, a partial predicate map that
assigns an argument pair to the ids acting as predicate instances, a directed
acyclic type ontology over the same ids, and a feature record per concept
(salience, truth class, pinning, coverage, tense).

Unary predicates store None in the object slot; None is a sentinel and never
a concept. The labeled-edge view of a graph spells every predicate out as
ARG0/ARG1 edges and every ancestor type as a T edge, which is the shape the
matcher and the inspector UI consume. Graph and view are mutually
reconstructible up to type-edge transitivity.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Iterable, Iterator

from .errors import CycleError, RedefinitionError, SignatureConflict, UnknownConcept

ARG0 = "ARG0"
ARG1 = "ARG1"
TYPE_EDGE = "T"


@dataclass
class FeatureSet:
    """Per-concept runtime features.

    salience is clamped to [0, 1] by the working-memory update, truth is the
    predicate truth class (True = positive), pinned exempts a concept from
    pruning, covered marks predicates already presented in a response, tense
    carries the time marker compiled from time predicates, and last_mention
    records the most recent turn the concept was verbalized on (-1 = never).
    """

    salience: float = 0.0
    truth: bool = True
    pinned: bool = False
    covered: bool = False
    tense: str | None = None
    last_mention: int = -1

    def merged_with(self, other: "FeatureSet", truth_from_other: bool) -> "FeatureSet":
        """Combine two records: max salience, OR flags, configurable truth."""
        return FeatureSet(
            salience=max(self.salience, other.salience),
            truth=other.truth if truth_from_other else self.truth,
            pinned=self.pinned or other.pinned,
            covered=self.covered or other.covered,
            tense=other.tense if other.tense is not None else self.tense,
            last_mention=max(self.last_mention, other.last_mention),
        )


@dataclass(frozen=True)
class Edge:
    """One labeled edge of the expanded view."""

    source: str
    target: str
    label: str


@dataclass
class LabeledGraphView:
    nodes: tuple[str, ...]
    edges: tuple[Edge, ...]


class ConceptGraph:
    def __init__(self) -> None:
        self.features: dict[str, FeatureSet] = {}
        # predicate id -> (subject, object-or-None)
        self.signatures: dict[str, tuple[str, str | None]] = {}
        # declared instance type of each predicate, kept for serialization
        # and contradiction detection
        self.ptypes: dict[str, str] = {}
        # concept -> ordered list of direct parent types
        self.parents: dict[str, list[str]] = {}
        self.surfaces: dict[str, str] = {}
        self._version = 0
        self._types_cache: dict[str, frozenset[str]] | None = None

    # -- basic structure ---------------------------------------------------

    @property
    def version(self) -> int:
        return self._version

    def _touch(self) -> None:
        self._version += 1
        self._types_cache = None

    def __contains__(self, concept: str) -> bool:
        return concept in self.features

    def __len__(self) -> int:
        return len(self.features)

    def concepts(self) -> Iterator[str]:
        return iter(self.features)

    def add_concept(self, concept: str, surface: str | None = None) -> str:
        if concept not in self.features:
            self.features[concept] = FeatureSet()
            self.parents.setdefault(concept, [])
            self._touch()
        if surface is not None and concept not in self.surfaces:
            self.surfaces[concept] = surface
        return concept

    def add_type_edge(self, concept: str, parent: str) -> None:
        """Declare concept as an instance or subtype of parent."""
        if concept == parent:
            raise CycleError(f"self-typed concept {concept!r}")
        self.add_concept(concept)
        self.add_concept(parent)
        if parent in self.parents[concept]:
            return
        if self._reaches(parent, concept):
            raise CycleError(f"type edge {concept!r} -> {parent!r} closes a cycle")
        self.parents[concept].append(parent)
        self._touch()

    def _reaches(self, start: str, goal: str) -> bool:
        stack = [start]
        seen = set()
        while stack:
            node = stack.pop()
            if node == goal:
                return True
            if node in seen:
                continue
            seen.add(node)
            stack.extend(self.parents.get(node, ()))
        return False

    def add_predicate(self, pred: str, ptype: str, subject: str,
                      obj: str | None = None) -> str:
        """Register pred as an instance of ptype holding between the args."""
        if pred in self.signatures and self.signatures[pred] != (subject, obj):
            raise RedefinitionError(
                f"predicate {pred!r} redeclared with different arguments")
        self.add_concept(pred)
        self.add_concept(subject)
        if obj is not None:
            self.add_concept(obj)
        self.add_type_edge(pred, ptype)
        self.signatures[pred] = (subject, obj)
        self.ptypes.setdefault(pred, ptype)
        self._touch()
        return pred

    def is_predicate(self, concept: str) -> bool:
        return concept in self.signatures

    def args_of(self, pred: str) -> tuple[str, str | None]:
        return self.signatures[pred]

    # -- types ---------------------------------------------------------------

    def types_of(self, concept: str) -> frozenset[str]:
        """All ancestor types of the concept, excluding the concept itself."""
        if concept not in self.features:
            raise UnknownConcept(concept)
        cache = self._types_cache
        if cache is None:
            cache = self._types_cache = {}
        got = cache.get(concept)
        if got is not None:
            return got
        out: set[str] = set()
        stack = list(self.parents.get(concept, ()))
        while stack:
            node = stack.pop()
            if node in out:
                continue
            out.add(node)
            stack.extend(self.parents.get(node, ()))
        result = frozenset(out)
        cache[concept] = result
        return result

    def type_concepts(self) -> set[str]:
        """Every concept with at least one incoming type edge."""
        out: set[str] = set()
        for plist in self.parents.values():
            out.update(plist)
        return out

    # -- whole-graph operations ----------------------------------------------

    def copy(self) -> "ConceptGraph":
        g = ConceptGraph()
        g.features = {c: replace(f) for c, f in self.features.items()}
        g.signatures = dict(self.signatures)
        g.ptypes = dict(self.ptypes)
        g.parents = {c: list(ps) for c, ps in self.parents.items()}
        g.surfaces = dict(self.surfaces)
        return g

    def absorb(self, other: "ConceptGraph") -> None:
        """Union other into this graph in place.

        Shared ids merge features (max salience, OR flags); the absorbed
        graph's truth class wins, so later information overrides. A shared
        predicate id with a different argument pair is a SignatureConflict,
        and a type edge that would close a cycle is a CycleError.
        """
        for concept, feats in other.features.items():
            mine = self.features.get(concept)
            if mine is None:
                self.features[concept] = replace(feats)
                self.parents.setdefault(concept, [])
            else:
                self.features[concept] = mine.merged_with(feats, truth_from_other=True)
        for pred, sig in other.signatures.items():
            if pred in self.signatures and self.signatures[pred] != sig:
                raise SignatureConflict(
                    f"predicate {pred!r} has arguments {self.signatures[pred]} here "
                    f"and {sig} in the absorbed graph")
            self.signatures[pred] = sig
        for pred, ptype in other.ptypes.items():
            self.ptypes.setdefault(pred, ptype)
        for concept, plist in other.parents.items():
            for parent in plist:
                self.add_type_edge(concept, parent)
        for concept, surface in other.surfaces.items():
            self.surfaces.setdefault(concept, surface)
        self._touch()

    def merge_concepts(self, keep: str, drop: str) -> None:
        """Collapse drop into keep, rewiring every reference to drop.

        Used by reference resolution: merging a reference focus into its
        referent rewires the pending predicates onto the real concept. At
        most one of the two may carry a predicate signature unless both
        signatures are identical after the substitution.
        """
        if keep not in self.features:
            raise UnknownConcept(keep)
        if drop not in self.features:
            raise UnknownConcept(drop)
        if keep == drop:
            return

        def sub(c: str | None) -> str | None:
            return keep if c == drop else c

        keep_sig = self.signatures.get(keep)
        drop_sig = self.signatures.get(drop)
        if drop_sig is not None:
            moved = (sub(drop_sig[0]), sub(drop_sig[1]))
            if keep_sig is not None:
                if (sub(keep_sig[0]), sub(keep_sig[1])) != moved:
                    raise SignatureConflict(
                        f"cannot merge {drop!r} into {keep!r}: both are predicates "
                        "with different arguments")
            else:
                self.signatures[keep] = moved  # type: ignore[assignment]
                if drop in self.ptypes:
                    self.ptypes.setdefault(keep, self.ptypes[drop])
        for pred, (s, o) in list(self.signatures.items()):
            if s == drop or o == drop:
                self.signatures[pred] = (sub(s), sub(o))  # type: ignore[assignment]

        for parent in self.parents.get(drop, ()):  # drop's own types
            target = sub(parent)
            if target != keep:
                self.add_type_edge(keep, target)
        for concept, plist in self.parents.items():
            if drop in plist and concept != drop:
                rewired = [p for p in plist if p != drop]
                if concept != keep and keep not in rewired:
                    if self._reaches(keep, concept):
                        raise CycleError(
                            f"merging {drop!r} into {keep!r} closes a type cycle at {concept!r}")
                    rewired.append(keep)
                self.parents[concept] = rewired

        self.features[keep] = self.features[keep].merged_with(
            self.features[drop], truth_from_other=False)
        if not self.surfaces.get(keep) and self.surfaces.get(drop):
            self.surfaces[keep] = self.surfaces[drop]

        del self.features[drop]
        del self.parents[drop]
        self.signatures.pop(drop, None)
        self.ptypes.pop(drop, None)
        self.surfaces.pop(drop, None)
        self._touch()

    def remove_concepts(self, doomed: Iterable[str]) -> None:
        """Delete the given concepts plus every predicate left dangling.

        Removal cascades: a predicate whose argument disappears is removed
        too, and so on, so no signature ever references a missing concept.
        """
        queue = [c for c in doomed if c in self.features]
        gone: set[str] = set()
        while queue:
            c = queue.pop()
            if c in gone or c not in self.features:
                continue
            gone.add(c)
            del self.features[c]
            del self.parents[c]
            self.signatures.pop(c, None)
            self.ptypes.pop(c, None)
            self.surfaces.pop(c, None)
            for pred, (s, o) in self.signatures.items():
                if s == c or o == c:
                    queue.append(pred)
        if gone:
            for concept, plist in self.parents.items():
                if any(p in gone for p in plist):
                    self.parents[concept] = [p for p in plist if p not in gone]
            self._touch()

    # -- view ------------------------------------------------------------------

    def view(self) -> LabeledGraphView:
        nodes = tuple(sorted(self.features))
        edges: list[Edge] = []
        for pred in sorted(self.signatures):
            subject, obj = self.signatures[pred]
            edges.append(Edge(pred, subject, ARG0))
            if obj is not None:
                edges.append(Edge(pred, obj, ARG1))
        for concept in nodes:
            for t in sorted(self.types_of(concept)):
                edges.append(Edge(concept, t, TYPE_EDGE))
        return LabeledGraphView(nodes=nodes, edges=tuple(edges))

    @classmethod
    def from_view(cls, view: LabeledGraphView) -> "ConceptGraph":
        g = cls()
        for node in view.nodes:
            g.add_concept(node)
        args: dict[str, dict[str, str]] = {}
        for edge in view.edges:
            if edge.label == TYPE_EDGE:
                g.add_type_edge(edge.source, edge.target)
            elif edge.label in (ARG0, ARG1):
                args.setdefault(edge.source, {})[edge.label] = edge.target
            else:
                raise ValueError(f"unknown edge label {edge.label!r}")
        for pred, slots in args.items():
            if ARG0 not in slots:
                raise ValueError(f"predicate {pred!r} in view lacks an ARG0 edge")
            g.signatures[pred] = (slots[ARG0], slots.get(ARG1))
        g._touch()
        return g

    def validate(self) -> None:
        """Check referential integrity and ontology acyclicity."""
        for pred, (s, o) in self.signatures.items():
            if pred not in self.features or s not in self.features:
                raise UnknownConcept(f"dangling predicate {pred!r}")
            if o is not None and o not in self.features:
                raise UnknownConcept(f"dangling object on {pred!r}")
        for concept, plist in self.parents.items():
            if concept not in self.features:
                raise UnknownConcept(concept)
            for p in plist:
                if p not in self.features:
                    raise UnknownConcept(p)
        # Kahn's algorithm over type edges; leftovers mean a cycle.
        indeg = {c: 0 for c in self.features}
        for plist in self.parents.values():
            for p in plist:
                indeg[p] += 1
        frontier = [c for c, d in indeg.items() if d == 0]
        seen = 0
        while frontier:
            node = frontier.pop()
            seen += 1
            for p in self.parents.get(node, ()):
                indeg[p] -= 1
                if indeg[p] == 0:
                    frontier.append(p)
        if seen != len(self.features):
            raise CycleError("type ontology contains a cycle")


def graph_union(a: ConceptGraph, b: ConceptGraph) -> ConceptGraph:
    """Functional union: a fresh graph holding both inputs, b's truth winning."""
    out = a.copy()
    out.absorb(b)
    return out
