"""Subgraph matching of query patterns against concept graphs.

A solution assigns every query variable a data concept such that, after
substitution: every non-variable query concept exists in the data, every
query predicate maps onto a data predicate with the same arguments, every
query concept's required types are a subset of the data concept's types, and
every matched predicate carries the truth class the query demands. A query
argument left unfilled matches any argument in that slot. Variables may share
a binding unless the query is marked distinct.

match() runs a most-constrained-first backtracking join over a type-indexed
view of the data. brute_force_oracle() enumerates every assignment and
filters by the defining conditions; it exists to cross-check match() and
refuses data graphs above a small size bound.
"""

from __future__ import annotations

import itertools
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from .errors import TooLarge
from .graph import ConceptGraph


@dataclass
class QueryGraph:
    name: str
    pattern: ConceptGraph
    variables: tuple[str, ...]
    truth_requirements: dict[str, bool] = field(default_factory=dict)
    distinct: bool = False

    def var_set(self) -> frozenset[str]:
        return frozenset(self.variables)


@dataclass(frozen=True)
class Solution:
    bindings: tuple[tuple[str, str], ...]  # sorted (variable, concept) pairs

    @classmethod
    def of(cls, mapping: dict[str, str]) -> "Solution":
        return cls(tuple(sorted(mapping.items())))

    def as_dict(self) -> dict[str, str]:
        return dict(self.bindings)

    def __getitem__(self, var: str) -> str:
        for k, v in self.bindings:
            if k == var:
                return v
        raise KeyError(var)


class _DataIndex:
    """Type and argument indexes over a data graph, cached per version."""

    def __init__(self, data: ConceptGraph):
        self.version = data.version
        self.concepts = tuple(sorted(data.features))
        self.concept_set = frozenset(self.concepts)
        self.types: dict[str, frozenset[str]] = {}
        for c in self.concepts:
            for t in data.types_of(c):
                self.types.setdefault(t, set()).add(c)  # type: ignore[arg-type]
        self.types = {t: frozenset(cs) for t, cs in self.types.items()}
        self.pred_ids = frozenset(data.signatures)
        self.by_subject: dict[str, list[str]] = {}
        self.by_object: dict[str, list[str]] = {}
        for p in sorted(data.signatures):
            s, o = data.signatures[p]
            self.by_subject.setdefault(s, []).append(p)
            if o is not None:
                self.by_object.setdefault(o, []).append(p)


def _index_for(data: ConceptGraph) -> _DataIndex:
    cached = getattr(data, "_match_index", None)
    if cached is None or cached.version != data.version:
        cached = _DataIndex(data)
        setattr(data, "_match_index", cached)
    return cached


def match(query: QueryGraph, data: ConceptGraph) -> list[Solution]:
    """All satisfying assignments, sorted by their binding tuples."""
    pattern = query.pattern
    variables = query.var_set()
    index = _index_for(data)
    dfeat = data.features
    dsig = data.signatures

    # Constants must be present with compatible types.
    for c in pattern.features:
        if c in variables:
            continue
        if c not in index.concept_set:
            return []
        if not pattern.types_of(c) <= data.types_of(c):
            return []

    def type_ok(var: str, concept: str) -> bool:
        req = pattern.types_of(var)
        return not req or req <= data.types_of(concept)

    sigma: dict[str, str] = {}
    bound_values: set[str] = set()  # for distinct mode
    distinct = query.distinct

    def bind(var_or_const: str, value: str) -> bool | None:
        """Try to unify a pattern name with a data concept.

        Returns None if no new binding was needed, True when a binding was
        added (caller must undo), False on conflict.
        """
        if var_or_const in variables:
            bound = sigma.get(var_or_const)
            if bound is not None:
                return None if bound == value else False
            if distinct and value in bound_values:
                return False
            if not type_ok(var_or_const, value):
                return False
            sigma[var_or_const] = value
            bound_values.add(value)
            return True
        return None if var_or_const == value else False

    def unbind(var: str) -> None:
        bound_values.discard(sigma.pop(var))

    pred_items = [(p,) + pattern.signatures[p] for p in sorted(pattern.signatures)]
    truth_req = query.truth_requirements

    # Variables appearing in no pattern predicate get enumerated afterwards.
    in_preds: set[str] = set()
    for p, s, o in pred_items:
        in_preds.update((p, s))
        if o is not None:
            in_preds.add(o)
    loose = [v for v in sorted(variables) if v not in in_preds]
    loose_candidates: list[tuple[str, tuple[str, ...]]] = []
    for v in loose:
        req = pattern.types_of(v)
        cands: frozenset[str] = index.concept_set
        for t in req:
            cands = cands & index.types.get(t, frozenset())
        loose_candidates.append((v, tuple(sorted(cands))))

    solutions: list[Solution] = []

    def candidates_for(p: str, s: str, o: str | None) -> list[str]:
        if p not in variables:
            return [p] if p in index.pred_ids else []
        bound = sigma.get(p)
        if bound is not None:
            return [bound]
        sv = s if s not in variables else sigma.get(s)
        if sv is not None:
            return index.by_subject.get(sv, [])
        if o is not None:
            ov = o if o not in variables else sigma.get(o)
            if ov is not None:
                return index.by_object.get(ov, [])
        req = pattern.types_of(p)
        best: frozenset[str] | None = None
        for t in req:
            group = index.types.get(t, frozenset())
            if best is None or len(group) < len(best):
                best = group
        pool2 = best if best is not None else index.pred_ids
        return sorted(pool2 & index.pred_ids)

    def check_pred(p: str, s: str, o: str | None, dp: str) -> list[str] | None:
        """Match one pattern predicate onto data predicate dp.

        Returns the list of newly bound names to undo, or None on failure.
        """
        if dp not in index.pred_ids:
            return None
        if dfeat[dp].truth != truth_req.get(p, True):
            return None
        added: list[str] = []
        ok = bind(p, dp)
        if ok is False:
            return None
        if ok:
            added.append(p)
            if not type_ok(p, dp):
                for a in added:
                    unbind(a)
                return None
        ds, do = dsig[dp]
        ok = bind(s, ds)
        if ok is False:
            for a in added:
                unbind(a)
            return None
        if ok:
            added.append(s)
        if o is not None:
            if do is None:
                for a in added:
                    unbind(a)
                return None
            ok = bind(o, do)
            if ok is False:
                for a in added:
                    unbind(a)
                return None
            if ok:
                added.append(o)
        return added

    def solve_preds(remaining: list[tuple[str, str, str | None]]) -> None:
        if not remaining:
            solve_loose(0)
            return
        # Most constrained first: fewest candidates under current bindings.
        best_i = 0
        best_cands: list[str] | None = None
        for i, (p, s, o) in enumerate(remaining):
            cands = candidates_for(p, s, o)
            if best_cands is None or len(cands) < len(best_cands):
                best_i, best_cands = i, cands
                if len(cands) <= 1:
                    break
        p, s, o = remaining[best_i]
        rest = remaining[:best_i] + remaining[best_i + 1:]
        assert best_cands is not None
        for dp in best_cands:
            added = check_pred(p, s, o, dp)
            if added is None:
                continue
            solve_preds(rest)
            for a in added:
                unbind(a)

    def solve_loose(i: int) -> None:
        if i == len(loose_candidates):
            solutions.append(Solution.of(dict(sigma)))
            return
        var, cands = loose_candidates[i]
        for c in cands:
            if distinct and c in bound_values:
                continue
            sigma[var] = c
            bound_values.add(c)
            solve_loose(i + 1)
            del sigma[var]
            bound_values.discard(c)

    # Type checks for predicate-typed constants were done above; verify the
    # truth classes of ground pattern predicates with ground arguments here
    # so fully ground queries short-circuit correctly.
    solve_preds(pred_items)
    solutions.sort(key=lambda s: s.bindings)
    return solutions


def match_all(queries: list[QueryGraph], data: ConceptGraph,
              workers: int = 4) -> list[tuple[QueryGraph, list[Solution]]]:
    """Match every query against one data graph.

    One task per query on a thread pool; the output order follows the input
    order and each solution list is sorted, so results are identical for any
    worker count.
    """
    _index_for(data)  # build the shared index once, outside the pool
    if workers <= 1 or len(queries) <= 1:
        return [(q, match(q, data)) for q in queries]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        sols = list(pool.map(lambda q: match(q, data), queries))
    return list(zip(queries, sols))


_ORACLE_CONCEPT_BOUND = 20
_ORACLE_ASSIGNMENT_BOUND = 5_000_000


def brute_force_oracle(query: QueryGraph, data: ConceptGraph) -> list[Solution]:
    """Reference matcher: enumerate every assignment, filter by definition.

    Independent of match(): no indexes, no pruning, no shared helpers. Only
    suitable for small graphs; raises TooLarge beyond its bounds.
    """
    concepts = sorted(data.features)
    if len(concepts) > _ORACLE_CONCEPT_BOUND:
        raise TooLarge(f"oracle refuses data graphs over {_ORACLE_CONCEPT_BOUND} concepts")
    variables = list(query.variables)
    if len(concepts) ** len(variables) > _ORACLE_ASSIGNMENT_BOUND:
        raise TooLarge("oracle refuses assignment spaces this large")

    pattern = query.pattern
    out: list[Solution] = []
    for combo in itertools.product(concepts, repeat=len(variables)):
        sigma = dict(zip(variables, combo))
        if query.distinct and len(set(combo)) != len(combo):
            continue
        if _oracle_satisfies(query, pattern, data, sigma):
            out.append(Solution.of(sigma))
    out.sort(key=lambda s: s.bindings)
    return out


def _oracle_satisfies(query: QueryGraph, pattern: ConceptGraph,
                      data: ConceptGraph, sigma: dict[str, str]) -> bool:
    def image(c: str) -> str:
        return sigma.get(c, c)

    for c in pattern.features:
        ic = image(c)
        if ic not in data.features:
            return False
        if not pattern.types_of(c) <= data.types_of(ic):
            return False
    for p in pattern.signatures:
        ip = image(p)
        if ip not in data.signatures:
            return False
        qs, qo = pattern.signatures[p]
        ds, do = data.signatures[ip]
        if image(qs) != ds:
            return False
        if qo is not None and image(qo) != do:
            return False
        if data.features[ip].truth != query.truth_requirements.get(p, True):
            return False
    return True
