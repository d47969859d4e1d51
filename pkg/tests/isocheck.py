"""Structural isomorphism checker for concept graphs.

Independent of the library's matcher on purpose: round-trip tests need an
oracle that shares no code with the thing under test. Two graphs are
isomorphic when a bijection over concept ids preserves predicate signatures,
direct type-edge sets, truth class, and tense. Salience and surfaces are
runtime baggage and are ignored.
"""

from __future__ import annotations

from cgdialog.graph import ConceptGraph


def _shape(g: ConceptGraph, c: str) -> tuple:
    """Mapping-invariant fingerprint used to cut the candidate space."""
    sig = g.signatures.get(c)
    in_sig = sum(1 for s, o in g.signatures.values() if s == c or o == c)
    in_type = sum(1 for plist in g.parents.values() if c in plist)
    return (
        sig is not None,
        bool(sig and sig[1] is not None),
        g.features[c].truth,
        g.features[c].tense or "",
        len(g.parents.get(c, ())),
        in_sig,
        in_type,
    )


def _consistent(g1: ConceptGraph, g2: ConceptGraph, mapping: dict[str, str]) -> bool:
    for c, image in mapping.items():
        sig = g1.signatures.get(c)
        isig = g2.signatures.get(image)
        if (sig is None) != (isig is None):
            return False
        if sig is not None:
            s, o = sig
            if s in mapping and mapping[s] != isig[0]:
                return False
            if o is None:
                if isig[1] is not None:
                    return False
            elif o in mapping and mapping[o] != isig[1]:
                return False
        mine = {mapping[p] for p in g1.parents.get(c, ()) if p in mapping}
        if not mine <= set(g2.parents.get(image, ())):
            return False
    return True


def _complete(g1: ConceptGraph, g2: ConceptGraph, mapping: dict[str, str]) -> bool:
    for c, image in mapping.items():
        sig = g1.signatures.get(c)
        if sig is not None:
            s, o = sig
            if g2.signatures[image] != (mapping[s], None if o is None else mapping[o]):
                return False
        if {mapping[p] for p in g1.parents.get(c, ())} != set(g2.parents.get(image, ())):
            return False
        f1, f2 = g1.features[c], g2.features[image]
        if f1.truth != f2.truth or f1.tense != f2.tense:
            return False
    return True


def isomorphic(g1: ConceptGraph, g2: ConceptGraph) -> bool:
    if len(g1.features) != len(g2.features):
        return False
    if len(g1.signatures) != len(g2.signatures):
        return False

    shapes2: dict[tuple, list[str]] = {}
    for d in g2.features:
        shapes2.setdefault(_shape(g2, d), []).append(d)
    candidates: dict[str, list[str]] = {}
    for c in g1.features:
        pool = shapes2.get(_shape(g1, c))
        if not pool:
            return False
        candidates[c] = sorted(pool)

    order = sorted(g1.features, key=lambda c: (len(candidates[c]), c))

    def backtrack(i: int, mapping: dict[str, str], used: set[str]) -> bool:
        if i == len(order):
            return _complete(g1, g2, mapping)
        c = order[i]
        for d in candidates[c]:
            if d in used:
                continue
            mapping[c] = d
            used.add(d)
            if _consistent(g1, g2, mapping) and backtrack(i + 1, mapping, used):
                return True
            del mapping[c]
            used.discard(d)
        return False

    return backtrack(0, {}, set())
