"""Random (query, data) pairs for differential matcher testing.

Two recipes: patterns carved out of the data graph (usually satisfiable) and
independent random patterns (usually not). Both stay inside the oracle's
enumeration bounds: at most 12 data concepts and 4 variables.
"""

from __future__ import annotations

import random

from cgdialog.graph import ConceptGraph
from cgdialog.matcher import QueryGraph

from randgraph import random_graph


def _carved_query(rng: random.Random, data: ConceptGraph) -> QueryGraph:
    preds = sorted(data.signatures)
    picked = rng.sample(preds, k=min(len(preds), rng.randint(1, 3))) if preds else []
    concepts: set[str] = set()
    for p in picked:
        concepts.add(p)
        s, o = data.signatures[p]
        concepts.add(s)
        if o is not None and rng.random() < 0.75:
            concepts.add(o)

    if not concepts:
        concepts = set(rng.sample(sorted(data.features), k=1))

    renamable = sorted(concepts)
    n_vars = min(len(renamable), rng.randint(1, 4))
    as_var = {c: f"Q{i}" for i, c in enumerate(rng.sample(renamable, k=n_vars))}

    def image(c: str) -> str:
        return as_var.get(c, c)

    pattern = ConceptGraph()
    truth_req: dict[str, bool] = {}
    for c in concepts:
        pattern.add_concept(image(c))
        ancestors = sorted(data.types_of(c))
        for t in rng.sample(ancestors, k=min(len(ancestors), rng.randint(0, 2))):
            if t not in concepts:
                pattern.add_type_edge(image(c), t)
    for p in picked:
        s, o = data.signatures[p]
        ptype_pool = sorted(data.types_of(p))
        ptype = rng.choice(ptype_pool)
        obj = image(o) if (o is not None and o in concepts) else None
        pattern.add_predicate(image(p), ptype, image(s), obj)
        if rng.random() < 0.2:
            truth_req[image(p)] = rng.random() < 0.5
        else:
            truth_req[image(p)] = data.features[p].truth

    variables = sorted(as_var.values())
    if rng.random() < 0.2 and len(variables) < 4:
        # an extra loose variable constrained only by type, if at all
        loose = f"Q{len(variables)}"
        pattern.add_concept(loose)
        types = sorted(data.type_concepts())
        if types and rng.random() < 0.7:
            pattern.add_type_edge(loose, rng.choice(types))
        variables.append(loose)

    return QueryGraph(
        name="carved",
        pattern=pattern,
        variables=tuple(variables),
        truth_requirements=truth_req,
        distinct=rng.random() < 0.25,
    )


def _independent_query(rng: random.Random, data: ConceptGraph) -> QueryGraph:
    pattern = ConceptGraph()
    pool = sorted(data.features)
    types = sorted(data.type_concepts()) or pool
    n_vars = rng.randint(1, 4)
    variables = [f"Q{i}" for i in range(n_vars)]
    nodes = variables + rng.sample(pool, k=min(len(pool), rng.randint(0, 2)))
    from cgdialog.errors import CycleError

    for node in nodes:
        pattern.add_concept(node)
        if rng.random() < 0.6:
            parent = rng.choice(types)
            if parent != node:
                try:
                    pattern.add_type_edge(node, parent)
                except CycleError:
                    pass
    for i in range(rng.randint(0, 2)):
        subject = rng.choice(nodes)
        obj = rng.choice(nodes) if rng.random() < 0.5 else None
        name = f"QP{i}"
        pattern.add_predicate(name, rng.choice(types), subject, obj)
        variables.append(name)
    return QueryGraph(
        name="independent",
        pattern=pattern,
        variables=tuple(sorted(set(variables))[:4]),
        truth_requirements={},
        distinct=rng.random() < 0.25,
    )


def random_pair(rng: random.Random) -> tuple[QueryGraph, ConceptGraph]:
    while True:
        data = random_graph(rng, max_concepts=8)
        if len(data.features) <= 12:  # the acceptance bound on data size
            break
    if rng.random() < 0.6 and data.signatures:
        return _carved_query(rng, data), data
    return _independent_query(rng, data), data
