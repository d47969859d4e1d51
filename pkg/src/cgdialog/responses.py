"""Response candidate identification, scoring, and compound selection.

Response rules come in two kinds, reactions and presentations, and the turn's
reply concatenates the top candidate of each. A candidate is one solution of
a response rule's precondition; its d-set is the working-memory predicates the
precondition matched. Scoring weighs the rule's priority class at 0.75 and
the mean salience of the d-set at 0.25. Candidates whose whole d-set was
already presented, or whose exact rule-plus-bindings key was selected before,
drop out; everything else competes again next turn.
"""

from __future__ import annotations

from dataclasses import dataclass

from .compiler import Rule
from .inference import FiredKey
from .matcher import Solution, match_all
from .memory import WorkingMemory

PRIORITY_RATINGS = {"low": 0.1, "mid": 0.4, "high": 0.7, "critical": 1.0}


@dataclass
class ResponseCandidate:
    rule: Rule
    solution: Solution
    d_set: tuple[str, ...]
    mean_salience: float
    score: float

    def sort_key(self) -> tuple:
        return (-self.score,
                -PRIORITY_RATINGS[self.rule.priority or "mid"],
                -self.mean_salience,
                self.rule.name,
                self.solution.bindings)

    def describe(self) -> dict:
        return {
            "rule": self.rule.name,
            "kind": self.rule.kind,
            "priority": self.rule.priority,
            "bindings": dict(self.solution.bindings),
            "d_set": list(self.d_set),
            "mean_salience": round(self.mean_salience, 12),
            "score": round(self.score, 12),
        }


def score(priority: str, saliences: list[float]) -> float:
    """0.75 times the priority rating plus 0.25 times the mean salience."""
    rating = PRIORITY_RATINGS[priority]
    mean = sum(saliences) / len(saliences) if saliences else 0.0
    return 0.75 * rating + 0.25 * mean


def identify_candidates(rules: list[Rule], wm: WorkingMemory,
                        fired: set[FiredKey], workers: int = 4) -> list[ResponseCandidate]:
    """Match every response rule against memory and score the survivors.

    Skips solutions that touch hypothetical (unresolved reference) material,
    solutions already selected in this conversation, and candidates whose
    entire nonempty d-set is covered.
    """
    response_rules = [r for r in rules if r.kind in ("reaction", "presentation")]
    hypo = wm.hypothetical_concepts()
    graph = wm.graph
    out: list[ResponseCandidate] = []
    for rule, (_, solutions) in zip(
            response_rules,
            match_all([r.pattern for r in response_rules], graph, workers=workers)):
        pattern_preds = sorted(rule.pattern.pattern.signatures)
        for sol in solutions:
            if (rule.name, sol.bindings) in fired:
                continue
            mapping = sol.as_dict()
            if any(v in hypo for v in mapping.values()):
                continue
            d_set = tuple(sorted({mapping.get(p, p) for p in pattern_preds}))
            if d_set and all(graph.features[p].covered for p in d_set):
                continue
            saliences = [graph.features[p].salience for p in d_set]
            out.append(ResponseCandidate(
                rule=rule,
                solution=sol,
                d_set=d_set,
                mean_salience=sum(saliences) / len(saliences) if saliences else 0.0,
                score=score(rule.priority or "mid", saliences),
            ))
    out.sort(key=ResponseCandidate.sort_key)
    return out


def select_compound(candidates: list[ResponseCandidate], wm: WorkingMemory,
                    fired: set[FiredKey]) -> tuple[ResponseCandidate | None,
                                                   ResponseCandidate | None]:
    """Pick the top reaction and top presentation independently.

    Selection marks each chosen d-set covered and records the fired key so
    the same rule firing is never presented twice.
    """
    reaction = next((c for c in candidates if c.rule.kind == "reaction"), None)
    presentation = next((c for c in candidates if c.rule.kind == "presentation"), None)
    for chosen in (reaction, presentation):
        if chosen is None:
            continue
        fired.add((chosen.rule.name, chosen.solution.bindings))
        for p in chosen.d_set:
            if p in wm.graph.features:
                wm.graph.features[p].covered = True
    return reaction, presentation
