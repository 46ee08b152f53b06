"""Higher inference tasks over a single decision table: minimal knowledge
requirements for a target decision, rule-level explanations, and the full
induced decision map over rectangular states (the brute-force oracle the
round-trip tests lean on)."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .kernel import DEFAULT_ENUMERATION_CAP, Value, Vocabulary
from .oel import collect_k, eval_epistemic, k_query
from .tables import (
    DecisionResult,
    DecisionTable,
    FactSet,
    INCONSISTENT,
    VALUE,
    decide,
    enumerate_fact_sets,
    env_vocabulary_for,
    facts_to_state,
    row_formulas,
)


@dataclass(frozen=True)
class KnowledgeProfile:
    """Per variable, the values still considered possible. Pointwise superset
    order: bigger sets = more ignorance."""

    restrictions: tuple[tuple[str, frozenset[Value]], ...]

    @staticmethod
    def from_facts(facts: FactSet, t: DecisionTable) -> "KnowledgeProfile":
        given = facts.as_dict()
        seen: dict[str, frozenset[Value]] = {}
        for var, sort in t.inputs:
            if var not in seen:
                seen[var] = given.get(var, frozenset(sort.values))
        return KnowledgeProfile(tuple(seen.items()))

    def as_dict(self) -> dict[str, frozenset[Value]]:
        return dict(self.restrictions)

    def to_facts(self) -> FactSet:
        return FactSet(self.restrictions)

    def covers(self, other: "KnowledgeProfile") -> bool:
        """Pointwise superset: self is at least as ignorant as other."""
        mine, theirs = self.as_dict(), other.as_dict()
        return set(mine) == set(theirs) and all(mine[v] >= theirs[v] for v in mine)

    def __str__(self) -> str:
        parts = []
        for var, values in self.restrictions:
            ordered = sorted(map(str, values))
            parts.append(f"{var} in {{{', '.join(ordered)}}}")
        return "; ".join(parts)


@dataclass(frozen=True)
class RowStatus:
    row: int  # 1-based
    cell_truths: tuple[bool, ...]
    fired: bool

    @property
    def first_failing_cell(self) -> Optional[int]:
        for i, ok in enumerate(self.cell_truths):
            if not ok:
                return i + 1
        return None


@dataclass(frozen=True)
class Explanation:
    fired_rows: tuple[RowStatus, ...]
    blocked_rows: tuple[RowStatus, ...]


def explain(
    t: DecisionTable,
    facts: FactSet,
    vocab: Vocabulary,
    cap: int = DEFAULT_ENUMERATION_CAP,
) -> tuple[DecisionResult, Explanation]:
    """The decide outcome plus per-row firing status; for blocked rows the
    first failing cell pinpoints the missing (or excess) knowledge."""
    result = decide(t, facts, vocab, cap)
    if result.status == INCONSISTENT:
        return result, Explanation((), ())
    state = facts_to_state(facts, env_vocabulary_for(t, vocab), cap)
    fired, blocked = [], []
    for i, cells in enumerate(row_formulas(t)):
        truths = []
        for f in cells:
            if f is None:
                truths.append(True)
            else:
                kval = {k: k_query(state, k.body, cap) for k in collect_k(f)}
                truths.append(eval_epistemic(f, kval))
        status = RowStatus(i + 1, tuple(truths), all(truths))
        (fired if status.fired else blocked).append(status)
    return result, Explanation(tuple(fired), tuple(blocked))


def enumerate_decision_map(
    t: DecisionTable,
    vocab: Vocabulary,
    cap: int = DEFAULT_ENUMERATION_CAP,
) -> list[tuple[KnowledgeProfile, DecisionResult]]:
    """The table's full induced decision function over rectangular states."""
    out = []
    for facts in enumerate_fact_sets(t, cap):
        profile = KnowledgeProfile.from_facts(facts, t)
        out.append((profile, decide(t, facts, vocab, cap)))
    return out


def minimal_knowledge(
    t: DecisionTable,
    target: Value,
    vocab: Vocabulary,
    cap: int = DEFAULT_ENUMERATION_CAP,
) -> list[KnowledgeProfile]:
    """Maximal-ignorance profiles that still force the target decision.

    Pure brute force over rectangular states: decisions are not monotone in
    knowledge once `!K` cells are involved, so no pruning shortcut is sound.
    The result is an antichain under the pointwise superset order.
    """
    out_var, out_sort = t.output
    if target not in out_sort:
        raise ValueError(f"target {target!r} not in sort {out_sort.name}")
    good = [
        profile
        for profile, result in enumerate_decision_map(t, vocab, cap)
        if result.status == VALUE and result.value == target
    ]
    return [
        p for p in good
        if not any(q is not p and q.covers(p) and q != p for q in good)
    ]
