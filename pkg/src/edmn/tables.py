"""Epistemic decision tables: cell constraints, translation to ordered
epistemic theories, hit-policy enforcement and dependency-graph evaluation.

Every cell constraint is read epistemically: a value test fires only when
the tested fact is *known*, and the `!K` constructs let a row react to
ignorance itself.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Optional, Union

from . import kernel, oel
from .kernel import (
    DEFAULT_ENUMERATION_CAP,
    EpistemicState,
    Eq,
    Formula,
    Not,
    Sort,
    Structure,
    Value,
    Vocabulary,
    VocabularyError,
    conj,
    disj,
)
from .oel import Definition, K, Rule, Theory, TheorySequence, k_query

ENV_THEORY_ID = "T_E"


class TableError(ValueError):
    """Structurally invalid table, fact set or dependency graph."""


# --- cell constraints -----------------------------------------------------


class CellConstraint:
    __slots__ = ()


@dataclass(frozen=True)
class AnyValue(CellConstraint):
    """The `-` cell: contributes no condition."""


@dataclass(frozen=True)
class ValueTest(CellConstraint):
    op: str  # = != < <= > >=
    value: Value


@dataclass(frozen=True)
class Range(CellConstraint):
    lo: int
    hi: int
    lo_incl: bool = True
    hi_incl: bool = True


@dataclass(frozen=True)
class Enumeration(CellConstraint):
    values: tuple[Value, ...]


@dataclass(frozen=True)
class OrConstraint(CellConstraint):
    left: CellConstraint
    right: CellConstraint


@dataclass(frozen=True)
class NotKnown(CellConstraint):
    """The bare `!K` cell: no single value of the column is known."""


@dataclass(frozen=True)
class NotKnownThat(CellConstraint):
    """`!K[ C ]`: it is not known that the constraint holds."""

    inner: CellConstraint


ORDER_OPS = {"<", "<=", ">", ">="}


def _objective_values(c: CellConstraint, sort: Sort) -> tuple[Value, ...]:
    """Domain values satisfying an objective (value-level) constraint."""
    if isinstance(c, ValueTest):
        if c.op in ORDER_OPS and not sort.numeric:
            raise TableError(f"order comparison {c.op} on non-numeric sort {sort.name}")
        if c.value not in sort:
            raise TableError(f"value {c.value!r} not in sort {sort.name}")
        ops = {
            "=": lambda v: v == c.value,
            "!=": lambda v: v != c.value,
            "<": lambda v: v < c.value,
            "<=": lambda v: v <= c.value,
            ">": lambda v: v > c.value,
            ">=": lambda v: v >= c.value,
        }
        return tuple(v for v in sort.values if ops[c.op](v))
    if isinstance(c, Range):
        if not sort.numeric:
            raise TableError(f"range constraint on non-numeric sort {sort.name}")
        lo = c.lo if c.lo_incl else c.lo + 1
        hi = c.hi if c.hi_incl else c.hi - 1
        return tuple(v for v in sort.values if lo <= v <= hi)
    if isinstance(c, Enumeration):
        for v in c.values:
            if v not in sort:
                raise TableError(f"value {v!r} not in sort {sort.name}")
        return tuple(v for v in sort.values if v in c.values)
    if isinstance(c, OrConstraint):
        left = _objective_values(c.left, sort)
        right = _objective_values(c.right, sort)
        return tuple(v for v in sort.values if v in left or v in right)
    raise TableError(f"constraint {c!r} is not objective (cannot appear under |/!K[..])")


def constraint_to_formula(
    c: CellConstraint, variable: str, sort: Sort, env_theory_id: str = ENV_THEORY_ID
) -> Optional[Formula]:
    """Epistemic reading of one cell. None for `-` (no conjunct).

    Objective constraints become a single K over their value disjunction;
    `!K` expands to 'no domain value is known'; `!K[C]` negates one K.
    """
    if isinstance(c, AnyValue):
        return None
    if isinstance(c, NotKnown):
        return conj(Not(K(env_theory_id, Eq(variable, v))) for v in sort.values)
    if isinstance(c, NotKnownThat):
        values = _objective_values(c.inner, sort)
        return Not(K(env_theory_id, disj(Eq(variable, v) for v in values)))
    values = _objective_values(c, sort)
    return K(env_theory_id, disj(Eq(variable, v) for v in values))


def render_constraint(c: CellConstraint) -> str:
    if isinstance(c, AnyValue):
        return "-"
    if isinstance(c, ValueTest):
        return str(c.value) if c.op == "=" else f"{c.op} {c.value}"
    if isinstance(c, Range):
        return f"{c.lo}..{c.hi}"
    if isinstance(c, Enumeration):
        return " | ".join(str(v) for v in c.values)
    if isinstance(c, OrConstraint):
        return f"{render_constraint(c.left)} | {render_constraint(c.right)}"
    if isinstance(c, NotKnown):
        return "!K"
    if isinstance(c, NotKnownThat):
        return f"!K[ {render_constraint(c.inner)} ]"
    raise TableError(f"unknown constraint {c!r}")


# --- tables ---------------------------------------------------------------


@dataclass(frozen=True)
class TableRow:
    cells: tuple[CellConstraint, ...]
    output: Value


@dataclass(frozen=True)
class DecisionTable:
    name: str
    hit_policy: str  # "A" (Any) or "U" (Unique)
    inputs: tuple[tuple[str, Sort], ...]
    output: tuple[str, Sort]
    rows: tuple[TableRow, ...]

    def __post_init__(self):
        if self.hit_policy not in ("A", "U"):
            raise TableError(f"table {self.name}: unsupported hit policy {self.hit_policy!r}")
        out_var, out_sort = self.output
        for i, row in enumerate(self.rows):
            if len(row.cells) != len(self.inputs):
                raise TableError(
                    f"table {self.name} row {i + 1}: {len(row.cells)} cells for "
                    f"{len(self.inputs)} inputs"
                )
            if row.output not in out_sort:
                raise TableError(
                    f"table {self.name} row {i + 1}: output {row.output!r} not in sort {out_sort.name}"
                )

    @property
    def input_variables(self) -> tuple[str, ...]:
        seen: list[str] = []
        for v, _ in self.inputs:
            if v not in seen:
                seen.append(v)
        return tuple(seen)


@dataclass(frozen=True)
class FactSet:
    """Rectangular knowledge: per variable, the set of values still possible.

    Absent variable = unknown. An empty set (from contradictory facts)
    denotes inconsistent knowledge.
    """

    restrictions: tuple[tuple[str, frozenset[Value]], ...]

    @staticmethod
    def of(mapping: dict[str, Iterable[Value]]) -> "FactSet":
        return FactSet(tuple((k, frozenset(v)) for k, v in mapping.items()))

    def as_dict(self) -> dict[str, frozenset[Value]]:
        return dict(self.restrictions)

    def restrict(self, var: str, values: Iterable[Value]) -> "FactSet":
        """Intersect with an additional per-variable restriction."""
        d = self.as_dict()
        new = frozenset(values)
        d[var] = d[var] & new if var in d else new
        return FactSet.of(d)


EMPTY_FACTS = FactSet(())


def facts_to_state(
    facts: FactSet, vocab: Vocabulary, cap: int = DEFAULT_ENUMERATION_CAP
) -> EpistemicState:
    """All structures consistent with every per-variable restriction."""
    restrictions = facts.as_dict()
    for var, values in restrictions.items():
        if not vocab.has_symbol(var):
            raise VocabularyError(f"unknown variable {var}")
        if vocab.is_proposition(var):
            bad = values - {True, False}
        else:
            bad = values - set(vocab.constant_sort(var).values)
        if bad:
            raise VocabularyError(f"{var}: values {sorted(map(str, bad))} outside the domain")

    axes = []
    for sym in vocab.symbols:
        if vocab.is_proposition(sym):
            domain: tuple[Value, ...] = (True, False)
        else:
            domain = vocab.constant_sort(sym).values
        if sym in restrictions:
            domain = tuple(v for v in domain if v in restrictions[sym])
        axes.append(domain)
    count = 1
    for axis in axes:
        count *= len(axis)
    if count > cap:
        raise kernel.EnumerationCapExceeded(count, cap)
    worlds = frozenset(Structure(vocab, combo) for combo in itertools.product(*axes))
    return EpistemicState(vocab, worlds)


# --- decision results -----------------------------------------------------


VALUE = "value"
UNDEFINED = "undefined"
INCONSISTENT = "inconsistent"
HIT_POLICY_VIOLATION = "hit_policy_violation"


@dataclass(frozen=True)
class DecisionResult:
    status: str
    value: Optional[Value] = None
    values: frozenset[Value] = frozenset()
    fired_rows: tuple[int, ...] = ()  # 1-based row indices
    state_size: int = 0
    note: str = ""

    @staticmethod
    def of_value(value: Value, fired: tuple[int, ...], size: int) -> "DecisionResult":
        return DecisionResult(VALUE, value=value, values=frozenset({value}),
                              fired_rows=fired, state_size=size)

    def __str__(self) -> str:
        if self.status == VALUE:
            return str(self.value)
        if self.status == HIT_POLICY_VIOLATION:
            vals = ", ".join(sorted(map(str, self.values)))
            return f"hit policy violation (rows {list(self.fired_rows)}: {vals})"
        return self.status + (f" ({self.note})" if self.note else "")


def env_vocabulary_for(t: DecisionTable, vocab: Vocabulary) -> Vocabulary:
    return vocab.restrict(t.input_variables)


def row_formulas(
    t: DecisionTable, env_theory_id: str = ENV_THEORY_ID
) -> list[list[Optional[Formula]]]:
    """Per row, the per-cell epistemic formulas (None for `-`)."""
    out = []
    for row in t.rows:
        out.append([
            constraint_to_formula(cell, var, sort, env_theory_id)
            for cell, (var, sort) in zip(row.cells, t.inputs)
        ])
    return out


def translate_table(t: DecisionTable, env_theory_id: str = ENV_THEORY_ID) -> Theory:
    """One definition rule per row: output = A_i <- conjunction of cell formulas."""
    out_var, _ = t.output
    rules = []
    for row, cells in zip(t.rows, row_formulas(t, env_theory_id)):
        body = conj(f for f in cells if f is not None)
        rules.append(Rule(out_var, row.output, body))
    return Theory(t.name, definitions=(Definition(tuple(rules)),))


def _eval_cell(state: EpistemicState, f: Optional[Formula], cap: int) -> bool:
    if f is None:
        return True
    kval = {k: k_query(state, k.body, cap) for k in oel.collect_k(f)}
    return oel.eval_epistemic(f, kval)


def decide(
    t: DecisionTable,
    facts: FactSet,
    vocab: Vocabulary,
    cap: int = DEFAULT_ENUMERATION_CAP,
) -> DecisionResult:
    """Evaluate one table against rectangular knowledge about its inputs.

    Restrictions on variables the table does not read are ignored (a DRD
    threads one growing fact set through every table)."""
    env_vocab = env_vocabulary_for(t, vocab)
    relevant = FactSet(
        tuple((v, vals) for v, vals in facts.restrictions if env_vocab.has_symbol(v))
    )
    state = facts_to_state(relevant, env_vocab, cap)
    return decide_on_state(t, state, cap)


def decide_on_state(
    t: DecisionTable, state: EpistemicState, cap: int = DEFAULT_ENUMERATION_CAP
) -> DecisionResult:
    if state.is_empty:
        return DecisionResult(INCONSISTENT, note="knowledge admits no world")
    fired: list[int] = []
    values: set[Value] = set()
    for i, cells in enumerate(row_formulas(t)):
        if all(_eval_cell(state, f, cap) for f in cells):
            fired.append(i + 1)
            values.add(t.rows[i].output)
    size = len(state)
    if not fired:
        return DecisionResult(UNDEFINED, fired_rows=(), state_size=size)
    if len(values) > 1:
        return DecisionResult(HIT_POLICY_VIOLATION, values=frozenset(values),
                              fired_rows=tuple(fired), state_size=size)
    if t.hit_policy == "U" and len(fired) > 1:
        return DecisionResult(HIT_POLICY_VIOLATION, values=frozenset(values),
                              fired_rows=tuple(fired), state_size=size,
                              note="unique hit policy, multiple rows fired")
    return DecisionResult.of_value(next(iter(values)), tuple(fired), size)


# --- exhaustive table checking --------------------------------------------


def domain_subsets(sort: Sort) -> list[frozenset[Value]]:
    """All nonempty subsets, smallest first, lexicographic in domain order."""
    out = []
    for size in range(1, len(sort.values) + 1):
        for combo in itertools.combinations(sort.values, size):
            out.append(frozenset(combo))
    return out


def enumerate_fact_sets(
    t: DecisionTable, cap: int = DEFAULT_ENUMERATION_CAP
) -> list[FactSet]:
    """Every rectangular epistemic state over the table's inputs, canonical order."""
    # one entry per distinct variable, in first-occurrence order
    seen: dict[str, Sort] = {}
    for v, s in t.inputs:
        seen.setdefault(v, s)
    count = 1
    for s in seen.values():
        count *= 2 ** len(s.values) - 1
    if count > cap:
        raise kernel.EnumerationCapExceeded(count, cap)
    per_var = [[(v, sub) for sub in domain_subsets(s)] for v, s in seen.items()]
    return [FactSet(tuple(combo)) for combo in itertools.product(*per_var)]


def check_table(
    t: DecisionTable, vocab: Vocabulary, cap: int = DEFAULT_ENUMERATION_CAP
) -> list[tuple[FactSet, DecisionResult]]:
    """All rectangular states on which the table fails to derive a unique value.

    Empty report = complete and conflict-free over every expressible state.
    """
    report = []
    for facts in enumerate_fact_sets(t, cap):
        result = decide(t, facts, vocab, cap)
        if result.status != VALUE:
            report.append((facts, result))
    return report


# --- decision requirements graphs -----------------------------------------


@dataclass(frozen=True)
class DRD:
    tables: tuple[DecisionTable, ...]
    edges: tuple[tuple[str, str], ...]  # (consumer table, producer table)

    def table(self, name: str) -> DecisionTable:
        for t in self.tables:
            if t.name == name:
                return t
        raise TableError(f"unknown table {name}")


def compose_drd(tables: Iterable[DecisionTable], vocab: Vocabulary) -> DRD:
    """Wire tables by matching input variables to other tables' outputs.

    Rejects cyclic dependencies and inputs that are neither an environment
    variable nor some table's decision.
    """
    tables = tuple(tables)
    names = [t.name for t in tables]
    if len(set(names)) != len(names):
        raise TableError("duplicate table names")
    producer: dict[str, str] = {}
    for t in tables:
        out_var = t.output[0]
        if out_var in producer:
            raise TableError(f"variable {out_var} is the output of two tables")
        producer[out_var] = t.name
    edges = []
    for t in tables:
        for var in t.input_variables:
            if var in producer:
                edges.append((t.name, producer[var]))
            elif not vocab.has_symbol(var):
                raise VocabularyError(f"table {t.name}: undeclared input variable {var}")
    drd = DRD(tables, tuple(edges))
    topological_order(drd)  # raises on cycles
    return drd


def topological_order(drd: DRD) -> list[DecisionTable]:
    deps: dict[str, set[str]] = {t.name: set() for t in drd.tables}
    for consumer, producer in drd.edges:
        deps[consumer].add(producer)
    order: list[str] = []
    while len(order) < len(deps):
        ready = sorted(n for n, d in deps.items() if n not in order and d <= set(order))
        if not ready:
            cyclic = sorted(n for n in deps if n not in order)
            raise TableError(f"cyclic DRD among tables {cyclic}")
        order.extend(ready)
    return [drd.table(n) for n in order]


def decide_drd(
    drd: DRD,
    facts: FactSet,
    vocab: Vocabulary,
    cap: int = DEFAULT_ENUMERATION_CAP,
) -> dict[str, DecisionResult]:
    """Topological evaluation; upstream decisions become known facts downstream.

    An upstream non-value outcome aborts its dependents with a diagnostic.
    """
    order = topological_order(drd)
    producer = {t.output[0]: t.name for t in drd.tables}
    results: dict[str, DecisionResult] = {}
    table_result: dict[str, DecisionResult] = {}
    known = facts
    for t in order:
        blocked = [
            var for var in t.input_variables
            if var in producer and table_result.get(producer[var], None) is not None
            and table_result[producer[var]].status != VALUE
        ]
        if blocked:
            result = DecisionResult(
                UNDEFINED,
                note="upstream decision " + ", ".join(sorted(blocked)) + " not derivable",
            )
        else:
            result = decide(t, known, vocab, cap)
        table_result[t.name] = result
        results[t.output[0]] = result
        if result.status == VALUE:
            known = known.restrict(t.output[0], [result.value])
    return results


def to_theory_sequence(
    drd: DRD, vocab: Vocabulary, env_theory_id: str = ENV_THEORY_ID
) -> TheorySequence:
    """The stratified theory a DRD denotes; downstream K sees the stratum
    holding the upstream table's decisions."""
    order = topological_order(drd)
    producer = {t.output[0]: t.name for t in drd.tables}
    theories = [Theory(env_theory_id)]
    for t in order:
        ref: dict[str, str] = {}
        for var in t.input_variables:
            ref[var] = producer[var] if var in producer else env_theory_id
        # every K in one translated rule references one stratum; pick the
        # highest stratum among the variables it constrains
        out_var, _ = t.output
        rules = []
        for row, cells in zip(t.rows, row_formulas(t, env_theory_id)):
            conjuncts = []
            for f, (var, _) in zip(cells, t.inputs):
                if f is None:
                    continue
                conjuncts.append(_retarget(f, ref[var]))
            rules.append(Rule(out_var, row.output, conj(conjuncts)))
        theories.append(Theory(t.name, definitions=(Definition(tuple(rules)),)))
    return TheorySequence(vocab, tuple(theories))


def _retarget(f: Formula, theory_id: str) -> Formula:
    if isinstance(f, K):
        return K(theory_id, f.body)
    if isinstance(f, Not):
        return Not(_retarget(f.sub, theory_id))
    if isinstance(f, kernel.And):
        return kernel.And(tuple(_retarget(p, theory_id) for p in f.parts))
    if isinstance(f, kernel.Or):
        return kernel.Or(tuple(_retarget(p, theory_id) for p in f.parts))
    return f
