"""Utility grids, optimization criteria under ignorance, and the
constructive compilers between decision functions, epistemic theories
and decision tables.

Scores are exact rationals throughout; ties are surfaced, never broken.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Union

from .kernel import (
    DEFAULT_ENUMERATION_CAP,
    EnumerationCapExceeded,
    FALSE,
    EpistemicState,
    Eq,
    Not,
    Sort,
    Structure,
    Value,
    Vocabulary,
    VocabularyError,
    conj,
    disj,
    enumerate_structures,
)
from .oel import Definition, K, Rule, Theory, TheorySequence
from .tables import (
    ENV_THEORY_ID,
    AnyValue,
    DecisionTable,
    Enumeration,
    FactSet,
    NotKnownThat,
    TableRow,
    decide,
    facts_to_state,
)

CRITERIA = ("maximin", "maximax", "leximin", "hurwicz", "minimax_regret")


class UtilityError(ValueError):
    """Malformed or incomplete utility grid."""


class NonRectangularStateError(ValueError):
    """A decision-function key is not expressible as per-variable value sets."""


@dataclass(frozen=True)
class UtilityFunction:
    env_vocabulary: Vocabulary
    dec_vocabulary: Vocabulary
    decisions: tuple[Structure, ...]  # the decision set D, in grid row order
    scores: dict[tuple[Structure, Structure], Fraction]

    def score(self, world: Structure, decision: Structure) -> Fraction:
        return self.scores[(world, decision)]

    def scaled(self, a: Fraction, b: Fraction) -> "UtilityFunction":
        """Positive-affine transform u -> a*u + b."""
        if a <= 0:
            raise UtilityError("affine scale factor must be positive")
        return UtilityFunction(
            self.env_vocabulary,
            self.dec_vocabulary,
            self.decisions,
            {k: a * v + b for k, v in self.scores.items()},
        )


def make_utility(
    env_vocab: Vocabulary,
    dec_vocab: Vocabulary,
    scores: dict[tuple[Structure, Structure], Fraction],
    decisions: Optional[Iterable[Structure]] = None,
) -> UtilityFunction:
    """Validate a score grid into a total UtilityFunction."""
    worlds = enumerate_structures(env_vocab)
    decs = tuple(decisions) if decisions is not None else tuple(enumerate_structures(dec_vocab))
    for w in worlds:
        for d in decs:
            if (w, d) not in scores:
                raise UtilityError(f"incomplete utility: missing score for ({w}, {d})")
    return UtilityFunction(env_vocab, dec_vocab, decs, dict(scores))


def _world_label(w: Structure) -> str:
    return "(" + ",".join(str(v) for v in w.values) + ")"


def _split_outside_parens(line: str) -> list[str]:
    """CSV-ish split, commas inside world tuples `(a,b)` do not separate cells."""
    cells, depth, cur = [], 0, []
    for ch in line:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth = max(0, depth - 1)
        if ch == "," and depth == 0:
            cells.append("".join(cur).strip())
            cur = []
        else:
            cur.append(ch)
    cells.append("".join(cur).strip())
    return cells


def load_utility(csv_text: str, env_vocab: Vocabulary, dec_vocab: Vocabulary) -> UtilityFunction:
    """Parse a utility CSV: header = world tuples in declaration order,
    first column = decision value, cells = rationals.

    The decision vocabulary must hold a single constant; every world column
    and every decision row must be present.
    """
    if dec_vocab.propositions or len(dec_vocab.constants) != 1:
        raise UtilityError("utility grids need a decision vocabulary with exactly one constant")
    dec_var, dec_sort = dec_vocab.constants[0]

    rows = [
        _split_outside_parens(line)
        for line in csv_text.strip().splitlines()
        if line.strip()
    ]
    if len(rows) < 2:
        raise UtilityError("utility grid needs a header and at least one decision row")

    worlds = enumerate_structures(env_vocab)
    by_label = {_world_label(w): w for w in worlds}
    header = rows[0][1:]
    columns: list[Structure] = []
    for label in header:
        key = "(" + label.strip("() ").replace(", ", ",") + ")"
        if key not in by_label:
            raise UtilityError(f"unknown world column {label!r}")
        columns.append(by_label[key])
    missing = [lbl for lbl, w in by_label.items() if w not in columns]
    if missing:
        raise UtilityError(f"incomplete utility: missing world columns {missing}")
    if len(set(columns)) != len(columns):
        raise UtilityError("duplicate world column")

    scores: dict[tuple[Structure, Structure], Fraction] = {}
    decisions: list[Structure] = []
    for row in rows[1:]:
        if len(row) != len(columns) + 1:
            raise UtilityError(f"decision row {row[0]!r}: expected {len(columns)} score cells")
        value: Value = int(row[0]) if dec_sort.numeric else row[0]
        if value not in dec_sort:
            raise UtilityError(f"missing decision row target: {row[0]!r} not in sort {dec_sort.name}")
        d = dec_vocab.structure({dec_var: value})
        if d in decisions:
            raise UtilityError(f"duplicate decision row {row[0]!r}")
        decisions.append(d)
        for w, cell in zip(columns, row[1:]):
            try:
                scores[(w, d)] = Fraction(cell)
            except (ValueError, ZeroDivisionError):
                raise UtilityError(f"non-numeric utility cell {cell!r}") from None
    if not decisions:
        raise UtilityError("missing decision row: grid defines no decisions")
    return UtilityFunction(env_vocab, dec_vocab, tuple(decisions), scores)


@dataclass(frozen=True)
class Criterion:
    name: str
    alpha: Optional[Fraction] = None  # optimism degree, hurwicz only

    def __post_init__(self):
        if self.name not in CRITERIA:
            raise UtilityError(f"unknown criterion {self.name!r}")
        if self.name == "hurwicz":
            if self.alpha is None or not (0 <= self.alpha <= 1):
                raise UtilityError("hurwicz needs alpha in [0, 1]")
        elif self.alpha is not None:
            raise UtilityError(f"{self.name} takes no alpha")

    def __str__(self) -> str:
        return f"hurwicz:{self.alpha}" if self.name == "hurwicz" else self.name


def parse_criterion(text: str) -> Criterion:
    name, _, alpha = text.replace("-", "_").partition(":")
    if name == "hurwicz":
        if not alpha:
            raise UtilityError("hurwicz criterion needs ':ALPHA'")
        try:
            return Criterion("hurwicz", Fraction(alpha))
        except (ValueError, ZeroDivisionError):
            raise UtilityError(f"bad hurwicz alpha {alpha!r}") from None
    return Criterion(name)


@dataclass(frozen=True)
class Optimum:
    """Result of criterion optimization: a unique value or an explicit tie."""

    decisions: tuple[Structure, ...]

    @property
    def is_tie(self) -> bool:
        return len(self.decisions) > 1

    @property
    def value(self) -> Structure:
        if self.is_tie:
            raise UtilityError("tie between decisions; no unique value")
        return self.decisions[0]


def optimal_decision(u: UtilityFunction, c: Criterion, e: EpistemicState) -> Optimum:
    """Aggregate scores over the worlds of `e` per decision, then optimize.

    All co-optimal decisions are returned; a tie is never silently broken.
    """
    if e.is_empty:
        raise UtilityError("cannot optimize over an empty epistemic state")
    worlds = sorted(e.worlds, key=Structure.sort_key)
    for w in worlds:
        if (w, u.decisions[0]) not in u.scores:
            raise UtilityError(f"world {w} outside the utility grid")

    def column(d: Structure) -> list[Fraction]:
        return [u.score(w, d) for w in worlds]

    if c.name == "minimax_regret":
        best_per_world = {w: max(u.score(w, d) for d in u.decisions) for w in worlds}
        keys = {
            d: -max(best_per_world[w] - u.score(w, d) for w in worlds) for d in u.decisions
        }
    elif c.name == "maximin":
        keys = {d: min(column(d)) for d in u.decisions}
    elif c.name == "maximax":
        keys = {d: max(column(d)) for d in u.decisions}
    elif c.name == "hurwicz":
        keys = {
            d: c.alpha * max(column(d)) + (1 - c.alpha) * min(column(d)) for d in u.decisions
        }
    else:  # leximin: compare sorted-ascending score vectors lexicographically
        keys = {d: tuple(sorted(column(d))) for d in u.decisions}

    best = max(keys.values())
    winners = tuple(d for d in u.decisions if keys[d] == best)
    return Optimum(winners)


# --- epistemic decision functions ------------------------------------------


@dataclass(frozen=True)
class EpistemicDecisionFunction:
    """Partial map from epistemic states (canonical world sets) to decisions."""

    env_vocabulary: Vocabulary
    dec_vocabulary: Vocabulary
    mapping: tuple[tuple[frozenset[Structure], Structure], ...]

    def __post_init__(self):
        for key, _ in self.mapping:
            if not key:
                raise VocabularyError("epistemic decision functions map nonempty states")

    def as_dict(self) -> dict[frozenset[Structure], Structure]:
        return dict(self.mapping)

    def lookup(self, worlds: frozenset[Structure]) -> Optional[Structure]:
        return self.as_dict().get(worlds)


def make_edf(
    env_vocab: Vocabulary,
    dec_vocab: Vocabulary,
    mapping: dict[frozenset[Structure], Structure],
) -> EpistemicDecisionFunction:
    items = sorted(
        mapping.items(),
        key=lambda kv: tuple(sorted(w.sort_key() for w in kv[0])),
    )
    return EpistemicDecisionFunction(env_vocab, dec_vocab, tuple(items))


def edf_from_table(
    t: DecisionTable, vocab: Vocabulary, cap: int = DEFAULT_ENUMERATION_CAP
) -> EpistemicDecisionFunction:
    """The decision function a table induces on *singleton* states only."""
    env_vocab = vocab.restrict(t.input_variables)
    out_var, out_sort = t.output
    dec_vocab = vocab.restrict([out_var])
    mapping: dict[frozenset[Structure], Structure] = {}
    for w in enumerate_structures(env_vocab, cap):
        state = EpistemicState(env_vocab, frozenset({w}))
        result = decide(t, FactSet.of({s: {w.value(s)} for s in env_vocab.symbols}), vocab, cap)
        if result.status == "value":
            mapping[state.worlds] = dec_vocab.structure({out_var: result.value})
    return make_edf(env_vocab, dec_vocab, mapping)


def edf_from_utility(
    u: UtilityFunction, c: Criterion, cap: int = DEFAULT_ENUMERATION_CAP
) -> EpistemicDecisionFunction:
    """Defined on every nonempty state with a unique optimum; ties stay undefined."""
    worlds = enumerate_structures(u.env_vocabulary, cap)
    total = 2 ** len(worlds) - 1
    if total > cap:
        raise EnumerationCapExceeded(total, cap)
    mapping: dict[frozenset[Structure], Structure] = {}
    for size in range(1, len(worlds) + 1):
        for combo in itertools.combinations(worlds, size):
            state = EpistemicState(u.env_vocabulary, frozenset(combo))
            opt = optimal_decision(u, c, state)
            if not opt.is_tie:
                mapping[state.worlds] = opt.value
    return make_edf(u.env_vocabulary, u.dec_vocabulary, mapping)


def induced_edf(
    source: Union[DecisionTable, tuple[UtilityFunction, Criterion]],
    vocab: Optional[Vocabulary] = None,
    cap: int = DEFAULT_ENUMERATION_CAP,
) -> EpistemicDecisionFunction:
    if isinstance(source, DecisionTable):
        if vocab is None:
            raise VocabularyError("a table source needs the declaring vocabulary")
        return edf_from_table(source, vocab, cap)
    u, c = source
    return edf_from_utility(u, c, cap)


def state_projections(
    worlds: frozenset[Structure], env_vocab: Vocabulary
) -> dict[str, tuple[Value, ...]]:
    """Per-constant value projections of a state, in domain order.

    Raises NonRectangularStateError when the state is not the full product of
    its projections: such states are not expressible per-variable and the
    compilers reject them loudly.
    """
    if env_vocab.propositions:
        raise VocabularyError("decision-function compilation expects constant-only vocabularies")
    proj: dict[str, tuple[Value, ...]] = {}
    count = 1
    for cname, csort in env_vocab.constants:
        seen = {w.value(cname) for w in worlds}
        proj[cname] = tuple(v for v in csort.values if v in seen)
        count *= len(proj[cname])
    if count != len(worlds):
        raise NonRectangularStateError(
            "state is not rectangular: "
            + "{" + ", ".join(str(w) for w in sorted(worlds, key=Structure.sort_key)) + "}"
        )
    return proj


def _exact_state_conjuncts(
    proj: dict[str, tuple[Value, ...]], env_vocab: Vocabulary, env_theory_id: str
):
    """K/-K conjuncts true in exactly the state with the given projections.

    K[c in S] pins the projection inside S; one negative guard per member
    value keeps it from shrinking, so strictly-more-informed states do not
    fire the rule.
    """
    for cname, _ in env_vocab.constants:
        values = proj[cname]
        yield K(env_theory_id, disj(Eq(cname, v) for v in values))
        if len(values) > 1:
            for v in values:
                others = [o for o in values if o != v]
                yield Not(K(env_theory_id, disj(Eq(cname, o) for o in others)))


def compile_edf_to_oel(
    f: EpistemicDecisionFunction, env_theory_id: str = ENV_THEORY_ID
) -> TheorySequence:
    """One definition rule per mapped state, built from per-constant projections."""
    rules: list[Rule] = []
    for worlds, decision in f.mapping:
        proj = state_projections(worlds, f.env_vocabulary)
        body = conj(_exact_state_conjuncts(proj, f.env_vocabulary, env_theory_id))
        for dname, _ in f.dec_vocabulary.constants:
            rules.append(Rule(dname, decision.value(dname), body))
        for pname in f.dec_vocabulary.propositions:
            rules.append(Rule(pname, decision.value(pname), body))
    if not rules:
        # an empty decision function is undefined everywhere, which needs
        # the decision symbols declared with rules that can never fire
        for dname, dsort in f.dec_vocabulary.constants:
            rules.append(Rule(dname, dsort.values[0], FALSE))
        for pname in f.dec_vocabulary.propositions:
            rules.append(Rule(pname, True, FALSE))

    vocab_syms = list(f.env_vocabulary.symbols) + list(f.dec_vocabulary.symbols)
    sorts = tuple(dict.fromkeys(f.env_vocabulary.sorts + f.dec_vocabulary.sorts))
    full = Vocabulary(
        sorts,
        f.env_vocabulary.propositions + f.dec_vocabulary.propositions,
        f.env_vocabulary.constants + f.dec_vocabulary.constants,
        tuple(vocab_syms),
    )
    decision_theory = Theory("decision", definitions=(Definition(tuple(rules)),))
    return TheorySequence(full, (Theory(env_theory_id), decision_theory))


def compile_edf_to_edmn(f: EpistemicDecisionFunction, name: str = "decision") -> DecisionTable:
    """One row per mapped state; guard columns repeat a variable so a row can
    both bound the known value set and require each member to stay possible.

    A full-domain projection renders as `-` in the value column; unused guard
    cells are `-`."""
    if f.dec_vocabulary.propositions or len(f.dec_vocabulary.constants) != 1:
        raise VocabularyError("table compilation expects a single decision constant")
    env_consts = f.env_vocabulary.constants
    projections = [
        (state_projections(worlds, f.env_vocabulary), decision)
        for worlds, decision in f.mapping
    ]
    guard_count = {
        cname: max((len(p[cname]) for p, _ in projections if len(p[cname]) > 1), default=0)
        for cname, _ in env_consts
    }

    inputs: list[tuple[str, Sort]] = []
    for cname, csort in env_consts:
        inputs.append((cname, csort))
        inputs.extend((cname, csort) for _ in range(guard_count[cname]))

    dec_var, dec_sort = f.dec_vocabulary.constants[0]
    rows = []
    for proj, decision in projections:
        cells: list = []
        for cname, csort in env_consts:
            values = proj[cname]
            if len(values) == len(csort.values):
                cells.append(AnyValue())
            else:
                cells.append(Enumeration(values))
            guards: list = []
            if len(values) > 1:
                for v in values:
                    guards.append(
                        NotKnownThat(Enumeration(tuple(o for o in values if o != v)))
                    )
            guards.extend(AnyValue() for _ in range(guard_count[cname] - len(guards)))
            cells.extend(guards)
        rows.append(TableRow(tuple(cells), decision.value(dec_var)))
    return DecisionTable(name, "A", tuple(inputs), (dec_var, dec_sort), tuple(rows))
