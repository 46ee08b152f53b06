"""Stratified ordered epistemic theories.

A theory sequence starts with an epistemic-operator-free bottom theory and
climbs through theories whose K operators may only look strictly downwards.
K[tid][psi] is resolved as truth of psi in *all* models of the referenced
stratum, so rule bodies in the decision fragment are world-independent:
they are simply true or false given the lower knowledge.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional, Union

from .kernel import (
    DEFAULT_ENUMERATION_CAP,
    And,
    EpistemicState,
    Eq,
    FalseF,
    Formula,
    Implies,
    Not,
    Or,
    Prop,
    Structure,
    TrueF,
    Value,
    Vocabulary,
    VocabularyError,
    check_ground,
    eval_ground,
    models_of,
    render_ground,
    _paren,
)


class StratificationError(ValueError):
    """K-reference structure violates the strict ordering of theories."""


class InconsistentKnowledgeError(ValueError):
    """The bottom theory (plus facts) has no models; knowledge is contradictory."""


@dataclass(frozen=True)
class K(Formula):
    """Modal 'it is known in theory `theory_id` that `body`'. Body is ground."""

    theory_id: str
    body: Formula


@dataclass(frozen=True)
class Rule:
    """`head_symbol = head_value <- body`. For propositions head_value is True."""

    head_symbol: str
    head_value: Value
    body: Formula  # epistemic formula (may contain K nodes)


@dataclass(frozen=True)
class Definition:
    rules: tuple[Rule, ...]

    @property
    def defined_symbols(self) -> tuple[str, ...]:
        seen: list[str] = []
        for r in self.rules:
            if r.head_symbol not in seen:
                seen.append(r.head_symbol)
        return tuple(seen)


@dataclass(frozen=True)
class Theory:
    id: str
    constraints: tuple[Formula, ...] = ()
    definitions: tuple[Definition, ...] = ()

    def defined_symbols(self) -> tuple[str, ...]:
        out: list[str] = []
        for d in self.definitions:
            for s in d.defined_symbols:
                if s not in out:
                    out.append(s)
        return tuple(out)


@dataclass(frozen=True)
class TheorySequence:
    """Theories listed bottom (K-free) to top, over one shared vocabulary."""

    vocabulary: Vocabulary
    theories: tuple[Theory, ...]

    def theory(self, tid: str) -> Theory:
        for t in self.theories:
            if t.id == tid:
                return t
        raise StratificationError(f"unknown theory {tid}")


@dataclass(frozen=True)
class Undefined:
    """No rule fired for the symbol: completeness violation."""

    symbol: str


@dataclass(frozen=True)
class Overdefined:
    """Fired rules disagree on the symbol's value: hit-policy violation."""

    symbol: str
    values: frozenset[Value]


def collect_k(f: Formula) -> list[K]:
    """All K nodes of an epistemic formula, left-to-right, duplicates dropped."""
    out: list[K] = []

    def walk(g: Formula) -> None:
        if isinstance(g, K):
            if g not in out:
                out.append(g)
            return  # bodies are ground, no nested K
        if isinstance(g, Not):
            walk(g.sub)
        elif isinstance(g, (And, Or)):
            for p in g.parts:
                walk(p)
        elif isinstance(g, Implies):
            walk(g.premise)
            walk(g.conclusion)

    walk(f)
    return out


def _theory_formulas(t: Theory) -> Iterable[tuple[str, Formula]]:
    for i, c in enumerate(t.constraints):
        yield f"constraint {i + 1}", c
    for d in t.definitions:
        for i, r in enumerate(d.rules):
            yield f"rule {i + 1} ({r.head_symbol})", r.body


@dataclass(frozen=True)
class StratificationViolation:
    theory_id: str
    location: str
    message: str

    def __str__(self) -> str:
        return f"{self.theory_id}, {self.location}: {self.message}"


def check_stratification(seq: TheorySequence) -> list[StratificationViolation]:
    """Empty list when every K points strictly below its theory in list order.

    List order is the evaluation order; any violation (self-reference,
    forward/unknown reference, K in the bottom theory) is reported with the
    offending location.
    """
    violations: list[StratificationViolation] = []
    ids = [t.id for t in seq.theories]
    if len(set(ids)) != len(ids):
        raise StratificationError("duplicate theory ids")
    for idx, t in enumerate(seq.theories):
        for loc, f in _theory_formulas(t):
            for k in collect_k(f):
                if idx == 0:
                    violations.append(StratificationViolation(t.id, loc, "K operator in bottom theory"))
                elif k.theory_id == t.id:
                    violations.append(StratificationViolation(t.id, loc, "self-reference"))
                elif k.theory_id not in ids:
                    violations.append(StratificationViolation(t.id, loc, f"unknown theory {k.theory_id}"))
                elif ids.index(k.theory_id) > idx:
                    violations.append(
                        StratificationViolation(t.id, loc, f"reference to higher theory {k.theory_id}")
                    )
    return violations


def k_query(lower_models: EpistemicState, psi: Formula, cap: int = DEFAULT_ENUMERATION_CAP) -> bool:
    """True iff psi holds in every world of `lower_models` (vacuously on empty)."""
    sat = models_of((psi,), lower_models.vocabulary, cap)
    return lower_models.worlds <= sat.worlds


def eval_epistemic(
    f: Formula,
    k_valuation: dict[K, bool],
    s: Optional[Structure] = None,
) -> bool:
    """Evaluate with K nodes replaced by their valuation.

    For fully-epistemic formulas no structure is needed; bare atoms require `s`.
    """
    if isinstance(f, K):
        try:
            return k_valuation[f]
        except KeyError:
            raise StratificationError(f"missing K valuation for K[{f.theory_id}][{render_ground(f.body)}]")
    if isinstance(f, TrueF):
        return True
    if isinstance(f, FalseF):
        return False
    if isinstance(f, (Prop, Eq)):
        if s is None:
            raise VocabularyError(f"objective atom {render_ground(f)} needs a structure")
        return eval_ground(s, f)
    if isinstance(f, Not):
        return not eval_epistemic(f.sub, k_valuation, s)
    if isinstance(f, And):
        return all(eval_epistemic(p, k_valuation, s) for p in f.parts)
    if isinstance(f, Or):
        return any(eval_epistemic(p, k_valuation, s) for p in f.parts)
    if isinstance(f, Implies):
        return (not eval_epistemic(f.premise, k_valuation, s)) or eval_epistemic(
            f.conclusion, k_valuation, s
        )
    raise VocabularyError(f"not an epistemic formula node: {f!r}")


def eval_definition(
    d: Definition, k_valuation: dict[K, bool], s: Optional[Structure] = None
) -> Union[dict[str, Value], Undefined, Overdefined]:
    """Completion evaluation: per defined symbol, the unique value among fired rules.

    Several rules agreeing on one value is fine (hit policy 'Any' at the logic
    level); disagreement yields Overdefined, no fired rule yields Undefined.
    """
    fired: dict[str, set[Value]] = {sym: set() for sym in d.defined_symbols}
    for r in d.rules:
        if eval_epistemic(r.body, k_valuation, s):
            fired[r.head_symbol].add(r.head_value)
    out: dict[str, Value] = {}
    for sym in d.defined_symbols:
        values = fired[sym]
        if not values:
            return Undefined(sym)
        if len(values) > 1:
            return Overdefined(sym, frozenset(values))
        out[sym] = next(iter(values))
    return out


@dataclass(frozen=True)
class EbdReport:
    ok: bool
    violations: tuple[str, ...]
    defined_symbols: tuple[str, ...]
    parameter_symbols: tuple[str, ...]


def _ground_symbols(f: Formula) -> set[str]:
    if isinstance(f, Prop):
        return {f.name}
    if isinstance(f, Eq):
        return {f.constant}
    if isinstance(f, Not):
        return _ground_symbols(f.sub)
    if isinstance(f, (And, Or)):
        return set().union(*(_ground_symbols(p) for p in f.parts)) if f.parts else set()
    if isinstance(f, Implies):
        return _ground_symbols(f.premise) | _ground_symbols(f.conclusion)
    if isinstance(f, K):
        return _ground_symbols(f.body)
    return set()


def _has_bare_atom(f: Formula) -> bool:
    """An atom not under K anywhere in the (epistemic) formula."""
    if isinstance(f, (Prop, Eq)):
        return True
    if isinstance(f, K):
        return False
    if isinstance(f, Not):
        return _has_bare_atom(f.sub)
    if isinstance(f, (And, Or)):
        return any(_has_bare_atom(p) for p in f.parts)
    if isinstance(f, Implies):
        return _has_bare_atom(f.premise) or _has_bare_atom(f.conclusion)
    return False


def check_ebd(t: Theory) -> EbdReport:
    """Epistemic-body-definitions check.

    Every rule body atom must be K-guarded, defined symbols may not occur in
    bodies, heads are K-free by construction. On success the report carries
    the defined/parameter split of the symbols the theory touches.
    """
    violations: list[str] = []
    defined = t.defined_symbols()
    params: list[str] = []
    for d in t.definitions:
        for i, r in enumerate(d.rules):
            loc = f"rule {i + 1} ({r.head_symbol} = {r.head_value})"
            if _has_bare_atom(r.body):
                violations.append(f"{loc}: unguarded atom in body")
            body_syms = _ground_symbols(r.body)
            for sym in sorted(body_syms & set(defined)):
                violations.append(f"{loc}: defined symbol {sym} in body")
            for sym in body_syms:
                if sym not in defined and sym not in params:
                    params.append(sym)
    for i, c in enumerate(t.constraints):
        if _has_bare_atom(c):
            violations.append(f"constraint {i + 1}: unguarded atom")
    return EbdReport(not violations, tuple(violations), tuple(defined), tuple(sorted(params)))


def _eval_with(assign: dict[str, Value], f: Formula) -> bool:
    """Ground evaluation against a plain name->value mapping."""
    if isinstance(f, TrueF):
        return True
    if isinstance(f, FalseF):
        return False
    if isinstance(f, Prop):
        return bool(assign[f.name])
    if isinstance(f, Eq):
        return assign[f.constant] == f.value
    if isinstance(f, Not):
        return not _eval_with(assign, f.sub)
    if isinstance(f, And):
        return all(_eval_with(assign, p) for p in f.parts)
    if isinstance(f, Or):
        return any(_eval_with(assign, p) for p in f.parts)
    if isinstance(f, Implies):
        return (not _eval_with(assign, f.premise)) or _eval_with(assign, f.conclusion)
    raise VocabularyError(f"not a ground formula node: {f!r}")


def models_of_oel(
    seq: TheorySequence,
    bottom_facts: Union[Iterable[Formula], EpistemicState] = (),
    cap: int = DEFAULT_ENUMERATION_CAP,
) -> EpistemicState:
    """Models of a stratified sequence, projected onto the defined symbols.

    The bottom theory (plus `bottom_facts`) is solved by enumeration over the
    parameter sub-vocabulary; each higher theory must be in ebd form (plus
    optional K-only constraints) and contributes a fixed assignment of its
    defined symbols, or kills the model set via Undefined/Overdefined/false
    constraint. The result is empty or a singleton for ebd sequences.

    `bottom_facts` may be a pre-computed epistemic state over the parameter
    sub-vocabulary instead of a formula set.
    """
    violations = check_stratification(seq)
    if violations:
        raise StratificationError("; ".join(str(v) for v in violations))

    defined_all: list[str] = []
    for t in seq.theories[1:]:
        report = check_ebd(t)
        if not report.ok:
            raise VocabularyError(
                f"theory {t.id} is not in ebd form: " + "; ".join(report.violations)
            )
        for sym in t.defined_symbols():
            if sym in defined_all:
                raise VocabularyError(f"symbol {sym} defined in more than one theory")
            defined_all.append(sym)

    env_syms = [s for s in seq.vocabulary.symbols if s not in defined_all]
    env_vocab = seq.vocabulary.restrict(env_syms)
    dec_vocab = seq.vocabulary.restrict(defined_all)

    bottom = seq.theories[0]
    if isinstance(bottom_facts, EpistemicState):
        if set(bottom_facts.vocabulary.symbols) != set(env_syms):
            raise VocabularyError(
                "bottom state must range over exactly the parameter symbols "
                f"{env_syms}"
            )
        # rebase onto this sequence's parameter sub-vocabulary so world sets
        # from different callers compare equal
        worlds = frozenset(w.restrict(env_vocab) for w in bottom_facts.worlds)
        if bottom.constraints:
            worlds = frozenset(
                w for w in worlds if all(eval_ground(w, c) for c in bottom.constraints)
            )
        env_state = EpistemicState(env_vocab, worlds)
    else:
        env_state = models_of(tuple(bottom.constraints) + tuple(bottom_facts), env_vocab, cap)
    if env_state.is_empty:
        raise InconsistentKnowledgeError(
            f"bottom theory {bottom.id} has no models: inconsistent knowledge"
        )

    # Per-stratum knowledge a K operator can reference: the parameter worlds
    # plus the decisions fixed at or below that stratum.
    fixed_by_theory: dict[str, dict[str, Value]] = {bottom.id: {}}
    fixed: dict[str, Value] = {}

    def resolve_k(k: K) -> bool:
        kfixed = fixed_by_theory[k.theory_id]
        if set(kfixed) & _ground_symbols(k.body):
            return all(
                _eval_with({**w.assignment(), **kfixed}, k.body) for w in env_state.worlds
            )
        return k_query(env_state, k.body, cap)

    for t in seq.theories[1:]:
        kval: dict[K, bool] = {}
        for _, f in _theory_formulas(t):
            for k in collect_k(f):
                if k not in kval:
                    kval[k] = resolve_k(k)
        for c in t.constraints:
            if not eval_epistemic(c, kval):
                return EpistemicState(dec_vocab, frozenset())
        for d in t.definitions:
            result = eval_definition(d, kval)
            if isinstance(result, (Undefined, Overdefined)):
                return EpistemicState(dec_vocab, frozenset())
            fixed.update(result)
        fixed_by_theory[t.id] = dict(fixed)

    decision = dec_vocab.structure({sym: fixed[sym] for sym in dec_vocab.symbols})
    return EpistemicState(dec_vocab, frozenset({decision}))


# --- textual rendering ----------------------------------------------------


def render_epistemic(f: Formula) -> str:
    if isinstance(f, K):
        return f"K[{f.theory_id}][{render_ground(f.body)}]"
    if isinstance(f, Not):
        sub = render_epistemic(f.sub)
        return f"~{sub}" if isinstance(f.sub, K) else f"~({sub})"
    if isinstance(f, And):
        return " & ".join(_eparen(p) for p in f.parts) if f.parts else "true"
    if isinstance(f, Or):
        return " | ".join(_eparen(p) for p in f.parts) if f.parts else "false"
    if isinstance(f, Implies):
        return f"{_eparen(f.premise)} => {_eparen(f.conclusion)}"
    return render_ground(f)


def _eparen(f: Formula) -> str:
    if isinstance(f, (And, Or, Implies)):
        return f"({render_epistemic(f)})"
    return render_epistemic(f)


def render_sequence(seq: TheorySequence) -> str:
    """Deterministic textual form of a theory sequence, one definition per block."""
    lines: list[str] = []
    for t in seq.theories:
        lines.append(f"theory {t.id}")
        for c in t.constraints:
            lines.append(f"  {render_epistemic(c)}")
        for d in t.definitions:
            lines.append("  define")
            for r in d.rules:
                head = f"{r.head_symbol} = {r.head_value}"
                body = render_epistemic(r.body)
                lines.append(f"    {head} <- {body}")
    return "\n".join(lines) + "\n"
