"""Finite-domain vocabularies, structures and ground formula evaluation.

Everything downstream (epistemic operators, decision tables, utility
criteria) reduces to exhaustive enumeration of the structures defined here.
Domains are always finite and explicitly declared, so enumeration is the
semantics, not an approximation.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Iterator, Union

DEFAULT_ENUMERATION_CAP = 1_000_000

Value = Union[str, int]


class VocabularyError(ValueError):
    """Invalid sort/symbol declaration or an atom outside the vocabulary."""


class EnumerationCapExceeded(RuntimeError):
    def __init__(self, count: int, cap: int):
        super().__init__(f"enumeration would produce {count} items, cap is {cap}")
        self.count = count
        self.cap = cap


@dataclass(frozen=True)
class Sort:
    """A named finite domain. `numeric` marks declared integer intervals,
    the only sorts on which order comparisons are allowed."""

    name: str
    values: tuple[Value, ...]
    numeric: bool = False

    def __post_init__(self):
        if not self.values:
            raise VocabularyError(f"sort {self.name}: empty domain")
        if len(set(self.values)) != len(self.values):
            raise VocabularyError(f"sort {self.name}: duplicate values")
        if self.numeric and not all(isinstance(v, int) for v in self.values):
            raise VocabularyError(f"sort {self.name}: numeric sort with non-integer values")

    def __contains__(self, value: Value) -> bool:
        return value in self.values

    def index(self, value: Value) -> int:
        return self.values.index(value)


def interval_sort(name: str, lo: int, hi: int) -> Sort:
    if lo > hi:
        raise VocabularyError(f"sort {name}: empty interval {lo}..{hi}")
    return Sort(name, tuple(range(lo, hi + 1)), numeric=True)


@dataclass(frozen=True)
class Vocabulary:
    """Propositional + constant symbols over finite declared sorts.

    `symbols` preserves declaration order; it drives the deterministic
    ordering of enumerated structures and all rendered output.
    """

    sorts: tuple[Sort, ...]
    propositions: tuple[str, ...]
    constants: tuple[tuple[str, Sort], ...]
    symbols: tuple[str, ...]  # declaration order, propositions and constants mixed

    @property
    def constant_map(self) -> dict[str, Sort]:
        return dict(self.constants)

    def sort(self, name: str) -> Sort:
        for s in self.sorts:
            if s.name == name:
                return s
        raise VocabularyError(f"unknown sort {name}")

    def has_symbol(self, name: str) -> bool:
        return name in self.symbols

    def constant_sort(self, name: str) -> Sort:
        for cname, csort in self.constants:
            if cname == name:
                return csort
        raise VocabularyError(f"unknown constant {name}")

    def is_proposition(self, name: str) -> bool:
        return name in self.propositions

    def structure(self, assignment: dict[str, Value]) -> "Structure":
        values = []
        for sym in self.symbols:
            if sym not in assignment:
                raise VocabularyError(f"structure is not total: missing {sym}")
            v = assignment[sym]
            if sym in self.propositions:
                if not isinstance(v, bool):
                    raise VocabularyError(f"proposition {sym} needs a boolean, got {v!r}")
            else:
                csort = self.constant_sort(sym)
                if v not in csort:
                    raise VocabularyError(f"{v!r} is not in sort {csort.name} of {sym}")
            values.append(v)
        extra = set(assignment) - set(self.symbols)
        if extra:
            raise VocabularyError(f"unknown symbols in assignment: {sorted(extra)}")
        return Structure(self, tuple(values))

    def restrict(self, names: Iterable[str]) -> "Vocabulary":
        """Sub-vocabulary keeping only the given symbols (declaration order kept)."""
        wanted = set(names)
        missing = wanted - set(self.symbols)
        if missing:
            raise VocabularyError(f"cannot restrict to unknown symbols {sorted(missing)}")
        props = tuple(p for p in self.propositions if p in wanted)
        consts = tuple((c, s) for c, s in self.constants if c in wanted)
        syms = tuple(s for s in self.symbols if s in wanted)
        return Vocabulary(self.sorts, props, consts, syms)


def build_vocabulary(
    sort_decls: Iterable[tuple[str, Iterable[Value]] | Sort],
    symbol_decls: Iterable[tuple[str, str, str | None]],
) -> Vocabulary:
    """Validate declarations into a Vocabulary.

    `sort_decls`: (name, values) pairs or ready-made Sorts.
    `symbol_decls`: (name, kind, sort_name) with kind "prop" or "const";
    sort_name is ignored for propositions.
    """
    sorts: list[Sort] = []
    for decl in sort_decls:
        s = decl if isinstance(decl, Sort) else Sort(decl[0], tuple(decl[1]))
        if any(prev.name == s.name for prev in sorts):
            raise VocabularyError(f"duplicate sort {s.name}")
        sorts.append(s)
    by_name = {s.name: s for s in sorts}

    props: list[str] = []
    consts: list[tuple[str, Sort]] = []
    order: list[str] = []
    for name, kind, sort_name in symbol_decls:
        if name in order or name in by_name:
            raise VocabularyError(f"duplicate symbol {name}")
        if kind == "prop":
            props.append(name)
        elif kind == "const":
            if sort_name not in by_name:
                raise VocabularyError(f"constant {name}: undeclared sort {sort_name}")
            consts.append((name, by_name[sort_name]))
        else:
            raise VocabularyError(f"symbol {name}: unknown kind {kind!r}")
        order.append(name)
    return Vocabulary(tuple(sorts), tuple(props), tuple(consts), tuple(order))


@dataclass(frozen=True)
class Structure:
    """A possible world: a total assignment over its vocabulary."""

    vocabulary: Vocabulary
    values: tuple[Value, ...]  # aligned with vocabulary.symbols

    def value(self, symbol: str) -> Value:
        try:
            return self.values[self.vocabulary.symbols.index(symbol)]
        except ValueError:
            raise VocabularyError(f"unknown symbol {symbol}") from None

    def assignment(self) -> dict[str, Value]:
        return dict(zip(self.vocabulary.symbols, self.values))

    def sort_key(self) -> tuple:
        key = []
        for sym, v in zip(self.vocabulary.symbols, self.values):
            if sym in self.vocabulary.propositions:
                key.append(0 if v else 1)  # true first, mirrors enumeration order
            else:
                key.append(self.vocabulary.constant_sort(sym).index(v))
        return tuple(key)

    def restrict(self, vocab: Vocabulary) -> "Structure":
        return Structure(vocab, tuple(self.value(sym) for sym in vocab.symbols))

    def __str__(self) -> str:
        parts = [f"{s}={v}" for s, v in zip(self.vocabulary.symbols, self.values)]
        return "{" + ", ".join(parts) + "}"


@dataclass(frozen=True)
class EpistemicState:
    """The set of worlds an agent considers possible.

    Empty = inconsistent knowledge, singleton = complete knowledge.
    """

    vocabulary: Vocabulary
    worlds: frozenset[Structure]

    def __len__(self) -> int:
        return len(self.worlds)

    def __iter__(self) -> Iterator[Structure]:
        return iter(sorted(self.worlds, key=Structure.sort_key))

    def __contains__(self, s: Structure) -> bool:
        return s in self.worlds

    @property
    def is_empty(self) -> bool:
        return not self.worlds

    @property
    def is_singleton(self) -> bool:
        return len(self.worlds) == 1


# --- Ground formulas ------------------------------------------------------
#
# Quantifiers are expanded over finite sort domains at construction time
# (see forall_values / exists_values), so the evaluation core is purely
# propositional.


class Formula:
    __slots__ = ()


@dataclass(frozen=True)
class TrueF(Formula):
    pass


@dataclass(frozen=True)
class FalseF(Formula):
    pass


@dataclass(frozen=True)
class Prop(Formula):
    name: str


@dataclass(frozen=True)
class Eq(Formula):
    constant: str
    value: Value


@dataclass(frozen=True)
class Not(Formula):
    sub: Formula


@dataclass(frozen=True)
class And(Formula):
    parts: tuple[Formula, ...]


@dataclass(frozen=True)
class Or(Formula):
    parts: tuple[Formula, ...]


@dataclass(frozen=True)
class Implies(Formula):
    premise: Formula
    conclusion: Formula


TRUE = TrueF()
FALSE = FalseF()


def conj(parts: Iterable[Formula]) -> Formula:
    parts = tuple(parts)
    if not parts:
        return TRUE
    return parts[0] if len(parts) == 1 else And(parts)


def disj(parts: Iterable[Formula]) -> Formula:
    parts = tuple(parts)
    if not parts:
        return FALSE
    return parts[0] if len(parts) == 1 else Or(parts)


def forall_values(sort: Sort, make) -> Formula:
    """Grounds `forall v in sort: make(v)` as a finite conjunction."""
    return conj(make(v) for v in sort.values)


def exists_values(sort: Sort, make) -> Formula:
    """Grounds `exists v in sort: make(v)` as a finite disjunction."""
    return disj(make(v) for v in sort.values)


def check_ground(f: Formula, vocab: Vocabulary) -> None:
    """Reject atoms outside the vocabulary or out-of-sort value literals."""
    if isinstance(f, (TrueF, FalseF)):
        return
    if isinstance(f, Prop):
        if f.name not in vocab.propositions:
            raise VocabularyError(f"unknown proposition {f.name}")
    elif isinstance(f, Eq):
        sort = vocab.constant_sort(f.constant)
        if f.value not in sort:
            raise VocabularyError(f"{f.value!r} is not in sort {sort.name} of {f.constant}")
    elif isinstance(f, Not):
        check_ground(f.sub, vocab)
    elif isinstance(f, (And, Or)):
        for p in f.parts:
            check_ground(p, vocab)
    elif isinstance(f, Implies):
        check_ground(f.premise, vocab)
        check_ground(f.conclusion, vocab)
    else:
        raise VocabularyError(f"not a ground formula node: {f!r}")


def eval_ground(s: Structure, f: Formula) -> bool:
    if isinstance(f, TrueF):
        return True
    if isinstance(f, FalseF):
        return False
    if isinstance(f, Prop):
        return bool(s.value(f.name))
    if isinstance(f, Eq):
        return s.value(f.constant) == f.value
    if isinstance(f, Not):
        return not eval_ground(s, f.sub)
    if isinstance(f, And):
        return all(eval_ground(s, p) for p in f.parts)
    if isinstance(f, Or):
        return any(eval_ground(s, p) for p in f.parts)
    if isinstance(f, Implies):
        return (not eval_ground(s, f.premise)) or eval_ground(s, f.conclusion)
    raise VocabularyError(f"not a ground formula node: {f!r}")


def structure_count(vocab: Vocabulary) -> int:
    n = 2 ** len(vocab.propositions)
    for _, sort in vocab.constants:
        n *= len(sort.values)
    return n


@lru_cache(maxsize=4096)
def _enumerate_cached(vocab: Vocabulary) -> tuple[Structure, ...]:
    axes = []
    for sym in vocab.symbols:
        if sym in vocab.propositions:
            axes.append((True, False))
        else:
            axes.append(vocab.constant_sort(sym).values)
    return tuple(Structure(vocab, combo) for combo in itertools.product(*axes))


def enumerate_structures(
    vocab: Vocabulary, cap: int = DEFAULT_ENUMERATION_CAP
) -> list[Structure]:
    """All structures of `vocab`, lexicographic in declaration order
    (last declared symbol varies fastest)."""
    count = structure_count(vocab)
    if count > cap:
        raise EnumerationCapExceeded(count, cap)
    return list(_enumerate_cached(vocab))


@lru_cache(maxsize=65536)
def _models_cached(formulas: tuple[Formula, ...], vocab: Vocabulary, cap: int) -> frozenset[Structure]:
    return frozenset(
        s for s in enumerate_structures(vocab, cap)
        if all(eval_ground(s, f) for f in formulas)
    )


def models_of(
    formulas: Iterable[Formula],
    vocab: Vocabulary,
    cap: int = DEFAULT_ENUMERATION_CAP,
) -> EpistemicState:
    """All structures of `vocab` satisfying every formula; empty when unsatisfiable."""
    formulas = tuple(formulas)
    for f in formulas:
        check_ground(f, vocab)
    return EpistemicState(vocab, _models_cached(formulas, vocab, cap))


def render_ground(f: Formula) -> str:
    if isinstance(f, TrueF):
        return "true"
    if isinstance(f, FalseF):
        return "false"
    if isinstance(f, Prop):
        return f.name
    if isinstance(f, Eq):
        return f"{f.constant} = {f.value}"
    if isinstance(f, Not):
        return f"~({render_ground(f.sub)})"
    if isinstance(f, And):
        return " & ".join(_paren(p) for p in f.parts) if f.parts else "true"
    if isinstance(f, Or):
        return " | ".join(_paren(p) for p in f.parts) if f.parts else "false"
    if isinstance(f, Implies):
        return f"{_paren(f.premise)} => {_paren(f.conclusion)}"
    raise VocabularyError(f"not a ground formula node: {f!r}")


def _paren(f: Formula) -> str:
    if isinstance(f, (And, Or, Implies)):
        return f"({render_ground(f)})"
    return render_ground(f)
