"""Finite-model kernel: sorts, vocabularies, structures, ground formulas."""

import pytest
from hypothesis import given, strategies as st

from edmn import (
    EnumerationCapExceeded,
    Sort,
    VocabularyError,
    build_vocabulary,
    enumerate_structures,
    eval_ground,
    interval_sort,
    models_of,
)
from edmn.kernel import (
    And,
    Eq,
    FalseF,
    Implies,
    Not,
    Or,
    Prop,
    TrueF,
    check_ground,
    conj,
    disj,
    render_ground,
    structure_count,
)


def small_vocab():
    return build_vocabulary(
        [("Color", ["Red", "Green", "Blue"])],
        [("p", "prop", None), ("c", "const", "Color")],
    )


class TestSorts:
    def test_membership_and_index(self):
        s = Sort("Color", ("Red", "Green"))
        assert "Red" in s and "Blue" not in s
        assert s.index("Green") == 1

    def test_duplicate_values_rejected(self):
        with pytest.raises(VocabularyError):
            Sort("Bad", ("a", "a"))

    def test_empty_sort_rejected(self):
        with pytest.raises(VocabularyError):
            Sort("Empty", ())

    def test_interval_sort(self):
        s = interval_sort("Score", 1, 4)
        assert s.values == (1, 2, 3, 4)
        assert s.numeric
        with pytest.raises(VocabularyError):
            interval_sort("Bad", 3, 1)


class TestVocabulary:
    def test_declaration_order_preserved(self):
        v = small_vocab()
        assert v.symbols == ("p", "c")
        assert v.is_proposition("p")
        assert v.constant_sort("c").name == "Color"

    def test_duplicate_symbol_rejected(self):
        with pytest.raises(VocabularyError):
            build_vocabulary([("S", ["a"])], [("x", "const", "S"), ("x", "prop", None)])

    def test_undeclared_sort_rejected(self):
        with pytest.raises(VocabularyError):
            build_vocabulary([], [("x", "const", "Nope")])

    def test_restrict_keeps_order_and_rejects_unknown(self):
        v = small_vocab()
        sub = v.restrict(["c"])
        assert sub.symbols == ("c",)
        with pytest.raises(VocabularyError):
            v.restrict(["ghost"])

    def test_structure_totality(self):
        v = small_vocab()
        s = v.structure({"p": True, "c": "Red"})
        assert s.value("p") is True and s.value("c") == "Red"
        with pytest.raises(VocabularyError):
            v.structure({"p": True})
        with pytest.raises(VocabularyError):
            v.structure({"p": True, "c": "Purple"})
        with pytest.raises(VocabularyError):
            v.structure({"p": 1, "c": "Red"})


class TestEnumeration:
    def test_count_is_domain_product(self):
        v = small_vocab()
        assert structure_count(v) == 2 * 3
        assert len(enumerate_structures(v)) == 6

    def test_cap_enforced(self):
        v = small_vocab()
        with pytest.raises(EnumerationCapExceeded):
            enumerate_structures(v, cap=5)

    def test_structures_are_distinct_and_total(self):
        v = small_vocab()
        seen = {s.values for s in enumerate_structures(v)}
        assert len(seen) == 6


class TestEvaluation:
    def test_connectives(self):
        v = small_vocab()
        s = v.structure({"p": True, "c": "Red"})
        assert eval_ground(s, Eq("c", "Red"))
        assert not eval_ground(s, Eq("c", "Blue"))
        assert eval_ground(s, And((Prop("p"), Not(Eq("c", "Green")))))
        assert eval_ground(s, Implies(Eq("c", "Blue"), FalseF()))
        assert eval_ground(s, Or((FalseF(), TrueF())))

    def test_check_ground_rejects_unknowns(self):
        v = small_vocab()
        with pytest.raises(VocabularyError):
            check_ground(Prop("ghost"), v)
        with pytest.raises(VocabularyError):
            check_ground(Eq("c", "Purple"), v)
        # a proposition used as a constant is a kind error
        with pytest.raises(VocabularyError):
            check_ground(Eq("p", "Red"), v)

    def test_empty_conjunction_and_disjunction(self):
        v = small_vocab()
        s = v.structure({"p": False, "c": "Red"})
        assert eval_ground(s, conj([]))
        assert not eval_ground(s, disj([]))


class TestModels:
    def test_models_of_conjunction_is_intersection(self):
        v = small_vocab()
        a, b = Prop("p"), Eq("c", "Red")
        both = models_of([a, b], v)
        assert both.worlds == models_of([a], v).worlds & models_of([b], v).worlds
        assert len(both) == 1

    def test_unsatisfiable_gives_empty_state(self):
        v = small_vocab()
        state = models_of([Prop("p"), Not(Prop("p"))], v)
        assert state.is_empty

    def test_tautology_gives_all_structures(self):
        v = small_vocab()
        assert len(models_of([Or((Prop("p"), Not(Prop("p"))))], v)) == 6


# random ground formulas over the small vocabulary
def formulas():
    atoms = st.sampled_from(
        [Prop("p"), Eq("c", "Red"), Eq("c", "Green"), Eq("c", "Blue"), TrueF(), FalseF()]
    )
    return st.recursive(
        atoms,
        lambda sub: st.one_of(
            st.builds(Not, sub),
            st.builds(lambda a, b: And((a, b)), sub, sub),
            st.builds(lambda a, b: Or((a, b)), sub, sub),
            st.builds(Implies, sub, sub),
        ),
        max_leaves=12,
    )


@given(formulas(), formulas())
def test_de_morgan_duality(f, g):
    v = small_vocab()
    assert models_of([Not(And((f, g)))], v).worlds == models_of([Or((Not(f), Not(g)))], v).worlds
    assert models_of([Not(Or((f, g)))], v).worlds == models_of([And((Not(f), Not(g)))], v).worlds


@given(formulas())
def test_models_agree_with_pointwise_evaluation(f):
    v = small_vocab()
    expected = frozenset(s for s in enumerate_structures(v) if eval_ground(s, f))
    assert models_of([f], v).worlds == expected


@given(formulas())
def test_render_is_reproducible_text(f):
    text = render_ground(f)
    assert isinstance(text, str) and text
