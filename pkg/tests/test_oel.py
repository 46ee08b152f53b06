"""Stratified epistemic theories: K resolution, stratification, definitions."""

import pytest

from edmn import (
    Definition,
    InconsistentKnowledgeError,
    K,
    Rule,
    Theory,
    TheorySequence,
    VocabularyError,
    build_vocabulary,
    check_ebd,
    check_stratification,
    eval_definition,
    k_query,
    models_of,
    models_of_oel,
    render_sequence,
)
from edmn.kernel import And, Eq, EpistemicState, Not, Or, Prop, enumerate_structures
from edmn.oel import Overdefined, StratificationError, Undefined, eval_epistemic
from edmn.tables import ENV_THEORY_ID, translate_table


def env_vocab():
    return build_vocabulary(
        [("Gender", ["Male", "Female"]), ("MStatus", ["Single", "Married"])],
        [("gen", "const", "Gender"), ("mar", "const", "MStatus")],
    )


def state_of(vocab, assignments):
    worlds = frozenset(vocab.structure(a) for a in assignments)
    return EpistemicState(vocab, worlds)


class TestKQuery:
    def test_singleton_state_knows_its_facts(self):
        v = env_vocab()
        e = state_of(v, [{"gen": "Male", "mar": "Single"}])
        assert k_query(e, Eq("gen", "Male"))
        assert not k_query(e, Eq("gen", "Female"))
        assert k_query(e, Eq("mar", "Single"))

    def test_uncertainty_blocks_knowledge_but_not_disjunction(self):
        v = env_vocab()
        e = state_of(v, [{"gen": "Male", "mar": "Single"}, {"gen": "Male", "mar": "Married"}])
        assert k_query(e, Eq("gen", "Male"))
        assert not k_query(e, Eq("mar", "Single"))
        assert not k_query(e, Eq("mar", "Married"))
        assert k_query(e, Or((Eq("mar", "Single"), Eq("mar", "Married"))))

    def test_empty_state_knows_everything(self):
        v = env_vocab()
        e = EpistemicState(v, frozenset())
        assert k_query(e, Eq("gen", "Male"))
        assert k_query(e, Not(Eq("gen", "Male")))

    def test_knowledge_grows_as_worlds_shrink(self):
        v = env_vocab()
        worlds = list(enumerate_structures(v))
        big = EpistemicState(v, frozenset(worlds))
        for w in worlds:
            small = EpistemicState(v, frozenset({w}))
            for c in ("gen", "mar"):
                psi = Eq(c, w.value(c))
                if k_query(big, psi):
                    assert k_query(small, psi)


class TestStratification:
    def test_clean_sequence_has_no_violations(self, greeting):
        seq = TheorySequence(
            greeting.vocabulary,
            (Theory(ENV_THEORY_ID), translate_table(greeting.sole_table())),
        )
        assert check_stratification(seq) == []

    def test_k_in_bottom_theory_is_flagged(self):
        v = env_vocab()
        bottom = Theory("T_E", constraints=(K("T_E", Eq("gen", "Male")),))
        seq = TheorySequence(v, (bottom,))
        violations = check_stratification(seq)
        assert violations and "bottom" in str(violations[0])

    def test_forward_and_self_reference_are_flagged(self):
        v = env_vocab()
        t1 = Theory("A", definitions=(Definition((Rule("gen", "Male", K("B", Eq("mar", "Single"))),)),))
        t2 = Theory("B")
        seq = TheorySequence(v, (Theory("T_E"), t1, t2))
        assert check_stratification(seq)
        self_ref = Theory("A", definitions=(Definition((Rule("gen", "Male", K("A", Eq("mar", "Single"))),)),))
        assert check_stratification(TheorySequence(v, (Theory("T_E"), self_ref)))

    def test_unknown_theory_reference_is_flagged(self):
        v = env_vocab()
        t = Theory("A", definitions=(Definition((Rule("gen", "Male", K("Ghost", Eq("mar", "Single"))),)),))
        assert check_stratification(TheorySequence(v, (Theory("T_E"), t)))


class TestDefinitions:
    def rule(self, sym, val, body):
        return Rule(sym, val, body)

    def test_unique_agreed_value(self):
        k1 = K("T_E", Eq("gen", "Male"))
        d = Definition((self.rule("sal", "Mr", k1), self.rule("sal", "Mr", k1)))
        assert eval_definition(d, {k1: True}) == {"sal": "Mr"}

    def test_no_fired_rule_is_undefined(self):
        k1 = K("T_E", Eq("gen", "Male"))
        d = Definition((self.rule("sal", "Mr", k1),))
        out = eval_definition(d, {k1: False})
        assert isinstance(out, Undefined) and out.symbol == "sal"

    def test_disagreeing_rules_are_overdefined(self):
        k1 = K("T_E", Eq("gen", "Male"))
        d = Definition((self.rule("sal", "Mr", k1), self.rule("sal", "Ms", k1)))
        out = eval_definition(d, {k1: True})
        assert isinstance(out, Overdefined) and out.values == frozenset({"Mr", "Ms"})

    def test_missing_k_valuation_is_an_error(self):
        k1 = K("T_E", Eq("gen", "Male"))
        with pytest.raises(StratificationError):
            eval_epistemic(k1, {})


class TestEbdForm:
    def test_table_translation_is_ebd(self, greeting, interview):
        for model in (greeting, interview):
            report = check_ebd(translate_table(model.sole_table()))
            assert report.ok, report.violations

    def test_bare_atom_in_body_is_rejected(self):
        t = Theory("A", definitions=(Definition((Rule("sal", "Mr", Eq("gen", "Male")),)),))
        report = check_ebd(t)
        assert not report.ok

    def test_defined_symbol_in_body_is_rejected(self):
        t = Theory(
            "A",
            definitions=(
                Definition(
                    (
                        Rule("sal", "Mr", K("T_E", Eq("gen", "Male"))),
                        Rule("other", "X", And((K("T_E", Eq("gen", "Male")), Eq("sal", "Mr")))),
                    )
                ),
            ),
        )
        assert not check_ebd(t).ok


class TestModelsOfSequence:
    def seq(self, model):
        return TheorySequence(
            model.vocabulary,
            (Theory(ENV_THEORY_ID), translate_table(model.sole_table())),
        )

    def test_complete_knowledge_yields_the_row_value(self, greeting):
        out = models_of_oel(self.seq(greeting), [Eq("gen", "Male"), Eq("mar", "Single")])
        assert len(out) == 1
        (w,) = list(out)
        assert w.value("sal") == "Mr"

    def test_partial_knowledge_uses_ignorance_rows(self, greeting):
        out = models_of_oel(self.seq(greeting), [Eq("gen", "Female")])
        (w,) = list(out)
        assert w.value("sal") == "Lady"
        out = models_of_oel(self.seq(greeting), [])
        (w,) = list(out)
        assert w.value("sal") == "Customer"

    def test_inconsistent_bottom_raises(self, greeting):
        with pytest.raises(InconsistentKnowledgeError):
            models_of_oel(self.seq(greeting), [Eq("gen", "Male"), Eq("gen", "Female")])

    def test_accepts_precomputed_state(self, greeting):
        seq = self.seq(greeting)
        v = greeting.vocabulary.restrict(["gen", "mar"])
        e = state_of(v, [{"gen": "Female", "mar": "Single"}, {"gen": "Female", "mar": "Married"}])
        (w,) = list(models_of_oel(seq, e))
        assert w.value("sal") == "Lady"

    def test_at_most_one_model_for_ebd_sequences(self, greeting, interview):
        # complete-knowledge sweep; the large random sweep lives in the
        # acceptance suite
        for model in (greeting, interview):
            seq = self.seq(model)
            env = model.vocabulary.restrict(model.sole_table().input_variables)
            for w in enumerate_structures(env):
                facts = [Eq(c, w.value(c)) for c in env.symbols]
                assert len(models_of_oel(seq, facts)) <= 1

    def test_non_ebd_upper_theory_rejected(self):
        v = env_vocab()
        t = Theory("A", definitions=(Definition((Rule("gen", "Male", Eq("mar", "Single")),)),))
        with pytest.raises((StratificationError, VocabularyError)):
            models_of_oel(TheorySequence(v, (Theory("T_E"), t)), [])


class TestRendering:
    def test_greeting_translation_text(self, greeting):
        seq = TheorySequence(
            greeting.vocabulary,
            (Theory(ENV_THEORY_ID), translate_table(greeting.sole_table())),
        )
        text = render_sequence(seq)
        assert "sal = Mr <- K[T_E][gen = Male]" in text
        assert "sal = Ms <- K[T_E][gen = Female] & K[T_E][mar = Single]" in text
        # the !K cell becomes 'no marital value is known'
        assert "~K[T_E][mar = Single] & ~K[T_E][mar = Married]" in text
