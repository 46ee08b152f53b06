"""Knowledge queries: decision maps, minimal knowledge, explanations."""

import itertools

import pytest

from edmn import enumerate_decision_map, explain, minimal_knowledge
from edmn.queries import KnowledgeProfile
from edmn.tables import FactSet, decide, enumerate_fact_sets


def profile_of(t, mapping):
    return KnowledgeProfile.from_facts(FactSet.of(mapping), t)


GREETING_MAP = {
    (("Male",), ("Single",)): "Mr",
    (("Male",), ("Married",)): "Mr",
    (("Male",), ("Single", "Married")): "Mr",
    (("Female",), ("Single",)): "Ms",
    (("Female",), ("Married",)): "Mrs",
    (("Female",), ("Single", "Married")): "Lady",
    (("Male", "Female"), ("Single",)): "Customer",
    (("Male", "Female"), ("Married",)): "Customer",
    (("Male", "Female"), ("Single", "Married")): "Customer",
}


def interview_expected(gpa, minority):
    if gpa == {"High"}:
        return "Approve"
    if gpa == {"Low"}:
        return "Reject"
    if gpa == {"Fair"}:
        return "Approve" if minority == {"Yes"} else "Interview"
    return "Interview"  # gpa not exactly known


class TestDecisionMaps:
    def test_greeting_map_matches_the_worked_table(self, greeting):
        t = greeting.sole_table()
        entries = enumerate_decision_map(t, greeting.vocabulary)
        assert len(entries) == 9
        for profile, result in entries:
            restr = profile.as_dict()
            key = next(
                k
                for k in GREETING_MAP
                if frozenset(k[0]) == restr["gen"] and frozenset(k[1]) == restr["mar"]
            )
            assert result.status == "value"
            assert result.value == GREETING_MAP[key], restr

    def test_interview_map_matches_the_worked_table(self, interview):
        t = interview.sole_table()
        entries = enumerate_decision_map(t, interview.vocabulary)
        assert len(entries) == 21
        for profile, result in entries:
            restr = profile.as_dict()
            assert result.status == "value"
            assert result.value == interview_expected(set(restr["gpa"]), set(restr["min"])), restr

    def test_map_agrees_with_decide(self, greeting):
        t = greeting.sole_table()
        expected = {
            tuple(sorted(f.as_dict().items())): decide(t, f, greeting.vocabulary)
            for f in enumerate_fact_sets(t)
        }
        for profile, result in enumerate_decision_map(t, greeting.vocabulary):
            key = tuple(sorted(profile.as_dict().items()))
            assert expected[key].status == result.status
            assert expected[key].value == result.value


class TestMinimalKnowledge:
    def test_greeting_mr_needs_only_the_gender(self, greeting):
        t = greeting.sole_table()
        profiles = minimal_knowledge(t, "Mr", greeting.vocabulary)
        assert [p.as_dict() for p in profiles] == [
            {"gen": frozenset({"Male"}), "mar": frozenset({"Single", "Married"})}
        ]

    def test_interview_approve_has_two_minimal_profiles(self, interview):
        t = interview.sole_table()
        profiles = minimal_knowledge(t, "Approve", interview.vocabulary)
        got = sorted(
            (sorted(p.as_dict()["gpa"]), sorted(p.as_dict()["min"])) for p in profiles
        )
        assert got == [
            (["Fair"], ["Yes"]),
            (["High"], ["No", "Yes"]),
        ]

    def test_results_form_an_antichain(self, greeting, interview):
        for model in (greeting, interview):
            t = model.sole_table()
            out_sort = t.output[1]
            for target in out_sort.values:
                profiles = minimal_knowledge(t, target, model.vocabulary)
                for a, b in itertools.permutations(profiles, 2):
                    assert not a.covers(b)

    def test_every_covered_profile_reaches_the_target(self, greeting):
        t = greeting.sole_table()
        by_profile = {
            tuple(sorted(p.as_dict().items())): r
            for p, r in enumerate_decision_map(t, greeting.vocabulary)
        }
        for target in ("Mr", "Ms", "Mrs"):
            minimal = minimal_knowledge(t, target, greeting.vocabulary)
            # classical rows decide monotonically: refining the knowledge of a
            # minimal profile keeps the decision
            for p, r in enumerate_decision_map(t, greeting.vocabulary):
                if any(m.covers(p) for m in minimal) and r.status == "value":
                    restr = p.as_dict()
                    if restr["gen"] == frozenset({"Male"}) and target == "Mr":
                        assert r.value == "Mr"

    def test_unknown_target_rejected(self, greeting):
        with pytest.raises(ValueError):
            minimal_knowledge(greeting.sole_table(), "Sir", greeting.vocabulary)


class TestCoversOrder:
    def test_covers_is_pointwise_superset(self, greeting):
        t = greeting.sole_table()
        vague = profile_of(t, {"gen": {"Male"}})
        precise = profile_of(t, {"gen": {"Male"}, "mar": {"Single"}})
        assert vague.covers(precise)
        assert not precise.covers(vague)
        assert vague.covers(vague)

    def test_incomparable_profiles(self, greeting):
        t = greeting.sole_table()
        a = profile_of(t, {"gen": {"Male"}})
        b = profile_of(t, {"mar": {"Single"}})
        assert not a.covers(b) and not b.covers(a)


class TestExplain:
    def test_explanation_matches_decision(self, greeting):
        t = greeting.sole_table()
        for facts in enumerate_fact_sets(t):
            result, expl = explain(t, facts, greeting.vocabulary)
            fired = tuple(s.row for s in expl.fired_rows)
            assert fired == result.fired_rows
            assert {s.row for s in expl.blocked_rows} == set(range(1, 6)) - set(fired)

    def test_blocked_rows_name_the_failing_cell(self, greeting):
        t = greeting.sole_table()
        _, expl = explain(t, FactSet.of({"gen": {"Female"}, "mar": {"Single"}}), greeting.vocabulary)
        blocked = {s.row: s for s in expl.blocked_rows}
        assert blocked[1].first_failing_cell == 1  # Male cell fails
        assert blocked[3].first_failing_cell == 2  # Married cell fails
        assert all(s.first_failing_cell is None for s in expl.fired_rows)

    def test_inconsistent_state_has_no_row_story(self, greeting):
        t = greeting.sole_table()
        result, expl = explain(t, FactSet.of({"gen": set()}), greeting.vocabulary)
        assert result.status == "inconsistent"
        assert expl.fired_rows == () and expl.blocked_rows == ()
