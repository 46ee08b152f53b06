"""Epistemic decision tables over stratified ordered epistemic logic.

Decision tables are read epistemically: cells fire on what is *known*, not
merely what is true, and the `!K` constructs let rows react to ignorance.
The package bundles the finite-model logic kernel, the table language and
its translation to stratified theories, decision-theoretic optimization
criteria, knowledge-requirement queries, and an HTTP service plus CLI.
"""

from .kernel import (
    DEFAULT_ENUMERATION_CAP,
    EnumerationCapExceeded,
    EpistemicState,
    Sort,
    Structure,
    Vocabulary,
    VocabularyError,
    build_vocabulary,
    enumerate_structures,
    eval_ground,
    interval_sort,
    models_of,
)
from .oel import (
    Definition,
    InconsistentKnowledgeError,
    K,
    Rule,
    StratificationError,
    Theory,
    TheorySequence,
    check_ebd,
    check_stratification,
    eval_definition,
    eval_epistemic,
    k_query,
    models_of_oel,
    render_sequence,
)
from .tables import (
    DRD,
    DecisionResult,
    DecisionTable,
    FactSet,
    TableError,
    check_table,
    compose_drd,
    constraint_to_formula,
    decide,
    decide_drd,
    facts_to_state,
    translate_table,
)
from .dsl import Model, ParseError, parse_facts, parse_model, render_table
from .decisions import (
    Criterion,
    EpistemicDecisionFunction,
    UtilityError,
    UtilityFunction,
    compile_edf_to_edmn,
    compile_edf_to_oel,
    induced_edf,
    load_utility,
    optimal_decision,
    parse_criterion,
)
from .queries import (
    Explanation,
    KnowledgeProfile,
    enumerate_decision_map,
    explain,
    minimal_knowledge,
)

__version__ = "0.1.0"
