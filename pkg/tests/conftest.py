from pathlib import Path

import pytest

from edmn import load_utility, parse_model

MODELS = Path(__file__).resolve().parent.parent / "models"


@pytest.fixture(scope="session")
def greeting_text() -> str:
    return (MODELS / "greeting.edmn").read_text()


@pytest.fixture(scope="session")
def interview_text() -> str:
    return (MODELS / "interview.edmn").read_text()


@pytest.fixture(scope="session")
def classic_text() -> str:
    return (MODELS / "classic-greeting.edmn").read_text()


@pytest.fixture(scope="session")
def utility_csv() -> str:
    return (MODELS / "salutation-utility.csv").read_text()


@pytest.fixture(scope="session")
def greeting(greeting_text):
    return parse_model(greeting_text)


@pytest.fixture(scope="session")
def interview(interview_text):
    return parse_model(interview_text)


@pytest.fixture(scope="session")
def classic(classic_text):
    return parse_model(classic_text)


@pytest.fixture(scope="session")
def salutation_utility(classic, utility_csv):
    env_vocab = classic.vocabulary.restrict(["gen", "mar"])
    dec_vocab = classic.vocabulary.restrict(["sal"])
    return load_utility(utility_csv, env_vocab, dec_vocab)
