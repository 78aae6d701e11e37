import pytest

from selmask.embeddings import load_embeddings
from selmask.fixtures import fixture_path
from selmask.lexicon import load_lexicon
from selmask.scorer import train_scorer
from selmask.tokenizer import load_vocab


@pytest.fixture(scope="session")
def paths():
    names = ("toy_embeddings", "toy_vocab", "seeds_lo", "seeds_hi", "toy_corpus")
    return {n: fixture_path(n) for n in names}


@pytest.fixture(scope="session")
def vocab(paths):
    return load_vocab(paths["toy_vocab"])


@pytest.fixture(scope="session")
def table(paths):
    return load_embeddings(paths["toy_embeddings"])


@pytest.fixture(scope="session")
def lexicon(paths):
    return load_lexicon(paths["seeds_lo"], paths["seeds_hi"])


@pytest.fixture(scope="session")
def model(lexicon, table):
    return train_scorer(lexicon, table, reg_C=1.0, epochs=200, rng_seed=0)


@pytest.fixture
def write(tmp_path):
    def _write(name, text):
        p = tmp_path / name
        p.write_text(text, encoding="utf-8")
        return p
    return _write


_ACCEPTANCE = {}


@pytest.fixture
def acceptance(request):
    """Record a criterion's verdict line; printed in the terminal summary."""
    def _record(number, title, passed, detail=""):
        _ACCEPTANCE[number] = (title, passed, detail)
        return passed
    return _record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        title, passed, detail = _ACCEPTANCE[number]
        verdict = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"[{verdict}] {number:2d}. {title}: {detail}")
