import pytest

from arithinv import corpus


@pytest.fixture(scope="session")
def bundled():
    return corpus.load_corpus()


@pytest.fixture(scope="session")
def fstats(bundled):
    return corpus.field_stats(bundled)


@pytest.fixture(scope="session")
def cstats(bundled):
    return corpus.curve_stats(bundled)
