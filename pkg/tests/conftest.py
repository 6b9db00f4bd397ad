from functools import lru_cache

import pytest

from heckemoney.ideals import enumerate_classes
from heckemoney.money import build_context


@lru_cache(maxsize=None)
def table_for(level):
    return enumerate_classes(level)


@lru_cache(maxsize=None)
def context_for(level):
    return build_context(table_for(level))


@pytest.fixture(scope="session")
def table11():
    return table_for(11)


@pytest.fixture(scope="session")
def table23():
    return table_for(23)


@pytest.fixture(scope="session")
def ctx11():
    return context_for(11)


@pytest.fixture(scope="session")
def ctx23():
    return context_for(23)


@pytest.fixture(scope="session")
def ctx599():
    return context_for(599)
