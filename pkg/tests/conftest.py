from __future__ import annotations

import copy
import json

import pytest

from slgengine.corpus import (
    Fixtures,
    default_fixtures,
    load_corpus,
    proceedings_value,
    register_stub_activities,
    user_value,
)
from slgengine.interpreter import Engine
from slgengine.registry import ActivityRegistry


@pytest.fixture(scope="session")
def corpus():
    return load_corpus()


@pytest.fixture(scope="session")
def corpus_doc(corpus):
    from slgengine.corpus import LIBRARY_PATH

    return json.loads(LIBRARY_PATH.read_text(encoding="utf-8"))


@pytest.fixture()
def fixtures():
    return default_fixtures()


@pytest.fixture()
def make_engine(corpus):
    def build(fx: Fixtures | None = None, lib=None) -> Engine:
        registry = ActivityRegistry()
        register_stub_activities(registry, fx or default_fixtures())
        return Engine(lib if lib is not None else corpus, registry)

    return build


@pytest.fixture()
def proceedings(fixtures):
    return proceedings_value(fixtures)


@pytest.fixture()
def user(fixtures):
    return user_value(fixtures)


def altered(doc: dict, mutate) -> dict:
    """Deep-copy a library document and apply an in-place mutation to it."""
    clone = copy.deepcopy(doc)
    mutate(clone)
    return clone
