"""Desk-scale conference-service corpus: graphs, activity stubs, fixtures."""

from __future__ import annotations

from ..model import GraphLibrary, load_library
from ..registry import ActivityRegistry
from .stubs import (
    DATA_DIR,
    Fixtures,
    StubRecorder,
    default_fixtures,
    proceedings_value,
    register_stub_activities,
    user_value,
)

LIBRARY_PATH = DATA_DIR / "ocs-library.json"


def load_corpus() -> GraphLibrary:
    return load_library(LIBRARY_PATH)


def corpus_registry(fixtures: Fixtures | None = None, recorder: StubRecorder | None = None) -> ActivityRegistry:
    registry = ActivityRegistry()
    register_stub_activities(registry, fixtures or default_fixtures(), recorder)
    return registry


__all__ = [
    "DATA_DIR",
    "LIBRARY_PATH",
    "Fixtures",
    "StubRecorder",
    "corpus_registry",
    "default_fixtures",
    "load_corpus",
    "proceedings_value",
    "register_stub_activities",
    "user_value",
]
