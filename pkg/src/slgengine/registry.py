"""Activity implementations with virtual dispatch on domain instances.

Implementations are keyed by activity id, optionally specialized per domain
type.  A dispatched call resolves against the *runtime* type of the instance,
walking its declared supertype chain, so one node can run different
implementations against instances of different subtypes.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Protocol

from .model import ActivityDescriptor, GraphLibrary
from .runtime import DomainValue, ServiceInstance, Value


class ActivityError(Exception):
    """Raised by or around activity implementations; aborts the run."""


class EngineHooks(Protocol):
    """Facilities the engine lends to retrieval-style activities."""

    def instantiate(self, graph_id: str, init_inputs: list[Value]) -> Value: ...


@dataclass
class ActivityCall:
    activity: ActivityDescriptor
    inputs: list[Value]
    instance: Value | None
    engine: "EngineHooks"


ActivityImpl = Callable[[ActivityCall], tuple[str, list[Value]]]


class ActivityRegistry:
    def __init__(self) -> None:
        self._impls: dict[tuple[str, str | None], ActivityImpl] = {}

    def register(self, activity_id: str, impl: ActivityImpl, *, domain: str | None = None) -> None:
        key = (activity_id, domain)
        if key in self._impls:
            raise ActivityError(f"duplicate registration for {key}")
        self._impls[key] = impl

    def registered_ids(self) -> set[str]:
        return {aid for (aid, _d) in self._impls}

    def resolve(
        self, activity_id: str, instance: Value | None, lib: GraphLibrary
    ) -> ActivityImpl:
        if isinstance(instance, (DomainValue, ServiceInstance)):
            for domain in lib.supertype_chain(instance.type.name):
                impl = self._impls.get((activity_id, domain))
                if impl is not None:
                    return impl
            raise ActivityError(
                f"no implementation of {activity_id!r} for domain "
                f"{instance.type.name!r} or its supertypes"
            )
        impl = self._impls.get((activity_id, None))
        if impl is None:
            raise ActivityError(f"no registered implementation for {activity_id!r}")
        return impl
