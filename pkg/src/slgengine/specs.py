"""Activity profiles and synthesis specifications.

A synthesis spec travels inside graph documents (attached to loose edges) and
stands alone as CLI/service input, so parsing lives here rather than with the
search itself.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

from .logic import Formula, LogicError, formula_to_text, parse_formula


@dataclass(frozen=True)
class ActivityProfile:
    activity_id: str
    requires: frozenset = frozenset()
    provides: frozenset = frozenset()
    taxonomy_tags: frozenset = frozenset()


@dataclass(frozen=True)
class SynthesisSpec:
    interface_id: str
    candidates: tuple[ActivityProfile, ...]
    initially_available: frozenset
    goals: tuple[Formula, ...]
    max_length: int
    allow_repeats: bool = False

    def __post_init__(self) -> None:
        if self.max_length < 1:
            raise ValueError("maxLength must be >= 1")
        if not self.goals:
            raise ValueError("at least one goal formula is required")


_SPEC_KEYS = {
    "interfaceId",
    "candidateActivities",
    "initiallyAvailable",
    "goals",
    "maxLength",
    "allowRepeats",
}
_PROFILE_KEYS = {"activityId", "requires", "provides", "taxonomyTags"}


def _string_list(obj: object, what: str) -> list[str]:
    if not isinstance(obj, list) or not all(isinstance(x, str) for x in obj):
        raise ValueError(f"{what} must be a list of strings")
    return obj


def spec_from_json(obj: object) -> SynthesisSpec:
    if not isinstance(obj, Mapping):
        raise ValueError("synthesis spec must be an object")
    unknown = set(obj) - _SPEC_KEYS
    if unknown:
        raise ValueError(f"unknown spec keys {sorted(unknown)}")
    interface_id = obj.get("interfaceId")
    if not isinstance(interface_id, str):
        raise ValueError("spec needs an interfaceId")
    candidates: list[ActivityProfile] = []
    for k, pobj in enumerate(obj.get("candidateActivities", [])):
        if not isinstance(pobj, Mapping):
            raise ValueError(f"candidateActivities[{k}] must be an object")
        unknown = set(pobj) - _PROFILE_KEYS
        if unknown:
            raise ValueError(f"unknown profile keys {sorted(unknown)}")
        aid = pobj.get("activityId")
        if not isinstance(aid, str):
            raise ValueError(f"candidateActivities[{k}] needs an activityId")
        candidates.append(
            ActivityProfile(
                activity_id=aid,
                requires=frozenset(_string_list(pobj.get("requires", []), "requires")),
                provides=frozenset(_string_list(pobj.get("provides", []), "provides")),
                taxonomy_tags=frozenset(
                    _string_list(pobj.get("taxonomyTags", []), "taxonomyTags")
                ),
            )
        )
    goals: list[Formula] = []
    goals_obj = obj.get("goals")
    if not isinstance(goals_obj, list) or not goals_obj:
        raise ValueError("spec needs a nonempty goals list")
    for k, gtext in enumerate(goals_obj):
        if not isinstance(gtext, str):
            raise ValueError(f"goals[{k}] must be a formula string")
        try:
            goals.append(parse_formula(gtext))
        except LogicError as exc:
            raise ValueError(f"goals[{k}]: {exc}") from exc
    max_length = obj.get("maxLength")
    if not isinstance(max_length, int) or isinstance(max_length, bool) or max_length < 1:
        raise ValueError("maxLength must be a positive integer")
    allow_repeats = obj.get("allowRepeats", False)
    if not isinstance(allow_repeats, bool):
        raise ValueError("allowRepeats must be a boolean")
    return SynthesisSpec(
        interface_id=interface_id,
        candidates=tuple(candidates),
        initially_available=frozenset(
            _string_list(obj.get("initiallyAvailable", []), "initiallyAvailable")
        ),
        goals=tuple(goals),
        max_length=max_length,
        allow_repeats=allow_repeats,
    )


def spec_to_json(spec: SynthesisSpec) -> dict:
    out: dict = {
        "interfaceId": spec.interface_id,
        "candidateActivities": [
            {
                "activityId": p.activity_id,
                "requires": sorted(p.requires),
                "provides": sorted(p.provides),
                "taxonomyTags": sorted(p.taxonomy_tags),
            }
            for p in spec.candidates
        ],
        "initiallyAvailable": sorted(spec.initially_available),
        "goals": [formula_to_text(g) for g in spec.goals],
        "maxLength": spec.max_length,
    }
    if spec.allow_repeats:
        out["allowRepeats"] = True
    return out
