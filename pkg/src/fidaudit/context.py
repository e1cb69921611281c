"""Context schema, principal identification, and the subsidiary-duty catalog.

A context names the social setting the audited system operates in: its
purposes, the roles agents can hold, and norms governing information flow
between roles. Norms carrying a confidentiality or disclosure principle
are machine-checkable only when bound to concrete model node ids;
everything else is an attestation. The shipped catalog enumerates
field-specific subsidiary duties per context, flagging which concern
information flows and which contexts are proposals not yet settled law.
"""

from __future__ import annotations

import difflib
import json
from dataclasses import dataclass, field
from importlib import resources
from typing import Mapping, Sequence

from .errors import InvalidSpec, UnknownContextLabel

BEST_INTERESTS = "best_interests"
OBEDIENCE = "obedience"

CONFIDENTIALITY = "confidentiality"
DISCLOSURE = "disclosure"


@dataclass(frozen=True)
class Role:
    id: str
    description: str = ""


@dataclass(frozen=True)
class Norm:
    """A transmission-principle norm between roles about one attribute.

    ``binding`` supplies the node ids a checker needs:
    confidentiality -> report_node, secret_node;
    disclosure -> report_node, material_node, principal_decision.
    Attestation norms need no binding.
    """

    sender: str
    receiver: str
    subject: str
    attribute: str
    transmission_principle: str  # "confidentiality" | "disclosure" | "attestation:<name>"
    binding: Mapping[str, str] = field(default_factory=dict)

    def principle_kind(self) -> str:
        if self.transmission_principle in (CONFIDENTIALITY, DISCLOSURE):
            return self.transmission_principle
        if self.transmission_principle.startswith("attestation:"):
            return "attestation"
        return "unknown"

    def required_binding_keys(self) -> tuple[str, ...]:
        if self.transmission_principle == CONFIDENTIALITY:
            return ("report_node", "secret_node")
        if self.transmission_principle == DISCLOSURE:
            return ("report_node", "material_node", "principal_decision")
        return ()

    def machine_checkable(self) -> bool:
        required = self.required_binding_keys()
        return bool(required) and all(k in self.binding for k in required)


@dataclass(frozen=True)
class ContextSpec:
    name: str
    purposes: tuple[str, ...]
    roles: tuple[Role, ...]
    norms: tuple[Norm, ...]
    care_standard: str
    subsidiary_duties: tuple[str, ...] = ()


@dataclass(frozen=True)
class Violation:
    path: str
    message: str


def validate_context(spec: ContextSpec) -> list[Violation]:
    """All invariant violations with paths; an empty list means valid."""
    out: list[Violation] = []
    if not spec.name:
        out.append(Violation("name", "context name is empty"))
    if not spec.purposes:
        out.append(Violation("purposes", "at least one purpose is required"))
    seen_roles: dict[str, int] = {}
    for i, role in enumerate(spec.roles):
        if role.id in seen_roles:
            out.append(
                Violation(
                    f"roles[{i}].id",
                    f"duplicate role id {role.id!r} (first declared at roles[{seen_roles[role.id]}])",
                )
            )
        else:
            seen_roles[role.id] = i
    declared = set(seen_roles)
    for i, norm in enumerate(spec.norms):
        for field_name in ("sender", "receiver", "subject"):
            value = getattr(norm, field_name)
            if value not in declared:
                out.append(
                    Violation(f"norms[{i}].{field_name}", f"undeclared role {value!r}")
                )
        kind = norm.principle_kind()
        if kind == "unknown":
            out.append(
                Violation(
                    f"norms[{i}].transmission_principle",
                    f"unknown principle {norm.transmission_principle!r}",
                )
            )
        elif kind in (CONFIDENTIALITY, DISCLOSURE) and not norm.machine_checkable():
            missing = [k for k in norm.required_binding_keys() if k not in norm.binding]
            out.append(
                Violation(
                    f"norms[{i}].binding",
                    f"{kind} norms must bind node ids to be checkable; missing {missing}",
                )
            )
    if not spec.care_standard:
        out.append(Violation("care_standard", "care standard id is empty"))
    known = {entry.key for entry in _all_entries()}
    for i, key in enumerate(spec.subsidiary_duties):
        if key not in known:
            out.append(
                Violation(f"subsidiary_duties[{i}]", f"unknown catalog key {key!r}")
            )
    return out


@dataclass(frozen=True)
class PrincipalClassSpec:
    class_id: str
    role: str
    rank: int  # 1 = highest priority
    relationship: str  # "best_interests" | "obedience"

    def __post_init__(self) -> None:
        if self.relationship not in (BEST_INTERESTS, OBEDIENCE):
            raise InvalidSpec(f"unknown relationship model {self.relationship!r}")


def identify_principals(
    classes: Sequence[PrincipalClassSpec],
) -> tuple[PrincipalClassSpec, ...]:
    """Classes sorted by priority rank, validated.

    Ranks must be contiguous from 1 and at least one class must be served
    on the best-interests model: obedience-only systems have consented
    operators but no principals whose interests downstream steps could
    protect (consent alone is not enough for a principal).
    """
    if not classes:
        raise InvalidSpec("no principal classes declared")
    ids = [c.class_id for c in classes]
    if len(set(ids)) != len(ids):
        raise InvalidSpec("duplicate principal class ids")
    ranks = sorted(c.rank for c in classes)
    if ranks != list(range(1, len(classes) + 1)):
        raise InvalidSpec(f"ranks must be contiguous from 1, got {ranks}")
    if not any(c.relationship == BEST_INTERESTS for c in classes):
        raise InvalidSpec("at least one class must use the best-interests model")
    return tuple(sorted(classes, key=lambda c: c.rank))


def best_interest_classes(
    classes: Sequence[PrincipalClassSpec],
) -> tuple[PrincipalClassSpec, ...]:
    """Only the classes whose interests downstream steps must protect."""
    return tuple(c for c in identify_principals(classes) if c.relationship == BEST_INTERESTS)


# --- subsidiary-duty catalog ----------------------------------------------


@dataclass(frozen=True)
class SubsidiaryDutyEntry:
    key: str
    context_label: str
    duty: str
    kind: str  # "loyalty" | "care" | "both"
    information_flow: bool
    binding: str  # "attestation" | "automated:<operation>"
    speculative: bool
    area: str | None = None

    def automated_operation(self) -> str | None:
        if self.binding.startswith("automated:"):
            return self.binding.split(":", 1)[1]
        return None


def _load_catalog() -> dict:
    raw = resources.files("fidaudit").joinpath("data/duty_catalog.json").read_text("utf-8")
    return json.loads(raw)


_CATALOG_CACHE: dict | None = None


def _catalog() -> dict:
    global _CATALOG_CACHE
    if _CATALOG_CACHE is None:
        _CATALOG_CACHE = _load_catalog()
    return _CATALOG_CACHE


def catalog_labels() -> tuple[str, ...]:
    return tuple(ctx["label"] for ctx in _catalog()["contexts"])


def _entries_for(ctx: dict) -> list[SubsidiaryDutyEntry]:
    return [
        SubsidiaryDutyEntry(
            key=e["key"],
            context_label=ctx["label"],
            duty=e["duty"],
            kind=e["kind"],
            information_flow=e["information_flow"],
            binding=e["binding"],
            speculative=ctx["speculative"],
            area=e.get("area"),
        )
        for e in ctx["entries"]
    ]


def _all_entries() -> list[SubsidiaryDutyEntry]:
    out: list[SubsidiaryDutyEntry] = []
    for ctx in _catalog()["contexts"]:
        out.extend(_entries_for(ctx))
    return out


def catalog_lookup(context_label: str) -> tuple[SubsidiaryDutyEntry, ...]:
    """Entries for one catalog context; unknown labels suggest the nearest."""
    for ctx in _catalog()["contexts"]:
        if ctx["label"] == context_label:
            return tuple(_entries_for(ctx))
    close = difflib.get_close_matches(context_label, catalog_labels(), n=1)
    suggestion = close[0] if close else None
    hint = f"; did you mean {suggestion!r}?" if suggestion else ""
    raise UnknownContextLabel(
        f"unknown context label {context_label!r}{hint}", suggestion=suggestion
    )


def duty_entry(key: str) -> SubsidiaryDutyEntry:
    for entry in _all_entries():
        if entry.key == key:
            return entry
    raise UnknownContextLabel(f"unknown catalog key {key!r}")
