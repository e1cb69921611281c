"""Loyalty verification over utility tables and influence models.

Two families of checks:

* Order conditions between utility tables over a shared outcome space.
  ``alignment_check`` demands that whenever the principal strictly prefers
  one outcome to another, the fiduciary-conditioned agent utility agrees;
  ``disgorgement_check`` demands that the fiduciary-conditioned utility
  never strictly profits in a direction the unconditioned utility would
  have; ``no_conflict_check`` applies the alignment logic to a system
  objective against the aggregated principal interests (the first step of
  the loyalty two-step). Only orderings are consulted, so verdicts are
  invariant under strictly increasing transformations of either table.

* Information-flow duties over a model and an audited profile.
  ``confidentiality_check`` requires zero mutual information between a
  report and a secret; ``disclosure_check`` requires that material
  information actually flows through the report and that communicating
  leaves the principal no worse off than silence.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from enum import Enum
from typing import Mapping

from .errors import OutcomeSpaceMismatch, UnknownNode
from .macid import (
    DecisionRule,
    Macid,
    NodeKind,
    PolicyProfile,
    _best_response_detail,
    expected_utility,
    marginal,
    mutual_information,
    value_of_information,
)

INFO_TOL = 1e-9


class RoleTag(Enum):
    PRINCIPAL_TRUE = "principal_true"
    AGENT_FIDUCIARY = "agent_fiduciary"
    AGENT_NONFIDUCIARY = "agent_nonfiduciary"
    SYSTEM_OBJECTIVE = "system_objective"


@dataclass(frozen=True)
class UtilityTable:
    """Outcome-indexed utilities tagged with the role they represent."""

    values: Mapping[str, float]
    role: RoleTag

    def __post_init__(self) -> None:
        if not self.values:
            raise ValueError("utility table is empty")
        for outcome, v in self.values.items():
            if v != v or v in (float("inf"), float("-inf")):
                raise ValueError(f"utility for outcome {outcome!r} is not finite")

    def outcomes(self) -> tuple[str, ...]:
        return tuple(sorted(self.values))


@dataclass(frozen=True)
class AlignmentVerdict:
    status: str  # "aligned" | "violation"
    witnesses: tuple[tuple[str, str], ...]

    @property
    def aligned(self) -> bool:
        return self.status == "aligned"


def _shared_outcomes(a: UtilityTable, b: UtilityTable) -> tuple[str, ...]:
    if a.outcomes() != b.outcomes():
        raise OutcomeSpaceMismatch(
            f"outcome spaces differ: {a.outcomes()} vs {b.outcomes()}"
        )
    return a.outcomes()


def _ordered_pair_check(
    premise: UtilityTable, conclusion: UtilityTable, holds
) -> AlignmentVerdict:
    outcomes = _shared_outcomes(premise, conclusion)
    witnesses = [
        (c1, c2)
        for c1, c2 in itertools.permutations(outcomes, 2)
        if premise.values[c1] > premise.values[c2]
        and not holds(conclusion.values[c1], conclusion.values[c2])
    ]
    status = "violation" if witnesses else "aligned"
    return AlignmentVerdict(status=status, witnesses=tuple(witnesses))


def alignment_check(principal: UtilityTable, agent_fiduciary: UtilityTable) -> AlignmentVerdict:
    """Strict principal preferences must be strictly preserved by the agent.

    Pairs the principal is indifferent between impose no constraint, so a
    constant principal table is vacuously aligned with anything.
    """
    return _ordered_pair_check(principal, agent_fiduciary, lambda x, y: x > y)


def disgorgement_check(
    agent_nonfiduciary: UtilityTable, agent_fiduciary: UtilityTable
) -> AlignmentVerdict:
    """The fiduciary-conditioned utility may not profit where the raw one would.

    Wherever the unconditioned utility strictly increases, the conditioned
    one must not (weak decrease required); witnesses list the profiting
    outcome pairs.
    """
    return _ordered_pair_check(agent_nonfiduciary, agent_fiduciary, lambda x, y: x <= y)


def no_conflict_check(
    system_objective: UtilityTable, aggregated_principal: UtilityTable
) -> AlignmentVerdict:
    """First step of the loyalty two-step: objective vs aggregated interests.

    Same order logic as ``alignment_check`` with the aggregated principal
    interests in the premise role.
    """
    return _ordered_pair_check(aggregated_principal, system_objective, lambda x, y: x > y)


# --- information-flow duties -------------------------------------------------


@dataclass(frozen=True)
class ConfidentialityVerdict:
    passed: bool
    mutual_information_bits: float
    report_node: str
    secret_node: str


def confidentiality_check(
    model: Macid,
    profile: PolicyProfile,
    report_node: str,
    secret_node: str,
    tol: float = INFO_TOL,
) -> ConfidentialityVerdict:
    """Pass iff the report carries no information about the secret.

    Computes I(report; secret) in bits under the audited profile's joint
    distribution; anything above ``tol`` fails. The verdict depends only
    on the joint law, so relabeling domain values cannot change it.
    """
    for node in (report_node, secret_node):
        if node not in model.node_map:
            raise UnknownNode(f"unknown node {node!r}")
    joint = marginal(model, profile, (report_node, secret_node))
    info = mutual_information(joint)
    return ConfidentialityVerdict(
        passed=info <= tol,
        mutual_information_bits=info,
        report_node=report_node,
        secret_node=secret_node,
    )


@dataclass(frozen=True)
class DisclosureVerdict:
    passed: bool
    material: bool
    value_of_information: float
    information_bits: float | None
    principal_utility: float | None
    silent_baseline: float | None
    note: str = ""


def _principal_best_response_to_silence(
    model: Macid, profile: PolicyProfile, principal: str, max_rounds: int = 64
) -> float:
    """Principal's utility when re-optimizing their own decisions only."""
    working = dict(profile)
    own = [n for n in model.decision_nodes() if model.node_map[n].owner == principal]
    for _ in range(max_rounds):
        changed = False
        for nid in own:
            rule, best, current = _best_response_detail(model, working, nid)
            if best > current + 1e-12:
                working[nid] = rule
                changed = True
        if not changed:
            break
    return expected_utility(model, working, principal)


def materiality_value(
    model: Macid, report_node: str, material_node: str, principal_decision: str
) -> float:
    """Value of observing the material node once the report is silenced.

    Materiality should reflect what the information itself is worth to the
    principal, not what the audited report already conveys, so the report
    decision is replaced by a constant before measuring the value of
    information; the most favorable constant is used.
    """
    best = 0.0
    for value in model.node_map[report_node].domain:
        silenced = model.replace_decision_with_constant_chance(report_node, value)
        best = max(best, value_of_information(silenced, principal_decision, material_node))
    return best


def disclosure_check(
    model: Macid,
    profile: PolicyProfile,
    report_node: str,
    material_node: str,
    principal_decision: str,
    tol: float = INFO_TOL,
) -> DisclosureVerdict:
    """Material information must flow, and communicating must not hurt.

    If the material node has positive value for the principal's decision
    (measured with the report silenced), the audited profile must (a) put
    positive mutual information between report and material node and (b)
    give the principal at least the silent baseline, i.e. their utility
    when the report is a constant and they best-respond to it (most
    favorable constant). Immaterial nodes pass vacuously with a note.
    """
    for node in (report_node, material_node, principal_decision):
        if node not in model.node_map:
            raise UnknownNode(f"unknown node {node!r}")
    if model.node_map[report_node].kind is not NodeKind.DECISION:
        raise UnknownNode(f"report node {report_node!r} must be a decision node")

    voi = materiality_value(model, report_node, material_node, principal_decision)
    if voi <= tol:
        return DisclosureVerdict(
            passed=True,
            material=False,
            value_of_information=voi,
            information_bits=None,
            principal_utility=None,
            silent_baseline=None,
            note="not material: silence costs the principal nothing",
        )

    principal = model.node_map[principal_decision].owner
    info = mutual_information(marginal(model, profile, (report_node, material_node)))
    utility = expected_utility(model, profile, principal)
    baseline = -float("inf")
    for value in model.node_map[report_node].domain:
        muted = dict(profile)
        muted[report_node] = DecisionRule.constant(model, report_node, value)
        baseline = max(
            baseline, _principal_best_response_to_silence(model, muted, principal)
        )
    flows = info > tol
    no_harm = utility >= baseline - tol
    return DisclosureVerdict(
        passed=flows and no_harm,
        material=True,
        value_of_information=voi,
        information_bits=info,
        principal_utility=utility,
        silent_baseline=baseline,
        note="" if flows else "no information flows through the report despite materiality",
    )
