"""Aggregation of per-principal interests.

Approval counting, Pareto filtering over partially ordered utilities,
lexicographic selection across priority classes, exhaustive manipulation
search for small ordinal rules, and the impartiality test. Outputs never
hide discretion points: winner ties are returned as sets and index
tie-breaks are flagged, so an audit can see exactly where a choice was
made rather than forced.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Mapping, Sequence

from .errors import (
    EmptyClass,
    NegativeWeight,
    SearchSpaceTooLarge,
    UnknownOption,
)

MANIPULATION_MAX_VOTERS = 4
MANIPULATION_MAX_OPTIONS = 4


@dataclass(frozen=True)
class ApprovalBallot:
    voter: str
    approved: frozenset[str]


@dataclass(frozen=True)
class ApprovalResult:
    winners: frozenset[str]
    counts: Mapping[str, int]
    tied: bool


def approval_winners(ballots: Sequence[ApprovalBallot], options: Sequence[str]) -> ApprovalResult:
    """Options with maximal approval count; ties returned, never broken."""
    if not options:
        raise ValueError("option universe is empty")
    universe = set(options)
    counts = {o: 0 for o in options}
    for ballot in ballots:
        for o in ballot.approved:
            if o not in universe:
                raise UnknownOption(f"ballot from {ballot.voter!r} approves unknown option {o!r}")
            counts[o] += 1
    top = max(counts.values())
    winners = frozenset(o for o, c in counts.items() if c == top)
    return ApprovalResult(winners=winners, counts=counts, tied=len(winners) > 1)


@dataclass(frozen=True, eq=False)
class UtilityMatrix:
    """Per-principal, per-option utilities; total and finite."""

    principals: tuple[str, ...]
    options: tuple[str, ...]
    values: Mapping[str, Mapping[str, float]]  # principal -> option -> utility

    def __post_init__(self) -> None:
        if len(set(self.principals)) != len(self.principals):
            raise ValueError("duplicate principal ids")
        if len(set(self.options)) != len(self.options):
            raise ValueError("duplicate option ids")
        for p in self.principals:
            if p not in self.values:
                raise ValueError(f"missing utilities for principal {p!r}")
            for o in self.options:
                if o not in self.values[p]:
                    raise ValueError(f"missing utility for ({p!r}, {o!r})")
                v = self.values[p][o]
                if v != v or v in (float("inf"), float("-inf")):
                    raise ValueError(f"utility for ({p!r}, {o!r}) is not finite")

    def vector(self, option: str) -> tuple[float, ...]:
        return tuple(self.values[p][option] for p in self.principals)


def pareto_front(matrix: UtilityMatrix) -> frozenset[str]:
    """Options not dominated in every principal's utility simultaneously.

    o is dominated iff some o' is at least as good for every principal and
    strictly better for one; equal utility vectors never dominate each
    other, so duplicates survive together.
    """
    if not matrix.options:
        raise ValueError("need at least one option")
    survivors = []
    for o in matrix.options:
        vec = matrix.vector(o)
        dominated = False
        for other in matrix.options:
            if other == o:
                continue
            ovec = matrix.vector(other)
            if all(x >= y for x, y in zip(ovec, vec)) and any(x > y for x, y in zip(ovec, vec)):
                dominated = True
                break
        if not dominated:
            survivors.append(o)
    return frozenset(survivors)


@dataclass(frozen=True)
class PriorityClasses:
    """Disjoint principal classes, highest priority first."""

    classes: tuple[tuple[str, ...], ...]

    def __post_init__(self) -> None:
        seen: set[str] = set()
        for i, cls in enumerate(self.classes):
            if not cls:
                raise EmptyClass(f"priority class {i} is empty")
            for p in cls:
                if p in seen:
                    raise ValueError(f"principal {p!r} appears in more than one class")
                seen.add(p)


@dataclass(frozen=True)
class LexicographicChoice:
    option: str
    tie_break_applied: bool
    tied_options: tuple[str, ...]
    class_scores: tuple[tuple[float, ...], ...]  # per class, scores of surviving options


def lexicographic_select(
    matrix: UtilityMatrix, classes: PriorityClasses, class_score: str = "sum"
) -> LexicographicChoice:
    """Maximize class scores in priority order; flag any final index tie-break.

    ``class_score`` is "sum" or "min" over the class members' utilities.
    The argmax is invariant to a positive affine rescaling applied
    uniformly within one class, since such maps are monotone on scores.
    """
    if class_score not in ("sum", "min"):
        raise ValueError("class_score must be 'sum' or 'min'")
    covered = {p for cls in classes.classes for p in cls}
    if covered != set(matrix.principals):
        raise ValueError("priority classes must cover exactly the matrix principals")

    def score(cls: tuple[str, ...], option: str) -> float:
        utilities = [matrix.values[p][option] for p in cls]
        return sum(utilities) if class_score == "sum" else min(utilities)

    surviving = list(matrix.options)
    recorded = []
    for cls in classes.classes:
        scores = [score(cls, o) for o in surviving]
        recorded.append(tuple(scores))
        best = max(scores)
        surviving = [o for o, sc in zip(surviving, scores) if sc == best]
        if len(surviving) == 1:
            break
    tied = len(surviving) > 1
    # final ties resolved by lowest option index, and flagged
    chosen = min(surviving, key=matrix.options.index)
    return LexicographicChoice(
        option=chosen,
        tie_break_applied=tied,
        tied_options=tuple(surviving),
        class_scores=tuple(recorded),
    )


# --- manipulation search ----------------------------------------------------


@dataclass(frozen=True)
class VotingRule:
    kind: str  # "borda" | "plurality" | "dictator"
    dictator_voter: int = 0

    def __post_init__(self) -> None:
        if self.kind not in ("borda", "plurality", "dictator"):
            raise ValueError(f"unknown rule {self.kind!r}")


def _winner(rule: VotingRule, profile: tuple[tuple[int, ...], ...], n_options: int) -> int:
    """Single winner; score ties break to the lowest option index."""
    if rule.kind == "dictator":
        return profile[rule.dictator_voter][0]
    scores = [0] * n_options
    for ballot in profile:
        if rule.kind == "borda":
            for position, option in enumerate(ballot):
                scores[option] += n_options - 1 - position
        else:  # plurality
            scores[ballot[0]] += 1
    top = max(scores)
    return scores.index(top)


@dataclass(frozen=True)
class ManipulationInstance:
    """A witnessed profitable misreport under the rule."""

    profile: tuple[tuple[int, ...], ...]
    voter: int
    insincere_ballot: tuple[int, ...]
    sincere_winner: int
    manipulated_winner: int


def find_manipulation(
    rule: VotingRule, n_voters: int, n_options: int
) -> ManipulationInstance | None:
    """First profitable misreport over all profiles, voters and ballots.

    Profiles, voters and insincere ballots are scanned in lexicographic
    order, so the witness is deterministic. An outcome counts as improved
    when the manipulating voter's sincere ranking strictly prefers the new
    winner. Returns None when the whole space is clean (e.g. dictatorial
    rules, or two-option majority voting).
    """
    if n_voters < 1 or n_options < 1:
        raise ValueError("need at least one voter and one option")
    if n_voters > MANIPULATION_MAX_VOTERS or n_options > MANIPULATION_MAX_OPTIONS:
        raise SearchSpaceTooLarge(
            f"exhaustive search capped at {MANIPULATION_MAX_VOTERS} voters x "
            f"{MANIPULATION_MAX_OPTIONS} options"
        )
    if rule.kind == "dictator" and not 0 <= rule.dictator_voter < n_voters:
        raise ValueError("dictator voter out of range")

    ballots = list(itertools.permutations(range(n_options)))
    for profile in itertools.product(ballots, repeat=n_voters):
        sincere_winner = _winner(rule, profile, n_options)
        for voter in range(n_voters):
            sincere = profile[voter]
            rank = {option: position for position, option in enumerate(sincere)}
            for insincere in ballots:
                if insincere == sincere:
                    continue
                trial = profile[:voter] + (insincere,) + profile[voter + 1 :]
                new_winner = _winner(rule, trial, n_options)
                if rank[new_winner] < rank[sincere_winner]:
                    return ManipulationInstance(
                        profile=profile,
                        voter=voter,
                        insincere_ballot=insincere,
                        sincere_winner=sincere_winner,
                        manipulated_winner=new_winner,
                    )
    return None


# --- impartiality -------------------------------------------------------------


@dataclass(frozen=True)
class ImpartialityVerdict:
    passed: bool
    violations: tuple[tuple[str, float, str], ...]  # (id, weight, reason)


def impartiality_check(
    weights: Mapping[str, float],
    agent: str,
    favored: str | None = None,
    cap: float | None = None,
) -> ImpartialityVerdict:
    """Self-interest must carry zero weight; favoritism only up to any cap.

    Unequal principal weights are permitted by design: the check fails
    only on agent self-weight, or on weights above the declared cap (all
    principals when a cap is given, with ``favored`` merely naming the one
    under scrutiny in the report).
    """
    for key, value in weights.items():
        if value < 0:
            raise NegativeWeight(f"weight for {key!r} is negative")
    violations: list[tuple[str, float, str]] = []
    agent_weight = weights.get(agent, 0.0)
    if agent_weight > 0:
        violations.append((agent, agent_weight, "agent self-interest must have zero weight"))
    if cap is not None:
        for key in sorted(weights):
            if key == agent:
                continue
            if weights[key] > cap:
                reason = "declared favoritism cap exceeded"
                if favored is not None and key == favored:
                    reason += f" (declared favored id {favored!r})"
                violations.append((key, weights[key], reason))
    return ImpartialityVerdict(passed=not violations, violations=tuple(violations))
