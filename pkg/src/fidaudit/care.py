"""Care diagnostics: is the system informed enough to act prudently?

``inductive_bias_diagnostic`` measures how much a binary decision was
driven by data versus prior: a likelihood ratio near one means the
evidence barely discriminates, so the posterior is inherited from the
prior rather than learned. ``distribution_shift_score`` measures how far
deployment conditions wander from training conditions. ``prudence_report``
assembles the declared checks into a step verdict where missing evidence
is itself a failure: a care standard is not met by silence.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .errors import SupportMismatch, UnknownStandard, ZeroLikelihood

DOMINANCE_THRESHOLD = 0.1

# Standards that can be named without being declared by the context; the
# prudent-user standard is deliberately threshold-free.
BUILTIN_STANDARDS = frozenset(
    {"reasonable-person", "prudent-investor", "prudent-user"}
)

PRIOR_DOMINANCE_RATIONALE = (
    "likelihood ratio near 1: the evidence barely separates the hypotheses, "
    "so this decision is inherited from the prior rather than informed by "
    "the training data"
)


@dataclass(frozen=True)
class BinaryEvidence:
    """Prior and likelihoods for a binary decision."""

    prior: float
    likelihood1: float  # P(data | h = 1)
    likelihood0: float  # P(data | h = 0)

    def __post_init__(self) -> None:
        if not 0.0 <= self.prior <= 1.0:
            raise ValueError(f"prior must lie in [0, 1], got {self.prior}")
        for name, val in (("likelihood1", self.likelihood1), ("likelihood0", self.likelihood0)):
            if val <= 0.0:
                raise ZeroLikelihood(f"{name} must be strictly positive, got {val}")
            if val > 1.0:
                raise ValueError(f"{name} must be at most 1, got {val}")


@dataclass(frozen=True)
class BiasDiagnostic:
    ratio: float
    posterior: float
    prior_dominated: bool
    degenerate_prior: bool
    rationale: str


def inductive_bias_diagnostic(
    evidence: BinaryEvidence, dominance_threshold: float = DOMINANCE_THRESHOLD
) -> BiasDiagnostic:
    """Likelihood ratio, Bayes posterior, and a prior-dominance flag.

    The flag trips when |ln ratio| falls under ``dominance_threshold``; a
    log-scale band treats ratio r and 1/r symmetrically. A prior of exactly
    0 or 1 pins the posterior regardless of evidence and is flagged as
    degenerate.
    """
    if dominance_threshold <= 0:
        raise ValueError("dominance_threshold must be positive")
    ratio = evidence.likelihood1 / evidence.likelihood0
    if ratio == 1.0:
        # equal likelihoods cancel algebraically; keep the prior bit-exact
        posterior = evidence.prior
    else:
        numerator = evidence.prior * evidence.likelihood1
        posterior = numerator / (numerator + (1.0 - evidence.prior) * evidence.likelihood0)
    dominated = abs(math.log(ratio)) < dominance_threshold
    return BiasDiagnostic(
        ratio=ratio,
        posterior=posterior,
        prior_dominated=dominated,
        degenerate_prior=evidence.prior in (0.0, 1.0),
        rationale=PRIOR_DOMINANCE_RATIONALE if dominated else "",
    )


@dataclass(frozen=True)
class DiscreteDistributionPair:
    """Train and deploy distributions over one declared finite support."""

    support: tuple[str, ...]
    train: Mapping[str, float]
    deploy: Mapping[str, float]

    def __post_init__(self) -> None:
        if len(set(self.support)) != len(self.support):
            raise ValueError("support has duplicate points")
        for name, dist in (("train", self.train), ("deploy", self.deploy)):
            if set(dist) != set(self.support):
                raise SupportMismatch(f"{name} distribution does not match the declared support")
            if any(p < 0 for p in dist.values()):
                raise ValueError(f"{name} distribution has negative mass")
            total = sum(dist.values())
            if abs(total - 1.0) > 1e-9:
                raise ValueError(f"{name} distribution sums to {total}")


@dataclass(frozen=True)
class ShiftScore:
    kl_nats: float | None
    absolute_continuity_violation: bool
    violating_points: tuple[str, ...] = ()

    @property
    def finite(self) -> bool:
        return not self.absolute_continuity_violation


def distribution_shift_score(pair: DiscreteDistributionPair) -> ShiftScore:
    """KL(deploy || train) in nats; non-negative, zero only on equal inputs.

    This direction penalizes deployment mass in regions the training
    distribution never covered; when that mass sits on a training zero the
    divergence is infinite and is reported as a violation of absolute
    continuity rather than as a number.
    """
    violating = tuple(
        x for x in pair.support if pair.deploy[x] > 0.0 and pair.train[x] == 0.0
    )
    if violating:
        return ShiftScore(
            kl_nats=None, absolute_continuity_violation=True, violating_points=violating
        )
    kl = 0.0
    for x in pair.support:
        q = pair.deploy[x]
        if q > 0.0:
            kl += q * math.log(q / pair.train[x])
    # mathematically non-negative; clamp float residue from near-equal inputs
    return ShiftScore(kl_nats=max(kl, 0.0), absolute_continuity_violation=False)


@dataclass(frozen=True)
class CareFinding:
    """One executed diagnostic or attestation feeding the care step."""

    name: str
    status: str  # "pass" | "warn" | "fail"
    evidence: Mapping[str, object] = field(default_factory=dict)
    note: str = ""

    def __post_init__(self) -> None:
        if self.status not in ("pass", "warn", "fail"):
            raise ValueError(f"unknown status {self.status!r}")


@dataclass(frozen=True)
class CareSection:
    status: str  # "pass" | "warn" | "fail"
    standard: str
    findings: tuple[CareFinding, ...]


_RANK = {"pass": 0, "warn": 1, "fail": 2}


def prudence_report(
    standard: str,
    declared_checks: Sequence[str],
    findings: Sequence[CareFinding],
    known_standards: frozenset[str] = BUILTIN_STANDARDS,
) -> CareSection:
    """Assemble the care step: every declared check must be present.

    A declared check with no finding fails the step outright (care means
    being highly informed before acting; absent evidence is negligence,
    not neutrality). Statuses combine monotonically: adding a failing
    finding can never upgrade the step.
    """
    if standard not in known_standards:
        raise UnknownStandard(f"care standard {standard!r} is not declared for this context")
    by_name = {f.name: f for f in findings}
    assembled: list[CareFinding] = []
    for name in declared_checks:
        if name in by_name:
            assembled.append(by_name[name])
        else:
            assembled.append(
                CareFinding(
                    name=name,
                    status="fail",
                    note="declared check missing: no evidence was provided",
                )
            )
    for finding in findings:
        if finding.name not in declared_checks:
            assembled.append(finding)
    status = "pass"
    for finding in assembled:
        if _RANK[finding.status] > _RANK[status]:
            status = finding.status
    return CareSection(status=status, standard=standard, findings=tuple(assembled))
