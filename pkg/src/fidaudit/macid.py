"""Finite multi-agent causal influence models.

A model is a DAG of chance, decision and utility nodes. Chance nodes carry
conditional probability tables, decision nodes carry (externally supplied)
decision rules, and utility nodes carry real-valued tables over their
parents. Everything is finite and enumerated exactly, so every query below
is an exact computation rather than an estimate: the joint distribution is
the topological-order chain-rule product, equilibria are found by
best-response iteration over deterministic rules, and information queries
(value of information, mutual information) reduce to sums over the joint.

All values are immutable after construction and every operation is a pure
function, so concurrent use needs no locking.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterator, Mapping

from .errors import (
    EdgeExists,
    IncompleteProfile,
    InvalidDistribution,
    InvalidModel,
    NoConvergence,
    NodeKindMismatch,
    UnknownAgent,
    UnknownNode,
)

PROB_TOL = 1e-9

# Enumerating candidate profiles for the equilibrium warm start costs
# (number of profiles) * (number of joint outcomes); skip it beyond this.
_WARM_START_BUDGET = 2_000_000


class NodeKind(Enum):
    CHANCE = "chance"
    DECISION = "decision"
    UTILITY = "utility"


@dataclass(frozen=True)
class Node:
    """A single model variable.

    Chance and decision nodes have a finite ordered ``domain``; utility
    nodes have none (their payoff table lives on the model). Decision and
    utility nodes belong to exactly one agent; chance nodes to none.
    """

    id: str
    kind: NodeKind
    owner: str | None = None
    domain: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if self.kind is NodeKind.CHANCE and self.owner is not None:
            raise InvalidModel(f"chance node {self.id!r} must not have an owner")
        if self.kind in (NodeKind.DECISION, NodeKind.UTILITY) and not self.owner:
            raise InvalidModel(f"{self.kind.value} node {self.id!r} needs an owner")
        if self.kind is NodeKind.UTILITY:
            if self.domain:
                raise InvalidModel(f"utility node {self.id!r} must not declare a domain")
        else:
            if not self.domain:
                raise InvalidModel(f"node {self.id!r} has an empty domain")
            if len(set(self.domain)) != len(self.domain):
                raise InvalidModel(f"node {self.id!r} has duplicate domain values")


Assignment = tuple[str, ...]
Row = tuple[float, ...]


def _check_rows(
    node_id: str,
    table: Mapping[Assignment, Row],
    expected_keys: set[Assignment],
    width: int,
) -> None:
    keys = set(table)
    if keys != expected_keys:
        missing = sorted(expected_keys - keys)
        extra = sorted(keys - expected_keys)
        raise InvalidModel(
            f"table for {node_id!r} must cover exactly the parent product "
            f"(missing {missing[:3]}, extra {extra[:3]})"
        )
    for key, row in table.items():
        if len(row) != width:
            raise InvalidModel(f"row {key} for {node_id!r} has width {len(row)}, expected {width}")
        if any(p < -PROB_TOL or p > 1 + PROB_TOL for p in row):
            raise InvalidModel(f"row {key} for {node_id!r} has entries outside [0, 1]")
        if abs(sum(row) - 1.0) > PROB_TOL:
            raise InvalidModel(f"row {key} for {node_id!r} sums to {sum(row)}, not 1")


@dataclass(frozen=True)
class Cpd:
    """Conditional probability table for one chance node.

    ``table`` maps each joint parent assignment (values ordered by the
    node's declared parent list) to a distribution over the node's domain.
    """

    node: str
    table: Mapping[Assignment, Row]


@dataclass(frozen=True)
class DecisionRule:
    """A decision rule: parent assignment -> distribution over actions."""

    node: str
    table: Mapping[Assignment, Row]

    @staticmethod
    def deterministic(model: "Macid", node: str, choose: Mapping[Assignment, str]) -> "DecisionRule":
        """Build a deterministic rule from a parent-assignment -> value map."""
        dom = model.node_map[node].domain
        table = {}
        for pa in model.parent_assignments(node):
            value = choose[pa]
            row = [0.0] * len(dom)
            row[dom.index(value)] = 1.0
            table[pa] = tuple(row)
        return DecisionRule(node, table)

    @staticmethod
    def constant(model: "Macid", node: str, value: str) -> "DecisionRule":
        """Rule that plays ``value`` regardless of what it observes."""
        return DecisionRule.deterministic(
            model, node, {pa: value for pa in model.parent_assignments(node)}
        )


PolicyProfile = Mapping[str, DecisionRule]


@dataclass(frozen=True)
class Macid:
    """A validated multi-agent causal influence model.

    ``edges`` lists each node's parents (order matters: it fixes the row
    keying of every table). ``utilities`` maps each utility node to a table
    over its parents' joint assignments. Construction validates the full
    set of structural invariants and precomputes deterministic orderings so
    repeated queries are bit-identical.
    """

    nodes: tuple[Node, ...]
    edges: Mapping[str, tuple[str, ...]]
    cpds: Mapping[str, Cpd]
    utilities: Mapping[str, Mapping[Assignment, float]]
    agents: tuple[str, ...]
    # derived, filled in __post_init__
    node_map: Mapping[str, Node] = field(default=None, repr=False, compare=False)
    outcome_order: tuple[str, ...] = field(default=None, repr=False, compare=False)

    def __post_init__(self) -> None:
        node_map = {n.id: n for n in self.nodes}
        if len(node_map) != len(self.nodes):
            raise InvalidModel("duplicate node ids")
        if len(set(self.agents)) != len(self.agents):
            raise InvalidModel("duplicate agent ids")
        for nid, parents in self.edges.items():
            if nid not in node_map:
                raise InvalidModel(f"edge list references unknown node {nid!r}")
            for p in parents:
                if p not in node_map:
                    raise InvalidModel(f"unknown parent {p!r} of {nid!r}")
        for n in self.nodes:
            if n.id not in self.edges:
                raise InvalidModel(f"node {n.id!r} missing from the edge map")
            if n.owner is not None and n.owner not in self.agents:
                raise InvalidModel(f"node {n.id!r} owned by undeclared agent {n.owner!r}")

        children: dict[str, list[str]] = {n.id: [] for n in self.nodes}
        for nid, parents in self.edges.items():
            for p in parents:
                children[p].append(nid)
        for n in self.nodes:
            if n.kind is NodeKind.UTILITY and children[n.id]:
                raise InvalidModel(f"utility node {n.id!r} has children {children[n.id]}")

        order = _topological_order(node_map, self.edges)

        for n in self.nodes:
            if n.kind is NodeKind.CHANCE:
                if n.id not in self.cpds:
                    raise InvalidModel(f"chance node {n.id!r} has no CPD")
            elif n.id in self.cpds:
                raise InvalidModel(f"non-chance node {n.id!r} has a CPD")
            if n.kind is NodeKind.UTILITY:
                if n.id not in self.utilities:
                    raise InvalidModel(f"utility node {n.id!r} has no utility table")
            elif n.id in self.utilities:
                raise InvalidModel(f"non-utility node {n.id!r} has a utility table")

        object.__setattr__(self, "node_map", node_map)
        object.__setattr__(
            self,
            "outcome_order",
            tuple(nid for nid in order if node_map[nid].kind is not NodeKind.UTILITY),
        )

        for nid, cpd in self.cpds.items():
            if cpd.node != nid:
                raise InvalidModel(f"CPD keyed {nid!r} but declares node {cpd.node!r}")
            _check_rows(
                nid, cpd.table, set(self.parent_assignments(nid)), len(node_map[nid].domain)
            )
        for nid, table in self.utilities.items():
            expected = set(self.parent_assignments(nid))
            if set(table) != expected:
                raise InvalidModel(f"utility table for {nid!r} does not cover the parent product")
            for v in table.values():
                if not math.isfinite(v):
                    raise InvalidModel(f"utility table for {nid!r} has a non-finite entry")

        owned = {a: 0 for a in self.agents}
        for n in self.nodes:
            if n.kind is NodeKind.UTILITY:
                owned[n.owner] += 1
        for agent, count in owned.items():
            if count == 0:
                raise InvalidModel(f"agent {agent!r} owns no utility node")

    # -- structure helpers -------------------------------------------------

    def parents(self, node_id: str) -> tuple[str, ...]:
        if node_id not in self.edges:
            raise UnknownNode(f"unknown node {node_id!r}")
        return self.edges[node_id]

    def parent_assignments(self, node_id: str) -> Iterator[Assignment]:
        """Joint parent assignments in row-major declared-domain order."""
        domains = [self.node_map[p].domain for p in self.parents(node_id)]
        return itertools.product(*domains)

    def decision_nodes(self) -> tuple[str, ...]:
        return tuple(
            sorted(n.id for n in self.nodes if n.kind is NodeKind.DECISION)
        )

    def utility_nodes_of(self, agent: str) -> tuple[str, ...]:
        if agent not in self.agents:
            raise UnknownAgent(f"unknown agent {agent!r}")
        return tuple(
            sorted(n.id for n in self.nodes if n.kind is NodeKind.UTILITY and n.owner == agent)
        )

    def with_edge(self, parent: str, child: str) -> "Macid":
        """Copy of the model with ``parent`` appended to ``child``'s parents.

        Tables of ``child`` must be re-supplied by the caller if it carries
        any; for decision nodes (the only supported target) there is none.
        """
        if parent in self.edges[child]:
            raise EdgeExists(f"{parent!r} is already a parent of {child!r}")
        edges = dict(self.edges)
        edges[child] = edges[child] + (parent,)
        return Macid(self.nodes, edges, self.cpds, self.utilities, self.agents)

    def replace_decision_with_constant_chance(self, node_id: str, value: str) -> "Macid":
        """Copy where decision ``node_id`` becomes a parentless point-mass chance node.

        Used to model a silenced communication channel: the variable still
        exists (so downstream tables keep their shape) but carries no
        information and offers no strategic choice.
        """
        node = self.node_map[node_id]
        if node.kind is not NodeKind.DECISION:
            raise NodeKindMismatch(f"{node_id!r} is not a decision node")
        row = [0.0] * len(node.domain)
        row[node.domain.index(value)] = 1.0
        nodes = tuple(
            Node(n.id, NodeKind.CHANCE, None, n.domain) if n.id == node_id else n
            for n in self.nodes
        )
        edges = dict(self.edges)
        edges[node_id] = ()
        cpds = dict(self.cpds)
        cpds[node_id] = Cpd(node_id, {(): tuple(row)})
        return Macid(nodes, edges, cpds, self.utilities, self.agents)


def _topological_order(
    node_map: Mapping[str, Node], edges: Mapping[str, tuple[str, ...]]
) -> tuple[str, ...]:
    """Kahn's algorithm with sorted-id tie-break; raises on cycles."""
    remaining_parents = {nid: set(ps) for nid, ps in edges.items()}
    children: dict[str, list[str]] = {nid: [] for nid in node_map}
    for nid, parents in edges.items():
        for p in parents:
            children[p].append(nid)
    ready = sorted(nid for nid, ps in remaining_parents.items() if not ps)
    order: list[str] = []
    while ready:
        nid = ready.pop(0)
        order.append(nid)
        newly = []
        for c in children[nid]:
            remaining_parents[c].discard(nid)
            if not remaining_parents[c]:
                newly.append(c)
        ready = sorted(ready + newly)
    if len(order) != len(node_map):
        raise InvalidModel("edge structure contains a cycle")
    return tuple(order)


# -- profile validation ------------------------------------------------------


def _check_profile(model: Macid, profile: PolicyProfile) -> None:
    for nid in model.decision_nodes():
        if nid not in profile:
            raise IncompleteProfile(f"no rule for decision node {nid!r}")
        rule = profile[nid]
        if rule.node != nid:
            raise InvalidModel(f"rule keyed {nid!r} declares node {rule.node!r}")
        _check_rows(
            nid,
            rule.table,
            set(model.parent_assignments(nid)),
            len(model.node_map[nid].domain),
        )


# -- core queries -------------------------------------------------------------


def joint_distribution(
    model: Macid, profile: PolicyProfile
) -> dict[Assignment, float]:
    """Exact joint over chance and decision nodes under ``profile``.

    Keys are value tuples ordered by ``model.outcome_order``; every cell of
    the Cartesian product appears, including zero-probability ones. The
    probabilities sum to 1 up to accumulation error.
    """
    _check_profile(model, profile)
    order = model.outcome_order
    positions = {nid: i for i, nid in enumerate(order)}
    domains = [model.node_map[nid].domain for nid in order]
    value_index = [{v: i for i, v in enumerate(dom)} for dom in domains]

    factors = []
    for i, nid in enumerate(order):
        node = model.node_map[nid]
        table = model.cpds[nid].table if node.kind is NodeKind.CHANCE else profile[nid].table
        parent_pos = tuple(positions[p] for p in model.parents(nid))
        factors.append((i, parent_pos, table, value_index[i]))

    joint: dict[Assignment, float] = {}
    for assignment in itertools.product(*domains):
        p = 1.0
        for i, parent_pos, table, vindex in factors:
            pa = tuple(assignment[j] for j in parent_pos)
            p *= table[pa][vindex[assignment[i]]]
            if p == 0.0:
                break
        joint[assignment] = p
    return joint


def marginal(
    model: Macid, profile: PolicyProfile, node_ids: tuple[str, ...]
) -> dict[Assignment, float]:
    """Marginal distribution of ``node_ids`` (in the given order)."""
    positions = {nid: i for i, nid in enumerate(model.outcome_order)}
    for nid in node_ids:
        if nid not in positions:
            raise UnknownNode(f"{nid!r} is not a chance or decision node of the model")
    idx = [positions[nid] for nid in node_ids]
    out: dict[Assignment, float] = {}
    for assignment, p in joint_distribution(model, profile).items():
        key = tuple(assignment[i] for i in idx)
        out[key] = out.get(key, 0.0) + p
    return out


def _agent_utility(model: Macid, agent: str, positions: dict[str, int]) -> list:
    """Precompute (parent positions, table) pairs for the agent's utilities."""
    return [
        (tuple(positions[p] for p in model.parents(u)), model.utilities[u])
        for u in model.utility_nodes_of(agent)
    ]


def expected_utility(model: Macid, profile: PolicyProfile, agent: str) -> float:
    """Sum over joint assignments of probability times the agent's utilities."""
    utail = _agent_utility(model, agent, {n: i for i, n in enumerate(model.outcome_order)})
    total = 0.0
    for assignment, p in joint_distribution(model, profile).items():
        if p == 0.0:
            continue
        total += p * sum(table[tuple(assignment[j] for j in pos)] for pos, table in utail)
    return total


# -- deterministic rules and equilibrium --------------------------------------


def _rule_rows(model: Macid, node_id: str) -> list[Assignment]:
    return sorted(model.parent_assignments(node_id))


def _rule_from_indices(model: Macid, node_id: str, rows: list[Assignment], idx: tuple[int, ...]) -> DecisionRule:
    dom = model.node_map[node_id].domain
    table = {}
    for pa, k in zip(rows, idx):
        row = [0.0] * len(dom)
        row[k] = 1.0
        table[pa] = tuple(row)
    return DecisionRule(node_id, table)


def enumerate_deterministic_rules(model: Macid, node_id: str) -> Iterator[DecisionRule]:
    """All deterministic rules for ``node_id`` in lexicographic order."""
    node = model.node_map[node_id]
    if node.kind is not NodeKind.DECISION:
        raise NodeKindMismatch(f"{node_id!r} is not a decision node")
    rows = _rule_rows(model, node_id)
    for idx in itertools.product(range(len(node.domain)), repeat=len(rows)):
        yield _rule_from_indices(model, node_id, rows, idx)


def _row_values(model: Macid, profile: PolicyProfile, node_id: str, agent: str):
    """Per-row payoffs W[pa][a]: the agent's expected utility mass routed
    through parent assignment ``pa`` of ``node_id`` when it plays action
    index ``a`` there, all other factors held at ``profile``.

    Because the joint factorizes, the owner's expected utility of any rule
    is the sum over rows of W[pa][rule(pa)], so best responses decompose
    row by row.
    """
    order = model.outcome_order
    positions = {nid: i for i, nid in enumerate(order)}
    domains = [model.node_map[nid].domain for nid in order]
    value_index = [{v: i for i, v in enumerate(dom)} for dom in domains]
    target = positions[node_id]
    target_parents = tuple(positions[p] for p in model.parents(node_id))

    factors = []
    for i, nid in enumerate(order):
        if nid == node_id:
            continue
        node = model.node_map[nid]
        table = model.cpds[nid].table if node.kind is NodeKind.CHANCE else profile[nid].table
        factors.append((i, tuple(positions[p] for p in model.parents(nid)), table, value_index[i]))
    utail = _agent_utility(model, agent, positions)

    n_actions = len(model.node_map[node_id].domain)
    w: dict[Assignment, list[float]] = {
        pa: [0.0] * n_actions for pa in model.parent_assignments(node_id)
    }
    for assignment in itertools.product(*domains):
        q = 1.0
        for i, parent_pos, table, vindex in factors:
            pa = tuple(assignment[j] for j in parent_pos)
            q *= table[pa][vindex[assignment[i]]]
            if q == 0.0:
                break
        if q == 0.0:
            continue
        u = sum(table[tuple(assignment[j] for j in pos)] for pos, table in utail)
        pa_key = tuple(assignment[j] for j in target_parents)
        w[pa_key][value_index[target][assignment[target]]] += q * u
    return w


def best_response(
    model: Macid, profile: PolicyProfile, node_id: str
) -> tuple[DecisionRule, float]:
    """Lexicographically smallest deterministic best response at one node.

    Returns the rule together with the owner's expected utility under it.
    Equivalent to an exhaustive search over all deterministic rules for the
    node (the rowwise argmax is exact because payoffs decompose by row).
    """
    rule, best_value, _ = _best_response_detail(model, profile, node_id)
    return rule, best_value


def _best_response_detail(
    model: Macid, profile: PolicyProfile, node_id: str
) -> tuple[DecisionRule, float, float]:
    """Best response plus the owner's value of the node's current rule."""
    agent = model.node_map[node_id].owner
    w = _row_values(model, profile, node_id, agent)
    rows = _rule_rows(model, node_id)
    current = profile[node_id].table
    idx = []
    best_value = 0.0
    current_value = 0.0
    for pa in rows:
        scores = w[pa]
        best = max(scores)
        k = scores.index(best)  # lowest action index among maximizers
        idx.append(k)
        best_value += best
        current_value += sum(p * s for p, s in zip(current[pa], scores))
    return _rule_from_indices(model, node_id, rows, tuple(idx)), best_value, current_value


def _profile_key(model: Macid, profile: PolicyProfile) -> tuple:
    return tuple(
        tuple(profile[nid].table[pa] for pa in _rule_rows(model, nid))
        for nid in model.decision_nodes()
    )


def _welfare_warm_start(model: Macid) -> dict[str, DecisionRule]:
    """Deterministic starting profile for best-response iteration.

    When the profile space is small enough to enumerate, start from the
    profile maximizing total (all-agent) expected utility, with ties broken
    by lexicographic rule order. This favors payoff-efficient equilibria
    when several exist, e.g. the informative one in communication models
    where a babbling equilibrium also satisfies the deviation check.
    Beyond the enumeration budget, fall back to the lexicographically
    smallest profile.
    """
    decisions = model.decision_nodes()
    rows = {nid: _rule_rows(model, nid) for nid in decisions}
    sizes = [
        len(model.node_map[nid].domain) ** len(rows[nid]) for nid in decisions
    ]
    n_profiles = math.prod(sizes) if sizes else 1
    n_outcomes = math.prod(
        len(model.node_map[nid].domain) for nid in model.outcome_order
    )

    fallback = {
        nid: _rule_from_indices(model, nid, rows[nid], (0,) * len(rows[nid]))
        for nid in decisions
    }
    if not decisions or n_profiles * n_outcomes > _WARM_START_BUDGET:
        return fallback

    rule_lists = [list(enumerate_deterministic_rules(model, nid)) for nid in decisions]
    best_profile = fallback
    best_welfare = -math.inf
    for combo in itertools.product(*rule_lists):
        profile = dict(zip(decisions, combo))
        welfare = sum(expected_utility(model, profile, a) for a in model.agents)
        if welfare > best_welfare + 1e-12:
            best_welfare = welfare
            best_profile = profile
    return dict(best_profile)


def solve_equilibrium(model: Macid, max_rounds: int = 64) -> dict[str, DecisionRule]:
    """Pure-strategy Nash equilibrium in deterministic rules.

    Best-response iteration: sweep the decision nodes in sorted-id order;
    a node keeps its rule when it is already a best response, otherwise it
    switches to the lexicographically smallest best response. A full sweep
    with no change is a fixed point and hence a Nash equilibrium (no
    unilateral deviation at any single decision node raises its owner's
    expected utility). Iteration starts from the welfare warm start (see
    ``_welfare_warm_start``). If the sweep revisits a profile, or
    ``max_rounds`` passes without a fixed point, raises ``NoConvergence``
    carrying the observed cycle.
    """
    if max_rounds < 1:
        raise ValueError("max_rounds must be positive")
    decisions = model.decision_nodes()
    profile = _welfare_warm_start(model)
    if not decisions:
        return profile

    seen: dict[tuple, int] = {_profile_key(model, profile): 0}
    history = [dict(profile)]
    for _ in range(max_rounds):
        changed = False
        for nid in decisions:
            candidate, best_value, current_value = _best_response_detail(model, profile, nid)
            if best_value > current_value + 1e-12:
                profile[nid] = candidate
                changed = True
        if not changed:
            return dict(profile)
        key = _profile_key(model, profile)
        if key in seen:
            start = seen[key]
            cycle = [
                {nid: dict(p[nid].table) for nid in decisions} for p in history[start:]
            ]
            raise NoConvergence(
                f"best-response iteration cycles with period {len(history) - start}",
                cycle=cycle,
            )
        seen[key] = len(history)
        history.append(dict(profile))
    raise NoConvergence(
        f"no equilibrium after {max_rounds} rounds",
        cycle=[{nid: dict(p[nid].table) for nid in decisions} for p in history],
    )


def is_equilibrium(model: Macid, profile: PolicyProfile) -> bool:
    """Exhaustive single-node-deviation check over deterministic rules."""
    _check_profile(model, profile)
    for nid in model.decision_nodes():
        agent = model.node_map[nid].owner
        current = expected_utility(model, profile, agent)
        for rule in enumerate_deterministic_rules(model, nid):
            trial = dict(profile)
            trial[nid] = rule
            if expected_utility(model, trial, agent) > current + 1e-9:
                return False
    return True


# -- information queries -------------------------------------------------------


def value_of_information(model: Macid, decision: str, chance: str, max_rounds: int = 64) -> float:
    """Equilibrium gain to the decision's owner from observing ``chance``.

    Difference between the owner's equilibrium expected utility with the
    edge ``chance -> decision`` added and without it. A strictly positive
    value certifies the chance variable is material to the decision. The
    observation can always be ignored, so for models solved to the owner's
    optimum (in particular any model where this is the only decision) the
    value is non-negative.
    """
    if decision not in model.node_map:
        raise UnknownNode(f"unknown node {decision!r}")
    if chance not in model.node_map:
        raise UnknownNode(f"unknown node {chance!r}")
    if model.node_map[decision].kind is not NodeKind.DECISION:
        raise NodeKindMismatch(f"{decision!r} is not a decision node")
    if model.node_map[chance].kind is not NodeKind.CHANCE:
        raise NodeKindMismatch(f"{chance!r} is not a chance node")
    if chance in model.parents(decision):
        raise EdgeExists(f"{chance!r} is already observed by {decision!r}")

    owner = model.node_map[decision].owner
    base = expected_utility(model, solve_equilibrium(model, max_rounds), owner)
    extended = model.with_edge(chance, decision)
    informed = expected_utility(extended, solve_equilibrium(extended, max_rounds), owner)
    return informed - base


def mutual_information(joint: Mapping[tuple[str, str], float]) -> float:
    """Mutual information in bits of a finite joint distribution.

    ``joint`` maps (x, y) pairs to probabilities summing to 1. Terms with
    zero mass contribute zero. The result is mathematically non-negative;
    floating accumulation may leave a residue above -1e-12.
    """
    total = sum(joint.values())
    if abs(total - 1.0) > PROB_TOL:
        raise InvalidDistribution(f"joint sums to {total}, not 1")
    if any(p < -PROB_TOL for p in joint.values()):
        raise InvalidDistribution("joint has negative entries")
    px: dict[str, float] = {}
    py: dict[str, float] = {}
    for (x, y), p in joint.items():
        px[x] = px.get(x, 0.0) + p
        py[y] = py.get(y, 0.0) + p
    info = 0.0
    for (x, y), p in joint.items():
        if p > 0.0:
            info += p * math.log2(p / (px[x] * py[y]))
    return info
