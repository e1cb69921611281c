"""Scenario documents: the unit of audit.

A scenario is a single JSON document with top-level sections ``context``,
``principals``, ``world``, ``assessment``, ``aggregation``, ``loyalty``,
``care`` and ``metadata``; ``schema_version`` is mandatory. All tables are
nested arrays ordered by the declared id lists (states, actions, domains,
outcomes), and demos/comparisons reference states and actions by index.

``validate_scenario`` returns every violation with a path;
``load_scenario`` builds the typed objects and raises SchemaError on the
first problem. The scenario digest is computed over the canonical
serialized form, so reordering keys in the file changes nothing.
"""

from __future__ import annotations

import hashlib
import itertools
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

import numpy as np

from .context import ContextSpec, Norm, PrincipalClassSpec, Role, validate_context
from .errors import FidauditError, SchemaError
from .macid import Cpd, DecisionRule, Macid, Node, NodeKind
from .mdp import DiscountSpec, Mdp

SUPPORTED_SCHEMA_VERSIONS = (1,)

STEP_SECTIONS = ("context", "principals", "assessment", "aggregation", "loyalty", "care")
KNOWN_SECTIONS = set(STEP_SECTIONS) | {"schema_version", "metadata", "world"}

ASSESSMENT_KINDS = (
    "prudent_investor",
    "discount_inference",
    "maxent_irl",
    "preference_fit",
    "feasibility_probe",
    "patient_advice",
    "preference_reversal",
)

AGGREGATION_METHODS = ("approval", "pareto", "lexicographic")


@dataclass(frozen=True)
class ScenarioMeta:
    scenario_id: str
    version: str
    seed: int


@dataclass(frozen=True)
class World:
    macid: Macid | None = None
    profile: Mapping[str, DecisionRule] | None = None
    mdp: Mdp | None = None
    discount: DiscountSpec | None = None


@dataclass(frozen=True)
class Scenario:
    meta: ScenarioMeta
    digest: str
    context: ContextSpec | None
    principals: tuple[PrincipalClassSpec, ...] | None
    world: World
    assessment: Mapping[str, Any] | None
    aggregation: Mapping[str, Any] | None
    loyalty: Mapping[str, Any] | None
    care: Mapping[str, Any] | None
    raw: Mapping[str, Any] = field(repr=False, default_factory=dict)


def canonical_digest(raw: Mapping[str, Any]) -> str:
    blob = json.dumps(raw, sort_keys=True, separators=(",", ":")).encode("utf-8")
    return "sha256:" + hashlib.sha256(blob).hexdigest()


# --- low-level shape helpers -------------------------------------------------


class _Check:
    """Collects violations as (path, message) pairs."""

    def __init__(self) -> None:
        self.problems: list[tuple[str, str]] = []

    def add(self, path: str, message: str) -> None:
        self.problems.append((path, message))

    def expect(self, condition: bool, path: str, message: str) -> bool:
        if not condition:
            self.add(path, message)
        return condition


def _is_num(x: Any) -> bool:
    return isinstance(x, (int, float)) and not isinstance(x, bool)


def _validate_macid_section(doc: Mapping[str, Any], check: _Check, path: str) -> None:
    if not check.expect(isinstance(doc, dict), path, "must be an object"):
        return
    nodes = doc.get("nodes")
    if not check.expect(isinstance(nodes, list) and nodes, f"{path}.nodes", "non-empty list required"):
        return
    ids = []
    for i, node in enumerate(nodes):
        npath = f"{path}.nodes[{i}]"
        if not check.expect(isinstance(node, dict), npath, "must be an object"):
            continue
        check.expect(isinstance(node.get("id"), str), f"{npath}.id", "string id required")
        kind = node.get("kind")
        check.expect(
            kind in ("chance", "decision", "utility"),
            f"{npath}.kind",
            "kind must be chance, decision or utility",
        )
        if kind in ("decision", "utility"):
            check.expect(isinstance(node.get("owner"), str), f"{npath}.owner", "owner required")
        if kind in ("chance", "decision"):
            dom = node.get("domain")
            check.expect(
                isinstance(dom, list) and dom and all(isinstance(v, str) for v in dom),
                f"{npath}.domain",
                "non-empty list of strings required",
            )
        ids.append(node.get("id"))
    edges = doc.get("edges", {})
    check.expect(isinstance(edges, dict), f"{path}.edges", "must map node id -> parent list")
    if isinstance(edges, dict):
        for nid, parents in edges.items():
            check.expect(nid in ids, f"{path}.edges.{nid}", "unknown node id")
            if isinstance(parents, list):
                for p in parents:
                    check.expect(p in ids, f"{path}.edges.{nid}", f"unknown parent {p!r}")
            else:
                check.add(f"{path}.edges.{nid}", "parent list required")
    for table_field in ("cpds", "utilities", "profile"):
        table = doc.get(table_field, {})
        if check.expect(isinstance(table, dict), f"{path}.{table_field}", "must be an object"):
            for nid in table:
                check.expect(nid in ids, f"{path}.{table_field}.{nid}", "unknown node id")
    check.expect(
        isinstance(doc.get("agents"), list) and all(isinstance(a, str) for a in doc.get("agents", [])),
        f"{path}.agents",
        "list of agent ids required",
    )


def _validate_mdp_section(doc: Mapping[str, Any], check: _Check, path: str) -> None:
    if not check.expect(isinstance(doc, dict), path, "must be an object"):
        return
    states = doc.get("states")
    actions = doc.get("actions")
    ok_states = check.expect(
        isinstance(states, list) and states and all(isinstance(s, str) for s in states),
        f"{path}.states",
        "non-empty list of strings required",
    )
    ok_actions = check.expect(
        isinstance(actions, list) and actions and all(isinstance(a, str) for a in actions),
        f"{path}.actions",
        "non-empty list of strings required",
    )
    if not (ok_states and ok_actions):
        return
    transition = doc.get("transition")
    reward = doc.get("reward")
    n_s, n_a = len(states), len(actions)
    shape_ok = (
        isinstance(transition, list)
        and len(transition) == n_s
        and all(isinstance(row, list) and len(row) == n_a for row in transition)
        and all(isinstance(cell, list) and len(cell) == n_s for row in transition for cell in row)
    )
    check.expect(shape_ok, f"{path}.transition", f"dense {n_s}x{n_a}x{n_s} tensor required")
    reward_ok = (
        isinstance(reward, list)
        and len(reward) == n_s
        and all(isinstance(row, list) and len(row) == n_a for row in reward)
    )
    check.expect(reward_ok, f"{path}.reward", f"dense {n_s}x{n_a} matrix required")
    discount = doc.get("discount")
    if discount is not None:
        if check.expect(isinstance(discount, dict), f"{path}.discount", "must be an object"):
            kind = discount.get("kind")
            check.expect(
                kind in ("exponential", "hyperbolic"),
                f"{path}.discount.kind",
                "kind must be exponential or hyperbolic",
            )


def _validate_assessment(doc: Mapping[str, Any], check: _Check, world: Mapping[str, Any]) -> None:
    methods = doc.get("methods")
    if not check.expect(isinstance(methods, list) and methods, "assessment.methods", "non-empty list required"):
        return
    has_mdp = isinstance(world.get("mdp"), dict)
    needs_mdp = {"discount_inference", "maxent_irl", "feasibility_probe", "patient_advice"}
    for i, method in enumerate(methods):
        mpath = f"assessment.methods[{i}]"
        if not check.expect(isinstance(method, dict), mpath, "must be an object"):
            continue
        kind = method.get("kind")
        if not check.expect(kind in ASSESSMENT_KINDS, f"{mpath}.kind", f"kind must be one of {ASSESSMENT_KINDS}"):
            continue
        if kind in needs_mdp:
            check.expect(has_mdp, mpath, f"{kind} requires world.mdp")
        if kind == "prudent_investor":
            mu = method.get("mu")
            sigma = method.get("sigma")
            check.expect(isinstance(mu, list) and all(_is_num(v) for v in mu), f"{mpath}.mu", "numeric vector required")
            check.expect(isinstance(sigma, list), f"{mpath}.sigma", "matrix required")
            check.expect(_is_num(method.get("risk_aversion")), f"{mpath}.risk_aversion", "number required")
        elif kind == "discount_inference":
            check.expect(isinstance(method.get("beta_grid"), list), f"{mpath}.beta_grid", "list required")
            check.expect(isinstance(method.get("behavior"), dict), f"{mpath}.behavior", "state->action map required")
        elif kind in ("maxent_irl", "preference_fit"):
            check.expect(_is_num(method.get("learn_rate")), f"{mpath}.learn_rate", "number required")
            check.expect(isinstance(method.get("iters"), int), f"{mpath}.iters", "integer required")
        elif kind == "feasibility_probe":
            check.expect(isinstance(method.get("policy"), dict), f"{mpath}.policy", "state->action map required")
        elif kind == "patient_advice":
            check.expect(_is_num(method.get("beta_fit")), f"{mpath}.beta_fit", "number required")
            check.expect(_is_num(method.get("beta_advice")), f"{mpath}.beta_advice", "number required")
        elif kind == "preference_reversal":
            for key in ("early", "late"):
                pair = method.get(key)
                check.expect(
                    isinstance(pair, list) and len(pair) == 2 and all(_is_num(v) for v in pair),
                    f"{mpath}.{key}",
                    "[reward, delay] pair required",
                )
        if kind in needs_mdp and has_mdp:
            states = world["mdp"].get("states", [])
            actions = world["mdp"].get("actions", [])
            for map_field in ("behavior", "policy"):
                mapping = method.get(map_field)
                if isinstance(mapping, dict):
                    for s, a in mapping.items():
                        check.expect(s in states, f"{mpath}.{map_field}.{s}", "unknown state id")
                        check.expect(a in actions, f"{mpath}.{map_field}.{s}", f"unknown action {a!r}")
            for demo_field in ("demos",):
                demos = method.get(demo_field)
                if isinstance(demos, list):
                    for d_i, demo in enumerate(demos):
                        for s_i, step in enumerate(demo if isinstance(demo, list) else []):
                            ok = (
                                isinstance(step, list)
                                and len(step) == 2
                                and all(isinstance(v, int) for v in step)
                                and 0 <= step[0] < len(states)
                                and 0 <= step[1] < len(actions)
                            )
                            check.expect(ok, f"{mpath}.{demo_field}[{d_i}][{s_i}]", "[state_index, action_index] required")


def _validate_aggregation(doc: Mapping[str, Any], check: _Check) -> None:
    method = doc.get("method")
    if method is not None:
        check.expect(method in AGGREGATION_METHODS, "aggregation.method", f"must be one of {AGGREGATION_METHODS}")
        options = doc.get("options")
        check.expect(
            isinstance(options, list) and options and all(isinstance(o, str) for o in options),
            "aggregation.options",
            "non-empty list of option ids required",
        )
        if method == "approval":
            ballots = doc.get("ballots")
            check.expect(isinstance(ballots, list), "aggregation.ballots", "list of ballots required")
        else:
            utilities = doc.get("utilities")
            if check.expect(isinstance(utilities, dict) and utilities, "aggregation.utilities", "class->values map required"):
                for cid, vals in utilities.items():
                    check.expect(
                        isinstance(vals, list) and len(vals) == len(doc.get("options", [])),
                        f"aggregation.utilities.{cid}",
                        "one value per option required",
                    )
    weights = doc.get("weights")
    if weights is not None:
        check.expect(isinstance(weights, dict), "aggregation.weights", "id->weight map required")
        check.expect(isinstance(doc.get("agent_id"), str), "aggregation.agent_id", "agent id required with weights")
    probe = doc.get("manipulation_probe")
    if probe is not None and check.expect(isinstance(probe, dict), "aggregation.manipulation_probe", "must be an object"):
        check.expect(
            probe.get("rule") in ("borda", "plurality", "dictator"),
            "aggregation.manipulation_probe.rule",
            "rule must be borda, plurality or dictator",
        )
        check.expect(isinstance(probe.get("voters"), int), "aggregation.manipulation_probe.voters", "integer required")
        check.expect(isinstance(probe.get("options"), int), "aggregation.manipulation_probe.options", "integer required")


def _validate_loyalty(doc: Mapping[str, Any], check: _Check, world: Mapping[str, Any]) -> None:
    tables = doc.get("tables")
    if tables is not None and check.expect(isinstance(tables, dict), "loyalty.tables", "must be an object"):
        outcomes = tables.get("outcomes")
        roles = [k for k in tables if k not in ("outcomes", "aggregated_principal")]
        if roles or isinstance(tables.get("aggregated_principal"), list):
            check.expect(
                isinstance(outcomes, list) and outcomes and all(isinstance(o, str) for o in outcomes),
                "loyalty.tables.outcomes",
                "declared outcome list required",
            )
        for role in roles:
            if role not in ("principal_true", "agent_fiduciary", "agent_nonfiduciary", "system_objective"):
                check.add(f"loyalty.tables.{role}", "unknown table role")
                continue
            vals = tables[role]
            check.expect(
                isinstance(vals, list) and isinstance(outcomes, list) and len(vals) == len(outcomes),
                f"loyalty.tables.{role}",
                "one value per declared outcome required",
            )
        agg = tables.get("aggregated_principal")
        if agg is not None and not isinstance(agg, list):
            check.expect(
                agg == "from_aggregation",
                "loyalty.tables.aggregated_principal",
                "array or 'from_aggregation' required",
            )
    attestations = doc.get("attestations")
    if attestations is not None and check.expect(isinstance(attestations, list), "loyalty.attestations", "list required"):
        for i, att in enumerate(attestations):
            apath = f"loyalty.attestations[{i}]"
            if check.expect(isinstance(att, dict), apath, "must be an object"):
                check.expect(isinstance(att.get("duty"), str), f"{apath}.duty", "catalog key required")
                check.expect(isinstance(att.get("attested"), bool), f"{apath}.attested", "boolean required")


def _validate_care(doc: Mapping[str, Any], check: _Check) -> None:
    check.expect(isinstance(doc.get("standard"), str), "care.standard", "standard id required")
    declared = doc.get("declared_checks", [])
    check.expect(
        isinstance(declared, list) and all(isinstance(n, str) for n in declared),
        "care.declared_checks",
        "list of check names required",
    )
    checks = doc.get("checks", [])
    if not check.expect(isinstance(checks, list), "care.checks", "list required"):
        return
    for i, entry in enumerate(checks):
        cpath = f"care.checks[{i}]"
        if not check.expect(isinstance(entry, dict), cpath, "must be an object"):
            continue
        check.expect(isinstance(entry.get("name"), str), f"{cpath}.name", "name required")
        kind = entry.get("kind")
        if not check.expect(
            kind in ("inductive_bias", "distribution_shift", "attestation"),
            f"{cpath}.kind",
            "kind must be inductive_bias, distribution_shift or attestation",
        ):
            continue
        if kind == "inductive_bias":
            for key in ("prior", "likelihood1", "likelihood0"):
                check.expect(_is_num(entry.get(key)), f"{cpath}.{key}", "number required")
        elif kind == "distribution_shift":
            support = entry.get("support")
            ok = isinstance(support, list) and support
            check.expect(ok, f"{cpath}.support", "non-empty support list required")
            for key in ("train", "deploy"):
                vals = entry.get(key)
                check.expect(
                    isinstance(vals, list) and ok and len(vals) == len(support),
                    f"{cpath}.{key}",
                    "one probability per support point required",
                )
        else:
            check.expect(isinstance(entry.get("attested"), bool), f"{cpath}.attested", "boolean required")


def validate_scenario(raw: Mapping[str, Any]) -> list[tuple[str, str]]:
    """Every schema violation as (path, message); empty means loadable."""
    check = _Check()
    if not isinstance(raw, dict):
        return [("", "scenario document must be a JSON object")]
    version = raw.get("schema_version")
    check.expect(
        version in SUPPORTED_SCHEMA_VERSIONS,
        "schema_version",
        f"supported versions: {SUPPORTED_SCHEMA_VERSIONS}, got {version!r}",
    )
    for key in raw:
        check.expect(key in KNOWN_SECTIONS, key, "unknown top-level section")
    meta = raw.get("metadata", {})
    if check.expect(isinstance(meta, dict), "metadata", "must be an object"):
        check.expect(isinstance(meta.get("scenario_id", ""), str), "metadata.scenario_id", "string required")
        check.expect(isinstance(meta.get("seed", 0), int), "metadata.seed", "integer required")

    world = raw.get("world", {})
    if check.expect(isinstance(world, dict), "world", "must be an object"):
        if "macid" in world:
            _validate_macid_section(world["macid"], check, "world.macid")
        if "mdp" in world:
            _validate_mdp_section(world["mdp"], check, "world.mdp")

    context_doc = raw.get("context")
    if context_doc is not None and check.expect(isinstance(context_doc, dict), "context", "must be an object"):
        try:
            spec = _parse_context(context_doc)
        except SchemaError as exc:
            check.add(exc.path, str(exc))
        else:
            for violation in validate_context(spec):
                check.add(f"context.{violation.path}", violation.message)
            # bound node ids must exist in the declared influence model
            macid_doc = world.get("macid") if isinstance(world, dict) else None
            node_ids = (
                {n.get("id") for n in macid_doc.get("nodes", [])} if isinstance(macid_doc, dict) else set()
            )
            for i, norm in enumerate(spec.norms):
                if norm.principle_kind() in ("confidentiality", "disclosure"):
                    for key in norm.required_binding_keys():
                        nid = norm.binding.get(key)
                        if nid is not None and nid not in node_ids:
                            check.add(
                                f"context.norms[{i}].binding.{key}",
                                f"node {nid!r} not declared in world.macid",
                            )

    principals_doc = raw.get("principals")
    if principals_doc is not None and check.expect(isinstance(principals_doc, list), "principals", "must be a list"):
        for i, item in enumerate(principals_doc):
            ppath = f"principals[{i}]"
            if not check.expect(isinstance(item, dict), ppath, "must be an object"):
                continue
            check.expect(isinstance(item.get("class_id"), str), f"{ppath}.class_id", "string required")
            check.expect(isinstance(item.get("role"), str), f"{ppath}.role", "string required")
            check.expect(isinstance(item.get("rank"), int), f"{ppath}.rank", "integer required")
            check.expect(
                item.get("relationship") in ("best_interests", "obedience"),
                f"{ppath}.relationship",
                "relationship must be best_interests or obedience",
            )

    if raw.get("assessment") is not None:
        if check.expect(isinstance(raw["assessment"], dict), "assessment", "must be an object"):
            _validate_assessment(raw["assessment"], check, world if isinstance(world, dict) else {})
    if raw.get("aggregation") is not None:
        if check.expect(isinstance(raw["aggregation"], dict), "aggregation", "must be an object"):
            _validate_aggregation(raw["aggregation"], check)
    if raw.get("loyalty") is not None:
        if check.expect(isinstance(raw["loyalty"], dict), "loyalty", "must be an object"):
            _validate_loyalty(raw["loyalty"], check, world if isinstance(world, dict) else {})
    if raw.get("care") is not None:
        if check.expect(isinstance(raw["care"], dict), "care", "must be an object"):
            _validate_care(raw["care"], check)
    return check.problems


# --- parsing into typed objects -------------------------------------------------


def _parse_context(doc: Mapping[str, Any]) -> ContextSpec:
    try:
        roles = tuple(Role(r["id"], r.get("description", "")) for r in doc.get("roles", []))
        norms = tuple(
            Norm(
                sender=n["sender"],
                receiver=n["receiver"],
                subject=n["subject"],
                attribute=n.get("attribute", ""),
                transmission_principle=n["transmission_principle"],
                binding=dict(n.get("binding", {})),
            )
            for n in doc.get("norms", [])
        )
        return ContextSpec(
            name=doc.get("name", ""),
            purposes=tuple(doc.get("purposes", [])),
            roles=roles,
            norms=norms,
            care_standard=doc.get("care_standard", ""),
            subsidiary_duties=tuple(doc.get("subsidiary_duties", [])),
        )
    except (KeyError, TypeError) as exc:
        raise SchemaError(f"malformed context section: {exc!r}", path="context") from exc


def _parse_macid(doc: Mapping[str, Any]) -> tuple[Macid, dict[str, DecisionRule] | None]:
    kind_map = {"chance": NodeKind.CHANCE, "decision": NodeKind.DECISION, "utility": NodeKind.UTILITY}
    nodes = tuple(
        Node(
            id=n["id"],
            kind=kind_map[n["kind"]],
            owner=n.get("owner"),
            domain=tuple(n.get("domain", ())),
        )
        for n in doc["nodes"]
    )
    edges = {n.id: tuple(doc.get("edges", {}).get(n.id, ())) for n in nodes}
    domains = {n.id: n.domain for n in nodes}

    def rows_for(nid: str) -> list[tuple[str, ...]]:
        return list(itertools.product(*[domains[p] for p in edges[nid]]))

    cpds = {}
    for nid, rows in doc.get("cpds", {}).items():
        assignments = rows_for(nid)
        if len(rows) != len(assignments):
            raise SchemaError(
                f"{len(assignments)} rows required (row-major over parent domains), got {len(rows)}",
                path=f"world.macid.cpds.{nid}",
            )
        cpds[nid] = Cpd(nid, {pa: tuple(float(x) for x in row) for pa, row in zip(assignments, rows)})
    utilities = {}
    for nid, flat in doc.get("utilities", {}).items():
        assignments = rows_for(nid)
        if len(flat) != len(assignments):
            raise SchemaError(
                f"{len(assignments)} values required (row-major over parent domains), got {len(flat)}",
                path=f"world.macid.utilities.{nid}",
            )
        utilities[nid] = {pa: float(v) for pa, v in zip(assignments, flat)}
    try:
        model = Macid(
            nodes=nodes,
            edges=edges,
            cpds=cpds,
            utilities=utilities,
            agents=tuple(doc.get("agents", ())),
        )
    except FidauditError as exc:
        raise SchemaError(str(exc), path="world.macid") from exc

    profile_doc = doc.get("profile")
    profile = None
    if profile_doc is not None:
        profile = {}
        for nid, rows in profile_doc.items():
            assignments = rows_for(nid)
            if len(rows) != len(assignments):
                raise SchemaError(
                    f"{len(assignments)} rows required, got {len(rows)}",
                    path=f"world.macid.profile.{nid}",
                )
            profile[nid] = DecisionRule(
                nid, {pa: tuple(float(x) for x in row) for pa, row in zip(assignments, rows)}
            )
    return model, profile


def _parse_mdp(doc: Mapping[str, Any]) -> tuple[Mdp, DiscountSpec | None]:
    try:
        mdp = Mdp(
            states=tuple(doc["states"]),
            actions=tuple(doc["actions"]),
            transition=np.asarray(doc["transition"], dtype=float),
            reward=np.asarray(doc["reward"], dtype=float),
        )
    except (ValueError, KeyError) as exc:
        raise SchemaError(str(exc), path="world.mdp") from exc
    discount = None
    d = doc.get("discount")
    if d is not None:
        try:
            if d["kind"] == "exponential":
                discount = DiscountSpec.exponential(float(d["beta"]))
            else:
                discount = DiscountSpec.hyperbolic(float(d["k"]))
        except (FidauditError, KeyError, TypeError, ValueError) as exc:
            raise SchemaError(str(exc), path="world.mdp.discount") from exc
    return mdp, discount


def parse_scenario(raw: Mapping[str, Any]) -> Scenario:
    """Typed scenario from a validated document; raises SchemaError."""
    problems = validate_scenario(raw)
    if problems:
        path, message = problems[0]
        more = f" (+{len(problems) - 1} more)" if len(problems) > 1 else ""
        raise SchemaError(f"{message}{more}", path=path)

    meta_doc = raw.get("metadata", {})
    meta = ScenarioMeta(
        scenario_id=str(meta_doc.get("scenario_id", "unnamed")),
        version=str(meta_doc.get("version", "0")),
        seed=int(meta_doc.get("seed", 0)),
    )
    world_doc = raw.get("world", {})
    macid_model = profile = mdp = discount = None
    if "macid" in world_doc:
        macid_model, profile = _parse_macid(world_doc["macid"])
    if "mdp" in world_doc:
        mdp, discount = _parse_mdp(world_doc["mdp"])

    context = _parse_context(raw["context"]) if raw.get("context") is not None else None
    principals = None
    if raw.get("principals") is not None:
        principals = tuple(
            PrincipalClassSpec(
                class_id=p["class_id"],
                role=p["role"],
                rank=p["rank"],
                relationship=p["relationship"],
            )
            for p in raw["principals"]
        )
    return Scenario(
        meta=meta,
        digest=canonical_digest(raw),
        context=context,
        principals=principals,
        world=World(macid=macid_model, profile=profile, mdp=mdp, discount=discount),
        assessment=raw.get("assessment"),
        aggregation=raw.get("aggregation"),
        loyalty=raw.get("loyalty"),
        care=raw.get("care"),
        raw=raw,
    )


def load_scenario(path: str | Path) -> Scenario:
    text = Path(path).read_text("utf-8")
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"not valid JSON: {exc}", path=str(path)) from exc
    return parse_scenario(raw)
