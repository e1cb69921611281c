"""Model builders shared across test modules."""

from __future__ import annotations

from fidaudit.macid import Cpd, DecisionRule, Macid, Node, NodeKind


def match_table(domain=("0", "1")):
    """Utility table over (X, Y) parents: 1.0 when values match."""
    return {(x, y): (1.0 if x == y else 0.0) for x in domain for y in domain}


def mismatch_table(domain=("0", "1")):
    return {(x, y): (0.0 if x == y else 1.0) for x in domain for y in domain}


def coin_model():
    """Single uniform chance node, no decisions."""
    return Macid(
        nodes=(Node("coin", NodeKind.CHANCE, domain=("H", "T")),),
        edges={"coin": ()},
        cpds={"coin": Cpd("coin", {(): (0.5, 0.5)})},
        utilities={},
        agents=(),
    )


def copy_chain_model():
    """C uniform, chance R deterministically copies C."""
    return Macid(
        nodes=(
            Node("C", NodeKind.CHANCE, domain=("0", "1")),
            Node("R", NodeKind.CHANCE, domain=("0", "1")),
        ),
        edges={"C": (), "R": ("C",)},
        cpds={
            "C": Cpd("C", {(): (0.5, 0.5)}),
            "R": Cpd("R", {("0",): (1.0, 0.0), ("1",): (0.0, 1.0)}),
        },
        utilities={},
        agents=(),
    )


def guess_model():
    """One decision guessing a hidden uniform bit; payoff 1 on a match."""
    return Macid(
        nodes=(
            Node("C", NodeKind.CHANCE, domain=("0", "1")),
            Node("B", NodeKind.DECISION, owner="bob", domain=("0", "1")),
            Node("U", NodeKind.UTILITY, owner="bob"),
        ),
        edges={"C": (), "B": (), "U": ("C", "B")},
        cpds={"C": Cpd("C", {(): (0.5, 0.5)})},
        utilities={"U": match_table()},
        agents=("bob",),
    )


def disclosure_model(aligned=True):
    """Adviser observes C, reports R_a; principal acts on the report.

    With ``aligned`` the adviser's payoff equals the principal's
    (order-preserving alignment of the utility tables); otherwise the
    adviser is paid a constant and has no incentive to communicate.
    """
    u_a = match_table() if aligned else {k: 1.0 for k in match_table()}
    return Macid(
        nodes=(
            Node("C", NodeKind.CHANCE, domain=("0", "1")),
            Node("R_a", NodeKind.DECISION, owner="alice", domain=("0", "1")),
            Node("B_b", NodeKind.DECISION, owner="bob", domain=("0", "1")),
            Node("U_a", NodeKind.UTILITY, owner="alice"),
            Node("U_b", NodeKind.UTILITY, owner="bob"),
        ),
        edges={
            "C": (),
            "R_a": ("C",),
            "B_b": ("R_a",),
            "U_a": ("C", "B_b"),
            "U_b": ("C", "B_b"),
        },
        cpds={"C": Cpd("C", {(): (0.5, 0.5)})},
        utilities={"U_a": u_a, "U_b": match_table()},
        agents=("alice", "bob"),
    )


def disclosure_profile(model, copying=True):
    """Copying report plus report-following principal; or a muted report."""
    if copying:
        r = DecisionRule.deterministic(model, "R_a", {("0",): "0", ("1",): "1"})
    else:
        r = DecisionRule.constant(model, "R_a", "0")
    b = DecisionRule.deterministic(model, "B_b", {("0",): "0", ("1",): "1"})
    return {"R_a": r, "B_b": b}


def matching_pennies_model():
    """Two simultaneous binary decisions with strictly opposed payoffs."""
    return Macid(
        nodes=(
            Node("A", NodeKind.DECISION, owner="a", domain=("0", "1")),
            Node("B", NodeKind.DECISION, owner="b", domain=("0", "1")),
            Node("U_a", NodeKind.UTILITY, owner="a"),
            Node("U_b", NodeKind.UTILITY, owner="b"),
        ),
        edges={"A": (), "B": (), "U_a": ("A", "B"), "U_b": ("A", "B")},
        cpds={},
        utilities={"U_a": match_table(), "U_b": mismatch_table()},
        agents=("a", "b"),
    )


def xor_model():
    """Chance S, C independent uniform bits; chance R = S xor C."""
    xor_rows = {
        ("0", "0"): (1.0, 0.0),
        ("0", "1"): (0.0, 1.0),
        ("1", "0"): (0.0, 1.0),
        ("1", "1"): (1.0, 0.0),
    }
    return Macid(
        nodes=(
            Node("C", NodeKind.CHANCE, domain=("0", "1")),
            Node("R", NodeKind.CHANCE, domain=("0", "1")),
            Node("S", NodeKind.CHANCE, domain=("0", "1")),
        ),
        edges={"S": (), "C": (), "R": ("S", "C")},
        cpds={
            "S": Cpd("S", {(): (0.5, 0.5)}),
            "C": Cpd("C", {(): (0.5, 0.5)}),
            "R": Cpd("R", xor_rows),
        },
        utilities={},
        agents=(),
    )
