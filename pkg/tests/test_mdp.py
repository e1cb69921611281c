import itertools

import numpy as np
import pytest

from fidaudit.errors import InvalidDelays, InvalidDiscount
from fidaudit.mdp import (
    DiscountSpec,
    Mdp,
    RewardOption,
    default_max_iters,
    detect_preference_reversal,
    discount_weight,
    evaluate_policy,
    value_iteration,
)


def single_state_mdp(rewards):
    n_actions = len(rewards)
    transition = np.ones((1, n_actions, 1))
    return Mdp(("s",), tuple(f"a{i}" for i in range(n_actions)), transition, np.array([rewards]))


def chain_mdp():
    # s0 -> s1 -> s1 deterministically under either action
    transition = np.zeros((2, 1, 2))
    transition[0, 0, 1] = 1.0
    transition[1, 0, 1] = 1.0
    reward = np.array([[0.0], [1.0]])
    return Mdp(("s0", "s1"), ("go",), transition, reward)


def random_mdp(rng, n_states, n_actions):
    transition = rng.uniform(0.01, 1.0, size=(n_states, n_actions, n_states))
    transition /= transition.sum(axis=2, keepdims=True)
    reward = rng.uniform(-1.0, 1.0, size=(n_states, n_actions))
    return Mdp(
        tuple(f"s{i}" for i in range(n_states)),
        tuple(f"a{j}" for j in range(n_actions)),
        transition,
        reward,
    )


# --- value_iteration -------------------------------------------------------


def test_geometric_series_value():
    result = value_iteration(single_state_mdp([1.0]), beta=0.5)
    assert result.values["s"] == pytest.approx(2.0, abs=1e-8)
    assert result.converged


def test_dominant_action_and_tie_break():
    result = value_iteration(single_state_mdp([0.0, 1.0]), beta=0.5)
    assert result.values["s"] == pytest.approx(2.0, abs=1e-8)
    assert result.policy["s"] == "a1"
    tie = value_iteration(single_state_mdp([1.0, 1.0]), beta=0.5)
    assert tie.policy["s"] == "a0"  # lowest action index on ties


def test_two_state_chain_matches_linear_solve():
    # exact solution of the 2x2 system: V(s1) = 10, V(s0) = 9
    result = value_iteration(chain_mdp(), beta=0.9, tol=1e-10)
    assert result.values["s1"] == pytest.approx(10.0, abs=1e-8)
    assert result.values["s0"] == pytest.approx(9.0, abs=1e-8)


def test_invalid_discount_rejected():
    with pytest.raises(InvalidDiscount):
        value_iteration(chain_mdp(), beta=1.0)
    with pytest.raises(InvalidDiscount):
        value_iteration(chain_mdp(), beta=0.0)


def test_max_iters_exhaustion_returns_partial():
    result = value_iteration(chain_mdp(), beta=0.9, tol=1e-12, max_iters=3)
    assert not result.converged
    assert result.iterations == 3


def test_contraction_bound_on_random_mdps(rng):
    for _ in range(10):
        mdp = random_mdp(rng, 4, 3)
        beta = float(rng.uniform(0.3, 0.95))
        result = value_iteration(mdp, beta)
        gaps = result.gap_history
        for previous, current in zip(gaps, gaps[1:]):
            assert current <= beta * previous + 1e-12


def test_value_q_consistency(rng):
    mdp = random_mdp(rng, 5, 3)
    result = value_iteration(mdp, beta=0.9)
    for s in mdp.states:
        assert result.values[s] == pytest.approx(
            max(result.q[(s, a)] for a in mdp.actions), abs=1e-9
        )


# --- evaluate_policy ----------------------------------------------------------


def test_constant_reward_any_policy():
    mdp = single_state_mdp([1.0, 1.0])
    for action in mdp.actions:
        result = evaluate_policy(mdp, {"s": action}, beta=0.5)
        assert result.values["s"] == pytest.approx(2.0)


def test_policy_evaluation_matches_value_iteration():
    mdp = chain_mdp()
    vi = value_iteration(mdp, beta=0.9, tol=1e-10)
    pe = evaluate_policy(mdp, vi.policy, beta=0.9)
    for s in mdp.states:
        assert pe.values[s] == pytest.approx(vi.values[s], abs=1e-6)


def test_policy_choosing_zero_reward_action():
    mdp = single_state_mdp([0.0, 1.0])
    result = evaluate_policy(mdp, {"s": "a0"}, beta=0.5)
    assert result.values["s"] == pytest.approx(0.0)


def test_greedy_beats_all_deterministic_policies(rng):
    # optimality oracle on a small instance
    mdp = random_mdp(rng, 4, 2)
    beta = 0.9
    greedy_value = evaluate_policy(mdp, value_iteration(mdp, beta).policy, beta)
    for assignment in itertools.product(mdp.actions, repeat=len(mdp.states)):
        policy = dict(zip(mdp.states, assignment))
        other = evaluate_policy(mdp, policy, beta)
        for s in mdp.states:
            assert greedy_value.values[s] >= other.values[s] - 1e-6


# --- discount weights -----------------------------------------------------------


def test_discount_weights_basics():
    assert discount_weight(DiscountSpec.exponential(0.5), 0) == pytest.approx(1.0)
    assert discount_weight(DiscountSpec.hyperbolic(1.0), 1) == pytest.approx(0.5)
    assert discount_weight(DiscountSpec.exponential(0.9), 2) == pytest.approx(0.81)


def test_discount_weights_monotone():
    for spec in (DiscountSpec.exponential(0.7), DiscountSpec.hyperbolic(0.3)):
        weights = [discount_weight(spec, t) for t in range(12)]
        assert weights[0] == pytest.approx(1.0)
        assert all(b < a for a, b in zip(weights, weights[1:]))


def test_discount_spec_validation():
    with pytest.raises(InvalidDiscount):
        DiscountSpec.exponential(1.0)
    with pytest.raises(InvalidDiscount):
        DiscountSpec.hyperbolic(0.0)
    with pytest.raises(InvalidDiscount):
        DiscountSpec("weird")


def test_default_max_iters_capped():
    assert default_max_iters(0.999999, 1e-12) == 100_000
    assert default_max_iters(0.5, 1e-6) >= 10


# --- preference reversal -----------------------------------------------------------


def test_exponential_never_reverses():
    spec = DiscountSpec.exponential(0.9)
    report = detect_preference_reversal(spec, RewardOption(8.0, 1), RewardOption(10.0, 2), horizon=10)
    assert not report.reversed


def test_hyperbolic_reversal_instance():
    # epoch-0 prefers late (10/11 > 8/10); near the dates the early option wins
    spec = DiscountSpec.hyperbolic(1.0)
    early, late = RewardOption(8.0, 9), RewardOption(10.0, 10)
    report = detect_preference_reversal(spec, early, late, horizon=10)
    assert report.initial_preference == "late"
    assert report.reversed
    # brute-force oracle over epochs; ties prefer the earlier option, and the
    # values tie exactly at epoch 6 (8/4 == 10/5)
    flips = [
        e
        for e in range(0, early.delay + 1)
        if (8.0 / (1 + (9 - e))) >= (10.0 / (1 + (10 - e)))
    ]
    assert report.reversal_epoch == flips[0] == 6


def test_identical_options_never_reverse():
    spec = DiscountSpec.hyperbolic(2.0)
    report = detect_preference_reversal(spec, RewardOption(5.0, 3), RewardOption(5.0, 4), horizon=8)
    # not literally identical (delays must differ); same reward, tie prefers early
    assert report.initial_preference in ("early", "late")
    spec_exp = DiscountSpec.exponential(0.5)
    assert not detect_preference_reversal(
        spec_exp, RewardOption(5.0, 3), RewardOption(5.0, 4), horizon=8
    ).reversed


def test_invalid_delays():
    spec = DiscountSpec.exponential(0.9)
    with pytest.raises(InvalidDelays):
        detect_preference_reversal(spec, RewardOption(1.0, 3), RewardOption(1.0, 3), horizon=5)
    with pytest.raises(InvalidDelays):
        detect_preference_reversal(spec, RewardOption(1.0, -1), RewardOption(1.0, 3), horizon=5)


def test_exponential_sweep_no_reversals():
    # property sweep over a beta grid and delay pairs
    rewards = [1.0, 2.0, 4.0, 8.0, 16.0]
    for beta10 in range(1, 10):
        spec = DiscountSpec.exponential(beta10 / 10.0)
        for d_early in range(0, 4):
            for d_late in range(d_early + 1, 6):
                for r_early in rewards:
                    for r_late in rewards:
                        report = detect_preference_reversal(
                            spec,
                            RewardOption(r_early, d_early),
                            RewardOption(r_late, d_late),
                            horizon=10,
                        )
                        assert not report.reversed


# --- Mdp validation ------------------------------------------------------------


def test_mdp_rejects_bad_rows():
    transition = np.ones((1, 1, 1)) * 0.5
    with pytest.raises(ValueError):
        Mdp(("s",), ("a",), transition, np.zeros((1, 1)))


def test_mdp_rejects_nonfinite_reward():
    transition = np.ones((1, 1, 1))
    with pytest.raises(ValueError):
        Mdp(("s",), ("a",), transition, np.array([[np.inf]]))
