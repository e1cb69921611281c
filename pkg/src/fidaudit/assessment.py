"""Assessment of principal interests from behavior, judgments and standards.

Four routes to a proxy objective, each a pure batch computation over fixed
inputs (nothing here trains on-line):

* ``feasible_rewards_irl`` characterizes every reward consistent with an
  observed policy (the optimality inequalities), making the degeneracy of
  behavior-based inference explicit: the zero reward is always a member.
* ``maxent_irl`` fits a linear reward by gradient ascent on the demo
  log-likelihood under a soft-optimal policy; the gradient is computed
  exactly (feature counts along demos minus expected counts under the
  fitted policy), so it can be validated against finite differences.
* ``fit_preference_reward`` fits a linear reward to pairwise trajectory
  judgments under a logistic choice model.
* ``prudent_investor_weights`` is the legal-standard template: the
  unconstrained mean-variance optimum.

``infer_discount`` and ``patient_recommendation`` treat the discount rate
itself as the quantity of interest: a posterior over a candidate grid, and
re-solved advice at a higher patience than the fitted one.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping, Sequence

import numpy as np

from .errors import (
    DegenerateData,
    DivergenceDetected,
    EmptyGrid,
    InfeasibleNumerics,
    InvalidDiscount,
    InvalidPrior,
    SingularCovariance,
)
from .mdp import Mdp, Policy, value_iteration

RIDGE_EPSILON = 1e-8


@dataclass(frozen=True)
class Trajectory:
    """An ordered sequence of (state, action) pairs."""

    steps: tuple[tuple[str, str], ...]

    def __post_init__(self) -> None:
        if not self.steps:
            raise ValueError("trajectory must be non-empty")

    def validate_against(self, mdp: Mdp) -> None:
        for s, a in self.steps:
            if s not in mdp.states or a not in mdp.actions:
                raise ValueError(f"trajectory step ({s!r}, {a!r}) not in the MDP")


@dataclass(frozen=True, eq=False)
class FeatureMap:
    """Fixed-dimension feature vectors phi(s, a)."""

    dim: int
    table: Mapping[tuple[str, str], np.ndarray]

    def __post_init__(self) -> None:
        for key, vec in self.table.items():
            arr = np.asarray(vec, dtype=float)
            if arr.shape != (self.dim,):
                raise ValueError(f"feature for {key} has shape {arr.shape}, expected ({self.dim},)")
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"feature for {key} has non-finite entries")

    def vector(self, state: str, action: str) -> np.ndarray:
        return np.asarray(self.table[(state, action)], dtype=float)

    def counts(self, trajectory: Trajectory) -> np.ndarray:
        total = np.zeros(self.dim)
        for s, a in trajectory.steps:
            total += self.vector(s, a)
        return total

    def dense(self, mdp: Mdp) -> np.ndarray:
        """Feature tensor (S, A, d) aligned with the MDP's orderings."""
        out = np.zeros((len(mdp.states), len(mdp.actions), self.dim))
        for i, s in enumerate(mdp.states):
            for j, a in enumerate(mdp.actions):
                out[i, j] = self.vector(s, a)
        return out

    @staticmethod
    def one_hot_states(mdp: Mdp) -> "FeatureMap":
        table = {}
        for i, s in enumerate(mdp.states):
            vec = np.zeros(len(mdp.states))
            vec[i] = 1.0
            for a in mdp.actions:
                table[(s, a)] = vec
        return FeatureMap(len(mdp.states), table)


class AssessmentMethod(Enum):
    MAXENT_IRL = "maxent_irl"
    FEASIBLE_SET_IRL = "feasible_set_irl"
    PREFERENCE_FIT = "preference_fit"
    LEGAL_STANDARD = "legal_standard"


@dataclass(frozen=True, eq=False)
class RewardEstimate:
    """A fitted proxy for principal interests plus provenance.

    Either ``weights`` (a linear parameter vector) or ``table`` (a dense
    r(s, a) matrix) or both are present depending on the method. The
    optional ``discount_posterior`` sums to 1.
    """

    method: AssessmentMethod
    weights: np.ndarray | None = None
    table: np.ndarray | None = None
    discount_posterior: Mapping[float, float] | None = None
    diagnostics: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.discount_posterior is not None:
            total = sum(self.discount_posterior.values())
            if abs(total - 1.0) > 1e-9:
                raise InvalidPrior(f"discount posterior sums to {total}")


@dataclass(frozen=True)
class PairwiseComparison:
    """A judgment that one trajectory is preferred over another."""

    left: Trajectory
    right: Trajectory
    preferred: str  # "left" | "right"

    def __post_init__(self) -> None:
        if self.preferred not in ("left", "right"):
            raise ValueError("preferred must be 'left' or 'right'")
        if self.left == self.right:
            raise ValueError("comparison sides must differ")


# --- feasible reward set (degeneracy made explicit) -----------------------


@dataclass(frozen=True, eq=False)
class FeasibleRewardSet:
    """Linear description of all rewards for which the policy is optimal.

    ``constraint_matrix`` has one row per (state, non-chosen action); a
    flattened reward table r (row-major over states then actions) is in
    the optimality cone iff constraint_matrix @ r >= 0. Magnitudes are
    capped entrywise by ``bound``. The zero reward always satisfies the
    cone, which is the degeneracy witness: observed behavior alone cannot
    pin the reward down.
    """

    mdp: Mdp
    policy: dict[str, str]
    beta: float
    bound: float
    constraint_matrix: np.ndarray
    zero_reward_feasible: bool

    def contains(self, reward: np.ndarray, tol: float = 1e-9) -> bool:
        r = np.asarray(reward, dtype=float).reshape(-1)
        if np.any(np.abs(r) > self.bound + tol):
            return False
        return bool(np.all(self.constraint_matrix @ r >= -tol))

    def sample(self, rng: np.random.Generator) -> np.ndarray:
        """A feasible reward with the policy strictly greedy.

        Construction: draw target values V and strictly positive
        disadvantages for non-chosen actions, then read the reward off the
        optimality equations; rescale into the bound (the cone is
        homogeneous, so scaling preserves feasibility).
        """
        n_s, n_a = len(self.mdp.states), len(self.mdp.actions)
        v = rng.uniform(-1.0, 1.0, size=n_s)
        q = np.empty((n_s, n_a))
        for i, s in enumerate(self.mdp.states):
            chosen = self.mdp.action_index(self.policy[s])
            for j in range(n_a):
                gap = 0.0 if j == chosen else float(rng.uniform(0.1, 1.0))
                q[i, j] = v[i] - gap
        reward = q - self.beta * (self.mdp.transition @ v)
        peak = float(np.max(np.abs(reward)))
        if peak > self.bound:
            reward *= self.bound / peak
        return reward

    def vertices(self, max_dim: int = 8) -> list[np.ndarray]:
        """Vertices of the cone-box intersection, for small instances only.

        Enumerates all choices of dim active constraints; quadratic-or-worse
        in the constraint count, so guarded by ``max_dim``.
        """
        dim = self.constraint_matrix.shape[1]
        if dim > max_dim:
            raise InfeasibleNumerics(
                f"vertex enumeration limited to dimension {max_dim}, got {dim}"
            )
        rows = [(row, 0.0) for row in self.constraint_matrix]
        eye = np.eye(dim)
        for i in range(dim):
            rows.append((eye[i], -self.bound))  # r_i <= bound  ->  -r_i >= -bound
            rows.append((-eye[i], -self.bound))  # r_i >= -bound
        a_all = np.array([r for r, _ in rows])
        b_all = np.array([b for _, b in rows])
        found: list[np.ndarray] = []
        for combo in itertools.combinations(range(len(rows)), dim):
            a_sub = a_all[list(combo)]
            b_sub = b_all[list(combo)]
            if abs(np.linalg.det(a_sub)) < 1e-12:
                continue
            point = np.linalg.solve(a_sub, b_sub)
            if np.all(a_all @ point >= b_all - 1e-9):
                if not any(np.allclose(point, seen, atol=1e-9) for seen in found):
                    found.append(point)
        return found


def feasible_rewards_irl(
    mdp: Mdp, policy: Policy, beta: float, bound: float
) -> FeasibleRewardSet:
    """Optimality inequalities Q_pi(s, pi(s)) >= Q_pi(s, a) as linear rows.

    The reward table of ``mdp`` is ignored; only the dynamics matter.
    Each constraint row is the reward-space functional of the Q gap, using
    V_pi = (I - beta P_pi)^{-1} r_pi.
    """
    if not 0.0 < beta < 1.0:
        raise InvalidDiscount(f"beta must lie in (0, 1), got {beta}")
    if bound <= 0:
        raise ValueError("bound must be positive")
    n_s, n_a = len(mdp.states), len(mdp.actions)
    chosen = np.array([mdp.action_index(policy[s]) for s in mdp.states])
    p_pi = mdp.transition[np.arange(n_s), chosen]
    try:
        propagate = np.linalg.inv(np.eye(n_s) - beta * p_pi)
    except np.linalg.LinAlgError as exc:
        raise InfeasibleNumerics(f"could not assemble constraints: {exc}") from exc
    selector = np.zeros((n_s, n_s * n_a))
    for i in range(n_s):
        selector[i, i * n_a + chosen[i]] = 1.0
    value_of_reward = propagate @ selector  # V_pi = value_of_reward @ r_flat

    rows = []
    for i in range(n_s):
        for j in range(n_a):
            if j == chosen[i]:
                continue
            row = np.zeros(n_s * n_a)
            row[i * n_a + chosen[i]] += 1.0
            row[i * n_a + j] -= 1.0
            row += beta * (mdp.transition[i, chosen[i]] - mdp.transition[i, j]) @ value_of_reward
            rows.append(row)
    matrix = np.array(rows) if rows else np.zeros((0, n_s * n_a))
    zero_ok = bool(np.all(matrix @ np.zeros(n_s * n_a) >= -1e-12))
    return FeasibleRewardSet(
        mdp=mdp,
        policy={s: policy[s] for s in mdp.states},
        beta=beta,
        bound=bound,
        constraint_matrix=matrix,
        zero_reward_feasible=zero_ok,
    )


# --- maximum-entropy IRL -----------------------------------------------------


def _soft_backup(
    mdp: Mdp, features: np.ndarray, theta: np.ndarray, beta: float, horizon: int
):
    """Time-indexed soft values, policies, and value gradients.

    Returns (policies, grad_q, grad_v) where policies[t] is (S, A),
    grad_q[t] is (S, A, d) and grad_v[t] is (S, d); grad_v[t] is exactly
    the expected discounted feature count from (t, s) under the soft
    policy, which is what makes the likelihood gradient exact.
    """
    n_s, n_a = len(mdp.states), len(mdp.actions)
    dim = theta.shape[0]
    reward = features @ theta  # (S, A)
    v = np.zeros(n_s)
    grad_v = np.zeros((n_s, dim))
    policies = [None] * horizon
    grad_qs = [None] * horizon
    grad_vs = [None] * horizon
    for t in range(horizon - 1, -1, -1):
        q = reward + beta * (mdp.transition @ v)  # (S, A)
        peak = q.max(axis=1, keepdims=True)
        exp_q = np.exp(q - peak)
        norm = exp_q.sum(axis=1, keepdims=True)
        policy = exp_q / norm
        v = (peak + np.log(norm)).ravel()
        grad_q = features + beta * np.einsum("ijk,kd->ijd", mdp.transition, grad_v)
        grad_v = np.einsum("ij,ijd->id", policy, grad_q)
        policies[t] = policy
        grad_qs[t] = grad_q
        grad_vs[t] = grad_v
    return policies, grad_qs, grad_vs


def demo_log_likelihood(
    mdp: Mdp,
    features: FeatureMap,
    demos: Sequence[Trajectory],
    theta: np.ndarray,
    beta: float,
) -> tuple[float, np.ndarray]:
    """Log-likelihood of the demos under the soft policy, with exact gradient."""
    horizon = max(len(d.steps) for d in demos)
    dense = features.dense(mdp)
    policies, grad_qs, grad_vs = _soft_backup(mdp, dense, np.asarray(theta, float), beta, horizon)
    total = 0.0
    grad = np.zeros(features.dim)
    for demo in demos:
        for t, (s, a) in enumerate(demo.steps):
            i, j = mdp.state_index(s), mdp.action_index(a)
            total += math.log(policies[t][i, j])
            grad += grad_qs[t][i, j] - grad_vs[t][i]
    return total, grad


def maxent_irl(
    mdp: Mdp,
    features: FeatureMap,
    demos: Sequence[Trajectory],
    beta: float,
    learn_rate: float,
    iters: int,
) -> RewardEstimate:
    """Fit linear reward weights to demonstrations.

    Plain gradient ascent from theta = 0 with a fixed step, deterministic
    by construction. The reward table of ``mdp`` is ignored. Raises
    DivergenceDetected when the gradient norm grows tenfold over its
    initial value (a sign the step size is too large for the instance).
    """
    if not demos:
        raise ValueError("demos must be non-empty")
    if not 0.0 < beta < 1.0:
        raise InvalidDiscount(f"beta must lie in (0, 1), got {beta}")
    for demo in demos:
        demo.validate_against(mdp)
    theta = np.zeros(features.dim)
    _, grad = demo_log_likelihood(mdp, features, demos, theta, beta)
    initial_norm = float(np.linalg.norm(grad))
    grad_norm = initial_norm
    for _ in range(iters):
        if grad_norm == 0.0:
            break
        theta = theta + learn_rate * grad
        _, grad = demo_log_likelihood(mdp, features, demos, theta, beta)
        grad_norm = float(np.linalg.norm(grad))
        if initial_norm > 0 and grad_norm > 10.0 * initial_norm:
            raise DivergenceDetected(
                f"gradient norm {grad_norm:.3g} exceeds 10x initial {initial_norm:.3g}"
            )
    log_likelihood, _ = demo_log_likelihood(mdp, features, demos, theta, beta)
    table = features.dense(mdp) @ theta
    return RewardEstimate(
        method=AssessmentMethod.MAXENT_IRL,
        weights=theta,
        table=table,
        diagnostics={"grad_norm": grad_norm, "log_likelihood": log_likelihood},
    )


# --- preference judgments -----------------------------------------------------


def fit_preference_reward(
    features: FeatureMap,
    comparisons: Sequence[PairwiseComparison],
    learn_rate: float,
    iters: int,
) -> RewardEstimate:
    """Logistic pairwise-choice fit of linear reward weights.

    P(left preferred) is the logistic of the return difference, where a
    trajectory's return is the feature count dotted with theta. Data in
    which every pair is feature-identical carries no gradient and is
    surfaced as DegenerateData rather than silently returning theta = 0.
    """
    if not comparisons:
        raise ValueError("need at least one comparison")
    diffs = []
    for comp in comparisons:
        winner, loser = (
            (comp.left, comp.right) if comp.preferred == "left" else (comp.right, comp.left)
        )
        diffs.append(features.counts(winner) - features.counts(loser))
    diff_matrix = np.array(diffs)
    if float(np.max(np.abs(diff_matrix))) < 1e-12:
        raise DegenerateData("every comparison is feature-identical; gradient is zero")

    theta = np.zeros(features.dim)
    for _ in range(iters):
        margins = diff_matrix @ theta
        slack = _sigmoid(-margins)  # d/dtheta of sum log sigmoid(margins)
        grad = diff_matrix.T @ slack
        theta = theta + learn_rate * grad
    margins = diff_matrix @ theta
    log_likelihood = float(np.sum(_log_sigmoid(margins)))
    return RewardEstimate(
        method=AssessmentMethod.PREFERENCE_FIT,
        weights=theta,
        diagnostics={"log_likelihood": log_likelihood},
    )


def _sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x, dtype=float)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def _log_sigmoid(x: np.ndarray) -> np.ndarray:
    return np.where(x >= 0, -np.log1p(np.exp(-np.abs(x))), x - np.log1p(np.exp(-np.abs(x))))


def trajectory_return(features: FeatureMap, theta: np.ndarray, trajectory: Trajectory) -> float:
    return float(features.counts(trajectory) @ np.asarray(theta, float))


# --- discount inference ---------------------------------------------------------


def infer_discount(
    mdp: Mdp,
    behavior: Policy,
    beta_grid: Sequence[float],
    prior: Sequence[float],
    temperature: float = 0.01,
) -> dict[float, float]:
    """Posterior over candidate discount factors given observed behavior.

    Likelihood of the behavior at each grid point is the product over
    states of a softmax choice model over the optimal Q values at that
    discount (temperature ``temperature``). Log-domain normalization keeps
    the small-temperature regime stable. The returned mapping sums to 1
    and does not depend on the order the grid was supplied in.
    """
    grid = [float(b) for b in beta_grid]
    if not grid:
        raise EmptyGrid("beta grid is empty")
    if len(set(grid)) != len(grid):
        raise EmptyGrid("beta grid has duplicate entries")
    for b in grid:
        if not 0.0 < b < 1.0:
            raise InvalidDiscount(f"grid point {b} outside (0, 1)")
    weights = [float(p) for p in prior]
    if len(weights) != len(grid):
        raise InvalidPrior(f"prior length {len(weights)} != grid length {len(grid)}")
    if any(w < 0 for w in weights):
        raise InvalidPrior("prior has negative mass")
    if abs(sum(weights) - 1.0) > 1e-9:
        raise InvalidPrior(f"prior sums to {sum(weights)}")
    if temperature <= 0:
        raise ValueError("temperature must be positive")

    log_posts = []
    for b, w in zip(grid, weights):
        solution = value_iteration(mdp, b)
        loglik = 0.0
        for s in mdp.states:
            scaled = np.array([solution.q[(s, a)] for a in mdp.actions]) / temperature
            peak = scaled.max()
            loglik += scaled[mdp.action_index(behavior[s])] - (
                peak + math.log(np.sum(np.exp(scaled - peak)))
            )
        log_posts.append((b, (math.log(w) if w > 0 else -math.inf) + loglik))
    peak = max(lp for _, lp in log_posts)
    raw = {b: math.exp(lp - peak) for b, lp in log_posts}
    total = sum(raw.values())
    return {b: raw[b] / total for b in sorted(raw)}


@dataclass(frozen=True)
class PatienceAdvice:
    """Greedy policy at the advice discount, with its myopic divergences."""

    policy: dict[str, str]
    fitted_policy: dict[str, str]
    divergent_states: tuple[str, ...]


def patient_recommendation(
    mdp: Mdp, reward: RewardEstimate, beta_fit: float, beta_advice: float
) -> PatienceAdvice:
    """Re-solve under a higher patience and report where advice changes.

    ``reward`` must carry a dense table (e.g. from maxent_irl). Divergent
    states are those where the advised greedy action differs from the
    greedy action at the fitted discount; identical tie-breaking on both
    solves means a zero reward yields no divergence.
    """
    if not 0.0 < beta_fit < 1.0 or not 0.0 < beta_advice < 1.0:
        raise InvalidDiscount("both discounts must lie in (0, 1)")
    if beta_advice < beta_fit:
        raise InvalidDiscount("beta_advice must be at least beta_fit")
    if reward.table is None:
        raise ValueError("reward estimate carries no dense table")
    shaped = mdp.with_reward(np.asarray(reward.table, float))
    fitted = value_iteration(shaped, beta_fit).policy
    advised = value_iteration(shaped, beta_advice).policy
    divergent = tuple(s for s in shaped.states if fitted[s] != advised[s])
    return PatienceAdvice(policy=advised, fitted_policy=fitted, divergent_states=divergent)


# --- legal standard: mean-variance template ----------------------------------


@dataclass(frozen=True, eq=False)
class PortfolioProblem:
    """Inputs for the unconstrained mean-variance objective."""

    mu: np.ndarray
    sigma: np.ndarray
    risk_aversion: float

    def __post_init__(self) -> None:
        mu = np.asarray(self.mu, dtype=float)
        sigma = np.asarray(self.sigma, dtype=float)
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "sigma", sigma)
        n = mu.shape[0]
        if sigma.shape != (n, n):
            raise ValueError(f"sigma shape {sigma.shape}, expected {(n, n)}")
        if not np.allclose(sigma, sigma.T, atol=1e-9, rtol=0.0):
            raise ValueError("sigma must be symmetric")
        if float(np.linalg.eigvalsh(sigma).min()) < -1e-9:
            raise ValueError("sigma must be positive semi-definite")
        if self.risk_aversion <= 0:
            raise ValueError("risk_aversion must be positive")

    def objective(self, w: np.ndarray) -> float:
        w = np.asarray(w, dtype=float)
        return float(self.mu @ w - self.risk_aversion * w @ self.sigma @ w)


def prudent_investor_weights(problem: PortfolioProblem) -> np.ndarray:
    """Closed-form maximizer of mu'w - lambda w'Sigma w: Sigma^-1 mu / (2 lambda).

    Near-singular covariances get a documented ridge (RIDGE_EPSILON on the
    diagonal) before the solve; no normalization or short-selling
    constraints are applied.
    """
    sigma = problem.sigma
    if float(np.linalg.eigvalsh(sigma).min()) <= 1e-9:
        sigma = sigma + RIDGE_EPSILON * np.eye(sigma.shape[0])
    try:
        return np.linalg.solve(sigma, problem.mu) / (2.0 * problem.risk_aversion)
    except np.linalg.LinAlgError as exc:
        raise SingularCovariance(f"covariance not invertible after ridge: {exc}") from exc
