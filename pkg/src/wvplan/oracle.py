"""Exact full-state-space solver and policy evaluator.

Policy iteration with sparse direct solves for the fixed-policy linear
systems; this stays practical at discounts like 0.99999 where plain value
iteration would need millions of sweeps.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .model import ProblemInstance
from .rules import apply_effect, transition_outcomes
from .space import SpaceError

DEFAULT_ENUMERATION_CAP = 10 ** 6


@dataclass(frozen=True)
class ExactSolution:
    policy: np.ndarray  # action index per state index
    value: np.ndarray
    residual: float


@dataclass(frozen=True)
class ExactEvaluation:
    value: np.ndarray
    residual: float


def _check_cap(problem: ProblemInstance, cap: int) -> int:
    n = problem.space.size()
    if n > cap:
        raise SpaceError(
            f"state space has {n} states, above the enumeration cap of {cap}"
        )
    return n


def build_transition_matrices(problem: ProblemInstance,
                              cap: int = DEFAULT_ENUMERATION_CAP):
    """One CSR matrix per action plus the reward vector, by mixed-radix
    enumeration with lazy tree traversal per state."""
    space = problem.space
    model = problem.model
    n = _check_cap(problem, cap)
    from .rules import reward_at
    rewards = np.empty(n)
    matrices = []
    states = [space.state_from_index(i) for i in range(n)]
    for i, s in enumerate(states):
        rewards[i] = reward_at(model.reward_tree, s)
    for tree in model.trees:
        rows, cols, vals = [], [], []
        for i, s in enumerate(states):
            acc: dict[int, float] = {}
            for p, eff in transition_outcomes(tree, s):
                j = space.state_index(apply_effect(s, eff))
                acc[j] = acc.get(j, 0.0) + p
            for j, p in acc.items():
                rows.append(i)
                cols.append(j)
                vals.append(p)
        matrices.append(sp.csr_matrix((vals, (rows, cols)), shape=(n, n)))
    return matrices, rewards


def _policy_matrix(matrices, policy: np.ndarray):
    n = matrices[0].shape[0]
    rows, cols, vals = [], [], []
    for a, mat in enumerate(matrices):
        idx = np.flatnonzero(policy == a)
        if idx.size == 0:
            continue
        sub = mat[idx]
        coo = sub.tocoo()
        rows.append(idx[coo.row])
        cols.append(coo.col)
        vals.append(coo.data)
    return sp.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(n, n),
    )


def _solve_fixed_policy(matrices, rewards, policy, gamma):
    n = rewards.shape[0]
    t_pi = _policy_matrix(matrices, policy)
    system = sp.identity(n, format="csr") - gamma * t_pi
    return spla.spsolve(system.tocsc(), rewards)


def _greedy(matrices, rewards, value, gamma):
    """Greedy policy with ties broken toward the smallest action index."""
    n = rewards.shape[0]
    best_q = rewards + gamma * (matrices[0] @ value)
    best_a = np.zeros(n, dtype=np.int64)
    for a in range(1, len(matrices)):
        q = rewards + gamma * (matrices[a] @ value)
        better = q > best_q
        best_q = np.where(better, q, best_q)
        best_a = np.where(better, a, best_a)
    return best_a, best_q


def solve_exact(problem: ProblemInstance, gamma: float,
                tolerance: float = 1e-9,
                cap: int = DEFAULT_ENUMERATION_CAP,
                max_iterations: int = 1000) -> ExactSolution:
    if not 0 <= gamma < 1:
        raise SpaceError(f"discount must be in [0, 1), got {gamma}")
    matrices, rewards = build_transition_matrices(problem, cap)
    policy = np.zeros(rewards.shape[0], dtype=np.int64)
    value = np.zeros_like(rewards)
    for _ in range(max_iterations):
        value = _solve_fixed_policy(matrices, rewards, policy, gamma)
        new_policy, best_q = _greedy(matrices, rewards, value, gamma)
        # states whose actions tie can flip between equally good choices
        # forever, so convergence is judged on the Bellman residual
        residual = float(np.max(np.abs(best_q - value)))
        if residual <= tolerance:
            return ExactSolution(new_policy, value, residual)
        policy = new_policy
    raise SpaceError("policy iteration failed to converge")


def as_state_policy(problem: ProblemInstance, policy,
                    cap: int = DEFAULT_ENUMERATION_CAP) -> np.ndarray:
    """Normalize a policy to an action-index array over state indices.

    Accepts an array, a callable state-tuple -> action index, or an object
    with action_at(state) (policy snapshots)."""
    space = problem.space
    n = _check_cap(problem, cap)
    if isinstance(policy, np.ndarray):
        if policy.shape != (n,):
            raise SpaceError(f"policy array has shape {policy.shape}, expected ({n},)")
        return policy.astype(np.int64)
    if hasattr(policy, "action_at"):
        fn = policy.action_at
    elif callable(policy):
        fn = policy
    else:
        raise SpaceError("unsupported policy representation")
    return np.fromiter(
        (fn(space.state_from_index(i)) for i in range(n)), dtype=np.int64, count=n
    )


def evaluate_policy_exact(problem: ProblemInstance, policy, gamma: float,
                          tolerance: float = 1e-9,
                          cap: int = DEFAULT_ENUMERATION_CAP) -> ExactEvaluation:
    matrices, rewards = build_transition_matrices(problem, cap)
    pol = as_state_policy(problem, policy, cap)
    value = _solve_fixed_policy(matrices, rewards, pol, gamma)
    t_pi = _policy_matrix(matrices, pol)
    residual = float(np.max(np.abs(rewards + gamma * (t_pi @ value) - value)))
    if residual > max(tolerance, 1e-6):
        raise SpaceError(f"fixed-policy solve residual {residual} too large")
    return ExactEvaluation(value, residual)


def value_iteration(problem: ProblemInstance, gamma: float,
                    tolerance: float = 1e-9, max_sweeps: int = 100000,
                    cap: int = DEFAULT_ENUMERATION_CAP) -> ExactSolution:
    """Cross-check solver; only sensible for moderate discounts."""
    matrices, rewards = build_transition_matrices(problem, cap)
    value = np.zeros_like(rewards)
    for _ in range(max_sweeps):
        _, new_value = _greedy(matrices, rewards, value, gamma)
        if np.max(np.abs(new_value - value)) <= tolerance * (1 - gamma):
            value = new_value
            break
        value = new_value
    policy, best_q = _greedy(matrices, rewards, value, gamma)
    return ExactSolution(policy, value, float(np.max(np.abs(best_q - value))))


def value_at(problem: ProblemInstance, solution, s=None) -> float:
    if s is None:
        s = problem.initial_state
    return float(solution.value[problem.space.state_index(s)])
