import numpy as np
import pytest

from wvplan.domains import build_grid_problem
from wvplan.model import ActionModel, ProblemInstance
from wvplan.oracle import (
    build_transition_matrices,
    evaluate_policy_exact,
    solve_exact,
    value_at,
    value_iteration,
)
from wvplan.space import FactoredSpace, SpaceError


def absorbing_problem(reward=-1.0):
    space = FactoredSpace.of(("pos", ["a", "b"]))
    model = ActionModel.from_rules(space, ["Stay"], {"Stay": []},
                                   [((), reward)])
    return ProblemInstance("absorbing", space, model, (0,))


def test_absorbing_value_is_geometric_series():
    sol = solve_exact(absorbing_problem(), gamma=0.95)
    assert sol.value == pytest.approx([-20.0, -20.0])
    assert value_at(absorbing_problem(), sol) == pytest.approx(-20.0)


def test_transition_matrices_are_stochastic():
    problem = build_grid_problem("3doors")
    matrices, rewards = build_transition_matrices(problem)
    n = problem.space.size()
    assert rewards.shape == (n,)
    for m in matrices:
        assert m.shape == (n, n)
        assert m.sum(axis=1) == pytest.approx(np.ones((n, 1)))


@pytest.mark.parametrize("variant,gamma,expected", [
    ("3doors", 0.95, -14.63),
    ("1key", 0.95, -19.59),
    ("3keys", 0.95, -18.99),
    ("3doors", 0.99999, -27.50),
])
def test_known_optimal_values(variant, gamma, expected):
    problem = build_grid_problem(variant)
    sol = solve_exact(problem, gamma)
    assert value_at(problem, sol) == pytest.approx(expected, abs=0.01)


def test_value_iteration_cross_check():
    problem = build_grid_problem("3doors")
    tol = 1e-9
    pi_sol = solve_exact(problem, 0.95, tolerance=tol)
    vi_sol = value_iteration(problem, 0.95, tolerance=tol)
    assert np.max(np.abs(pi_sol.value - vi_sol.value)) <= 2 * tol / (1 - 0.95)


def test_evaluating_the_optimal_policy_recovers_vstar():
    problem = build_grid_problem("3doors")
    sol = solve_exact(problem, 0.95)
    ev = evaluate_policy_exact(problem, sol.policy, 0.95)
    assert np.max(np.abs(ev.value - sol.value)) <= 2e-9


def test_no_policy_beats_the_optimum():
    problem = build_grid_problem("3doors")
    sol = solve_exact(problem, 0.95)
    rng = np.random.default_rng(7)
    for _ in range(3):
        pol = rng.integers(problem.model.num_actions, size=problem.space.size())
        ev = evaluate_policy_exact(problem, pol, 0.95)
        assert np.all(ev.value <= sol.value + 1e-7)


def test_value_bounds():
    problem = build_grid_problem("3doors")
    sol = solve_exact(problem, 0.95)
    assert np.max(np.abs(sol.value)) <= 2.0 / (1 - 0.95) + 1e-9


def test_callable_policy_representation():
    problem = absorbing_problem()
    ev = evaluate_policy_exact(problem, lambda s: 0, 0.95)
    assert ev.value == pytest.approx([-20.0, -20.0])


def test_policy_array_shape_checked():
    problem = absorbing_problem()
    with pytest.raises(SpaceError):
        evaluate_policy_exact(problem, np.zeros(5, dtype=np.int64), 0.95)


def test_enumeration_cap():
    problem = build_grid_problem("3doors")
    with pytest.raises(SpaceError, match="cap"):
        solve_exact(problem, 0.95, cap=100)


def test_bad_gamma():
    with pytest.raises(SpaceError):
        solve_exact(absorbing_problem(), 1.0)
