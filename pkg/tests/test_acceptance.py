"""End-to-end acceptance checks: one test (and one printed verdict line)
per criterion. These are slow; run the rest of the suite for fast feedback.
"""

import time

import numpy as np
import pytest

from wvplan.abstraction import select_initial_abstraction
from wvplan.domains import (
    RoadGraph,
    build_grid_problem,
    build_robot4,
    build_tireworld,
)
from wvplan.model import ActionModel, ProblemInstance
from wvplan.oracle import evaluate_policy_exact, solve_exact, value_at
from wvplan.planner import PlannerConfig, TransitionCache, policy_value_phase
from wvplan.proximity import compute_proximity
from wvplan.rules import ABSTRACT, TransitionRule
from wvplan.simulate import RunConfig, run_precursor, run_recurrent
from wvplan.space import FactoredSpace
from wvplan.worldview import PlannerTables, Worldview, abstract_transition


def verdict(ok: bool, label: str, detail: str = "") -> None:
    line = f"{'PASS' if ok else 'FAIL'} {label}"
    if detail:
        line += f" ({detail})"
    print(line)
    assert ok, line


def concrete_worldview(space):
    return Worldview(space, [space.state_from_index(i)
                             for i in range(space.size())])


def combined_weights(coarsen=False):
    w = {"policy-value": 1.0, "policy-refine": 1.0, "proximity-refine": 1.0}
    if coarsen:
        w["proximity-coarsen"] = 1.0
    return w


# --- 1. exact oracle values -------------------------------------------------------

def test_criterion_1_exact_values():
    cases = [
        ("3doors", 0.99999, -27.50),
        ("3doors", 0.95, -14.63),
        ("1key", 0.99999, -79.47),
        ("1key", 0.95, -19.59),
        ("3keys", 0.99999, -61.98),
        ("3keys", 0.95, -18.99),
    ]
    worst = 0.0
    for name, gamma, expected in cases:
        start = time.perf_counter()
        got = value_at(build_grid_problem(name),
                       solve_exact(build_grid_problem(name), gamma))
        elapsed = time.perf_counter() - start
        worst = max(worst, abs(got - expected))
        assert abs(got - expected) <= 0.01, (name, gamma, got)
        assert elapsed <= 300, (name, gamma, elapsed)
    verdict(True, "criterion 1: six exact start-state values within 0.01",
            f"max |err| {worst:.4f}")


# --- 2. state-space sizes ---------------------------------------------------------

def ring_graph(n):
    locs = [f"n{i}" for i in range(n)]
    edges = [(locs[i], locs[(i + 1) % n]) for i in range(n)]
    return RoadGraph(locations=tuple(locs), edges=tuple(edges),
                     spare_locations=frozenset(locs[:2]),
                     initial=locs[0], goal=locs[-1])


def test_criterion_2_space_sizes():
    fixed = {"3doors": 1600, "1key": 6400, "3keys": 12800,
             "shuttlebot": 4800, "10x10": 160000}
    for name, size in fixed.items():
        assert build_grid_problem(name).space.size() == size, name
    for k in (10, 15, 20, 25):
        assert build_robot4(k).space.size() == k * 2 ** k, k
    for n in (5, 8, 19):
        space = build_tireworld(ring_graph(n)).space
        assert space.num_dimensions == 2 * n + 2, n
        assert space.size() == 2 ** (2 * n + 2), n
    verdict(True, "criterion 2: all generator space sizes exact")


# --- 3. initial abstraction sizes -------------------------------------------------

def test_criterion_3_initial_worldview_sizes():
    doors = build_grid_problem("3doors")
    keys = build_grid_problem("3keys")
    sizes = (
        len(select_initial_abstraction(doors, True, False)),
        len(select_initial_abstraction(doors, True, True)),
        len(select_initial_abstraction(keys, True, True)),
        len(select_initial_abstraction(doors, False, False)),
    )
    assert sizes == (200, 212, 224, 1), sizes
    verdict(True, "criterion 3: initial worldview sizes 200/212/224/1")


# --- 4. ostrich effect ------------------------------------------------------------

def test_criterion_4_ostrich_effect():
    problem = build_grid_problem("3doors")
    planner = PlannerConfig(gamma=0.99999, variant="simple")
    run = RunConfig(mode="precursor", planner=planner, seed=0,
                    phase_budget=60)
    result = run_precursor(problem, run)
    ev = evaluate_policy_exact(problem, result.snapshot.action_at, 0.99999)
    exact = ev.value[problem.space.state_index(problem.initial_state)]
    assert abs(exact - -100000.0) <= 0.5, exact
    assert abs(result.self_estimate - -19.0) <= 1.0, result.self_estimate
    verdict(True, "criterion 4: ostrich effect on the unrefined worldview",
            f"exact {exact:.1f}, self-estimate {result.self_estimate:.2f}")


# --- 5. policy-based refinement ---------------------------------------------------

def test_criterion_5_policy_refinement_runs():
    problem = build_grid_problem("3doors")
    sizes, values = [], []
    for seed in range(10):
        planner = PlannerConfig(gamma=0.99999, variant="lua", phase_weights={
            "policy-value": 1.0, "policy-refine": 1.0,
        })
        run = RunConfig(mode="precursor", planner=planner, seed=seed,
                        phase_budget=150)
        result = run_precursor(problem, run)
        ev = evaluate_policy_exact(problem, result.snapshot.action_at, 0.99999)
        values.append(ev.value[problem.space.state_index(problem.initial_state)])
        sizes.append(result.worldview_size)
    assert all(abs(v - -27.50) <= 0.01 for v in values), values
    assert all(215 <= n <= 240 for n in sizes), sizes
    verdict(True, "criterion 5: 10/10 policy-refinement runs exact-optimal",
            f"values {min(values):.4f}..{max(values):.4f}, |W| {min(sizes)}..{max(sizes)}")


# --- 6. combined refinement on 3keys ---------------------------------------------

@pytest.fixture(scope="module")
def combined_3keys_runs():
    problem = build_grid_problem("3keys")
    out = []
    for seed in range(10):
        planner = PlannerConfig(gamma=0.99999, variant="simple",
                                phase_weights=combined_weights())
        run = RunConfig(mode="precursor", planner=planner, seed=seed,
                        phase_budget=400)
        result = run_precursor(problem, run)
        ev = evaluate_policy_exact(problem, result.snapshot.action_at, 0.99999)
        value = ev.value[problem.space.state_index(problem.initial_state)]
        out.append((value, result.state.prox_sums))
    return out


def test_criterion_6_combined_refinement(combined_3keys_runs):
    values = [v for v, _ in combined_3keys_runs]
    successes = sum(v >= -70.0 for v in values)
    assert successes >= 5, values
    verdict(True, "criterion 6: combined-refinement success rate on 3keys",
            f"{successes}/10 runs >= -70, best {max(values):.2f}")


# --- 7. proximity normalization ---------------------------------------------------

def test_criterion_7_proximity_normalization(combined_3keys_runs):
    totals = [t for _, sums in combined_3keys_runs for t in sums]
    assert totals, "no proximity solves recorded"
    worst = max(abs(t - 1.0) for t in totals)
    assert worst <= 1e-9, worst

    # hand-solved 2-state chain: a -> b deterministically, rho = 0
    space = FactoredSpace.of(("pos", ["a", "b"]))
    model = ActionModel.from_rules(
        space, ["Go"],
        {"Go": [TransitionRule.make(space, {"pos": "a"}, effect={"pos": "b"})]},
        [((), -1.0)],
    )
    problem = ProblemInstance("two", space, model, (0,))
    worldview = Worldview(space, [(0,), (1,)])
    tables = PlannerTables(policy={(0,): 0, (1,): 0},
                           value={(0,): 0.0, (1,): 0.0},
                           prox={(0,): 0.5, (1,): 0.5})
    config = PlannerConfig(gamma_p=0.95, replanning_probability=0.0)
    compute_proximity(worldview, tables, (0,), config,
                      TransitionCache(worldview, model))
    assert abs(tables.prox[(0,)] - 0.05) <= 1e-10
    assert abs(tables.prox[(1,)] - 0.95) <= 1e-10
    verdict(True, "criterion 7: proximity distributions normalized",
            f"{len(totals)} solves, worst |sum-1| {worst:.1e}")


# --- 8. coarsening gridlock -------------------------------------------------------

def test_criterion_8_coarsening_gridlock():
    from wvplan.abstraction import proximity_based_coarsening
    space = FactoredSpace.of(("a", ["0", "1"]), ("b", ["0", "1"]),
                             ("c", ["0", "1"]))
    blocks = [(0, 0, 0), (1, 1, 1), (0, ABSTRACT, 1),
              (ABSTRACT, 1, 0), (1, 0, ABSTRACT)]
    worldview = Worldview(space, blocks)
    assert worldview.check_partition() == []
    tables = PlannerTables()
    for w in worldview:
        tables.policy[w], tables.value[w], tables.prox[w] = 0, 0.0, 0.0
    merges = proximity_based_coarsening(
        worldview, tables, PlannerConfig(coarsen_threshold=1.0),
        np.random.default_rng(0))
    assert merges == 0 and set(worldview) == set(blocks)
    verdict(True, "criterion 8: gridlocked 5-block worldview yields no merges")


# --- 9. oracle-equivalence properties ---------------------------------------------

def test_criterion_9_oracle_equivalence():
    problem = build_grid_problem("3doors")
    gamma = 0.95
    worldview = concrete_worldview(problem.space)
    cache = TransitionCache(worldview, problem.model)
    tables = PlannerTables()
    total = problem.space.size()
    for w in worldview:
        tables.policy[w] = 0
        tables.value[w] = 0.0
        tables.prox[w] = 1.0 / total
    config = PlannerConfig(gamma=gamma)
    view = None
    for _ in range(40):
        view = policy_value_phase(worldview, tables, config,
                                  cache=cache, view=view)
    sol = solve_exact(problem, gamma)
    worst = max(
        abs(tables.value[problem.space.state_from_index(i)] - sol.value[i])
        for i in range(total)
    )
    assert worst <= 1e-6 / (1 - gamma), worst

    # abstract transitions against brute-force double sums
    abstracted = select_initial_abstraction(problem)
    worst_t = 0.0
    rng = np.random.default_rng(5)
    patterns = abstracted.sorted_patterns()
    for w in [patterns[i] for i in rng.choice(len(patterns), 25, replace=False)]:
        for a in range(problem.model.num_actions):
            got = abstract_transition(abstracted, problem.model, w, a)
            want = brute_force_transition(problem, abstracted, w, a)
            keys = set(got) | set(want)
            worst_t = max(worst_t, *(abs(got.get(k, 0.0) - want.get(k, 0.0))
                                     for k in keys))
    assert worst_t <= 1e-9, worst_t
    verdict(True, "criterion 9: planner fixpoint and abstract transitions "
                  "match the oracle",
            f"value err {worst:.2e}, transition err {worst_t:.2e}")


def enumerate_block(space, w):
    dims = [range(space.dimensions[d].size) if v == ABSTRACT else (v,)
            for d, v in enumerate(w)]
    import itertools
    return [tuple(s) for s in itertools.product(*dims)]


def brute_force_transition(problem, worldview, w, a):
    from wvplan.model import transition_distribution
    states = enumerate_block(problem.space, w)
    out: dict = {}
    for s in states:
        for s2, p in transition_distribution(problem.model, a, s).items():
            w2 = worldview.locate(s2)
            out[w2] = out.get(w2, 0.0) + p / len(states)
    return out


# --- 10. recurrent simulation on 3keys --------------------------------------------

def recurrent_3keys(seed, coarsen):
    problem = build_grid_problem("3keys")
    planner = PlannerConfig(gamma=0.99999, variant="simple",
                            phase_weights=combined_weights(coarsen))
    run = RunConfig(mode="recurrent", planner=planner, seed=seed,
                    phases_per_step=10, world_step_limit=500)
    return run_recurrent(problem, run)


def test_criterion_10_recurrent_runs():
    goals = 0
    for seed in range(20):
        trace = recurrent_3keys(seed, coarsen=False)
        goals += trace.goal_reached
        sizes = trace.worldview_sizes()
        assert sizes == sorted(sizes), f"seed {seed}: |W| decreased"
    assert goals >= 17, goals

    non_monotone = 0
    for seed in range(3):
        sizes = recurrent_3keys(seed, coarsen=True).worldview_sizes()
        non_monotone += sizes != sorted(sizes)
    assert non_monotone >= 1, "coarsening never shrank the worldview"
    verdict(True, "criterion 10: recurrent 3keys runs reach the goal",
            f"{goals}/20 goals, {non_monotone}/3 coarsening traces non-monotone")


# --- 11. robot4-15 ----------------------------------------------------------------

def test_criterion_11_robot4_15():
    problem = build_robot4(15)
    limit = problem.space.size() // 100
    goals, peaks = 0, []
    for seed in range(10):
        planner = PlannerConfig(gamma=0.99999, variant="simple",
                                phase_weights=combined_weights(coarsen=True))
        run = RunConfig(mode="recurrent", planner=planner, seed=seed,
                        phases_per_step=10, world_step_limit=500)
        trace = run_recurrent(problem, run)
        goals += trace.goal_reached
        peaks.append(max(trace.worldview_sizes()))
    assert goals >= 8, goals
    assert max(peaks) <= limit, peaks
    verdict(True, "criterion 11: robot4-15 recurrent runs",
            f"{goals}/10 goals, peak |W| {max(peaks)} <= {limit}")
