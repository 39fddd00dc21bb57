import numpy as np
import pytest

from wvplan.abstraction import (
    WorldviewCapError,
    policy_based_refinement,
    proximity_based_coarsening,
    proximity_based_refinement,
    select_initial_abstraction,
)
from wvplan.domains import build_grid_problem
from wvplan.model import ActionModel, ProblemInstance
from wvplan.planner import PlannerConfig, TransitionCache
from wvplan.rules import ABSTRACT, TransitionRule
from wvplan.space import FactoredSpace
from wvplan.worldview import PlannerTables, Worldview, block_size


# --- initial abstraction --------------------------------------------------------

@pytest.mark.parametrize("variant,reward,nexus,size", [
    ("3doors", True, False, 200),
    ("3doors", True, True, 212),
    ("3keys", True, True, 224),
    ("3doors", False, False, 1),
    ("1key", True, True, 248),
])
def test_initial_abstraction_sizes(variant, reward, nexus, size):
    problem = build_grid_problem(variant)
    wv = select_initial_abstraction(problem, reward_step=reward,
                                    nexus_step=nexus)
    assert len(wv) == size
    assert wv.check_partition() == []


def test_initial_abstraction_is_deterministic():
    problem = build_grid_problem("3keys")
    a = select_initial_abstraction(problem).sorted_patterns()
    b = select_initial_abstraction(problem).sorted_patterns()
    assert a == b


def test_initial_abstraction_localizes_start_and_goal():
    problem = build_grid_problem("3doors")
    wv = select_initial_abstraction(problem)
    # every state locates somewhere, including start and goal
    w0 = wv.locate(problem.initial_state)
    assert w0[0] == 0 and w0[1] == 0  # x and y are reward/nexus dimensions
    assert wv.locate(problem.space.state(
        x="7", y="7", d1="closed", d2="closed", d3="closed", dmg="no"))


def test_cap_enforced():
    problem = build_grid_problem("3doors")
    with pytest.raises(WorldviewCapError):
        select_initial_abstraction(problem, cap=50)


# --- policy-based refinement ----------------------------------------------------

def ladder_problem():
    """x climbs; a separate k dimension is never tested by the dynamics,
    so it only becomes relevant where the policy varies over it."""
    space = FactoredSpace.of(("x", ["0", "1", "2"]), ("k", ["0", "1"]))
    model = ActionModel.from_rules(
        space, ["Stay", "Right"],
        {"Stay": [], "Right": [
            TransitionRule.make(space, {"x": "0"}, effect={"x": "1"}),
            TransitionRule.make(space, {"x": "1"}, effect={"x": "2"}),
        ]},
        [((), -1.0)],
    )
    return ProblemInstance("ladder", space, model, (0, 0))


def ladder_worldview():
    problem = ladder_problem()
    wv = Worldview(problem.space, [
        (0, ABSTRACT), (1, ABSTRACT), (2, 0), (2, 1),
    ])
    tables = PlannerTables()
    for w in wv:
        tables.policy[w] = 0
        tables.value[w] = 0.0
        tables.prox[w] = block_size(problem.space, w) / problem.space.size()
    return problem, wv, tables


def test_policy_refinement_splits_on_policy_variation():
    problem, wv, tables = ladder_worldview()
    cache = TransitionCache(wv, problem.model)
    tables.policy[(2, 0)] = 0
    tables.policy[(2, 1)] = 1  # varies over k at the successor of (1, *)
    n = policy_based_refinement(wv, tables, cache)
    assert n == 1
    assert (1, 0) in wv and (1, 1) in wv
    assert (0, ABSTRACT) in wv  # its successor was abstract in k at the time
    assert tables.covers(wv)


def test_policy_refinement_noop_when_policy_uniform():
    problem, wv, tables = ladder_worldview()
    cache = TransitionCache(wv, problem.model)
    assert policy_based_refinement(wv, tables, cache) == 0
    assert len(wv) == 4


def test_policy_refinement_monotone_and_bounded_on_grid():
    problem = build_grid_problem("3doors")
    wv = select_initial_abstraction(problem)
    tables = PlannerTables()
    rng = np.random.default_rng(0)
    for w in wv:
        tables.policy[w] = int(rng.integers(problem.model.num_actions))
        tables.value[w] = 0.0
        tables.prox[w] = block_size(problem.space, w) / problem.space.size()
    cache = TransitionCache(wv, problem.model)
    sizes = [len(wv)]
    for _ in range(4):
        policy_based_refinement(wv, tables, cache)
        sizes.append(len(wv))
        assert wv.check_partition() == []
    assert sizes == sorted(sizes)
    assert sizes[-1] <= problem.space.size()


# --- proximity-based refinement ---------------------------------------------------

def test_proximity_refinement_splits_high_proximity_states():
    problem, wv, tables = ladder_worldview()
    config = PlannerConfig(refine_threshold=0.2)
    tables.prox[(0, ABSTRACT)] = 0.9
    tables.prox[(1, ABSTRACT)] = 0.05
    mass = sum(tables.prox.values())
    n = proximity_based_refinement(wv, tables, config,
                                   np.random.default_rng(0), dimension=1)
    assert n == 1
    assert (0, 0) in wv and (0, 1) in wv
    assert (1, ABSTRACT) in wv  # below threshold, untouched
    assert sum(tables.prox.values()) == pytest.approx(mass)


def test_proximity_refinement_skips_concrete_dimension():
    problem, wv, tables = ladder_worldview()
    config = PlannerConfig(refine_threshold=0.0)
    before = len(wv)
    # dimension 0 is concrete everywhere in this worldview
    n = proximity_based_refinement(wv, tables, config,
                                   np.random.default_rng(0), dimension=0)
    assert n == 0 and len(wv) == before


# --- proximity-based coarsening ---------------------------------------------------

def test_coarsening_merges_complete_low_proximity_group():
    problem, wv, tables = ladder_worldview()
    config = PlannerConfig(coarsen_threshold=0.5)
    tables.prox = {w: 0.25 for w in wv}
    merges = proximity_based_coarsening(wv, tables, config,
                                        np.random.default_rng(0))
    assert merges == 1
    assert (2, ABSTRACT) in wv
    assert wv.check_partition() == []


def test_coarsening_respects_threshold():
    problem, wv, tables = ladder_worldview()
    config = PlannerConfig(coarsen_threshold=0.1)
    tables.prox[(2, 0)] = 0.5  # half the group is too prominent to merge
    tables.prox[(2, 1)] = 0.01
    assert proximity_based_coarsening(wv, tables, config,
                                      np.random.default_rng(0)) == 0


def test_refine_then_coarsen_restores():
    problem, wv, tables = ladder_worldview()
    config = PlannerConfig(refine_threshold=0.0, coarsen_threshold=2.0)
    proximity_based_refinement(wv, tables, config,
                               np.random.default_rng(0), dimension=1)
    assert len(wv) == 6
    merges = proximity_based_coarsening(wv, tables, config,
                                        np.random.default_rng(0))
    # with everything below threshold, complete sibling groups collapse
    assert merges >= 1 and len(wv) < 6
    assert wv.check_partition() == []
    assert sum(tables.prox.values()) == pytest.approx(1.0)


def test_coarsening_gridlock_produces_zero_merges():
    # five blocks of a 2x2x2 cube arranged so that no complete sibling
    # group exists, even though every state is below threshold
    space = FactoredSpace.of(("a", ["0", "1"]), ("b", ["0", "1"]),
                             ("c", ["0", "1"]))
    blocks = [
        (0, 0, 0),
        (1, 1, 1),
        (0, ABSTRACT, 1),
        (ABSTRACT, 1, 0),
        (1, 0, ABSTRACT),
    ]
    wv = Worldview(space, blocks)
    assert wv.check_partition() == []
    tables = PlannerTables()
    for w in wv:
        tables.policy[w] = 0
        tables.value[w] = 0.0
        tables.prox[w] = 0.0  # all below any positive threshold
    config = PlannerConfig(coarsen_threshold=1.0)
    merges = proximity_based_coarsening(wv, tables, config,
                                        np.random.default_rng(0))
    assert merges == 0
    assert set(wv) == set(blocks)
