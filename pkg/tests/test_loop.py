import numpy as np
import pytest
from scipy import stats

from wvplan.domains import build_grid_problem
from wvplan.loop import (
    Phase,
    PolicySnapshot,
    enabled_phases,
    init_planner_state,
    run_phases,
)
from wvplan.planner import PlannerConfig


def combined_config(**kw):
    weights = {
        "policy-value": 1.0,
        "policy-refine": 1.0,
        "proximity-refine": 1.0,
    }
    weights.update(kw.pop("weights", {}))
    return PlannerConfig(phase_weights=weights, **kw)


def test_enabled_phases_default_is_policy_value_only():
    phases, probs = enabled_phases(PlannerConfig())
    assert phases == [Phase.POLICY_VALUE]
    assert probs == pytest.approx([1.0])


def test_proximity_consumers_pull_in_the_calc_phase():
    phases, probs = enabled_phases(combined_config())
    assert Phase.PROXIMITY_CALC in phases
    assert probs.sum() == pytest.approx(1.0)


def test_explicit_calc_weight_is_respected():
    config = PlannerConfig(phase_weights={
        "policy-value": 1.0, "proximity-refine": 1.0, "proximity-calc": 3.0,
    })
    phases, probs = enabled_phases(config)
    assert probs[phases.index(Phase.PROXIMITY_CALC)] == pytest.approx(0.6)


def test_no_positive_weight_rejected():
    with pytest.raises(ValueError):
        enabled_phases(PlannerConfig(phase_weights={"policy-value": 0.0}))


def test_phase_draw_frequencies_match_weights():
    # chi-squared on the categorical phase draw
    config = PlannerConfig(phase_weights={
        "policy-value": 2.0, "policy-refine": 1.0, "proximity-calc": 1.0,
    })
    phases, probs = enabled_phases(config)
    rng = np.random.default_rng(123)
    n = 100_000
    draws = rng.choice(len(phases), size=n, p=probs)
    counts = np.bincount(draws, minlength=len(phases))
    _, pvalue = stats.chisquare(counts, probs * n)
    assert pvalue > 1e-4


def test_init_covers_worldview_and_runs_one_phase():
    problem = build_grid_problem("3doors")
    state = init_planner_state(problem, PlannerConfig(),
                               np.random.default_rng(0))
    assert len(state.worldview) == 212
    assert state.tables.covers(state.worldview)
    # one policy/value phase already ran: values moved off zero
    assert any(v != 0.0 for v in state.tables.value.values())


def run_to_end(problem, config, seed, budget=30):
    state = init_planner_state(problem, config, np.random.default_rng(seed))
    snaps = list(run_phases(state, budget))
    return state, snaps


def test_runs_are_deterministic_per_seed():
    problem = build_grid_problem("3doors")
    a, snaps_a = run_to_end(problem, combined_config(), seed=5)
    b, snaps_b = run_to_end(problem, combined_config(), seed=5)
    assert a.worldview.sorted_patterns() == b.worldview.sorted_patterns()
    assert a.tables.policy == b.tables.policy
    assert a.tables.value == b.tables.value
    for sa, sb in zip(snaps_a, snaps_b):
        assert sa.patterns == sb.patterns and sa.actions == sb.actions


def test_snapshot_is_total_and_immutable_under_later_phases():
    problem = build_grid_problem("3doors")
    state = init_planner_state(problem, combined_config(),
                               np.random.default_rng(2))
    snaps = list(run_phases(state, 12))
    early = snaps[3]
    frozen = (early.patterns, early.actions)
    rng = np.random.default_rng(0)
    for _ in range(50):
        i = int(rng.integers(problem.space.size()))
        s = problem.space.state_from_index(i)
        a = early.action_at(s)
        assert 0 <= a < problem.model.num_actions
    assert (early.patterns, early.actions) == frozen
    assert [s.seq for s in snaps] == list(range(12))


def test_worldview_monotone_without_coarsening():
    problem = build_grid_problem("3doors")
    state = init_planner_state(problem, combined_config(),
                               np.random.default_rng(7))
    sizes = [len(state.worldview)]
    for _ in run_phases(state, 40):
        sizes.append(len(state.worldview))
    assert sizes == sorted(sizes)
    assert sizes[-1] > sizes[0]  # some refinement actually happened


def test_partition_invariant_holds_throughout():
    problem = build_grid_problem("3keys")
    config = combined_config(weights={"proximity-coarsen": 1.0})
    state = init_planner_state(problem, config, np.random.default_rng(1))
    for _ in run_phases(state, 30):
        assert state.worldview.check_partition() == []
        assert state.tables.covers(state.worldview)
    # every proximity solve left a normalized distribution behind
    for total in state.prox_sums:
        assert total == pytest.approx(1.0, abs=1e-9)


def test_current_state_source_is_consulted():
    problem = build_grid_problem("3doors")
    seen = []

    def source():
        seen.append(True)
        return problem.initial_state

    state = init_planner_state(problem, PlannerConfig(),
                               np.random.default_rng(0))
    list(run_phases(state, 5, current_state_source=source))
    assert len(seen) == 5


def test_snapshot_roundtrip_basics():
    problem = build_grid_problem("3doors")
    state = init_planner_state(problem, PlannerConfig(),
                               np.random.default_rng(0))
    snap = state.snapshot()
    assert len(snap) == 212
    assert snap.action_at(problem.initial_state) in range(
        problem.model.num_actions)
