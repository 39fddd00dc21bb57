"""The top-level planner loop: initialize tables over the initial
abstraction, then repeatedly execute one stochastically chosen phase,
emitting an immutable policy snapshot after each."""

from __future__ import annotations

import enum
import time
from dataclasses import dataclass, field

import numpy as np

from .abstraction import (
    policy_based_refinement,
    proximity_based_coarsening,
    proximity_based_refinement,
    select_initial_abstraction,
)
from .model import ProblemInstance
from .planner import (
    PHASE_NAMES,
    PlannerConfig,
    TransitionCache,
    policy_value_phase,
    value_only_phase,
)
from .proximity import compute_proximity
from .worldview import PlannerTables, Worldview, block_size


class Phase(enum.Enum):
    POLICY_VALUE = "policy-value"
    POLICY_REFINE = "policy-refine"
    PROXIMITY_CALC = "proximity-calc"
    PROXIMITY_REFINE = "proximity-refine"
    PROXIMITY_COARSEN = "proximity-coarsen"


assert tuple(p.value for p in Phase) == PHASE_NAMES


class PolicySnapshot:
    """Frozen (patterns, actions) pair; total over the state space via
    locate on a private index built on first use."""

    __slots__ = ("seq", "patterns", "actions", "space", "_locator", "_action_of")

    def __init__(self, seq: int, space, patterns, actions):
        self.seq = seq
        self.space = space
        self.patterns = tuple(patterns)
        self.actions = tuple(actions)
        self._locator = None
        self._action_of = None

    def __len__(self) -> int:
        return len(self.patterns)

    def action_at(self, s) -> int:
        if self._locator is None:
            self._locator = Worldview(self.space, self.patterns)
            self._action_of = dict(zip(self.patterns, self.actions))
        return self._action_of[self._locator.locate(s)]


@dataclass
class PlannerState:
    problem: ProblemInstance
    config: PlannerConfig
    worldview: Worldview
    tables: PlannerTables
    cache: TransitionCache
    rng: np.random.Generator
    s_cur: tuple
    view: object = None
    snapshot_seq: int = 0
    phases_total: int = 0
    prox_stale: bool = True
    prox_sums: list = field(default_factory=list)  # post-solve totals, for audits
    log: list = field(default_factory=list)

    def snapshot(self) -> PolicySnapshot:
        patterns = self.worldview.sorted_patterns()
        snap = PolicySnapshot(
            self.snapshot_seq, self.problem.space, patterns,
            [self.tables.policy[p] for p in patterns],
        )
        self.snapshot_seq += 1
        return snap


def init_planner_state(problem: ProblemInstance, config: PlannerConfig,
                       rng: np.random.Generator) -> PlannerState:
    """Initial abstraction, default-action tables with proximity spread by
    block size, and one policy/value phase before the loop starts."""
    worldview = select_initial_abstraction(
        problem, config.initial_reward_step, config.initial_nexus_step,
        config.max_worldview_states,
    )
    space = problem.space
    total = space.size()
    tables = PlannerTables()
    a0 = problem.model.default_action
    for w in worldview:
        tables.policy[w] = a0
        tables.value[w] = 0.0
        tables.prox[w] = block_size(space, w) / total
    cache = TransitionCache(worldview, problem.model)
    state = PlannerState(
        problem=problem, config=config, worldview=worldview, tables=tables,
        cache=cache, rng=rng, s_cur=problem.initial_state,
    )
    state.view = policy_value_phase(worldview, tables, config,
                                    cache=cache, view=state.view)
    return state


def enabled_phases(config: PlannerConfig) -> tuple[list[Phase], np.ndarray]:
    """Phases with positive weight, uniform over the enabled set unless
    weights are given. Proximity-consuming phases pull in the calc phase."""
    weights = dict(config.phase_weights)
    if not weights:
        weights = {Phase.POLICY_VALUE.value: 1.0}
    if (weights.get(Phase.PROXIMITY_REFINE.value, 0) > 0
            or weights.get(Phase.PROXIMITY_COARSEN.value, 0) > 0):
        weights.setdefault(Phase.PROXIMITY_CALC.value, 1.0)
    phases = [p for p in Phase if weights.get(p.value, 0) > 0]
    if not phases:
        raise ValueError("no phase has positive weight")
    probs = np.array([weights[p.value] for p in phases])
    return phases, probs / probs.sum()


def _fresh_proximity(state: PlannerState) -> None:
    state.view = compute_proximity(
        state.worldview, state.tables, state.s_cur, state.config,
        state.cache, state.view,
    )
    state.prox_stale = False
    state.prox_sums.append(sum(state.tables.prox[p]
                               for p in state.worldview))


def execute_phase(state: PlannerState, phase: Phase) -> None:
    config = state.config
    if phase is Phase.POLICY_VALUE:
        state.view = policy_value_phase(
            state.worldview, state.tables, config,
            cache=state.cache, view=state.view,
        )
        state.prox_stale = True
    elif phase is Phase.POLICY_REFINE:
        if policy_based_refinement(state.worldview, state.tables, state.cache,
                                   config.max_worldview_states):
            state.prox_stale = True
    elif phase is Phase.PROXIMITY_CALC:
        _fresh_proximity(state)
    elif phase is Phase.PROXIMITY_REFINE:
        if state.prox_stale:
            _fresh_proximity(state)
        if proximity_based_refinement(state.worldview, state.tables,
                                      config, state.rng):
            state.view = value_only_phase(
                state.worldview, state.tables, config,
                config.stabilize_sweeps, cache=state.cache, view=state.view,
            )
            state.prox_stale = True
    elif phase is Phase.PROXIMITY_COARSEN:
        if state.prox_stale:
            _fresh_proximity(state)
        if proximity_based_coarsening(state.worldview, state.tables,
                                      config, state.rng):
            state.prox_stale = True
    else:  # pragma: no cover
        raise ValueError(f"unknown phase {phase}")


def run_phases(state: PlannerState, phase_budget: int,
               current_state_source=None):
    """Generator over policy snapshots, one per executed phase. The
    current-state source (a callable returning a specific state) is read
    once per phase, after the phase runs."""
    phases, probs = enabled_phases(state.config)
    for _ in range(phase_budget):
        phase = phases[state.rng.choice(len(phases), p=probs)]
        start = time.perf_counter()
        execute_phase(state, phase)
        if current_state_source is not None:
            state.s_cur = current_state_source()
        state.phases_total += 1
        w0 = state.worldview.locate(state.problem.initial_state)
        state.log.append(
            f"{phase.value} |W|={len(state.worldview)} "
            f"t={time.perf_counter() - start:.4f}s "
            f"V(s0)={state.tables.value[w0]:.3f}"
        )
        yield state.snapshot()
