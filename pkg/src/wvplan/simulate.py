"""The world and the executive: sample true transitions, act from the
latest policy snapshot, and record traces.

Two deliberation modes: precursor (plan a full phase budget with the
current state pinned to the initial state, then stop) and recurrent
(interleave a fixed number of phases with each world step). World and
planner randomness come from independent streams spawned off the run
seed, so planner configuration changes never perturb world outcomes.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field

import numpy as np

from .model import ActionModel, ProblemInstance, reward_of_state
from .planner import PlannerConfig
from .loop import PolicySnapshot, init_planner_state, run_phases
from .rules import apply_effect, transition_outcomes

TRACE_HEADER = ["step", "x_state", "action", "reward", "worldview_size",
                "snapshot_seq", "phases_total"]


def step_world(model: ActionModel, s, a, rng) -> tuple[tuple, float]:
    """Sample one transition; the reward is earned by the pre-step state."""
    if isinstance(a, str):
        a = model.action_index(a)
    reward = reward_of_state(model, s)
    u = rng.random()
    acc = 0.0
    outcomes = transition_outcomes(model.trees[a], s)
    for p, eff in outcomes:
        acc += p
        if u < acc:
            return apply_effect(s, eff), reward
    return apply_effect(s, outcomes[-1][1]), reward


@dataclass(frozen=True)
class RunConfig:
    mode: str  # "precursor" or "recurrent"
    planner: PlannerConfig
    seed: int = 0
    phase_budget: int = 1000  # precursor
    phases_per_step: int = 20  # recurrent
    world_step_limit: int = 500
    stop_at_goal: bool = True

    def __post_init__(self):
        if self.mode not in ("precursor", "recurrent"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if min(self.phase_budget, self.phases_per_step,
               self.world_step_limit) <= 0:
            raise ValueError("budgets and limits must be positive")


@dataclass
class TraceRow:
    step: int
    state: tuple
    action: int
    reward: float
    worldview_size: int
    snapshot_seq: int
    phases_total: int


@dataclass
class RunTrace:
    problem: str
    seed: int
    rows: list[TraceRow] = field(default_factory=list)
    goal_reached: bool = False
    final_worldview_size: int = 0
    phases_total: int = 0

    def worldview_sizes(self) -> list[int]:
        return [r.worldview_size for r in self.rows]

    def total_reward(self, gamma: float = 1.0) -> float:
        return sum(r.reward * gamma ** i for i, r in enumerate(self.rows))


def _rngs(seed: int):
    planner_ss, world_ss = np.random.SeedSequence(seed).spawn(2)
    return np.random.default_rng(planner_ss), np.random.default_rng(world_ss)


@dataclass
class PrecursorResult:
    snapshot: PolicySnapshot
    state: object  # final PlannerState
    self_estimate: float
    worldview_size: int


def run_precursor(problem: ProblemInstance, run: RunConfig) -> PrecursorResult:
    planner_rng, _ = _rngs(run.seed)
    state = init_planner_state(problem, run.planner, planner_rng)
    snapshot = state.snapshot()
    for snapshot in run_phases(state, run.phase_budget):
        pass
    w0 = state.worldview.locate(problem.initial_state)
    return PrecursorResult(
        snapshot=snapshot,
        state=state,
        self_estimate=state.tables.value[w0],
        worldview_size=len(state.worldview),
    )


def run_recurrent(problem: ProblemInstance, run: RunConfig) -> RunTrace:
    planner_rng, world_rng = _rngs(run.seed)
    state = init_planner_state(problem, run.planner, planner_rng)
    trace = RunTrace(problem=problem.name, seed=run.seed)
    s = problem.initial_state
    snapshot = state.snapshot()
    for step in range(run.world_step_limit):
        state.s_cur = s
        for snapshot in run_phases(state, run.phases_per_step):
            pass
        a = snapshot.action_at(s)
        s_next, reward = step_world(problem.model, s, a, world_rng)
        trace.rows.append(TraceRow(
            step=step, state=s, action=a, reward=reward,
            worldview_size=len(state.worldview),
            snapshot_seq=snapshot.seq, phases_total=state.phases_total,
        ))
        s = s_next
        if problem.at_goal(s):
            trace.goal_reached = True
            if run.stop_at_goal:
                break
    trace.final_worldview_size = len(state.worldview)
    trace.phases_total = state.phases_total
    return trace


def write_trace_csv(trace: RunTrace, space, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(TRACE_HEADER)
        for r in trace.rows:
            writer.writerow([
                r.step, space.render(r.state),
                r.action, r.reward, r.worldview_size,
                r.snapshot_seq, r.phases_total,
            ])


def save_snapshot(snapshot: PolicySnapshot, path) -> None:
    with open(path, "w") as fh:
        json.dump({
            "seq": snapshot.seq,
            "patterns": [list(p) for p in snapshot.patterns],
            "actions": list(snapshot.actions),
        }, fh)


def load_snapshot(space, path) -> PolicySnapshot:
    with open(path) as fh:
        data = json.load(fh)
    return PolicySnapshot(
        data["seq"], space,
        [tuple(p) for p in data["patterns"]], data["actions"],
    )
