"""Choosing and reshaping the worldview: the initial abstraction from
reward and nexus structure, policy-driven refinement, and proximity-driven
refinement/coarsening."""

from __future__ import annotations

from .model import ProblemInstance, enumerate_nexuses, reward_dimensions
from .planner import PlannerConfig, TransitionCache
from .rules import ABSTRACT
from .worldview import PlannerTables, Worldview, coarsen_group, refine_state


class WorldviewCapError(RuntimeError):
    def __init__(self, size: int, cap: int):
        super().__init__(
            f"worldview grew to {size} states, exceeding the configured "
            f"cap of {cap}"
        )
        self.size = size
        self.cap = cap


def _check_cap(worldview: Worldview, cap: int) -> None:
    if len(worldview) > cap:
        raise WorldviewCapError(len(worldview), cap)


def select_initial_abstraction(problem: ProblemInstance,
                               reward_step: bool = True,
                               nexus_step: bool = True,
                               cap: int = 10 ** 6) -> Worldview:
    """Start from the all-abstract worldview; make the reward-relevant
    dimensions concrete everywhere, then split out each nexus.

    The nexus step is progressive: it refines one nexus dimension at a
    time and descends only into the block that still intersects the nexus,
    so off-nexus values stay merged in the remaining nexus dimensions.
    """
    space = problem.space
    worldview = Worldview(space)
    if reward_step:
        for d in sorted(reward_dimensions(problem.model)):
            for w in worldview.sorted_patterns():
                if w[d] == ABSTRACT:
                    refine_state(worldview, None, w, d)
            _check_cap(worldview, cap)
    if nexus_step:
        for nexus in sorted(enumerate_nexuses(problem.model)):
            if not nexus:
                continue
            box = [ABSTRACT] * space.num_dimensions
            for d, v in nexus:
                box[d] = v
            box = tuple(box)
            for d, _ in nexus:
                for w in worldview.cover(box):
                    if w[d] == ABSTRACT:
                        refine_state(worldview, None, w, d)
            _check_cap(worldview, cap)
    return worldview


def policy_based_refinement(worldview: Worldview, tables: PlannerTables,
                            cache: TransitionCache,
                            cap: int = 10 ** 6) -> int:
    """Split any state whose possible successors are concrete in a
    dimension it ignores, when the policy actually varies over that
    dimension around the successor. Candidates are collected first and
    applied afterwards, skipping entries invalidated by earlier splits.
    Returns the number of states refined."""
    uniform_memo: dict = {}

    def policy_uniform(succ, d) -> bool:
        key = (succ, d)
        hit = uniform_memo.get(key)
        if hit is None:
            box = succ[:d] + (ABSTRACT,) + succ[d + 1:]
            actions = {tables.policy[c] for c in worldview.cover(box)}
            hit = len(actions) <= 1
            uniform_memo[key] = hit
        return hit

    candidates = []
    for w in worldview.sorted_patterns():
        open_dims = [d for d, v in enumerate(w) if v == ABSTRACT]
        if not open_dims:
            continue
        found = set()
        for a in range(cache.num_actions):
            for succ, _ in cache.successors(w, a):
                for d in open_dims:
                    if d in found or succ[d] == ABSTRACT:
                        continue
                    if not policy_uniform(succ, d):
                        found.add(d)
        candidates.extend((w, d) for d in sorted(found))

    refined = 0
    for w, d in candidates:
        if w in worldview and w[d] == ABSTRACT:
            refine_state(worldview, tables, w, d)
            refined += 1
    _check_cap(worldview, cap)
    return refined


def proximity_based_refinement(worldview: Worldview, tables: PlannerTables,
                               config: PlannerConfig, rng,
                               dimension: int | None = None) -> int:
    """Split every high-proximity state along one stochastically chosen
    dimension. The caller is expected to follow with value-only sweeps."""
    space = worldview.space
    d = int(rng.integers(space.num_dimensions)) if dimension is None else dimension
    threshold = config.refine_threshold_for(len(worldview))
    targets = [w for w in worldview.sorted_patterns()
               if w[d] == ABSTRACT and tables.prox[w] > threshold]
    for w in targets:
        refine_state(worldview, tables, w, d)
    _check_cap(worldview, config.max_worldview_states)
    return len(targets)


def proximity_based_coarsening(worldview: Worldview, tables: PlannerTables,
                               config: PlannerConfig, rng) -> int:
    """Merge complete sibling groups of low-proximity states. A group is
    |S_d| states concrete in d, identical elsewhere; groups broken by an
    earlier merge are skipped. Returns the number of merges."""
    space = worldview.space
    threshold = config.coarsen_threshold_for(len(worldview))
    candidates = [w for w in worldview.sorted_patterns()
                  if tables.prox[w] < threshold]
    merges = 0
    for d in range(space.num_dimensions):
        size = space.dimensions[d].size
        groups: dict = {}
        for w in candidates:
            if w[d] == ABSTRACT:
                continue
            groups.setdefault(w[:d] + (ABSTRACT,) + w[d + 1:], []).append(w)
        for key in sorted(groups):
            group = groups[key]
            if len(group) != size:
                continue
            if all(w in worldview for w in group):
                coarsen_group(worldview, tables, group, d, rng)
                merges += 1
    return merges
