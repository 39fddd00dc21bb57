"""A look inside a worldview: patterns, refinement, and abstract dynamics.

A worldview partitions the factored state space into boxes, each concrete
in some dimensions and abstract (ignoring all values) in the rest. This
demo builds the initial abstraction for 3Doors, inspects a few blocks,
refines one by hand, and shows how the abstract transition distribution
sharpens as blocks shrink.
"""

from wvplan.abstraction import select_initial_abstraction
from wvplan.domains import build_grid_problem
from wvplan.worldview import (
    abstract_reward,
    abstract_transition,
    block_size,
    refine_state,
    render_pattern,
)

problem = build_grid_problem("3doors")
space = problem.space
worldview = select_initial_abstraction(problem)

print(f"{problem.name}: {space.size()} specific states "
      f"-> {len(worldview)} worldview states\n")

w0 = worldview.locate(problem.initial_state)
print(f"the start state lives in {render_pattern(space, w0)}")
print(f"  block size {block_size(space, w0)}, "
      f"mean reward {abstract_reward(problem.model, w0):.2f}\n")

# in the doorway of door 1, going South crosses the door. The nexus step
# already made d1 concrete there, so rebuild with the reward step only.
coarse = select_initial_abstraction(problem, nexus_step=False)
print(f"reward-step-only worldview: {len(coarse)} states")

in_doorway = space.state(x="2", y="2", d1="closed", d2="closed",
                         d3="closed", dmg="no")
door_block = coarse.locate(in_doorway)
print(f"the block in the first doorway: {render_pattern(space, door_block)}")

south = problem.model.action_index("South")
print("its abstract South transitions average over open and closed doors:")
for succ, p in sorted(abstract_transition(coarse, problem.model,
                                          door_block, south).items()):
    print(f"  {p:.3f} -> {render_pattern(space, succ)}")

# split the block along the door dimension and look again
d1 = next(i for i, d in enumerate(space.dimensions) if d.name == "d1")
refine_state(coarse, None, door_block, d1)
print(f"\nafter refining on 'd1' the worldview has {len(coarse)} states")
closed = coarse.locate(in_doorway)
print("the closed-door block's South transitions are now definite "
      "(walking into a shut door hurts):")
for succ, p in sorted(abstract_transition(coarse, problem.model,
                                          closed, south).items()):
    print(f"  {p:.3f} -> {render_pattern(space, succ)}")
print("\nthe full initial abstraction pre-splits every such doorway: "
      "that is the nexus step.")
