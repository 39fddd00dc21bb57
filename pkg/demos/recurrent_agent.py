"""Plan while acting: a recurrent run on the 3Keys grid.

The agent starts with a coarse worldview, interleaves a handful of
planner phases with every world step, and refines the abstraction around
wherever it currently is (proximity-based refinement) and wherever the
policy disagrees with itself (policy-based refinement). The trace shows
the worldview growing as the agent commits to a route.
"""

from wvplan.domains import build_grid_problem
from wvplan.planner import PlannerConfig
from wvplan.simulate import RunConfig, run_recurrent

problem = build_grid_problem("3keys")
planner = PlannerConfig(gamma=0.99999, variant="simple", phase_weights={
    "policy-value": 1.0,
    "policy-refine": 1.0,
    "proximity-refine": 1.0,
})
run = RunConfig(mode="recurrent", planner=planner, seed=0,
                phases_per_step=10, world_step_limit=500)

trace = run_recurrent(problem, run)

print(f"{'step':>4}  {'|W|':>5}  action  state")
for row in trace.rows:
    if row.step % 5 == 0 or row is trace.rows[-1]:
        print(f"{row.step:>4}  {row.worldview_size:>5}  "
              f"{problem.model.actions[row.action]:<6}  "
              f"{problem.space.render(row.state)}")

print(f"\ngoal reached: {trace.goal_reached} "
      f"in {len(trace.rows)} steps, "
      f"{trace.phases_total} planner phases, "
      f"final worldview {trace.final_worldview_size} "
      f"of {problem.space.size()} specific states")
