"""Why refinement matters: planning on a coarse worldview looks great on
paper and fails in the world.

We plan on the unrefined initial abstraction of the 3Doors grid (212
worldview states out of 1600) and compare the planner's self-estimate
against a direct exact evaluation of the resulting policy. The abstract
value is fine; the real value is catastrophic, because the policy parks
the agent in a region whose hazards are averaged away. Enabling
policy-based refinement repairs it.
"""

from wvplan.domains import build_grid_problem
from wvplan.oracle import evaluate_policy_exact, solve_exact, value_at
from wvplan.planner import PlannerConfig
from wvplan.simulate import RunConfig, run_precursor

GAMMA = 0.99999

problem = build_grid_problem("3doors")
optimal = value_at(problem, solve_exact(problem, GAMMA))
print(f"exact optimum V*(s0) = {optimal:.2f}\n")


def evaluate(label, planner, budget):
    run = RunConfig(mode="precursor", planner=planner, seed=0,
                    phase_budget=budget)
    result = run_precursor(problem, run)
    ev = evaluate_policy_exact(problem, result.snapshot.action_at, GAMMA)
    real = ev.value[problem.space.state_index(problem.initial_state)]
    print(f"{label}:")
    print(f"  worldview size  {result.worldview_size}")
    print(f"  self-estimate   {result.self_estimate:10.2f}")
    print(f"  actual value    {real:10.2f}\n")


evaluate(
    "frozen worldview (no refinement)",
    PlannerConfig(gamma=GAMMA, variant="simple"),
    budget=60,
)
evaluate(
    "with policy-based refinement",
    PlannerConfig(gamma=GAMMA, variant="lua", phase_weights={
        "policy-value": 1.0, "policy-refine": 1.0,
    }),
    budget=150,
)
