"""Author a problem in the text format, solve it exactly, and plan it
approximately.

The format is line-oriented: dimensions, actions, first-match transition
rules (probability mass not covered by a rule's outcomes leaves the state
unchanged), first-match rewards, an initial state, and an optional goal.
"""

import io

from wvplan.fileformat import parse_problem, serialize_problem
from wvplan.oracle import solve_exact, value_at
from wvplan.planner import PlannerConfig
from wvplan.simulate import RunConfig, run_recurrent

TEXT = """
problem icy-corridor
gamma 0.95
dimension pos start mid end
dimension boots no yes

actions Stay Walk Equip
# walking on ice mostly works; sometimes you slip back
rule Walk pos=start boots=yes -> 0.9: pos=mid
rule Walk pos=mid   boots=yes -> 0.9: pos=end | 0.1: pos=start
rule Walk pos=start boots=no  -> 0.4: pos=mid
rule Walk pos=mid   boots=no  -> 0.4: pos=end | 0.5: pos=start
rule Equip -> boots=yes

reward pos=end -> 0
reward -> -1
initial pos=start boots=no
goal pos=end
"""

problem = parse_problem(TEXT)
print(f"parsed {problem.name}: {problem.space.size()} states, "
      f"actions {', '.join(problem.model.actions)}")

solution = solve_exact(problem, problem.gamma_default)
print(f"exact V*(s0) = {value_at(problem, solution):.3f}")
print(f"optimal first action: "
      f"{problem.model.actions[solution.policy[problem.space.state_index(problem.initial_state)]]}")

run = RunConfig(
    mode="recurrent", seed=0, phases_per_step=5, world_step_limit=50,
    planner=PlannerConfig(gamma=problem.gamma_default, phase_weights={
        "policy-value": 1.0, "policy-refine": 1.0,
    }),
)
trace = run_recurrent(problem, run)
actions = [problem.model.actions[r.action] for r in trace.rows]
print(f"recurrent agent: {' '.join(actions)} -> goal={trace.goal_reached}")

# the format round-trips, so problems can be saved and shared
assert parse_problem(serialize_problem(problem)).space.size() == 6
print("\nserialized form:\n")
print(serialize_problem(problem))
