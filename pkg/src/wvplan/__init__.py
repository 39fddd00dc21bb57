"""Planning for factored MDPs over dynamically refined non-uniform
abstractions, with an exact full-state oracle and a simulation harness."""

from .space import Dimension, FactoredSpace, SpaceError, space_size
from .rules import ABSTRACT, RuleError, TransitionRule, compile_rule_list
from .model import (
    ActionModel,
    ProblemInstance,
    enumerate_nexuses,
    reward_of_state,
    transition_distribution,
)
from .worldview import (
    PartitionError,
    PlannerTables,
    Worldview,
    abstract_reward,
    abstract_transition,
    coarsen_group,
    refine_state,
)
from .domains import (
    RoadGraph,
    build_grid_problem,
    build_problem,
    build_robot4,
    build_tireworld,
    tire_small_graph,
)

__all__ = [
    "ABSTRACT",
    "ActionModel",
    "Dimension",
    "FactoredSpace",
    "PartitionError",
    "PlannerTables",
    "ProblemInstance",
    "RoadGraph",
    "RuleError",
    "SpaceError",
    "TransitionRule",
    "Worldview",
    "abstract_reward",
    "abstract_transition",
    "build_grid_problem",
    "build_problem",
    "build_robot4",
    "build_tireworld",
    "coarsen_group",
    "compile_rule_list",
    "enumerate_nexuses",
    "refine_state",
    "reward_of_state",
    "space_size",
    "tire_small_graph",
    "transition_distribution",
]
