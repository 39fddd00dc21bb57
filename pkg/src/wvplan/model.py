"""Action models: per-action transition trees plus a reward tree."""

from __future__ import annotations

from dataclasses import dataclass, field

from .space import FactoredSpace, SpaceError
from .rules import (
    Assignment,
    TransitionRule,
    compile_reward_rules,
    compile_rule_list,
    reward_at,
    enumerate_tree_nexuses,
    transition_distribution_tree,
    tree_dimensions,
)

Nexus = Assignment  # partial assignment read off one tree path


@dataclass(frozen=True)
class ActionModel:
    """Ordered actions (first is the default a0) with one transition tree
    each, plus a state-only reward tree."""

    space: FactoredSpace
    actions: tuple[str, ...]
    trees: tuple  # one per action
    reward_tree: object
    # rule lists are retained for serialization round-trips
    rule_lists: tuple[tuple[TransitionRule, ...], ...] = ()
    reward_rules: tuple[tuple[Assignment, float], ...] = ()

    def __post_init__(self):
        if len(set(self.actions)) != len(self.actions):
            raise SpaceError("action names must be unique")
        if len(self.trees) != len(self.actions):
            raise SpaceError("need one transition tree per action")

    @classmethod
    def from_rules(cls, space: FactoredSpace, actions: list[str],
                   rule_lists: dict[str, list[TransitionRule]],
                   reward_rules: list[tuple[Assignment, float]]) -> "ActionModel":
        unknown = set(rule_lists) - set(actions)
        if unknown:
            raise SpaceError(f"rules given for unknown actions: {sorted(unknown)}")
        trees = tuple(
            compile_rule_list(space, rule_lists.get(a, [])) for a in actions
        )
        return cls(
            space=space,
            actions=tuple(actions),
            trees=trees,
            reward_tree=compile_reward_rules(space, reward_rules),
            rule_lists=tuple(tuple(rule_lists.get(a, [])) for a in actions),
            reward_rules=tuple(reward_rules),
        )

    @property
    def num_actions(self) -> int:
        return len(self.actions)

    @property
    def default_action(self) -> int:
        return 0

    def action_index(self, name: str) -> int:
        try:
            return self.actions.index(name)
        except ValueError:
            raise SpaceError(f"unknown action {name!r}") from None


def transition_distribution(model: ActionModel, a: int | str,
                            s: tuple[int, ...]) -> dict[tuple[int, ...], float]:
    if isinstance(a, str):
        a = model.action_index(a)
    if not 0 <= a < model.num_actions:
        raise SpaceError(f"unknown action index {a}")
    model.space.check_state(s)
    return transition_distribution_tree(model.trees[a], s)


def reward_of_state(model: ActionModel, s: tuple[int, ...]) -> float:
    model.space.check_state(s)
    return reward_at(model.reward_tree, s)


def enumerate_nexuses(model: ActionModel) -> set[Nexus]:
    """Union over all action trees of their per-path nexuses, deduplicated."""
    nexuses: set[Nexus] = set()
    for tree in model.trees:
        nexuses |= enumerate_tree_nexuses(tree)
    return nexuses


def reward_dimensions(model: ActionModel) -> set[int]:
    return tree_dimensions(model.reward_tree)


@dataclass(frozen=True)
class ProblemInstance:
    name: str
    space: FactoredSpace
    model: ActionModel
    initial_state: tuple[int, ...]
    gamma_default: float = 0.95
    # optional goal predicate (partial assignment) used by run summaries
    goal: Assignment | None = None

    def __post_init__(self):
        self.space.check_state(self.initial_state)

    def at_goal(self, s: tuple[int, ...]) -> bool:
        if self.goal is None:
            return False
        return all(s[d] == v for d, v in self.goal)
