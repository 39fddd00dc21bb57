"""Transition rules and their compiled decision-tree form.

Domains are authored as ordered rule lists (first matching rule applies);
the runtime format is a decision tree per action, which is also what
nexus extraction reads. A rule may have several stochastic outcomes; any
leftover probability means "state unchanged".
"""

from __future__ import annotations

from dataclasses import dataclass

from .space import FactoredSpace

PROB_TOL = 1e-12

# Pattern component marking an abstract (ignored) dimension in symbolic
# tree traversal; shared with the worldview module.
ABSTRACT = -1


class RuleError(ValueError):
    pass


Assignment = tuple[tuple[int, int], ...]  # ((dim, value), ...) sorted by dim


@dataclass(frozen=True)
class TransitionRule:
    """guard -> outcomes; residual probability leaves the state unchanged."""

    guard: Assignment
    outcomes: tuple[tuple[float, Assignment], ...]

    @classmethod
    def make(cls, space: FactoredSpace, guard: dict, probability: float = 1.0,
             effect: dict | None = None,
             outcomes: list[tuple[float, dict]] | None = None) -> "TransitionRule":
        g = space.partial(**guard)
        if outcomes is None:
            outcomes = [(probability, effect or {})]
        outs = tuple(
            (float(p), space.partial(**eff)) for p, eff in outcomes
        )
        return cls(g, outs)

    def total_probability(self) -> float:
        return sum(p for p, _ in self.outcomes)


def validate_rules(space: FactoredSpace, rules: list[TransitionRule]) -> None:
    nd = space.num_dimensions
    for i, rule in enumerate(rules):
        for what, assign in [("guard", rule.guard)] + [
            ("effect", eff) for _, eff in rule.outcomes
        ]:
            for d, v in assign:
                if not 0 <= d < nd:
                    raise RuleError(f"rule {i}: {what} references dimension {d}")
                if not 0 <= v < space.dimensions[d].size:
                    raise RuleError(
                        f"rule {i}: {what} value {v} out of range for "
                        f"dimension {space.dimensions[d].name!r}"
                    )
        total = rule.total_probability()
        if total > 1 + PROB_TOL:
            raise RuleError(f"rule {i}: outcome probabilities sum to {total} > 1")
        for p, _ in rule.outcomes:
            if not 0 < p <= 1 + PROB_TOL:
                raise RuleError(f"rule {i}: outcome probability {p} not in (0,1]")


# --- decision trees ---------------------------------------------------------

@dataclass(frozen=True)
class Leaf:
    # transition trees: payload is a post-assignment; reward trees: a float
    payload: object


@dataclass(frozen=True)
class Test:
    __test__ = False  # not a test case, despite the name

    dim: int
    children: tuple  # one child per value of the dimension


@dataclass(frozen=True)
class Chance:
    branches: tuple[tuple[float, object], ...]


IDENTITY_LEAF = Leaf(())


def compile_rule_list(space: FactoredSpace, rules: list[TransitionRule],
                      default_payload: object = ()) -> object:
    """Compile first-match rule semantics into a decision tree.

    Unmatched states get `default_payload` (empty effect = unchanged).
    No dimension is tested twice on any root-to-leaf path.
    """
    validate_rules(space, rules)

    def build(remaining: list[TransitionRule], context: dict[int, int]):
        live = []
        for r in remaining:
            if all(context.get(d, v) == v for d, v in r.guard):
                live.append(r)
        if not live:
            return Leaf(default_payload)
        first = live[0]
        untested = [d for d, _ in first.guard if d not in context]
        if not untested:
            return _rule_leaf(first)
        d = untested[0]
        children = tuple(
            build(live, {**context, d: v})
            for v in range(space.dimensions[d].size)
        )
        return Test(d, children)

    def _rule_leaf(rule):
        total = rule.total_probability()
        branches = [(p, Leaf(eff)) for p, eff in rule.outcomes]
        if total >= 1 - PROB_TOL:
            if len(branches) == 1:
                return branches[0][1]
            return Chance(tuple(branches))
        # residual probability: the state is unchanged
        branches.append((1 - total, IDENTITY_LEAF))
        return Chance(tuple(branches))

    return build(list(rules), {})


def compile_reward_rules(space: FactoredSpace,
                         rules: list[tuple[Assignment, float]]) -> object:
    """First-match reward rules -> tree with float leaves. Must be total."""
    if not rules or rules[-1][0] != ():
        raise RuleError("reward rules must end with a catch-all (empty guard)")

    def build(remaining, context):
        live = [r for r in remaining
                if all(context.get(d, v) == v for d, v in r[0])]
        guard, value = live[0]
        untested = [d for d, _ in guard if d not in context]
        if not untested:
            return Leaf(float(value))
        d = untested[0]
        return Test(d, tuple(
            build(live, {**context, d: v})
            for v in range(space.dimensions[d].size)
        ))

    return build(list(rules), {})


def tree_dimensions(tree) -> set[int]:
    """All dimensions tested anywhere in the tree."""
    dims: set[int] = set()
    stack = [tree]
    while stack:
        node = stack.pop()
        if isinstance(node, Test):
            dims.add(node.dim)
            stack.extend(node.children)
        elif isinstance(node, Chance):
            stack.extend(child for _, child in node.branches)
    return dims


def transition_outcomes(tree, s: tuple[int, ...]) -> list[tuple[float, Assignment]]:
    """Concrete traversal: list of (probability, post-assignment)."""
    out = []

    def walk(node, p):
        if isinstance(node, Leaf):
            out.append((p, node.payload))
        elif isinstance(node, Test):
            walk(node.children[s[node.dim]], p)
        else:
            for q, child in node.branches:
                walk(child, p * q)

    walk(tree, 1.0)
    return out


def apply_effect(s: tuple[int, ...], effect: Assignment) -> tuple[int, ...]:
    if not effect:
        return s
    out = list(s)
    for d, v in effect:
        out[d] = v
    return tuple(out)


def transition_distribution_tree(tree, s):
    """Distribution over post states for a concrete pre state."""
    dist: dict[tuple[int, ...], float] = {}
    for p, eff in transition_outcomes(tree, s):
        s2 = apply_effect(s, eff)
        dist[s2] = dist.get(s2, 0.0) + p
    return dist


def reward_at(tree, s: tuple[int, ...]) -> float:
    node = tree
    while isinstance(node, Test):
        node = node.children[s[node.dim]]
    return node.payload


def enumerate_tree_nexuses(tree) -> set[Assignment]:
    """One nexus per root-to-leaf path: the dimensions tested on the path
    with their branch values; stochastic choices are skipped."""
    found: set[Assignment] = set()

    def walk(node, bindings: dict[int, int]):
        if isinstance(node, Leaf):
            found.add(tuple(sorted(bindings.items())))
        elif isinstance(node, Test):
            for v, child in enumerate(node.children):
                walk(child, {**bindings, node.dim: v})
        else:
            for _, child in node.branches:
                walk(child, bindings)

    walk(tree, {})
    return found


def symbolic_outcomes(space: FactoredSpace, tree, pattern: tuple[int, ...]):
    """Traverse a transition tree over a worldview pattern.

    `pattern` has a value index per concrete dimension and ABSTRACT
    elsewhere. Abstract dimensions branch uniformly. Yields merged
    (weight, post_box) pairs where post_box is again a pattern; weights
    sum to 1.
    """
    acc: dict[tuple[int, ...], float] = {}

    def walk(node, w, bound: dict[int, int]):
        if isinstance(node, Leaf):
            box = list(pattern)
            for d, v in bound.items():
                box[d] = v
            for d, v in node.payload:
                box[d] = v
            key = tuple(box)
            acc[key] = acc.get(key, 0.0) + w
        elif isinstance(node, Test):
            d = node.dim
            v = bound.get(d, pattern[d])
            if v != ABSTRACT:
                walk(node.children[v], w, bound)
            else:
                u = w / space.dimensions[d].size
                for val, child in enumerate(node.children):
                    walk(child, u, {**bound, d: val})
        else:
            for q, child in node.branches:
                walk(child, w * q, bound)

    walk(tree, 1.0, {})
    return [(w, box) for box, w in acc.items()]


def symbolic_reward(space: FactoredSpace, tree, pattern: tuple[int, ...]) -> float:
    """Uniform average of a reward tree over the states of a pattern."""
    total = 0.0

    def walk(node, w):
        nonlocal total
        if isinstance(node, Leaf):
            total += w * node.payload
        else:
            v = pattern[node.dim]
            if v != ABSTRACT:
                walk(node.children[v], w)
            else:
                u = w / space.dimensions[node.dim].size
                for child in node.children:
                    walk(child, u)

    walk(tree, 1.0)
    return total
