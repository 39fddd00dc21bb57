"""Worldviews: partitions of a factored space into states that are
per-dimension either concrete (one value) or abstract (the whole
dimension).

A worldview state is a pattern: a tuple with a value index per concrete
dimension and ABSTRACT elsewhere. The partition is indexed by a trie over
dimensions in declaration order so that locating a specific state and
intersecting a box with the partition stay sublinear in |W|.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .model import ActionModel
from .rules import ABSTRACT, symbolic_outcomes, symbolic_reward
from .space import FactoredSpace

Pattern = tuple[int, ...]


class PartitionError(ValueError):
    pass


def block_size(space: FactoredSpace, pattern: Pattern) -> int:
    """Number of specific states covered by a pattern."""
    n = 1
    for d, v in enumerate(pattern):
        if v == ABSTRACT:
            n *= space.dimensions[d].size
    return n


def box_volume(space: FactoredSpace, box: Pattern) -> int:
    return block_size(space, box)


def overlap_count(space: FactoredSpace, a: Pattern, b: Pattern) -> int:
    """|a ∩ b| as an exact integer; 0 if disjoint."""
    n = 1
    for d, (x, y) in enumerate(zip(a, b)):
        if x == ABSTRACT and y == ABSTRACT:
            n *= space.dimensions[d].size
        elif x != ABSTRACT and y != ABSTRACT and x != y:
            return 0
    return n


def contains_state(pattern: Pattern, s: tuple[int, ...]) -> bool:
    return all(p == ABSTRACT or p == v for p, v in zip(pattern, s))


def pattern_of_state(s: tuple[int, ...]) -> Pattern:
    return tuple(s)


def render_pattern(space: FactoredSpace, pattern: Pattern) -> str:
    parts = []
    for d, v in enumerate(pattern):
        dim = space.dimensions[d]
        parts.append(f"{dim.name}=*" if v == ABSTRACT else f"{dim.name}={dim.values[v]}")
    return ";".join(parts)


class Worldview:
    """A mutable partition of the specific state space."""

    def __init__(self, space: FactoredSpace, patterns=None):
        self.space = space
        self._patterns: set[Pattern] = set()
        self._trie: dict = {}
        self.version = 0
        self._listeners: list = []
        if patterns is None:
            patterns = [tuple([ABSTRACT] * space.num_dimensions)]
        for p in patterns:
            self.add(p)

    # --- basic container ----------------------------------------------------

    def __len__(self) -> int:
        return len(self._patterns)

    def __contains__(self, pattern: Pattern) -> bool:
        return pattern in self._patterns

    def __iter__(self):
        return iter(self._patterns)

    def sorted_patterns(self) -> list[Pattern]:
        return sorted(self._patterns)

    def add_listener(self, fn) -> None:
        """fn(removed_patterns, added_patterns) after every mutation."""
        self._listeners.append(fn)

    def _notify(self, removed, added) -> None:
        self.version += 1
        for fn in self._listeners:
            fn(removed, added)

    def add(self, pattern: Pattern) -> None:
        if len(pattern) != self.space.num_dimensions:
            raise PartitionError("pattern has wrong arity")
        if pattern in self._patterns:
            raise PartitionError(f"duplicate pattern {pattern}")
        self._patterns.add(pattern)
        node = self._trie
        for v in pattern[:-1]:
            node = node.setdefault(v, {})
        node[pattern[-1]] = pattern

    def remove(self, pattern: Pattern) -> None:
        if pattern not in self._patterns:
            raise PartitionError(f"pattern not present: {pattern}")
        self._patterns.remove(pattern)
        # walk down, then prune empty nodes on the way back
        path = []
        node = self._trie
        for v in pattern[:-1]:
            path.append((node, v))
            node = node[v]
        del node[pattern[-1]]
        for parent, v in reversed(path):
            if parent[v]:
                break
            del parent[v]

    # --- queries --------------------------------------------------------------

    def locate(self, s: tuple[int, ...]) -> Pattern:
        """The unique worldview state containing a specific state."""
        self.space.check_state(s)
        hits = self._collect(s)
        if len(hits) != 1:
            raise PartitionError(
                f"partition breach: state {s} is in {len(hits)} worldview states"
            )
        return hits[0]

    def cover(self, box: Pattern) -> list[Pattern]:
        """All worldview states intersecting a box (pattern-shaped region)."""
        return self._collect(box, wild=True)

    def _collect(self, key, wild: bool = False) -> list[Pattern]:
        out: list[Pattern] = []
        last = self.space.num_dimensions - 1
        stack = [(self._trie, 0)]
        while stack:
            node, depth = stack.pop()
            v = key[depth]
            if depth == last:
                if wild and v == ABSTRACT:
                    out.extend(node.values())
                else:
                    hit = node.get(v)
                    if hit is not None:
                        out.append(hit)
                    hit = node.get(ABSTRACT)
                    if hit is not None:
                        out.append(hit)
            else:
                if wild and v == ABSTRACT:
                    stack.extend((child, depth + 1) for child in node.values())
                else:
                    child = node.get(v)
                    if child is not None:
                        stack.append((child, depth + 1))
                    child = node.get(ABSTRACT)
                    if child is not None:
                        stack.append((child, depth + 1))
        return out

    def check_partition(self) -> list[str]:
        """Empty iff the states are pairwise disjoint and cover the space."""
        violations = []
        total = 0
        for p in self.sorted_patterns():
            total += block_size(self.space, p)
            hits = self.cover(p)
            for other in hits:
                if other != p and other > p:
                    violations.append(
                        f"overlap: {render_pattern(self.space, p)} and "
                        f"{render_pattern(self.space, other)}"
                    )
        if total != self.space.size():
            violations.append(
                f"covering: blocks sum to {total}, space has {self.space.size()}"
            )
        return violations


@dataclass
class PlannerTables:
    """Per-worldview-state policy, value and proximity maps."""

    policy: dict[Pattern, int] = field(default_factory=dict)
    value: dict[Pattern, float] = field(default_factory=dict)
    prox: dict[Pattern, float] = field(default_factory=dict)

    def drop(self, pattern: Pattern) -> None:
        del self.policy[pattern]
        del self.value[pattern]
        del self.prox[pattern]

    def covers(self, worldview: Worldview) -> bool:
        keys = set(worldview)
        return (set(self.policy) == keys and set(self.value) == keys
                and set(self.prox) == keys)


def split_patterns(space: FactoredSpace, w: Pattern, d: int) -> list[Pattern]:
    if w[d] != ABSTRACT:
        raise PartitionError(
            f"state is already concrete in dimension {space.dimensions[d].name!r}"
        )
    out = []
    for v in range(space.dimensions[d].size):
        child = list(w)
        child[d] = v
        out.append(tuple(child))
    return out


def refine_state(worldview: Worldview, tables: PlannerTables | None,
                 w: Pattern, d: int) -> list[Pattern]:
    """Split w along dimension d; policy and value copy to the children,
    proximity splits in proportion to block size."""
    if w not in worldview:
        raise PartitionError(f"state not in worldview: {w}")
    children = split_patterns(worldview.space, w, d)
    worldview.remove(w)
    for child in children:
        worldview.add(child)
    if tables is not None:
        share = 1.0 / len(children)
        pi, val, px = tables.policy.pop(w), tables.value.pop(w), tables.prox.pop(w)
        for child in children:
            tables.policy[child] = pi
            tables.value[child] = val
            tables.prox[child] = px * share
    worldview._notify([w], children)
    return children


def coarsen_group(worldview: Worldview, tables: PlannerTables | None,
                  group, d: int, rng=None) -> Pattern:
    """Merge a full sibling group along dimension d into one state.

    Policy copies from a stochastically chosen member, value is the group
    mean, proximity the group sum.
    """
    space = worldview.space
    group = sorted(group)
    size = space.dimensions[d].size
    if len(group) != size:
        raise PartitionError(
            f"group has {len(group)} members; dimension "
            f"{space.dimensions[d].name!r} has {size} values"
        )
    values = set()
    merged = None
    for w in group:
        if w not in worldview:
            raise PartitionError(f"state not in worldview: {w}")
        if w[d] == ABSTRACT:
            raise PartitionError(f"group member abstract in merge dimension: {w}")
        values.add(w[d])
        rest = tuple(ABSTRACT if i == d else v for i, v in enumerate(w))
        if merged is None:
            merged = rest
        elif merged != rest:
            raise PartitionError("group members differ outside the merge dimension")
    if len(values) != size:
        raise PartitionError("group does not cover the merge dimension")
    worldview_new = merged
    for w in group:
        worldview.remove(w)
    worldview.add(worldview_new)
    if tables is not None:
        pick = group[int(rng.integers(len(group)))] if rng is not None else group[0]
        pi = tables.policy[pick]
        val = sum(tables.value[w] for w in group) / len(group)
        px = sum(tables.prox[w] for w in group)
        for w in group:
            tables.drop(w)
        tables.policy[worldview_new] = pi
        tables.value[worldview_new] = val
        tables.prox[worldview_new] = px
    worldview._notify(group, [worldview_new])
    return worldview_new


def abstract_transition(worldview: Worldview, model: ActionModel,
                        w: Pattern, a: int | str) -> dict[Pattern, float]:
    """Transition distribution over worldview states under a uniform prior
    on the abstract dimensions of w. Symbolic: never enumerates w."""
    if isinstance(a, str):
        a = model.action_index(a)
    space = worldview.space
    dist: dict[Pattern, float] = {}
    for weight, box in symbolic_outcomes(space, model.trees[a], w):
        vol = box_volume(space, box)
        for cell in worldview.cover(box):
            frac = overlap_count(space, cell, box) / vol
            dist[cell] = dist.get(cell, 0.0) + weight * frac
    return dist


def abstract_reward(model: ActionModel, w: Pattern) -> float:
    """Uniform average one-step reward over the states of w."""
    return symbolic_reward(model.space, model.reward_tree, w)
