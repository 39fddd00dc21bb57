"""Factored state spaces: named dimensions with finite value sets.

A specific state is a plain tuple of value indices, one per dimension.
Value names are kept in a per-dimension table so states stay cheap.
"""

from __future__ import annotations

from dataclasses import dataclass, field

MAX_DIMENSION_VALUES = 2 ** 16


class SpaceError(ValueError):
    pass


@dataclass(frozen=True)
class Dimension:
    name: str
    values: tuple[str, ...]

    def __post_init__(self):
        if len(self.values) < 2:
            raise SpaceError(
                f"dimension {self.name!r} has {len(self.values)} value(s); need >= 2"
            )
        if len(self.values) > MAX_DIMENSION_VALUES:
            raise SpaceError(
                f"dimension {self.name!r} has too many values "
                f"({len(self.values)} > {MAX_DIMENSION_VALUES})"
            )
        if len(set(self.values)) != len(self.values):
            raise SpaceError(f"dimension {self.name!r} has duplicate values")

    @property
    def size(self) -> int:
        return len(self.values)

    def index(self, value: str) -> int:
        try:
            return self.values.index(value)
        except ValueError:
            raise SpaceError(
                f"dimension {self.name!r} has no value {value!r}"
            ) from None


@dataclass(frozen=True)
class FactoredSpace:
    dimensions: tuple[Dimension, ...]
    _dim_index: dict = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        names = [d.name for d in self.dimensions]
        if len(set(names)) != len(names):
            raise SpaceError("dimension names must be unique")
        object.__setattr__(
            self, "_dim_index", {d.name: i for i, d in enumerate(self.dimensions)}
        )

    @classmethod
    def of(cls, *dims: tuple[str, list[str]]) -> "FactoredSpace":
        return cls(tuple(Dimension(n, tuple(vs)) for n, vs in dims))

    @property
    def num_dimensions(self) -> int:
        return len(self.dimensions)

    def size(self) -> int:
        """Exact number of specific states (Python ints never overflow)."""
        n = 1
        for d in self.dimensions:
            n *= d.size
        return n

    def dim_index(self, name: str) -> int:
        try:
            return self._dim_index[name]
        except KeyError:
            raise SpaceError(f"no dimension named {name!r}") from None

    def state(self, **assignment: str) -> tuple[int, ...]:
        """Build a specific state from value names; every dimension required."""
        missing = [d.name for d in self.dimensions if d.name not in assignment]
        if missing:
            raise SpaceError(f"state is missing dimensions: {missing}")
        extra = set(assignment) - set(self._dim_index)
        if extra:
            raise SpaceError(f"unknown dimensions in state: {sorted(extra)}")
        return tuple(
            d.index(assignment[d.name]) for d in self.dimensions
        )

    def partial(self, **assignment: str) -> tuple[tuple[int, int], ...]:
        """A partial assignment as ((dim_index, value_index), ...), dim-ordered."""
        items = []
        for name, value in assignment.items():
            d = self.dim_index(name)
            items.append((d, self.dimensions[d].index(value)))
        return tuple(sorted(items))

    def check_state(self, s: tuple[int, ...]) -> None:
        if len(s) != len(self.dimensions):
            raise SpaceError(f"state has {len(s)} components, expected {len(self.dimensions)}")
        for d, v in enumerate(s):
            if not 0 <= v < self.dimensions[d].size:
                raise SpaceError(
                    f"component {self.dimensions[d].name}={v} out of range"
                )

    def render(self, s: tuple[int, ...]) -> str:
        """Human form used in traces: dim=value;..."""
        return ";".join(
            f"{d.name}={d.values[v]}" for d, v in zip(self.dimensions, s)
        )

    def state_index(self, s: tuple[int, ...]) -> int:
        """Mixed-radix index of a specific state (row-major, first dim slowest)."""
        idx = 0
        for d, v in zip(self.dimensions, s):
            idx = idx * d.size + v
        return idx

    def state_from_index(self, idx: int) -> tuple[int, ...]:
        out = []
        for d in reversed(self.dimensions):
            idx, v = divmod(idx, d.size)
            out.append(v)
        return tuple(reversed(out))


def space_size(space: FactoredSpace) -> int:
    return space.size()
