"""Built-in problem generators.

Grid family: a 10x10 grid with a horizontal wall between y=2 and y=3
(doors d1 at x=2 and d2 at x=7) and a vertical wall between x=4 and x=5,
open at y in {0,1,2}, with door d3 at y=9. Moves succeed 80% of the time,
opening a door 10%; running into a wall or closed door causes permanent
damage. Start is (0,0), the goal cell is (7,7).

Key variants place key 1 at (7,1), key 2 at (9,9) (behind the walls, so
effectively a decoy) and key 3 at (9,0); a door only opens while holding
its key.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .model import ActionModel, ProblemInstance
from .rules import TransitionRule
from .space import FactoredSpace, SpaceError

GRID = 10
MOVE_P = 0.8
OPEN_P = 0.1

# (door name, cell pairs adjacent to it, key name)
DOORS = [
    ("d1", [(2, 2), (2, 3)], "k1"),
    ("d2", [(7, 2), (7, 3)], "k2"),
    ("d3", [(4, 9), (5, 9)], "k3"),
]
KEY_LOCATIONS = {"k1": (7, 1), "k2": (9, 9), "k3": (9, 0)}
GOAL_CELL = (7, 7)

_DIGITS = [str(i) for i in range(GRID)]
_BOOL = ["no", "yes"]
_DOOR = ["closed", "open"]


def _n(i: int) -> str:
    return str(i)


def _move_rules(space, axis: str, delta: int, tile_axis: str | None = None):
    """The shared movement scaffold: door passages, walls, generic moves.

    axis is "x" or "y"; delta +1/-1. With tile_axis set, running off the
    outer edge crosses into the adjacent tile instead of causing damage.
    """
    r = []
    def mk(g, p=1.0, effect=None):
        return TransitionRule.make(space, g, p, effect)
    if axis == "y":
        # doors d1/d2 sit in the horizontal wall between y=2 and y=3
        near, far = (2, 3) if delta > 0 else (3, 2)
        for door, x in [("d1", 2), ("d2", 7)]:
            r.append(mk({"x": _n(x), "y": _n(near), door: "open"},
                        MOVE_P, {"y": _n(far)}))
        wall = near  # the wall row blocks everyone else
        edge = GRID - 1 if delta > 0 else 0
    else:
        # the vertical wall between x=4 and x=5 is open at y in {0,1,2},
        # with door d3 at y=9
        near, far = (4, 5) if delta > 0 else (5, 4)
        for y in (0, 1, 2):
            r.append(mk({"x": _n(near), "y": _n(y)}, MOVE_P, {"x": _n(far)}))
        r.append(mk({"x": _n(near), "y": _n(GRID - 1), "d3": "open"},
                    MOVE_P, {"x": _n(far)}))
        wall = near
        edge = GRID - 1 if delta > 0 else 0
    r.append(mk({axis: _n(wall)}, effect={"dmg": "yes"}))
    if tile_axis is None:
        r.append(mk({axis: _n(edge)}, effect={"dmg": "yes"}))
    else:
        opposite = 0 if delta > 0 else GRID - 1
        r.append(mk({axis: _n(edge), tile_axis: _n(edge)},
                    effect={"dmg": "yes"}))
        for t in range(GRID):
            if t == edge:
                continue
            r.append(mk({axis: _n(edge), tile_axis: _n(t)}, MOVE_P,
                        {axis: _n(opposite), tile_axis: _n(t + delta)}))
    for k in range(GRID):
        if k == wall or k == edge:
            continue
        r.append(mk({axis: _n(k)}, MOVE_P, {axis: _n(k + delta)}))
    return r


def _open_rules(space, keyed: str | None):
    """Door opening. keyed=None: unlocked doors (bare 10% rule per door
    cell). keyed="multi": requires kN=yes. keyed="single": requires
    held=kN. Keyed variants add no-op rows at door cells (opening without
    the key is ineffective, not damaging)."""
    def mk(g, p=1.0, effect=None):
        return TransitionRule.make(space, g, p, effect)
    r = []
    for door, cells, key in DOORS:
        for x, y in cells:
            guard = {"x": _n(x), "y": _n(y)}
            if keyed == "multi":
                guard = {**guard, door: "closed", key: "yes"}
            elif keyed == "single":
                guard = {**guard, door: "closed", "held": key}
            r.append(mk(guard, OPEN_P, {door: "open"}))
    if keyed is not None:
        for door, cells, _ in DOORS:
            for x, y in cells:
                r.append(mk({"x": _n(x), "y": _n(y)}))
    r.append(mk({}, effect={"dmg": "yes"}))
    return r


def _grid_reward(space, goal_extra: dict | None = None):
    goal = {"x": _n(GOAL_CELL[0]), "y": _n(GOAL_CELL[1]), **(goal_extra or {})}
    return [
        (space.partial(dmg="yes"), -2.0),
        (space.partial(**goal), 0.0),
        ((), -1.0),
    ]


def _grid_base(space, tiled: bool = False):
    tx = "xx" if tiled else None
    ty = "yy" if tiled else None
    return {
        "South": _move_rules(space, "y", +1, ty),
        "North": _move_rules(space, "y", -1, ty),
        "East": _move_rules(space, "x", +1, tx),
        "West": _move_rules(space, "x", -1, tx),
    }


def _build_3doors() -> ProblemInstance:
    space = FactoredSpace.of(
        ("x", _DIGITS), ("y", _DIGITS),
        ("d1", _DOOR), ("d2", _DOOR), ("d3", _DOOR), ("dmg", _BOOL),
    )
    rules = _grid_base(space)
    rules["Open"] = _open_rules(space, keyed=None)
    rules["Stay"] = []
    actions = ["Stay", "South", "North", "East", "West", "Open"]
    model = ActionModel.from_rules(space, actions, rules, _grid_reward(space))
    s0 = space.state(x="0", y="0", d1="closed", d2="closed", d3="closed", dmg="no")
    return ProblemInstance("3doors", space, model, s0,
                           goal=space.partial(x="7", y="7", dmg="no"))


def _build_3keys() -> ProblemInstance:
    space = FactoredSpace.of(
        ("x", _DIGITS), ("y", _DIGITS),
        ("d1", _DOOR), ("d2", _DOOR), ("d3", _DOOR), ("dmg", _BOOL),
        ("k1", _BOOL), ("k2", _BOOL), ("k3", _BOOL),
    )
    rules = _grid_base(space)
    rules["Open"] = _open_rules(space, keyed="multi")
    rules["Pickup"] = [
        TransitionRule.make(space, {"x": _n(x), "y": _n(y)}, effect={key: "yes"})
        for key, (x, y) in sorted(KEY_LOCATIONS.items())
    ]
    rules["Stay"] = []
    actions = ["Stay", "South", "North", "East", "West", "Open", "Pickup"]
    model = ActionModel.from_rules(space, actions, rules, _grid_reward(space))
    s0 = space.state(x="0", y="0", d1="closed", d2="closed", d3="closed",
                     dmg="no", k1="no", k2="no", k3="no")
    return ProblemInstance("3keys", space, model, s0,
                           goal=space.partial(x="7", y="7", dmg="no"))


def _build_1key() -> ProblemInstance:
    # one hand: picking up a key drops the held one
    space = FactoredSpace.of(
        ("x", _DIGITS), ("y", _DIGITS),
        ("d1", _DOOR), ("d2", _DOOR), ("d3", _DOOR), ("dmg", _BOOL),
        ("held", ["none", "k1", "k2", "k3"]),
    )
    rules = _grid_base(space)
    rules["Open"] = _open_rules(space, keyed="single")
    rules["Pickup"] = [
        TransitionRule.make(space, {"x": _n(x), "y": _n(y)}, effect={"held": key})
        for key, (x, y) in sorted(KEY_LOCATIONS.items())
    ]
    rules["Stay"] = []
    actions = ["Stay", "South", "North", "East", "West", "Open", "Pickup"]
    model = ActionModel.from_rules(space, actions, rules, _grid_reward(space))
    s0 = space.state(x="0", y="0", d1="closed", d2="closed", d3="closed",
                     dmg="no", held="none")
    return ProblemInstance("1key", space, model, s0,
                           goal=space.partial(x="7", y="7", dmg="no"))


# --- shuttlebot ---------------------------------------------------------------

DEPOTS = [((0, 0), "no"), ((7, 7), "yes")]  # (cell, loaded flag that triggers)
_DMG3 = ["none", "light", "heavy"]


def _escalate(space, guard: dict, extra_effect: dict | None = None):
    """Deterministic damage with three levels: none->light->heavy->stuck."""
    eff = extra_effect or {}
    return [
        TransitionRule.make(space, {**guard, "dmg": "none"},
                            effect={**eff, "dmg": "light"}),
        TransitionRule.make(space, {**guard, "dmg": "light"},
                            effect={**eff, "dmg": "heavy"}),
        TransitionRule.make(space, {**guard, "dmg": "heavy"}, effect=eff),
    ]


def _build_shuttlebot() -> ProblemInstance:
    space = FactoredSpace.of(
        ("x", _DIGITS), ("y", _DIGITS),
        ("d1", _DOOR), ("d2", _DOOR), ("d3", _DOOR), ("dmg", _DMG3),
        ("loaded", _BOOL),
    )
    toggled = {"no": "yes", "yes": "no"}
    # per-action moves as (delta axis, delta) for depot handling
    moves = {"South": ("y", +1), "North": ("y", -1),
             "East": ("x", +1), "West": ("x", -1)}

    def depot_front_rules(action: str):
        """At a depot with the matching flag, every action also toggles the
        flag (cargo is exchanged on arrival); the +1 reward state therefore
        lasts exactly one step."""
        out = []
        for (dx, dy), flag in DEPOTS:
            guard = {"x": _n(dx), "y": _n(dy), "loaded": flag}
            toggle = {"loaded": toggled[flag]}
            if action == "Stay":
                out.append(TransitionRule.make(space, guard, effect=toggle))
            elif action == "Open":
                out.extend(_escalate(space, guard, toggle))
            else:
                axis, delta = moves[action]
                pos = dx if axis == "x" else dy
                tgt = pos + delta
                blocked = (
                    tgt < 0 or tgt >= GRID
                    or (axis == "y" and ((delta > 0 and pos == 2) or (delta < 0 and pos == 3)))
                    or (axis == "x" and ((delta > 0 and pos == 4) or (delta < 0 and pos == 5)))
                )
                if blocked:
                    out.extend(_escalate(space, guard, toggle))
                else:
                    out.append(TransitionRule.make(space, guard, outcomes=[
                        (MOVE_P, {axis: _n(tgt), **toggle}),
                        (1 - MOVE_P, toggle),
                    ]))
        return out

    def with_escalation(base_rules):
        """Rewrite dmg=yes effects from the 2-level scaffold as escalation."""
        dmg_dim = space.dim_index("dmg")
        out = []
        for r in base_rules:
            eff = dict(r.outcomes[0][1])
            if len(r.outcomes) == 1 and eff.get(dmg_dim) is not None:
                guard = {space.dimensions[d].name: space.dimensions[d].values[v]
                         for d, v in r.guard}
                out.extend(_escalate(space, guard))
            else:
                out.append(r)
        return out

    # the 2-level scaffold compiles against this space only through the
    # shared value names, so build the raw rules here with dmg names mapped
    def base(action):
        if action == "Open":
            raw = _open_rules(space_2lvl, keyed=None)
        else:
            axis, delta = moves[action]
            raw = _move_rules(space_2lvl, axis, delta)
        return raw

    space_2lvl = FactoredSpace.of(
        ("x", _DIGITS), ("y", _DIGITS),
        ("d1", _DOOR), ("d2", _DOOR), ("d3", _DOOR), ("dmg", _BOOL),
        ("loaded", _BOOL),
    )

    def translate(rule: TransitionRule):
        # identical layout except the dmg dimension; only "yes" appears in
        # effects and never in guards of the scaffold rules
        def conv(assign):
            items = []
            for d, v in assign:
                name = space_2lvl.dimensions[d].name
                value = space_2lvl.dimensions[d].values[v]
                items.append((space.dim_index(name),
                              space.dimensions[space.dim_index(name)].index(
                                  "light" if (name, value) == ("dmg", "yes") else value)))
            return tuple(sorted(items))
        return TransitionRule(conv(rule.guard),
                              tuple((p, conv(e)) for p, e in rule.outcomes))

    rules = {}
    for action in ["South", "North", "East", "West", "Open"]:
        translated = [translate(r) for r in base(action)]
        rules[action] = depot_front_rules(action) + with_escalation(translated)
    rules["Stay"] = depot_front_rules("Stay")
    actions = ["Stay", "South", "North", "East", "West", "Open"]
    reward = [
        (space.partial(dmg="heavy"), -2.0),
        (space.partial(dmg="light"), -1.0),
        (space.partial(x="0", y="0", loaded="no"), 1.0),
        (space.partial(x="7", y="7", loaded="yes"), 1.0),
        ((), 0.0),
    ]
    model = ActionModel.from_rules(space, actions, rules, reward)
    s0 = space.state(x="0", y="0", d1="closed", d2="closed", d3="closed",
                     dmg="none", loaded="no")
    return ProblemInstance("shuttlebot", space, model, s0)


def _build_10x10() -> ProblemInstance:
    # the 3Doors tile repeated on a 10x10 super-grid; xx/yy index the tile
    space = FactoredSpace.of(
        ("x", _DIGITS), ("y", _DIGITS), ("xx", _DIGITS), ("yy", _DIGITS),
        ("d1", _DOOR), ("d2", _DOOR), ("d3", _DOOR), ("dmg", _BOOL),
    )
    rules = _grid_base(space, tiled=True)
    rules["Open"] = _open_rules(space, keyed=None)
    rules["Stay"] = []
    actions = ["Stay", "South", "North", "East", "West", "Open"]
    goal_extra = {"xx": "9", "yy": "9"}
    model = ActionModel.from_rules(space, actions, rules,
                                   _grid_reward(space, goal_extra))
    s0 = space.state(x="0", y="0", xx="0", yy="0",
                     d1="closed", d2="closed", d3="closed", dmg="no")
    return ProblemInstance("10x10", space, model, s0,
                           goal=space.partial(x="7", y="7", xx="9", yy="9", dmg="no"))


GRID_VARIANTS = {
    "3doors": _build_3doors,
    "1key": _build_1key,
    "3keys": _build_3keys,
    "shuttlebot": _build_shuttlebot,
    "10x10": _build_10x10,
}


def build_grid_problem(variant: str) -> ProblemInstance:
    try:
        builder = GRID_VARIANTS[variant.lower()]
    except KeyError:
        raise SpaceError(
            f"unknown grid variant {variant!r}; "
            f"choose from {sorted(GRID_VARIANTS)}"
        ) from None
    return builder()


# --- robot4 -------------------------------------------------------------------

def build_robot4(k: int, forward_p: float = 0.8) -> ProblemInstance:
    """A cycle of k rooms, each with a light. Moving forward works (with
    probability forward_p) only while the current room's light is on; the
    task is to get from room 0 to room k-1."""
    if k < 2:
        raise SpaceError(f"robot4 needs at least 2 rooms, got {k}")
    rooms = [str(i) for i in range(k)]
    dims = [("room", rooms)] + [(f"light{i}", ["off", "on"]) for i in range(k)]
    space = FactoredSpace.of(*dims)
    rules = {
        "Forward": [
            TransitionRule.make(space, {"room": str(i), f"light{i}": "on"},
                                forward_p, {"room": str((i + 1) % k)})
            for i in range(k)
        ],
        "LightOn": [
            TransitionRule.make(space, {"room": str(i)}, effect={f"light{i}": "on"})
            for i in range(k)
        ],
        "LightOff": [
            TransitionRule.make(space, {"room": str(i)}, effect={f"light{i}": "off"})
            for i in range(k)
        ],
        "Stay": [],
    }
    actions = ["Stay", "Forward", "LightOn", "LightOff"]
    reward = [
        (space.partial(room=str(k - 1)), 0.0),
        ((), -1.0),
    ]
    model = ActionModel.from_rules(space, actions, rules, reward)
    s0 = space.state(room="0", **{f"light{i}": "off" for i in range(k)})
    return ProblemInstance(f"robot4-{k}", space, model, s0,
                           goal=space.partial(room=str(k - 1)))


# --- tireworld ----------------------------------------------------------------

@dataclass(frozen=True)
class RoadGraph:
    locations: tuple[str, ...]
    edges: tuple[tuple[str, str], ...]  # directed
    spare_locations: frozenset = frozenset()
    initial: str = ""
    goal: str = ""

    def __post_init__(self):
        locs = set(self.locations)
        if len(locs) != len(self.locations):
            raise SpaceError("duplicate location names")
        for u, v in self.edges:
            if u not in locs or v not in locs:
                raise SpaceError(f"edge ({u}, {v}) references unknown location")
        for s in self.spare_locations:
            if s not in locs:
                raise SpaceError(f"spare location {s!r} unknown")
        if self.initial not in locs:
            raise SpaceError(f"initial location {self.initial!r} unknown")
        if self.goal not in locs:
            raise SpaceError(f"goal location {self.goal!r} unknown")


def build_tireworld(graph: RoadGraph, flat_probability: float = 0.5) -> ProblemInstance:
    """Drive from start to goal; each traversal risks a flat tire, which
    blocks driving until a carried spare is fitted. The one-location-at-a-
    time constraint is deliberately not encoded in the dynamics."""
    dims = ([(f"at_{u}", _BOOL) for u in graph.locations]
            + [(f"spare_{u}", _BOOL) for u in graph.locations]
            + [("carrying", _BOOL), ("flat", _BOOL)])
    space = FactoredSpace.of(*dims)
    rules: dict[str, list[TransitionRule]] = {"Stay": []}
    actions = ["Stay"]
    for u, v in graph.edges:
        name = f"Move-{u}-{v}"
        actions.append(name)
        rules[name] = [TransitionRule.make(
            space, {f"at_{u}": "yes", "flat": "no"},
            outcomes=[
                (flat_probability, {f"at_{u}": "no", f"at_{v}": "yes", "flat": "yes"}),
                (1 - flat_probability, {f"at_{u}": "no", f"at_{v}": "yes"}),
            ],
        )]
    actions.append("Pickup")
    rules["Pickup"] = [
        TransitionRule.make(
            space, {f"at_{u}": "yes", f"spare_{u}": "yes", "carrying": "no"},
            effect={"carrying": "yes", f"spare_{u}": "no"})
        for u in graph.locations if u in graph.spare_locations
    ]
    actions.append("ChangeTire")
    rules["ChangeTire"] = [TransitionRule.make(
        space, {"flat": "yes", "carrying": "yes"},
        effect={"flat": "no", "carrying": "no"})]
    reward = [
        (space.partial(**{f"at_{graph.goal}": "yes"}), 0.0),
        ((), -1.0),
    ]
    model = ActionModel.from_rules(space, actions, rules, reward)
    assignment = {f"at_{u}": ("yes" if u == graph.initial else "no")
                  for u in graph.locations}
    assignment.update({f"spare_{u}": ("yes" if u in graph.spare_locations else "no")
                       for u in graph.locations})
    s0 = space.state(carrying="no", flat="no", **assignment)
    return ProblemInstance("tireworld", space, model, s0,
                           goal=space.partial(**{f"at_{graph.goal}": "yes"}))


def tire_small_graph() -> RoadGraph:
    """A 5-location built-in: a risky short road and a safer long way round
    with spares on it."""
    locs = ("a", "b", "c", "d", "e")
    edges = []
    for u, v in [("a", "b"), ("b", "c"), ("c", "e"), ("a", "d"), ("d", "e")]:
        edges += [(u, v), (v, u)]
    return RoadGraph(locations=locs, edges=tuple(edges),
                     spare_locations=frozenset({"b", "c"}),
                     initial="a", goal="e")


def build_problem(selector: str) -> ProblemInstance:
    """Problem lookup for the command line: a grid variant name,
    robot4:<k>, or tireworld[:<graph-file>]."""
    sel = selector.lower()
    if sel in GRID_VARIANTS:
        return build_grid_problem(sel)
    if sel.startswith("robot4:"):
        return build_robot4(int(sel.split(":", 1)[1]))
    if sel == "tireworld":
        return build_tireworld(tire_small_graph())
    if sel.startswith("tireworld:"):
        from .fileformat import load_road_graph
        return build_tireworld(load_road_graph(selector.split(":", 1)[1]))
    raise SpaceError(f"unknown problem selector {selector!r}")
