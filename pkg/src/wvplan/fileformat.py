"""Text formats: problem definitions and tireworld road graphs.

Problem grammar (one declaration per line, '#' comments):

    problem NAME
    gamma G
    dimension NAME VALUE...
    actions NAME...            # listed order fixes the action order; the
                               # first action is the default
    rule ACTION [GUARD...] -> [P: EFFECT... [| P: EFFECT...]...]
    reward [GUARD...] -> VALUE
    initial ASSIGN...
    goal ASSIGN...             # optional

GUARD/EFFECT/ASSIGN items are dim=value. A rule arrow without
probabilities means one certain outcome; an empty outcome is a no-op.
Rules keep their written order (first match wins); probabilities summing
below 1 leave the rest of the mass on "unchanged".
"""

from __future__ import annotations

from .domains import RoadGraph
from .model import ActionModel, ProblemInstance
from .rules import TransitionRule
from .space import FactoredSpace, SpaceError


class FormatError(ValueError):
    pass


def _clean_lines(text: str):
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield lineno, line


def _parse_assignment(tokens, lineno) -> dict:
    out = {}
    for tok in tokens:
        if "=" not in tok:
            raise FormatError(f"line {lineno}: expected dim=value, got {tok!r}")
        k, v = tok.split("=", 1)
        out[k] = v
    return out


def _parse_outcomes(text: str, lineno):
    """The right-hand side of a rule arrow -> list of (prob, effect dict)."""
    text = text.strip()
    if not text:
        return [(1.0, {})]
    outcomes = []
    for part in text.split("|"):
        part = part.strip()
        first = part.split(None, 1)[0] if part else ""
        if first.endswith(":"):
            prob_text, _, eff_text = part.partition(":")
            try:
                prob = float(prob_text)
            except ValueError:
                raise FormatError(
                    f"line {lineno}: bad probability {prob_text!r}") from None
            outcomes.append((prob, _parse_assignment(eff_text.split(), lineno)))
        else:
            outcomes.append((1.0, _parse_assignment(part.split(), lineno)))
    return outcomes


def parse_problem(text: str) -> ProblemInstance:
    name = "unnamed"
    gamma = 0.95
    dims: list[tuple[str, list[str]]] = []
    actions: list[str] = []
    raw_rules: list[tuple[str, list[str], str, int]] = []
    raw_rewards: list[tuple[dict, float]] = []
    initial: dict | None = None
    goal: dict | None = None

    for lineno, line in _clean_lines(text):
        head, _, rest = line.partition(" ")
        rest = rest.strip()
        if head == "problem":
            name = rest
        elif head == "gamma":
            gamma = float(rest)
        elif head == "dimension":
            tokens = rest.split()
            if len(tokens) < 3:
                raise FormatError(f"line {lineno}: dimension needs >= 2 values")
            dims.append((tokens[0], tokens[1:]))
        elif head == "actions":
            actions = rest.split()
        elif head == "rule":
            action, _, body = rest.partition(" ")
            if "->" not in body:
                raise FormatError(f"line {lineno}: rule needs '->'")
            guard_text, _, outcome_text = body.partition("->")
            raw_rules.append((action, guard_text.split(), outcome_text, lineno))
        elif head == "reward":
            if "->" not in rest:
                raise FormatError(f"line {lineno}: reward needs '->'")
            guard_text, _, value_text = rest.partition("->")
            raw_rewards.append(
                (_parse_assignment(guard_text.split(), lineno),
                 float(value_text)))
        elif head == "initial":
            initial = _parse_assignment(rest.split(), lineno)
        elif head == "goal":
            goal = _parse_assignment(rest.split(), lineno)
        else:
            raise FormatError(f"line {lineno}: unknown declaration {head!r}")

    if not dims:
        raise FormatError("no dimensions declared")
    if not actions:
        raise FormatError("no actions declared")
    if initial is None:
        raise FormatError("no initial state declared")
    space = FactoredSpace.of(*dims)
    rule_lists: dict[str, list[TransitionRule]] = {a: [] for a in actions}
    for action, guard_tokens, outcome_text, lineno in raw_rules:
        if action not in rule_lists:
            raise FormatError(f"line {lineno}: rule for unknown action {action!r}")
        guard = _parse_assignment(guard_tokens, lineno)
        outcomes = _parse_outcomes(outcome_text, lineno)
        try:
            rule_lists[action].append(
                TransitionRule.make(space, guard, outcomes=outcomes))
        except SpaceError as exc:
            raise FormatError(f"line {lineno}: {exc}") from None
    rewards = [(space.partial(**guard), value) for guard, value in raw_rewards]
    model = ActionModel.from_rules(space, actions, rule_lists, rewards)
    return ProblemInstance(
        name=name, space=space, model=model,
        initial_state=space.state(**initial), gamma_default=gamma,
        goal=space.partial(**goal) if goal is not None else None,
    )


def _render_assignment(space, assignment) -> str:
    return " ".join(
        f"{space.dimensions[d].name}={space.dimensions[d].values[v]}"
        for d, v in assignment
    )


def serialize_problem(problem: ProblemInstance) -> str:
    space = problem.space
    model = problem.model
    if not model.rule_lists:
        raise FormatError("model was not built from rule lists")
    out = [f"problem {problem.name}", f"gamma {problem.gamma_default!r}"]
    for dim in space.dimensions:
        out.append(f"dimension {dim.name} " + " ".join(dim.values))
    out.append("actions " + " ".join(model.actions))
    for action, rules in zip(model.actions, model.rule_lists):
        for rule in rules:
            parts = [
                f"{p!r}: {_render_assignment(space, eff)}".rstrip()
                for p, eff in rule.outcomes
            ]
            guard = _render_assignment(space, rule.guard)
            out.append(f"rule {action} {guard} -> ".replace("  ", " ")
                       + " | ".join(parts))
    for guard, value in model.reward_rules:
        out.append(f"reward {_render_assignment(space, guard)} -> {value!r}"
                   .replace("  ", " "))
    init = " ".join(
        f"{dim.name}={dim.values[v]}"
        for dim, v in zip(space.dimensions, problem.initial_state)
    )
    out.append(f"initial {init}")
    if problem.goal is not None:
        out.append(f"goal {_render_assignment(space, problem.goal)}")
    return "\n".join(out) + "\n"


def load_problem(path) -> ProblemInstance:
    with open(path) as fh:
        return parse_problem(fh.read())


def save_problem(problem: ProblemInstance, path) -> None:
    with open(path, "w") as fh:
        fh.write(serialize_problem(problem))


# --- road graphs ---------------------------------------------------------------

def parse_road_graph(text: str) -> RoadGraph:
    """One line per location:

        location NAME -> NEIGHBOR... [: MARKER...]

    with markers among spare/initial/goal. Edges are directed as written.
    """
    locations, edges, spares = [], [], set()
    initial = goal = ""
    for lineno, line in _clean_lines(text):
        head, _, rest = line.partition(" ")
        if head != "location":
            raise FormatError(f"line {lineno}: unknown declaration {head!r}")
        if "->" not in rest:
            raise FormatError(f"line {lineno}: location needs '->'")
        name_text, _, remainder = rest.partition("->")
        name = name_text.strip()
        adjacency, _, marker_text = remainder.partition(":")
        locations.append(name)
        for nbr in adjacency.split():
            edges.append((name, nbr))
        for marker in marker_text.replace(",", " ").split():
            if marker == "spare":
                spares.add(name)
            elif marker == "initial":
                initial = name
            elif marker == "goal":
                goal = name
            else:
                raise FormatError(f"line {lineno}: unknown marker {marker!r}")
    return RoadGraph(
        locations=tuple(locations), edges=tuple(edges),
        spare_locations=frozenset(spares), initial=initial, goal=goal,
    )


def serialize_road_graph(graph: RoadGraph) -> str:
    adj: dict[str, list[str]] = {u: [] for u in graph.locations}
    for u, v in graph.edges:
        adj[u].append(v)
    out = []
    for u in graph.locations:
        markers = []
        if u in graph.spare_locations:
            markers.append("spare")
        if u == graph.initial:
            markers.append("initial")
        if u == graph.goal:
            markers.append("goal")
        line = f"location {u} -> {' '.join(adj[u])}"
        if markers:
            line += " : " + " ".join(markers)
        out.append(line)
    return "\n".join(out) + "\n"


def load_road_graph(path) -> RoadGraph:
    with open(path) as fh:
        return parse_road_graph(fh.read())


def save_road_graph(graph: RoadGraph, path) -> None:
    with open(path, "w") as fh:
        fh.write(serialize_road_graph(graph))
