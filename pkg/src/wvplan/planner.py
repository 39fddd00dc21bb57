"""Interleaved value/policy sweeps over a worldview.

Two policy-update variants: "simple" scores actions against raw successor
values; "lua" (locally uniform abstraction) first averages successor
values over every dimension that is abstract in any possible outcome, so
an update never compares information at mixed abstraction levels.

The TransitionCache keeps symbolic transition rows keyed by worldview
pattern; refine/coarsen only ever replace patterns, so invalidating every
cached row that references a removed pattern is sufficient. CompiledView
freezes the current partition into flat CSR arrays for the sweep kernels.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from . import _kernels
from .model import ActionModel
from .rules import ABSTRACT
from .worldview import (
    PlannerTables,
    Worldview,
    abstract_reward,
    abstract_transition,
    block_size,
    overlap_count,
)

SELF_LOOP_TOL = 1e-12

PHASE_NAMES = ("policy-value", "policy-refine", "proximity-calc",
               "proximity-refine", "proximity-coarsen")


@dataclass(frozen=True)
class PlannerConfig:
    gamma: float = 0.95
    gamma_p: float = 0.95
    replanning_probability: float = 0.1
    n_sweeps: int = 10
    stabilize_sweeps: int = 2  # value-only sweeps after a proximity refine
    variant: str = "lua"  # or "simple"
    refine_threshold: float | None = None  # None -> 1/(4|W|)
    coarsen_threshold: float | None = None
    phase_weights: dict = field(default_factory=dict)  # name -> weight
    max_worldview_states: int = 10 ** 6
    initial_reward_step: bool = True
    initial_nexus_step: bool = True
    proximity_residual: float = 1e-10
    use_numba: bool = True

    def __post_init__(self):
        if self.variant not in ("simple", "lua"):
            raise ValueError(f"unknown planner variant {self.variant!r}")
        for g in (self.gamma, self.gamma_p):
            if not 0 <= g < 1:
                raise ValueError(f"discount {g} not in [0, 1)")
        if not 0 <= self.replanning_probability <= 1:
            raise ValueError("replanning probability not in [0, 1]")
        unknown = set(self.phase_weights) - set(PHASE_NAMES)
        if unknown:
            raise ValueError(f"unknown phases in weights: {sorted(unknown)}")

    def with_options(self, **kw) -> "PlannerConfig":
        return replace(self, **kw)

    def refine_threshold_for(self, worldview_size: int) -> float:
        if self.refine_threshold is not None:
            return self.refine_threshold
        return 1.0 / (4.0 * worldview_size)

    def coarsen_threshold_for(self, worldview_size: int) -> float:
        if self.coarsen_threshold is not None:
            return self.coarsen_threshold
        return 1.0 / (4.0 * worldview_size)


class TransitionCache:
    """Pattern-keyed abstract transition rows with removal-driven
    invalidation. Successor columns are stored as stable pattern ids so
    compiled views can renumber without touching the cache."""

    def __init__(self, worldview: Worldview, model: ActionModel):
        self.worldview = worldview
        self.model = model
        self.num_actions = model.num_actions
        self._ids: dict[tuple, int] = {}
        self._id_patterns: list[tuple] = []
        # (pattern, action) -> (succ_ids, probs, self_loop)
        self._rows: dict = {}
        # pattern -> {a: (succ_ids, coefs)} for the LUA-averaged scoring rows
        self._lua: dict = {}
        self._rewards: dict = {}
        # referenced pattern -> set of cache keys to drop when it is removed
        self._rdeps: dict = {}
        worldview.add_listener(self._on_change)

    def pattern_id(self, pattern) -> int:
        pid = self._ids.get(pattern)
        if pid is None:
            pid = len(self._id_patterns)
            self._ids[pattern] = pid
            self._id_patterns.append(pattern)
        return pid

    def id_pattern(self, pid: int):
        return self._id_patterns[pid]

    @property
    def id_count(self) -> int:
        return len(self._id_patterns)

    def _depend(self, key, pattern) -> None:
        self._rdeps.setdefault(pattern, set()).add(key)

    def _on_change(self, removed, added) -> None:
        # additions always lie inside the union of the removals, so removal
        # tracking alone keeps every cached row consistent
        for p in removed:
            self._rewards.pop(p, None)
            for key in self._rdeps.pop(p, ()):
                if key[0] == "lua":
                    self._lua.pop(key[1], None)
                else:
                    self._rows.pop(key, None)

    def reward(self, w) -> float:
        r = self._rewards.get(w)
        if r is None:
            r = abstract_reward(self.model, w)
            self._rewards[w] = r
        return r

    def row(self, w, a: int):
        """(successor ids, probabilities, is-self-loop) for (w, a)."""
        key = (w, a)
        row = self._rows.get(key)
        if row is not None:
            return row
        dist = abstract_transition(self.worldview, self.model, w, a)
        succs = sorted(dist)
        probs = np.array([dist[s] for s in succs])
        ids = np.array([self.pattern_id(s) for s in succs], dtype=np.int64)
        self_loop = (len(succs) == 1 and succs[0] == w
                     and probs[0] >= 1 - SELF_LOOP_TOL)
        row = (ids, probs, self_loop)
        self._rows[key] = row
        self._depend(key, w)
        for s in succs:
            self._depend(key, s)
        return row

    def successors(self, w, a: int):
        ids, probs, _ = self.row(w, a)
        return [(self._id_patterns[i], p) for i, p in zip(ids, probs)]

    def abstract_dims(self, w) -> tuple:
        """Dimensions abstract in any possible successor under any action."""
        dims = set()
        for a in range(self.num_actions):
            ids, _, _ = self.row(w, a)
            for i in ids:
                succ = self._id_patterns[i]
                dims.update(d for d, v in enumerate(succ) if v == ABSTRACT)
        return tuple(sorted(dims))

    def lua_rows(self, w) -> dict:
        """Per-action scoring rows with successor values averaged over the
        locally uniform abstraction of each successor."""
        rows = self._lua.get(w)
        if rows is not None:
            return rows
        key = ("lua", w)
        space = self.worldview.space
        absdims = self.abstract_dims(w)
        deps = {w}
        rows = {}
        for a in range(self.num_actions):
            ids, probs, _ = self.row(w, a)
            coefs: dict[int, float] = {}
            for i, p in zip(ids, probs):
                succ = self._id_patterns[i]
                deps.add(succ)
                box = list(succ)
                for d in absdims:
                    box[d] = ABSTRACT
                box = tuple(box)
                vol = block_size(space, box)
                for cell in self.worldview.cover(box):
                    deps.add(cell)
                    frac = overlap_count(space, cell, box) / vol
                    cid = self.pattern_id(cell)
                    coefs[cid] = coefs.get(cid, 0.0) + p * frac
            cids = np.array(sorted(coefs), dtype=np.int64)
            rows[a] = (cids, np.array([coefs[c] for c in cids]))
        self._lua[w] = rows
        for p in deps:
            self._depend(key, p)
        return rows


class CompiledView:
    """The current partition flattened for the kernels: sorted patterns,
    reward vector, plain successor CSR, and (for LUA) scoring CSR."""

    def __init__(self, worldview: Worldview, cache: TransitionCache,
                 variant: str):
        self.version = worldview.version
        self.variant = variant
        self.patterns = worldview.sorted_patterns()
        self.index = {p: i for i, p in enumerate(self.patterns)}
        n = len(self.patterns)
        nA = cache.num_actions
        self.num_actions = nA
        self.rewards = np.array([cache.reward(p) for p in self.patterns])

        id2pos = np.full(cache.id_count + 1, -1, dtype=np.int64)
        # build plain rows first so every needed id exists before remapping
        plain = [cache.row(p, a) for p in self.patterns for a in range(nA)]
        lua = None
        if variant == "lua":
            lua_by_pattern = [cache.lua_rows(p) for p in self.patterns]
            lua = [lua_by_pattern[i][a] for i in range(n) for a in range(nA)]
        if cache.id_count >= id2pos.shape[0]:
            id2pos = np.full(cache.id_count + 1, -1, dtype=np.int64)
        for p, i in self.index.items():
            id2pos[cache.pattern_id(p)] = i

        def assemble(rows, with_flags):
            ptr = np.zeros(n * nA + 1, dtype=np.int64)
            for k, row in enumerate(rows):
                ptr[k + 1] = ptr[k] + row[0].shape[0]
            ids = np.concatenate([row[0] for row in rows]) if rows else \
                np.empty(0, dtype=np.int64)
            vals = np.concatenate([row[1] for row in rows]) if rows else \
                np.empty(0)
            cols = id2pos[ids]
            if cols.size and cols.min() < 0:
                raise RuntimeError("stale cache row referenced a removed pattern")
            flags = None
            if with_flags:
                flags = np.array([row[2] for row in rows], dtype=np.bool_)
            return ptr, cols, vals, flags

        self.ptr, self.col, self.prob, self.self_loop = assemble(plain, True)
        if lua is not None:
            self.qptr, self.qcol, self.qcoef, _ = assemble(lua, False)
        else:
            self.qptr, self.qcol, self.qcoef = self.ptr, self.col, self.prob

    def load_tables(self, tables: PlannerTables):
        pi = np.array([tables.policy[p] for p in self.patterns], dtype=np.int64)
        v = np.array([tables.value[p] for p in self.patterns])
        return pi, v

    def store_tables(self, tables: PlannerTables, pi, v) -> None:
        for i, p in enumerate(self.patterns):
            tables.policy[p] = int(pi[i])
            tables.value[p] = float(v[i])


def ensure_view(view: CompiledView | None, worldview: Worldview,
                cache: TransitionCache, config: PlannerConfig) -> CompiledView:
    if view is None or view.version != worldview.version \
            or view.variant != config.variant:
        view = CompiledView(worldview, cache, config.variant)
    return view


def policy_value_phase(worldview: Worldview, tables: PlannerTables,
                       config: PlannerConfig, model: ActionModel | None = None,
                       cache: TransitionCache | None = None,
                       view: CompiledView | None = None) -> CompiledView:
    """n_sweeps iterations of: value sweep, then per-state policy update
    immediately followed by a value update. Sweep order is sorted pattern
    order. Returns the compiled view for reuse."""
    if cache is None:
        cache = TransitionCache(worldview, model)
    view = ensure_view(view, worldview, cache, config)
    pi, v = view.load_tables(tables)
    _kernels.run_phase_sweeps(
        config.n_sweeps, pi, v, view.rewards,
        view.ptr, view.col, view.prob, view.self_loop,
        view.qptr, view.qcol, view.qcoef,
        config.gamma, view.num_actions, config.use_numba,
    )
    view.store_tables(tables, pi, v)
    return view


def value_only_phase(worldview: Worldview, tables: PlannerTables,
                     config: PlannerConfig, iterations: int,
                     model: ActionModel | None = None,
                     cache: TransitionCache | None = None,
                     view: CompiledView | None = None) -> CompiledView:
    if iterations <= 0:
        return view
    if cache is None:
        cache = TransitionCache(worldview, model)
    view = ensure_view(view, worldview, cache, config)
    pi, v = view.load_tables(tables)
    _kernels.run_value_sweeps(
        iterations, pi, v, view.rewards,
        view.ptr, view.col, view.prob, view.self_loop,
        config.gamma, view.num_actions, config.use_numba,
    )
    view.store_tables(tables, pi, v)
    return view


# --- single-state operations (reference semantics, used by tests too) ---------

def value_update(cache: TransitionCache, tables: PlannerTables, w,
                 config: PlannerConfig) -> None:
    a = tables.policy[w]
    ids, probs, self_loop = cache.row(w, a)
    r = cache.reward(w)
    if self_loop:
        tables.value[w] = r / (1.0 - config.gamma)
    else:
        total = sum(p * tables.value[cache.id_pattern(i)]
                    for i, p in zip(ids, probs))
        tables.value[w] = r + config.gamma * total


def policy_update_simple(cache: TransitionCache, tables: PlannerTables, w) -> None:
    best_a, best_q = 0, -np.inf
    for a in range(cache.num_actions):
        ids, probs, _ = cache.row(w, a)
        q = sum(p * tables.value[cache.id_pattern(i)]
                for i, p in zip(ids, probs))
        if q > best_q:
            best_q, best_a = q, a
    tables.policy[w] = best_a


def policy_update_lua(cache: TransitionCache, tables: PlannerTables, w) -> None:
    rows = cache.lua_rows(w)
    best_a, best_q = 0, -np.inf
    for a in range(cache.num_actions):
        cids, coefs = rows[a]
        q = sum(c * tables.value[cache.id_pattern(i)]
                for i, c in zip(cids, coefs))
        if q > best_q:
            best_q, best_a = q, a
    tables.policy[w] = best_a
