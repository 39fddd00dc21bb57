"""Proximity: a probability distribution over worldview states that
weights temporal/spatial nearness to the current state under an estimated
future policy.

The defining linear system is (I - g_p * T~') P = cur, where T~ is the
abstract transition matrix of the softened policy, ' is transposition,
and cur puts mass 1-g_p on the state containing the current world state.
Since the spectral radius of g_p * T~' is below 1, a warm-started
fixed-point iteration solves it to tight residuals in a few hundred
matvecs.
"""

from __future__ import annotations

import math

import numpy as np
import scipy.sparse as sp

from .planner import CompiledView, PlannerConfig, TransitionCache
from .worldview import PlannerTables, Worldview


class ProximityError(RuntimeError):
    pass


def build_future_policy(tables: PlannerTables, num_actions: int,
                        config: PlannerConfig) -> dict:
    """Soften the current policy: keep 1-rho on the chosen action and
    spread rho uniformly over the others."""
    rho = config.replanning_probability
    out = {}
    for w, a in tables.policy.items():
        dist = np.full(num_actions,
                       rho / (num_actions - 1) if num_actions > 1 else 0.0)
        dist[a] = 1.0 - rho if num_actions > 1 else 1.0
        out[w] = dist
    return out


def cur_vector(worldview: Worldview, s_cur, config: PlannerConfig,
               index: dict | None = None) -> np.ndarray:
    if index is None:
        index = {p: i for i, p in enumerate(worldview.sorted_patterns())}
    vec = np.zeros(len(index))
    vec[index[worldview.locate(s_cur)]] = 1.0 - config.gamma_p
    return vec


def _transition_transpose(view: CompiledView, pi: np.ndarray,
                          config: PlannerConfig) -> sp.csr_matrix:
    """T~' assembled from the compiled plain rows under the softened
    policy."""
    n = len(view.patterns)
    nA = view.num_actions
    rho = config.replanning_probability
    other = rho / (nA - 1) if nA > 1 else 0.0
    rows_out, cols_out, vals_out = [], [], []
    for a in range(nA):
        weights = np.where(pi == a, 1.0 - rho if nA > 1 else 1.0, other)
        keys = np.arange(n) * nA + a
        counts = view.ptr[keys + 1] - view.ptr[keys]
        srcs = np.repeat(np.arange(n), counts)
        take = np.concatenate([
            np.arange(view.ptr[k], view.ptr[k + 1]) for k in keys
        ]) if n else np.empty(0, dtype=np.int64)
        rows_out.append(view.col[take])  # transposed: successor indexes row
        cols_out.append(srcs)
        vals_out.append(view.prob[take] * weights[srcs])
    return sp.csr_matrix(
        (np.concatenate(vals_out),
         (np.concatenate(rows_out), np.concatenate(cols_out))),
        shape=(n, n),
    )


def compute_proximity(worldview: Worldview, tables: PlannerTables,
                      s_cur, config: PlannerConfig,
                      cache: TransitionCache,
                      view: CompiledView | None = None) -> CompiledView:
    """Solve for the proximity vector and store it into tables.prox.
    Returns the compiled view for reuse."""
    from .planner import ensure_view

    view = ensure_view(view, worldview, cache, config)
    n = len(view.patterns)
    pi = np.array([tables.policy[p] for p in view.patterns], dtype=np.int64)
    matrix = _transition_transpose(view, pi, config)
    cur = cur_vector(worldview, s_cur, config, view.index)

    p = np.array([tables.prox.get(pat, 0.0) for pat in view.patterns])
    if p.sum() <= 0:
        p = cur.copy()
    gp = config.gamma_p
    # the remaining error after a step is bounded by step-diff * gp/(1-gp),
    # so target a step tolerance that leaves the values themselves accurate
    tol = config.proximity_residual * max(1.0 - gp, 1e-6) * 0.5
    cap = 10 * math.ceil(math.log(tol) / math.log(gp)) if 0 < gp < 1 else 10
    for _ in range(max(cap, 1)):
        p_next = cur + gp * (matrix @ p)
        if np.max(np.abs(p_next - p)) <= tol:
            p = p_next
            break
        p = p_next
    else:
        raise ProximityError(
            f"proximity solve did not reach residual "
            f"{config.proximity_residual} within {cap} iterations"
        )
    for i, pat in enumerate(view.patterns):
        tables.prox[pat] = float(p[i])
    return view
