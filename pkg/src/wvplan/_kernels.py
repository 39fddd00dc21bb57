"""Hot-loop sweep kernels over the compiled worldview arrays.

The contract is sequential in-place (Gauss-Seidel) semantics: within a
sweep, each update sees the values written by earlier updates of the same
sweep. States are indexed 0..n-1 in sorted pattern order; per-state,
per-action successor rows live in one CSR structure of n*num_actions rows
(row k = state*num_actions + action).

Kernels are compiled with numba when available; the pure-Python fallbacks
implement the identical update order.
"""

from __future__ import annotations

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is an install dependency
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        def wrap(fn):
            return fn
        return wrap if not (args and callable(args[0])) else args[0]


@njit(cache=True)
def _value_sweep(pi, V, R, ptr, col, prob, selfloop, gamma, nA):
    n = V.shape[0]
    for i in range(n):
        k = i * nA + pi[i]
        if selfloop[k]:
            V[i] = R[i] / (1.0 - gamma)
        else:
            s = 0.0
            for t in range(ptr[k], ptr[k + 1]):
                s += prob[t] * V[col[t]]
            V[i] = R[i] + gamma * s


@njit(cache=True)
def _policy_value_sweep(pi, V, R, ptr, col, prob, selfloop,
                        qptr, qcol, qcoef, gamma, nA):
    n = V.shape[0]
    for i in range(n):
        best_a = 0
        best_q = -np.inf
        for a in range(nA):
            k = i * nA + a
            s = 0.0
            for t in range(qptr[k], qptr[k + 1]):
                s += qcoef[t] * V[qcol[t]]
            if s > best_q:  # strict: ties stay with the smallest action
                best_q = s
                best_a = a
        pi[i] = best_a
        k = i * nA + best_a
        if selfloop[k]:
            V[i] = R[i] / (1.0 - gamma)
        else:
            s = 0.0
            for t in range(ptr[k], ptr[k + 1]):
                s += prob[t] * V[col[t]]
            V[i] = R[i] + gamma * s


@njit(cache=True)
def _phase_kernel(n_sweeps, pi, V, R, ptr, col, prob, selfloop,
                  qptr, qcol, qcoef, gamma, nA):
    for _ in range(n_sweeps):
        _value_sweep(pi, V, R, ptr, col, prob, selfloop, gamma, nA)
        _policy_value_sweep(pi, V, R, ptr, col, prob, selfloop,
                            qptr, qcol, qcoef, gamma, nA)


def _value_sweep_py(pi, V, R, ptr, col, prob, selfloop, gamma, nA):
    for i in range(V.shape[0]):
        k = i * nA + pi[i]
        if selfloop[k]:
            V[i] = R[i] / (1.0 - gamma)
        else:
            s = 0.0
            for t in range(ptr[k], ptr[k + 1]):
                s += prob[t] * V[col[t]]
            V[i] = R[i] + gamma * s


def _policy_value_sweep_py(pi, V, R, ptr, col, prob, selfloop,
                           qptr, qcol, qcoef, gamma, nA):
    for i in range(V.shape[0]):
        best_a = 0
        best_q = -np.inf
        for a in range(nA):
            k = i * nA + a
            s = 0.0
            for t in range(qptr[k], qptr[k + 1]):
                s += qcoef[t] * V[qcol[t]]
            if s > best_q:
                best_q = s
                best_a = a
        pi[i] = best_a
        k = i * nA + best_a
        if selfloop[k]:
            V[i] = R[i] / (1.0 - gamma)
        else:
            s = 0.0
            for t in range(ptr[k], ptr[k + 1]):
                s += prob[t] * V[col[t]]
            V[i] = R[i] + gamma * s


def run_value_sweeps(n_sweeps, pi, V, R, ptr, col, prob, selfloop, gamma, nA,
                     use_numba=True):
    sweep = _value_sweep if (use_numba and HAVE_NUMBA) else _value_sweep_py
    for _ in range(n_sweeps):
        sweep(pi, V, R, ptr, col, prob, selfloop, gamma, nA)


def run_phase_sweeps(n_sweeps, pi, V, R, ptr, col, prob, selfloop,
                     qptr, qcol, qcoef, gamma, nA, use_numba=True):
    if use_numba and HAVE_NUMBA:
        _phase_kernel(n_sweeps, pi, V, R, ptr, col, prob, selfloop,
                      qptr, qcol, qcoef, gamma, nA)
    else:
        for _ in range(n_sweeps):
            _value_sweep_py(pi, V, R, ptr, col, prob, selfloop, gamma, nA)
            _policy_value_sweep_py(pi, V, R, ptr, col, prob, selfloop,
                                   qptr, qcol, qcoef, gamma, nA)
