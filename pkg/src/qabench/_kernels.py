"""Compiled inner loops for the Monte Carlo solvers and exhaustive search.

All kernels consume pre-drawn uniforms so that results are a pure function of
the caller's RNG stream, independent of dispatch order or thread count.
"""
from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True, inline="always")
def _local_field(h, offsets, cols, vals, state, i):
    acc = h[i]
    for t in range(offsets[i], offsets[i + 1]):
        acc += vals[t] * state[cols[t]]
    return acc


@njit(cache=True)
def pair_energy(h, i_idx, j_idx, j_val, state):
    e = 0.0
    for i in range(h.shape[0]):
        e += h[i] * state[i]
    for k in range(i_idx.shape[0]):
        e += j_val[k] * state[i_idx[k]] * state[j_idx[k]]
    return e


@njit(cache=True)
def sa_kernel(h, offsets, cols, vals, state, betas, urand):
    sweeps = betas.shape[0]
    n = state.shape[0]
    for t in range(sweeps):
        beta = betas[t]
        for i in range(n):
            de = -2.0 * state[i] * _local_field(h, offsets, cols, vals, state, i)
            if de <= 0.0 or urand[t, i] < np.exp(-beta * de):
                state[i] = -state[i]


@njit(cache=True)
def sa_kernel_ordered(h, offsets, cols, vals, state, betas, urand, order):
    """Single-spin sweeps visiting order[t, k] at slot k of sweep t.

    A fixed scan accepts every zero-cost flip, so a free spin toggles
    deterministically instead of mixing; drawing the visit sequence at
    random restores ergodic sampling over degenerate configurations.
    """
    sweeps = betas.shape[0]
    n = state.shape[0]
    for t in range(sweeps):
        beta = betas[t]
        for k in range(n):
            i = order[t, k]
            de = -2.0 * state[i] * _local_field(h, offsets, cols, vals, state, i)
            if de <= 0.0 or urand[t, k] < np.exp(-beta * de):
                state[i] = -state[i]


@njit(cache=True)
def sa_cluster_kernel(
    h, offsets, cols, vals, state, betas, urand, membership, u_cluster
):
    """Single-spin sweeps plus one Metropolis proposal per declared cluster
    per sweep. membership is a (clusters, n) boolean incidence matrix."""
    sweeps = betas.shape[0]
    n = state.shape[0]
    n_clusters = membership.shape[0]
    for t in range(sweeps):
        beta = betas[t]
        for i in range(n):
            de = -2.0 * state[i] * _local_field(h, offsets, cols, vals, state, i)
            if de <= 0.0 or urand[t, i] < np.exp(-beta * de):
                state[i] = -state[i]
        for c in range(n_clusters):
            de = 0.0
            for i in range(n):
                if membership[c, i]:
                    de += -2.0 * state[i] * h[i]
                    for e in range(offsets[i], offsets[i + 1]):
                        j = cols[e]
                        if not membership[c, j]:
                            de += -2.0 * vals[e] * state[i] * state[j]
            if de <= 0.0 or u_cluster[t, c] < np.exp(-beta * de):
                for i in range(n):
                    if membership[c, i]:
                        state[i] = -state[i]


@njit(cache=True)
def svmc_kernel(h, offsets, cols, vals, theta, a_arr, b_arr, beta, u_prop, u_acc):
    sweeps = a_arr.shape[0]
    n = theta.shape[0]
    for t in range(sweeps):
        amp_a = a_arr[t]
        amp_b = b_arr[t]
        for i in range(n):
            proposal = u_prop[t, i] * np.pi
            loc = h[i]
            for e in range(offsets[i], offsets[i + 1]):
                loc += vals[e] * np.cos(theta[cols[e]])
            de = -amp_a * (np.sin(proposal) - np.sin(theta[i])) + amp_b * (
                np.cos(proposal) - np.cos(theta[i])
            ) * loc
            if de <= 0.0 or u_acc[t, i] < np.exp(-beta * de):
                theta[i] = proposal


@njit(cache=True)
def sqa_kernel(h, offsets, cols, vals, slices, b_arr, jperp_arr, beta_p, urand):
    sweeps = b_arr.shape[0]
    n_slices, n = slices.shape
    for t in range(sweeps):
        amp_b = b_arr[t]
        jperp = jperp_arr[t]
        for k in range(n_slices):
            up = (k + 1) % n_slices
            dn = (k - 1) % n_slices
            for i in range(n):
                s = slices[k, i]
                loc = h[i]
                for e in range(offsets[i], offsets[i + 1]):
                    loc += vals[e] * slices[k, cols[e]]
                de = -2.0 * s * amp_b * loc + 2.0 * jperp * s * (
                    slices[dn, i] + slices[up, i]
                )
                if de <= 0.0 or urand[t, k, i] < np.exp(-beta_p * de):
                    slices[k, i] = -s


@njit(cache=True)
def pt_kernel(
    h, offsets, cols, vals, i_idx, j_idx, j_val, states, betas, urand, u_swap
):
    """Parallel tempering: Metropolis sweeps per rung, then adjacent swaps.
    betas ascend (hot to cold); returns the tracked rung energies."""
    sweeps = urand.shape[0]
    n_rungs, n = states.shape
    eng = np.empty(n_rungs)
    for k in range(n_rungs):
        eng[k] = pair_energy(h, i_idx, j_idx, j_val, states[k])
    for t in range(sweeps):
        for k in range(n_rungs):
            beta = betas[k]
            for i in range(n):
                de = -2.0 * states[k, i] * _local_field(
                    h, offsets, cols, vals, states[k], i
                )
                if de <= 0.0 or urand[t, k, i] < np.exp(-beta * de):
                    states[k, i] = -states[k, i]
                    eng[k] += de
        for k in range(n_rungs - 1):
            arg = (betas[k] - betas[k + 1]) * (eng[k] - eng[k + 1])
            if arg >= 0.0 or u_swap[t, k] < np.exp(arg):
                for i in range(n):
                    tmp = states[k, i]
                    states[k, i] = states[k + 1, i]
                    states[k + 1, i] = tmp
                tmp_e = eng[k]
                eng[k] = eng[k + 1]
                eng[k + 1] = tmp_e
    return eng


@njit(cache=True)
def _initial_energy(h, offsets, cols, vals, n):
    e = 0.0
    for i in range(n):
        e += h[i]
    for i in range(n):
        for t in range(offsets[i], offsets[i + 1]):
            if cols[t] > i:
                e += vals[t]
    return e


@njit(cache=True)
def exact_min_energy(h, offsets, cols, vals, n):
    """Minimum Ising energy by Gray-code enumeration of all 2**n states."""
    state = np.ones(n, dtype=np.int8)
    e = _initial_energy(h, offsets, cols, vals, n)
    emin = e
    total = np.int64(1) << np.int64(n)
    for t in range(np.int64(1), total):
        b = 0
        tt = t
        while (tt & np.int64(1)) == np.int64(0):
            tt >>= np.int64(1)
            b += 1
        e += -2.0 * state[b] * _local_field(h, offsets, cols, vals, state, b)
        state[b] = -state[b]
        if e < emin:
            emin = e
    return emin


@njit(cache=True)
def exact_collect(h, offsets, cols, vals, n, emin, atol, out_states):
    """Second pass: count states within atol of emin, storing the first
    out_states.shape[0] of them (in Gray visit order). Returns the count."""
    cap = out_states.shape[0]
    state = np.ones(n, dtype=np.int8)
    e = _initial_energy(h, offsets, cols, vals, n)
    count = np.int64(0)
    if e <= emin + atol:
        if count < cap:
            out_states[count] = state
        count += 1
    total = np.int64(1) << np.int64(n)
    for t in range(np.int64(1), total):
        b = 0
        tt = t
        while (tt & np.int64(1)) == np.int64(0):
            tt >>= np.int64(1)
            b += 1
        e += -2.0 * state[b] * _local_field(h, offsets, cols, vals, state, b)
        state[b] = -state[b]
        if e <= emin + atol:
            if count < cap:
                out_states[count] = state
            count += 1
    return count
