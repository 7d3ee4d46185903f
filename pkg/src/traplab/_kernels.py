"""Compiled inner loop of the uniformization sweep."""
import numpy as np
from numba import njit


@njit(cache=True, nogil=True)
def uniformized_sweep(jump, p0, periodic, k_lo, weights, n_weights, out, escaped):
    """Accumulate ``sum_k w_j[k] * P^k p0`` for several Poisson weight rows.

    ``jump[z]`` is the probability that the uniformized chain leaves ``z``
    in one step (half to each neighbour).  Without ``periodic`` mass leaving
    the end sites goes to a cemetery whose weighted mass lands in
    ``escaped``.
    """
    n = jump.size
    n_t = k_lo.size
    k_max = 0
    for j in range(n_t):
        last = k_lo[j] + n_weights[j] - 1
        if last > k_max:
            k_max = last
    v = p0.copy()
    half = np.empty(n)
    cem = 0.0
    for k in range(k_max + 1):
        for j in range(n_t):
            i = k - k_lo[j]
            if i >= 0 and i < n_weights[j]:
                w = weights[j, i]
                for z in range(n):
                    out[j, z] += w * v[z]
                escaped[j] += w * cem
        if k == k_max:
            break
        for z in range(n):
            half[z] = 0.5 * jump[z] * v[z]
        if periodic:
            for z in range(n):
                left = z - 1 if z > 0 else n - 1
                right = z + 1 if z < n - 1 else 0
                v[z] = v[z] - 2.0 * half[z] + half[left] + half[right]
        else:
            cem += half[0] + half[n - 1]
            for z in range(n):
                inflow = 0.0
                if z > 0:
                    inflow += half[z - 1]
                if z < n - 1:
                    inflow += half[z + 1]
                v[z] = v[z] - 2.0 * half[z] + inflow
    return out, escaped


@njit(cache=True, nogil=True)
def srw_exit(level, rng, counts):
    """Run a fair +-1 walk from 0 until ``|D| >= level``.

    ``counts[z + level - 1]`` collects visits to ``z`` before the exit step;
    returns the exit step.  Each 62-bit draw supplies 62 steps.
    """
    pos = 0
    steps = 0
    while True:
        bits = rng.integers(0, 1 << 62)
        for b in range(62):
            counts[pos + level - 1] += 1
            steps += 1
            pos += 1 if (bits >> b) & 1 else -1
            if pos >= level or pos <= -level:
                return steps
