"""Numba kernels for the CVP and basis-reduction inner loops.

Everything here operates on plain float64 arrays.  Enumeration works in
the QR frame of the reduced basis: with B = Q R (R upper triangular,
positive diagonal), ||t - B z|| = ||Q^T t - R z||, so kernels take R and
Q^T-transformed targets.
"""

import numpy as np
from numba import njit

# Node budget outcomes.
OK = 0
BUDGET_EXCEEDED = 1


@njit(cache=True, nogil=True)
def gram_schmidt(B, Bstar, mu, normsq):
    k = B.shape[1]
    for i in range(k):
        for d in range(k):
            Bstar[d, i] = B[d, i]
        for j in range(i):
            dot = 0.0
            for d in range(k):
                dot += B[d, i] * Bstar[d, j]
            m = dot / normsq[j] if normsq[j] > 0.0 else 0.0
            mu[i, j] = m
            for d in range(k):
                Bstar[d, i] -= m * Bstar[d, j]
        s = 0.0
        for d in range(k):
            s += Bstar[d, i] * Bstar[d, i]
        normsq[i] = s


@njit(cache=True, nogil=True)
def lll_kernel(B, delta, max_swaps):
    """In-place LLL reduction of the columns of B. Returns swap count, or -1
    if the swap guard was exceeded."""
    k = B.shape[1]
    Bstar = np.zeros((k, k))
    mu = np.zeros((k, k))
    normsq = np.zeros(k)
    gram_schmidt(B, Bstar, mu, normsq)
    swaps = 0
    i = 1
    while i < k:
        # Size-reduce column i with fresh projections; one descending pass
        # is exact, the outer loop only guards against fp stragglers.
        for _ in range(100):
            reduced = False
            for j in range(i - 1, -1, -1):
                dot = 0.0
                for d in range(k):
                    dot += B[d, i] * Bstar[d, j]
                m = dot / normsq[j] if normsq[j] > 0.0 else 0.0
                mu[i, j] = m
                if abs(m) > 0.5 + 1e-9:
                    q = round(m)
                    for d in range(k):
                        B[d, i] -= q * B[d, j]
                    mu[i, j] = m - q
                    reduced = True
            if not reduced:
                break
        if normsq[i] >= (delta - mu[i, i - 1] * mu[i, i - 1]) * normsq[i - 1]:
            i += 1
        else:
            for d in range(k):
                tmp = B[d, i - 1]
                B[d, i - 1] = B[d, i]
                B[d, i] = tmp
            swaps += 1
            if swaps > max_swaps:
                return -1
            # Full re-orthogonalization after every swap: O(k^3), cheap at
            # desk scale and immune to drift in incremental mu updates.
            gram_schmidt(B, Bstar, mu, normsq)
            i = max(i - 1, 1)
    return swaps


@njit(cache=True, nogil=True)
def _sgn(x):
    return 1 if x >= 0.0 else -1


@njit(cache=True, nogil=True)
def _lex_smaller(a, b, k):
    for i in range(k):
        if a[i] < b[i]:
            return True
        if a[i] > b[i]:
            return False
    return False


@njit(cache=True, nogil=True)
def se_closest(R, tq, budget, z_out, resid, z, step, dist):
    """Exact closest-vector enumeration (Schnorr-Euchner zig-zag).

    R: k x k upper triangular with positive diagonal; tq: target in the
    Q^T frame.  Scratch arrays resid (k x k), z, step (int64 k), dist
    (k+1) are caller-provided so batch calls can reuse them.  Writes the
    optimal coefficients to z_out; returns (dist_sq, nodes, status).
    Ties within 1e-12 relative are broken toward the lexicographically
    smallest coefficient vector.
    """
    k = R.shape[0]
    for i in range(k):
        resid[k - 1, i] = tq[i]
    best = np.inf
    have_best = False
    nodes = 0
    j = k - 1
    c = resid[k - 1, k - 1] / R[k - 1, k - 1]
    z[j] = int(round(c))
    step[j] = _sgn(c - z[j])
    dist[k] = 0.0
    while True:
        nodes += 1
        if nodes > budget:
            return best, nodes, BUDGET_EXCEEDED
        e = resid[j, j] - R[j, j] * z[j]
        newdist = dist[j + 1] + e * e
        tie = 1e-12 * (1.0 + best) if have_best else np.inf
        if (not have_best) or newdist <= best + tie:
            if j == 0:
                if (not have_best) or newdist < best - tie:
                    best = newdist
                    have_best = True
                    for i in range(k):
                        z_out[i] = z[i]
                elif _lex_smaller(z, z_out, k):
                    best = min(best, newdist)
                    for i in range(k):
                        z_out[i] = z[i]
                z[j] += step[j]
                step[j] = -step[j] - _sgn(step[j])
            else:
                dist[j] = newdist
                for i in range(j):
                    resid[j - 1, i] = resid[j, i] - z[j] * R[i, j]
                j -= 1
                c = resid[j, j] / R[j, j]
                z[j] = int(round(c))
                step[j] = _sgn(c - z[j])
        else:
            if j == k - 1:
                return best, nodes, OK
            j += 1
            z[j] += step[j]
            step[j] = -step[j] - _sgn(step[j])
    return best, nodes, OK  # pragma: no cover


@njit(cache=True, nogil=True)
def se_closest_batch(R, TQ, budget, Z_out, status_out):
    """Row-wise se_closest over TQ (n x k); fills Z_out (n x k int64)."""
    n, k = TQ.shape
    resid = np.zeros((k, k))
    z = np.zeros(k, dtype=np.int64)
    step = np.zeros(k, dtype=np.int64)
    dist = np.zeros(k + 1)
    z_out = np.zeros(k, dtype=np.int64)
    total_nodes = 0
    for row in range(n):
        for i in range(k):
            z_out[i] = 0
        _, nodes, status = se_closest(R, TQ[row], budget, z_out, resid, z, step, dist)
        total_nodes += nodes
        status_out[row] = status
        for i in range(k):
            Z_out[row, i] = z_out[i]
    return total_nodes


@njit(cache=True, nogil=True)
def se_count_in_ball(R, tq, radius_sq, exclude_zero, max_count, budget):
    """Count coefficient vectors z with ||tq - R z||^2 < radius_sq (strict).

    Stops early once max_count points are found (pass a huge max_count to
    count exhaustively).  Returns (count, nodes, status).
    """
    k = R.shape[0]
    resid = np.zeros((k, k))
    z = np.zeros(k, dtype=np.int64)
    step = np.zeros(k, dtype=np.int64)
    dist = np.zeros(k + 1)
    if radius_sq <= 0.0:
        return 0, 0, OK
    for i in range(k):
        resid[k - 1, i] = tq[i]
    count = 0
    nodes = 0
    j = k - 1
    c = resid[k - 1, k - 1] / R[k - 1, k - 1]
    z[j] = int(round(c))
    step[j] = _sgn(c - z[j])
    dist[k] = 0.0
    while True:
        nodes += 1
        if nodes > budget:
            return count, nodes, BUDGET_EXCEEDED
        e = resid[j, j] - R[j, j] * z[j]
        newdist = dist[j + 1] + e * e
        if newdist < radius_sq:
            if j == 0:
                is_zero = True
                for i in range(k):
                    if z[i] != 0:
                        is_zero = False
                        break
                if not (exclude_zero and is_zero):
                    count += 1
                    if count >= max_count:
                        return count, nodes, OK
                z[j] += step[j]
                step[j] = -step[j] - _sgn(step[j])
            else:
                dist[j] = newdist
                for i in range(j):
                    resid[j - 1, i] = resid[j, i] - z[j] * R[i, j]
                j -= 1
                c = resid[j, j] / R[j, j]
                z[j] = int(round(c))
                step[j] = _sgn(c - z[j])
        else:
            if j == k - 1:
                return count, nodes, OK
            j += 1
            z[j] += step[j]
            step[j] = -step[j] - _sgn(step[j])
    return count, nodes, OK  # pragma: no cover
