"""Pure-Python reference kernels.

Mirrors ``_ckernels.pyx`` operation for operation, so that the compiled and
fallback backends produce bit-identical matrices and trajectories.  Keep the
two files in lockstep: every floating-point expression must be evaluated in
the same order.
"""
from __future__ import annotations

import math

import numpy as np

MASK64 = 0xFFFFFFFFFFFFFFFF
GOLDEN_GAMMA = 0x9E3779B97F4A7C15
MIX1 = 0xBF58476D1CE4E5B9
MIX2 = 0x94D049BB133111EB
INV_2_53 = 1.0 / 9007199254740992.0

# below this distance from alpha*+beta* the closed form loses accuracy
# and the determinant recursion is used instead
CLOSED_FORM_CUTOFF = 1e-2
# maximum number of extra columns sharing a row's unconstrained remainder
MAX_SPREAD = 4


def splitmix64(state):
    """Advance a SplitMix64 state; return ``(new_state, output)``."""
    state = (state + GOLDEN_GAMMA) & MASK64
    z = state
    z = ((z ^ (z >> 30)) * MIX1) & MASK64
    z = ((z ^ (z >> 27)) * MIX2) & MASK64
    return state, z ^ (z >> 31)


class _Stream:
    __slots__ = ("state",)

    def __init__(self, state):
        self.state = state & MASK64

    def uniform(self):
        self.state, z = splitmix64(self.state)
        return (z >> 11) * INV_2_53

    def randint(self, m):
        return int(self.uniform() * m)


def charpoly_recursive(T, a, b, s):
    chi = s - 1.0 + a
    c = 1.0 - (a + b)
    p = 1.0
    for _ in range(1, T):
        p = p * a
        chi = (s - b) * chi - p * c
    return chi


def charpoly_eval(T, a, b, s):
    d = s - a - b
    if abs(d) < CLOSED_FORM_CUTOFF:
        return charpoly_recursive(T, a, b, s)
    c = 1.0 - (a + b)
    return ((s - 1.0) * (s - b) ** T + c * a ** T) / d


def charpoly_scaled(T, a, b, s):
    """``chi_T(s) / m**T`` with ``m = max(a, |s - b|)``.

    Same sign as ``chi_T(s)``, but every power is of a ratio at most 1, so
    nothing overflows and underflow only drops negligible terms.  Used for
    sign tests at large ``T``.
    """
    m = max(a, abs(s - b))
    if m == 0.0:
        return charpoly_eval(T, a, b, s)
    c = 1.0 - (a + b)
    ra = a / m
    rs = (s - b) / m
    d = s - a - b
    if abs(d) < CLOSED_FORM_CUTOFF:
        chi = (s - 1.0 + a) / m
        p = 1.0
        for _ in range(1, T):
            p = p * ra
            chi = rs * chi - p * c / m
        return chi
    return ((s - 1.0) * rs ** T + c * ra ** T) / d


def bisect_root(T, a, b, lo, hi, tol, max_iter):
    """Bisection for the sign change of the characteristic polynomial.

    Requires ``chi(lo) <= 0 < chi(hi)``; signs come from
    :func:`charpoly_scaled`.  Stops once the bracket is narrower
    than ``tol * min(1, 1 - lo)`` or can no longer be split in floating
    point.  Returns ``(lo, hi, iterations)``.
    """
    it = 0
    while it < max_iter:
        width = hi - lo
        if width <= tol * min(1.0, 1.0 - lo):
            break
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        it += 1
        if charpoly_scaled(T, a, b, mid) > 0.0:
            hi = mid
        else:
            lo = mid
    return lo, hi, it


def power_iteration(M, tol, max_iter):
    """Power iteration from the all-ones vector.

    Returns ``(estimate, iterations, converged, residual)``.  Convergence
    needs the Rayleigh-quotient change below ``tol`` and, while the iterate
    is strictly positive, a Collatz-Wielandt bracket narrower than ``tol``.
    """
    M = np.ascontiguousarray(M, dtype=np.float64)
    x = np.ones(M.shape[0])
    lam_prev = math.nan
    for it in range(1, max_iter + 1):
        y = matvec(M, x)
        ymax = np.abs(y).max()
        if ymax == 0.0:
            return 0.0, it, True, 0.0
        lam = _seqsum(x * y) / _seqsum(x * x)
        done = abs(lam - lam_prev) < tol
        if done and np.all(x > 0.0):
            ratios = y / x
            done = float(ratios.max() - ratios.min()) < tol
        if done:
            return lam, it, True, float(np.abs(y - lam * x).max())
        lam_prev = lam
        x = y / ymax
    y = matvec(M, x)
    return lam_prev, max_iter, False, float(np.abs(y - lam_prev * x).max())


def fill_system_matrix(A, depth, order, layer_start, alpha, beta, gamma,
                       slack, state):
    """Write one random Assumption-1-compliant matrix into zeroed ``A``.

    Returns the advanced generator state.
    """
    n = A.shape[0]
    rng = _Stream(state)
    spread = min(n, MAX_SPREAD)
    cols = [0] * MAX_SPREAD
    wts = [0.0] * MAX_SPREAD
    for i in range(n):
        k = depth[i]
        if k == 0:
            if slack:
                d = alpha + rng.uniform() * (1.0 - alpha)
            else:
                d = alpha
            A[i, i] += d
            rem = 1.0 - d
        else:
            room = 1.0 - (beta + gamma)
            if room < 0.0:
                room = 0.0
            if slack:
                g = gamma + rng.uniform() * room
                left = room - (g - gamma)
                if left < 0.0:
                    left = 0.0
                bb = beta + rng.uniform() * left
            else:
                g = gamma
                bb = beta
            up = layer_start[k]
            f = order[rng.randint(up)]
            if slack:
                v = rng.uniform()
                f2 = order[rng.randint(up)]
                A[i, f] += g * v
                A[i, f2] += g - g * v
                v = rng.uniform()
                width = layer_start[k + 1] - layer_start[k]
                peer = order[layer_start[k] + rng.randint(width)]
                A[i, i] += bb * v
                A[i, peer] += bb - bb * v
            else:
                A[i, f] += g
                A[i, i] += bb
            rem = 1.0 - g - bb
        if rem > 0.0:
            m = 1 + rng.randint(spread)
            W = 0.0
            for j in range(m):
                cols[j] = rng.randint(n)
                wts[j] = rng.uniform()
                W += wts[j]
            if W == 0.0:
                A[i, i] += rem
            else:
                for j in range(m):
                    A[i, cols[j]] += rem * wts[j] / W
    return rng.state


def _seqsum(v):
    return float(np.cumsum(v)[-1])


def matvec(A, x):
    # sequential left-to-right row sums, matching the compiled loop
    return np.cumsum(A * x, axis=1)[:, -1]


def diameters_into(out, x, order, layer_start):
    T1 = out.shape[0]
    hi = lo = x[order[0]]
    pos = 0
    for k in range(T1):
        end = layer_start[k + 1]
        while pos < end:
            v = x[order[pos]]
            if v > hi:
                hi = v
            if v < lo:
                lo = v
            pos += 1
        out[k] = hi - lo
    return lo


def simulate(depth, order, layer_start, alpha, beta, gamma, slack, state,
             x0, horizon):
    """Run ``x(t+1) = A(t) x(t)`` for ``horizon`` steps.

    Diameters are tracked on a copy of the state that is shifted and
    rescaled to unit diameter after every step; the accumulated scale keeps
    them accurate far below the rounding floor of the raw states.

    Returns ``(states, diameters, final_state)``.
    """
    n = x0.shape[0]
    T1 = len(layer_start) - 1
    states = np.empty((horizon + 1, n))
    diams = np.empty((horizon + 1, T1))
    A = np.zeros((n, n))
    x = np.array(x0, dtype=np.float64)
    states[0] = x
    buf = np.empty(T1)
    lo = diameters_into(buf, x, order, layer_start)
    diams[0] = buf
    scale = buf[T1 - 1]
    if scale > 0.0:
        y = (x - lo) / scale
    else:
        y = np.zeros(n)
    for t in range(horizon):
        A[:, :] = 0.0
        state = fill_system_matrix(A, depth, order, layer_start, alpha, beta,
                                   gamma, slack, state)
        x = matvec(A, x)
        states[t + 1] = x
        if scale > 0.0:
            z = matvec(A, y)
            lo = diameters_into(buf, z, order, layer_start)
            d = buf[T1 - 1]
            diams[t + 1] = scale * buf
            if d > 0.0:
                y = (z - lo) / d
                scale = scale * d
            else:
                scale = 0.0
        else:
            diams[t + 1] = 0.0
    return states, diams, state
