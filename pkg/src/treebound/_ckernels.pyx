# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels; see ``_pykernels.py`` for the reference semantics.

Every floating-point expression here is evaluated in the same order as in
the fallback module, and the build disables FMA contraction, so both
backends agree bit for bit.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport pow, fabs, NAN
from libc.stdint cimport uint64_t

cnp.import_array()

cdef double CLOSED_FORM_CUTOFF = 1e-2
cdef int MAX_SPREAD = 4
cdef double INV_2_53 = 1.0 / 9007199254740992.0


cdef inline double _uniform(uint64_t* state) noexcept nogil:
    cdef uint64_t z
    state[0] += <uint64_t>0x9E3779B97F4A7C15ULL
    z = state[0]
    z = (z ^ (z >> 30)) * <uint64_t>0xBF58476D1CE4E5B9ULL
    z = (z ^ (z >> 27)) * <uint64_t>0x94D049BB133111EBULL
    z = z ^ (z >> 31)
    return <double>(z >> 11) * INV_2_53


cdef inline Py_ssize_t _randint(uint64_t* state, Py_ssize_t m) noexcept nogil:
    return <Py_ssize_t>(_uniform(state) * m)


cdef double _charpoly_recursive(int T, double a, double b, double s) noexcept nogil:
    cdef double chi = s - 1.0 + a
    cdef double c = 1.0 - (a + b)
    cdef double p = 1.0
    cdef int k
    for k in range(1, T):
        p = p * a
        chi = (s - b) * chi - p * c
    return chi


cdef double _charpoly_eval(int T, double a, double b, double s) noexcept nogil:
    cdef double d = s - a - b
    cdef double c
    if fabs(d) < CLOSED_FORM_CUTOFF:
        return _charpoly_recursive(T, a, b, s)
    c = 1.0 - (a + b)
    return ((s - 1.0) * pow(s - b, T) + c * pow(a, T)) / d


cdef double _charpoly_scaled(int T, double a, double b, double s) noexcept nogil:
    cdef double m = fabs(s - b)
    cdef double c, ra, rs, d, chi, p
    cdef int k
    if a >= m:
        m = a
    if m == 0.0:
        return _charpoly_eval(T, a, b, s)
    c = 1.0 - (a + b)
    ra = a / m
    rs = (s - b) / m
    d = s - a - b
    if fabs(d) < CLOSED_FORM_CUTOFF:
        chi = (s - 1.0 + a) / m
        p = 1.0
        for k in range(1, T):
            p = p * ra
            chi = rs * chi - p * c / m
        return chi
    return ((s - 1.0) * pow(rs, T) + c * pow(ra, T)) / d


def charpoly_scaled(int T, double a, double b, double s):
    return _charpoly_scaled(T, a, b, s)


def charpoly_recursive(int T, double a, double b, double s):
    return _charpoly_recursive(T, a, b, s)


def charpoly_eval(int T, double a, double b, double s):
    return _charpoly_eval(T, a, b, s)


def bisect_root(int T, double a, double b, double lo, double hi, double tol,
                int max_iter):
    cdef int it = 0
    cdef double mid, width, rel
    with nogil:
        while it < max_iter:
            width = hi - lo
            rel = 1.0 - lo
            if rel > 1.0:
                rel = 1.0
            if width <= tol * rel:
                break
            mid = 0.5 * (lo + hi)
            if mid <= lo or mid >= hi:
                break
            it += 1
            if _charpoly_scaled(T, a, b, mid) > 0.0:
                hi = mid
            else:
                lo = mid
    return lo, hi, it


def power_iteration(M_in, double tol, int max_iter):
    cdef cnp.ndarray[cnp.float64_t, ndim=2, mode="c"] M = np.ascontiguousarray(
        M_in, dtype=np.float64)
    cdef Py_ssize_t n = M.shape[0]
    cdef double[::1] x = np.ones(n)
    cdef double[::1] y = np.empty(n)
    cdef double[:, ::1] Mv = M
    cdef double lam = NAN, lam_prev = NAN, ymax, xx, xy, acc, r, rmin, rmax
    cdef double res = 0.0
    cdef Py_ssize_t i, j
    cdef int it
    cdef bint done, positive
    with nogil:
        for it in range(1, max_iter + 1):
            ymax = 0.0
            xx = 0.0
            xy = 0.0
            for i in range(n):
                acc = 0.0
                for j in range(n):
                    acc = acc + Mv[i, j] * x[j]
                y[i] = acc
                if fabs(acc) > ymax:
                    ymax = fabs(acc)
                xx = xx + x[i] * x[i]
                xy = xy + x[i] * acc
            if ymax == 0.0:
                with gil:
                    return 0.0, it, True, 0.0
            lam = xy / xx
            done = fabs(lam - lam_prev) < tol
            if done:
                positive = True
                for i in range(n):
                    if not (x[i] > 0.0):
                        positive = False
                        break
                if positive:
                    rmin = y[0] / x[0]
                    rmax = rmin
                    for i in range(1, n):
                        r = y[i] / x[i]
                        if r < rmin:
                            rmin = r
                        if r > rmax:
                            rmax = r
                    done = (rmax - rmin) < tol
            if done:
                res = 0.0
                for i in range(n):
                    r = fabs(y[i] - lam * x[i])
                    if r > res:
                        res = r
                with gil:
                    return lam, it, True, res
            lam_prev = lam
            for i in range(n):
                x[i] = y[i] / ymax
        res = 0.0
        for i in range(n):
            acc = 0.0
            for j in range(n):
                acc = acc + Mv[i, j] * x[j]
            r = fabs(acc - lam_prev * x[i])
            if r > res:
                res = r
    return lam_prev, max_iter, False, res


cdef uint64_t _fill(double[:, ::1] A, const long[::1] depth,
                    const long[::1] order, const long[::1] layer_start,
                    double alpha, double beta, double gamma, bint slack,
                    uint64_t state) noexcept nogil:
    cdef Py_ssize_t n = A.shape[0]
    cdef Py_ssize_t spread = n if n < MAX_SPREAD else MAX_SPREAD
    cdef Py_ssize_t cols[4]
    cdef double wts[4]
    cdef Py_ssize_t i, j, m, up, f, f2, peer, width
    cdef long k
    cdef double d, rem, room, g, bb, left, v, W
    for i in range(n):
        k = depth[i]
        if k == 0:
            if slack:
                d = alpha + _uniform(&state) * (1.0 - alpha)
            else:
                d = alpha
            A[i, i] += d
            rem = 1.0 - d
        else:
            room = 1.0 - (beta + gamma)
            if room < 0.0:
                room = 0.0
            if slack:
                g = gamma + _uniform(&state) * room
                left = room - (g - gamma)
                if left < 0.0:
                    left = 0.0
                bb = beta + _uniform(&state) * left
            else:
                g = gamma
                bb = beta
            up = layer_start[k]
            f = order[_randint(&state, up)]
            if slack:
                v = _uniform(&state)
                f2 = order[_randint(&state, up)]
                A[i, f] += g * v
                A[i, f2] += g - g * v
                v = _uniform(&state)
                width = layer_start[k + 1] - layer_start[k]
                peer = order[layer_start[k] + _randint(&state, width)]
                A[i, i] += bb * v
                A[i, peer] += bb - bb * v
            else:
                A[i, f] += g
                A[i, i] += bb
            rem = 1.0 - g - bb
        if rem > 0.0:
            m = 1 + _randint(&state, spread)
            W = 0.0
            for j in range(m):
                cols[j] = _randint(&state, n)
                wts[j] = _uniform(&state)
                W += wts[j]
            if W == 0.0:
                A[i, i] += rem
            else:
                for j in range(m):
                    A[i, cols[j]] += rem * wts[j] / W
    return state


def fill_system_matrix(A, depth, order, layer_start, double alpha,
                       double beta, double gamma, bint slack, state):
    cdef uint64_t s = <uint64_t>(int(state) & 0xFFFFFFFFFFFFFFFF)
    s = _fill(A, np.ascontiguousarray(depth, dtype=np.int_),
              np.ascontiguousarray(order, dtype=np.int_),
              np.ascontiguousarray(layer_start, dtype=np.int_),
              alpha, beta, gamma, slack, s)
    return int(s)


cdef inline void _matvec(double[:, ::1] A, double[::1] x,
                         double[::1] out) noexcept nogil:
    cdef Py_ssize_t n = A.shape[0]
    cdef Py_ssize_t i, j
    cdef double acc
    for i in range(n):
        acc = 0.0
        for j in range(n):
            acc = acc + A[i, j] * x[j]
        out[i] = acc


cdef inline double _diameters(double[::1] out, double[::1] x,
                              const long[::1] order,
                              const long[::1] layer_start) noexcept nogil:
    cdef Py_ssize_t T1 = out.shape[0]
    cdef double hi = x[order[0]]
    cdef double lo = hi
    cdef double v
    cdef Py_ssize_t pos = 0, k, end
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


def simulate(depth_in, order_in, layer_start_in, double alpha, double beta,
             double gamma, bint slack, state, x0, Py_ssize_t horizon):
    cdef const long[::1] depth = np.ascontiguousarray(depth_in, dtype=np.int_)
    cdef const long[::1] order = np.ascontiguousarray(order_in, dtype=np.int_)
    cdef const long[::1] layer_start = np.ascontiguousarray(layer_start_in,
                                                          dtype=np.int_)
    cdef Py_ssize_t n = x0.shape[0]
    cdef Py_ssize_t T1 = layer_start.shape[0] - 1
    states_arr = np.empty((horizon + 1, n))
    diams_arr = np.empty((horizon + 1, T1))
    cdef double[:, ::1] states = states_arr
    cdef double[:, ::1] diams = diams_arr
    cdef double[:, ::1] A = np.zeros((n, n))
    cdef double[::1] x = np.array(x0, dtype=np.float64)
    cdef double[::1] xn = np.empty(n)
    cdef double[::1] y = np.zeros(n)
    cdef double[::1] z = np.empty(n)
    cdef double[::1] buf = np.empty(T1)
    cdef uint64_t s = <uint64_t>(int(state) & 0xFFFFFFFFFFFFFFFF)
    cdef double lo, d, scale
    cdef Py_ssize_t t, i, j, k
    with nogil:
        for i in range(n):
            states[0, i] = x[i]
        lo = _diameters(buf, x, order, layer_start)
        for k in range(T1):
            diams[0, k] = buf[k]
        scale = buf[T1 - 1]
        if scale > 0.0:
            for i in range(n):
                y[i] = (x[i] - lo) / scale
        for t in range(horizon):
            for i in range(n):
                for j in range(n):
                    A[i, j] = 0.0
            s = _fill(A, depth, order, layer_start, alpha, beta, gamma,
                      slack, s)
            _matvec(A, x, xn)
            for i in range(n):
                x[i] = xn[i]
                states[t + 1, i] = xn[i]
            if scale > 0.0:
                _matvec(A, y, z)
                lo = _diameters(buf, z, order, layer_start)
                d = buf[T1 - 1]
                for k in range(T1):
                    diams[t + 1, k] = scale * buf[k]
                if d > 0.0:
                    for i in range(n):
                        y[i] = (z[i] - lo) / d
                    scale = scale * d
                else:
                    scale = 0.0
            else:
                for k in range(T1):
                    diams[t + 1, k] = 0.0
    return states_arr, diams_arr, int(s)
