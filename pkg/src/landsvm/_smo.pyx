# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled sequential-minimal-optimization core.

Operation-for-operation mirror of landsvm._smo_py; keep both in sync.
"""

import numpy as np

from libc.math cimport fabs


cdef class _Solver:
    cdef double[:, ::1] K
    cdef double[::1] y
    cdef double[::1] alpha
    cdef double[::1] E
    cdef double C, tol, eps, b
    cdef Py_ssize_t n

    def __init__(self, double[:, ::1] K, double[::1] y, double C,
                 double tol, double eps):
        self.K = K
        self.y = y
        self.C = C
        self.tol = tol
        self.eps = eps
        self.n = y.shape[0]
        alpha = np.zeros(self.n)
        E = -np.asarray(y).copy()
        self.alpha = alpha
        self.E = E
        self.b = 0.0

    cdef bint take_step(self, Py_ssize_t i1, Py_ssize_t i2):
        cdef double a1o, a2o, y1, y2, e1, e2, s, lo, hi
        cdef double k11, k12, k22, eta, a2n, a1n
        cdef double f1, f2, l1, h1, obj_lo, obj_hi
        cdef double d1, d2, b1, b2, bn, db
        cdef Py_ssize_t k
        if i1 == i2:
            return False
        a1o = self.alpha[i1]
        a2o = self.alpha[i2]
        y1 = self.y[i1]
        y2 = self.y[i2]
        e1 = self.E[i1]
        e2 = self.E[i2]
        s = y1 * y2
        if s < 0.0:
            lo = a2o - a1o
            if lo < 0.0:
                lo = 0.0
            hi = self.C + a2o - a1o
            if hi > self.C:
                hi = self.C
        else:
            lo = a1o + a2o - self.C
            if lo < 0.0:
                lo = 0.0
            hi = a1o + a2o
            if hi > self.C:
                hi = self.C
        if lo >= hi:
            return False
        k11 = self.K[i1, i1]
        k12 = self.K[i1, i2]
        k22 = self.K[i2, i2]
        eta = k11 + k22 - 2.0 * k12
        if eta > 0.0:
            a2n = a2o + y2 * (e1 - e2) / eta
            if a2n < lo:
                a2n = lo
            elif a2n > hi:
                a2n = hi
        else:
            # flat or concave direction: test the segment endpoints
            f1 = y1 * (e1 - self.b) - a1o * k11 - s * a2o * k12
            f2 = y2 * (e2 - self.b) - s * a1o * k12 - a2o * k22
            l1 = a1o + s * (a2o - lo)
            h1 = a1o + s * (a2o - hi)
            obj_lo = (l1 * f1 + lo * f2 + 0.5 * l1 * l1 * k11
                      + 0.5 * lo * lo * k22 + s * lo * l1 * k12)
            obj_hi = (h1 * f1 + hi * f2 + 0.5 * h1 * h1 * k11
                      + 0.5 * hi * hi * k22 + s * hi * h1 * k12)
            if obj_lo < obj_hi - self.eps:
                a2n = lo
            elif obj_lo > obj_hi + self.eps:
                a2n = hi
            else:
                return False
        if fabs(a2n - a2o) < self.eps * (a2n + a2o + self.eps):
            return False
        a1n = a1o + s * (a2o - a2n)
        if a1n < 0.0:  # rounding can push a hair outside the box
            a1n = 0.0
        elif a1n > self.C:
            a1n = self.C
        d1 = y1 * (a1n - a1o)
        d2 = y2 * (a2n - a2o)
        b1 = self.b - e1 - d1 * k11 - d2 * k12
        b2 = self.b - e2 - d1 * k12 - d2 * k22
        if 0.0 < a1n < self.C:
            bn = b1
        elif 0.0 < a2n < self.C:
            bn = b2
        else:
            bn = (b1 + b2) * 0.5
        db = bn - self.b
        for k in range(self.n):
            self.E[k] += d1 * self.K[i1, k] + d2 * self.K[i2, k] + db
        self.alpha[i1] = a1n
        self.alpha[i2] = a2n
        self.b = bn
        return True

    cdef void recenter_bias(self):
        # pair steps cannot repair a uniform offset of the error cache,
        # so move the running bias to the free-vector mean directly
        cdef double total = 0.0
        cdef double shift
        cdef int count = 0
        cdef Py_ssize_t k
        for k in range(self.n):
            if 0.0 < self.alpha[k] < self.C:
                total += self.E[k]
                count += 1
        if count == 0:
            return
        shift = total / count
        for k in range(self.n):
            self.E[k] -= shift
        self.b -= shift

    cdef int examine(self, Py_ssize_t i2):
        cdef double y2, a2, e2, r2, gap, best_gap
        cdef Py_ssize_t k, best
        cdef bint any_free
        y2 = self.y[i2]
        a2 = self.alpha[i2]
        e2 = self.E[i2]
        r2 = e2 * y2
        if not ((r2 < -self.tol and a2 < self.C)
                or (r2 > self.tol and a2 > 0.0)):
            return 0
        best = -1
        best_gap = -1.0
        any_free = False
        for k in range(self.n):
            if 0.0 < self.alpha[k] < self.C:
                any_free = True
                gap = fabs(self.E[k] - e2)
                if gap > best_gap:
                    best_gap = gap
                    best = k
        if any_free:
            if self.take_step(best, i2):
                return 1
        for k in range(self.n):
            if 0.0 < self.alpha[k] < self.C and k != best:
                if self.take_step(k, i2):
                    return 1
        for k in range(self.n):
            if not (0.0 < self.alpha[k] < self.C):
                if self.take_step(k, i2):
                    return 1
        return 0


def smo_solve(K, y, double C, double tol, int max_passes, int max_sweeps):
    """Optimize the dual multipliers by SMO.

    Sweeps over all points until max_passes consecutive sweeps change
    nothing. Returns (alpha, sweeps, converged); converged is False when
    the hard sweep cap was hit first.
    """
    cdef double eps
    cdef int sweeps, quiet, changed
    cdef Py_ssize_t i
    K = np.ascontiguousarray(K, dtype=float)
    y = np.ascontiguousarray(y, dtype=float)
    eps = tol if tol < 1e-3 else 1e-3
    cdef _Solver s = _Solver(K, y, C, tol, eps)
    sweeps = 0
    quiet = 0
    while quiet < max_passes:
        if sweeps >= max_sweeps:
            return np.asarray(s.alpha), sweeps, False
        changed = 0
        for i in range(s.n):
            changed += s.examine(i)
        s.recenter_bias()
        sweeps += 1
        quiet = quiet + 1 if changed == 0 else 0
    return np.asarray(s.alpha), sweeps, True
