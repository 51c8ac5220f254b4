"""Pure-Python sequential-minimal-optimization core.

Fallback for the compiled module landsvm._smo. The two implementations
perform the same floating-point operations in the same order; keep any
change mirrored in _smo.pyx.

The solver works on the dual of the soft-margin problem with a
precomputed kernel matrix and a full error cache. Pair selection is
deterministic: the partner maximizing |E1 - E2| among free multipliers
is tried first, then the remaining candidates in index order.
"""

import numpy as np


class _Solver:
    def __init__(self, K, y, C, tol, eps):
        self.K = K
        self.y = y
        self.C = C
        self.tol = tol
        self.eps = eps
        self.n = y.shape[0]
        self.alpha = np.zeros(self.n)
        self.b = 0.0
        self.E = -y.copy()  # f == 0 while all multipliers are zero

    def take_step(self, i1, i2):
        if i1 == i2:
            return False
        K, y, alpha, C = self.K, self.y, self.alpha, self.C
        a1o = float(alpha[i1])
        a2o = float(alpha[i2])
        y1 = float(y[i1])
        y2 = float(y[i2])
        e1 = float(self.E[i1])
        e2 = float(self.E[i2])
        s = y1 * y2
        if s < 0.0:
            lo = max(0.0, a2o - a1o)
            hi = min(C, C + a2o - a1o)
        else:
            lo = max(0.0, a1o + a2o - C)
            hi = min(C, a1o + a2o)
        if lo >= hi:
            return False
        k11 = float(K[i1, i1])
        k12 = float(K[i1, i2])
        k22 = float(K[i2, i2])
        eta = k11 + k22 - 2.0 * k12
        if eta > 0.0:
            a2n = a2o + y2 * (e1 - e2) / eta
            if a2n < lo:
                a2n = lo
            elif a2n > hi:
                a2n = hi
        else:
            # flat or concave direction: test the segment endpoints
            b = self.b
            f1 = y1 * (e1 - b) - a1o * k11 - s * a2o * k12
            f2 = y2 * (e2 - b) - s * a1o * k12 - a2o * k22
            l1 = a1o + s * (a2o - lo)
            h1 = a1o + s * (a2o - hi)
            obj_lo = (
                l1 * f1
                + lo * f2
                + 0.5 * l1 * l1 * k11
                + 0.5 * lo * lo * k22
                + s * lo * l1 * k12
            )
            obj_hi = (
                h1 * f1
                + hi * f2
                + 0.5 * h1 * h1 * k11
                + 0.5 * hi * hi * k22
                + s * hi * h1 * k12
            )
            if obj_lo < obj_hi - self.eps:
                a2n = lo
            elif obj_lo > obj_hi + self.eps:
                a2n = hi
            else:
                return False
        if abs(a2n - a2o) < self.eps * (a2n + a2o + self.eps):
            return False
        a1n = a1o + s * (a2o - a2n)
        if a1n < 0.0:  # rounding can push a hair outside the box
            a1n = 0.0
        elif a1n > C:
            a1n = C
        d1 = y1 * (a1n - a1o)
        d2 = y2 * (a2n - a2o)
        b1 = self.b - e1 - d1 * k11 - d2 * k12
        b2 = self.b - e2 - d1 * k12 - d2 * k22
        if 0.0 < a1n < C:
            bn = b1
        elif 0.0 < a2n < C:
            bn = b2
        else:
            bn = (b1 + b2) * 0.5
        self.E += d1 * K[i1] + d2 * K[i2] + (bn - self.b)
        alpha[i1] = a1n
        alpha[i2] = a2n
        self.b = bn
        return True

    def recenter_bias(self):
        """Move the running bias to the free-vector mean.

        Pair steps cannot repair a uniform offset of the error cache, so
        the offset is removed directly; the sequential sum must match
        the compiled core operation for operation.
        """
        total = 0.0
        count = 0
        for k in range(self.n):
            a = float(self.alpha[k])
            if 0.0 < a < self.C:
                total += float(self.E[k])
                count += 1
        if count == 0:
            return
        shift = total / count
        self.E -= shift
        self.b -= shift

    def examine(self, i2):
        alpha, C = self.alpha, self.C
        y2 = float(self.y[i2])
        a2 = float(alpha[i2])
        e2 = float(self.E[i2])
        r2 = e2 * y2
        if not ((r2 < -self.tol and a2 < C) or (r2 > self.tol and a2 > 0.0)):
            return 0
        free = (alpha > 0.0) & (alpha < C)
        best = -1
        if free.any():
            gaps = np.where(free, np.abs(self.E - e2), -1.0)
            best = int(np.argmax(gaps))
            if self.take_step(best, i2):
                return 1
        for k in range(self.n):
            if free[k] and k != best and self.take_step(k, i2):
                return 1
        for k in range(self.n):
            if not free[k] and self.take_step(k, i2):
                return 1
        return 0


def smo_solve(K, y, C, tol, max_passes, max_sweeps):
    """Optimize the dual multipliers by SMO.

    Sweeps over all points until max_passes consecutive sweeps change
    nothing. Returns (alpha, sweeps, converged); converged is False when
    the hard sweep cap was hit first.
    """
    K = np.ascontiguousarray(K, dtype=float)
    y = np.ascontiguousarray(y, dtype=float)
    eps = min(tol, 1e-3)  # minimum useful step, relative to multiplier size
    s = _Solver(K, y, C, tol, eps)
    sweeps = 0
    quiet = 0
    while quiet < max_passes:
        if sweeps >= max_sweeps:
            return s.alpha, sweeps, False
        changed = 0
        for i in range(s.n):
            changed += s.examine(i)
        s.recenter_bias()
        sweeps += 1
        quiet = quiet + 1 if changed == 0 else 0
    return s.alpha, sweeps, True
