# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled batched complex solve.

Gaussian elimination with partial pivoting, one small dense system per
frequency point. Same algorithm and singularity test as
``fpdsynth.linalg._solve_batched_numpy``.

Complex values are handled as interleaved (re, im) doubles; C99 complex
multiplication would otherwise call the NaN-checking ``__muldc3`` helper in
the inner loop.
"""
import numpy as np


cdef Py_ssize_t _solve_one(double* a, double* x, Py_ssize_t n, Py_ssize_t m, double rtol) noexcept nogil:
    """Eliminate one row-major n*n system in place. Returns 0, or -1 if singular."""
    cdef Py_ssize_t i, j, k, p
    cdef double scale2 = 0.0, best, mag, lim, d
    cdef double ir, ii, fr, fi, tr, ti, br, bi
    cdef double* rk
    cdef double* ri
    cdef double* xk
    cdef double* xi

    for i in range(n * n):
        mag = a[2 * i] * a[2 * i] + a[2 * i + 1] * a[2 * i + 1]
        if mag > scale2:
            scale2 = mag
    lim = rtol * rtol * scale2  # squared magnitudes throughout

    for k in range(n):
        p = k
        rk = a + 2 * (k * n + k)
        best = rk[0] * rk[0] + rk[1] * rk[1]
        for i in range(k + 1, n):
            ri = a + 2 * (i * n + k)
            mag = ri[0] * ri[0] + ri[1] * ri[1]
            if mag > best:
                best = mag
                p = i
        if best <= lim:
            return -1
        rk = a + 2 * k * n
        xk = x + 2 * k * m
        if p != k:
            ri = a + 2 * p * n
            for j in range(2 * n):
                tr = rk[j]
                rk[j] = ri[j]
                ri[j] = tr
            xi = x + 2 * p * m
            for j in range(2 * m):
                tr = xk[j]
                xk[j] = xi[j]
                xi[j] = tr
        # inv = 1 / rk[k]
        d = rk[2 * k] * rk[2 * k] + rk[2 * k + 1] * rk[2 * k + 1]
        ir = rk[2 * k] / d
        ii = -rk[2 * k + 1] / d
        for i in range(k + 1, n):
            ri = a + 2 * i * n
            fr = ri[2 * k] * ir - ri[2 * k + 1] * ii
            fi = ri[2 * k] * ii + ri[2 * k + 1] * ir
            if fr == 0.0 and fi == 0.0:
                continue
            for j in range(k, n):
                br = rk[2 * j]
                bi = rk[2 * j + 1]
                ri[2 * j] -= fr * br - fi * bi
                ri[2 * j + 1] -= fr * bi + fi * br
            xi = x + 2 * i * m
            for j in range(m):
                br = xk[2 * j]
                bi = xk[2 * j + 1]
                xi[2 * j] -= fr * br - fi * bi
                xi[2 * j + 1] -= fr * bi + fi * br

    for k in range(n - 1, -1, -1):
        rk = a + 2 * k * n
        d = rk[2 * k] * rk[2 * k] + rk[2 * k + 1] * rk[2 * k + 1]
        ir = rk[2 * k] / d
        ii = -rk[2 * k + 1] / d
        xk = x + 2 * k * m
        for j in range(m):
            tr = xk[2 * j]
            ti = xk[2 * j + 1]
            for i in range(k + 1, n):
                fr = rk[2 * i]
                fi = rk[2 * i + 1]
                br = x[2 * (i * m + j)]
                bi = x[2 * (i * m + j) + 1]
                tr -= fr * br - fi * bi
                ti -= fr * bi + fi * br
            xk[2 * j] = tr * ir - ti * ii
            xk[2 * j + 1] = tr * ii + ti * ir
    return 0


def solve_batched(A, B, double rtol):
    """Solve ``A[f] @ X[f] = B[f]`` for every leading index ``f``.

    Returns ``(X, bad)`` where ``bad`` is the first batch index whose pivot
    fell below ``rtol * max|A[f]|`` or -1 when every system was solved.
    """
    a_arr = np.array(A, dtype=np.complex128, order="C", copy=True)
    x_arr = np.array(B, dtype=np.complex128, order="C", copy=True)
    cdef Py_ssize_t nf = a_arr.shape[0], n = a_arr.shape[1], m = x_arr.shape[2]
    cdef Py_ssize_t f, bad = -1
    if nf == 0 or n == 0 or m == 0:
        return x_arr, bad
    cdef double[:, ::1] a = a_arr.view(np.float64).reshape(nf, 2 * n * n)
    cdef double[:, ::1] x = x_arr.view(np.float64).reshape(nf, 2 * n * m)
    with nogil:
        for f in range(nf):
            if _solve_one(&a[f, 0], &x[f, 0], n, m, rtol) < 0:
                bad = f
                break
    return x_arr, bad
