# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loops: truncated integer convolution and the theta lattice sum."""

from libc.math cimport exp, cos, sin, M_PI
from libc.stdint cimport int64_t, uint64_t

cdef extern from *:
    ctypedef unsigned long long u128 "unsigned __int128"


def conv_i64(const int64_t[:] a, const int64_t[:] b, int64_t[:] out):
    """out[k] = sum a[i] b[k-i] for k < len(out); caller guarantees no overflow."""
    cdef Py_ssize_t n = out.shape[0]
    cdef Py_ssize_t na = a.shape[0], nb = b.shape[0]
    cdef Py_ssize_t i, j, jmax
    cdef int64_t ai
    for i in range(n):
        out[i] = 0
    for i in range(min(na, n)):
        ai = a[i]
        if ai == 0:
            continue
        jmax = min(nb, n - i)
        for j in range(jmax):
            out[i + j] += ai * b[j]


def conv_mod(const uint64_t[:] a, const uint64_t[:] b, uint64_t[:] out, uint64_t p):
    """Truncated convolution modulo a prime p < 2**62."""
    cdef Py_ssize_t n = out.shape[0]
    cdef Py_ssize_t na = a.shape[0], nb = b.shape[0]
    cdef Py_ssize_t k, i, lo, hi
    cdef u128 acc
    cdef int pending
    for k in range(n):
        lo = k - nb + 1
        if lo < 0:
            lo = 0
        hi = k
        if hi > na - 1:
            hi = na - 1
        acc = 0
        pending = 0
        i = lo
        while i <= hi:
            acc += <u128>a[i] * <u128>b[k - i]
            pending += 1
            if pending == 8:
                acc %= p
                pending = 0
            i += 1
        out[k] = <uint64_t>(acc % p)


def theta_box(const double[:, :] x, const double[:, :] y, const double[:] a,
              const double[:] b, const long[:] lo, const long[:] hi, double cutoff):
    """Sum exp(pi i v'(x+iy)v + 2 pi i v'b) over v = n + a, lo <= n <= hi.

    Points with v'yv > cutoff are skipped. Returns (re, im, count).
    """
    cdef Py_ssize_t g = a.shape[0]
    cdef long n[16]
    cdef double v[16]
    cdef Py_ssize_t i, j
    cdef double qx, qy, lin, mag, ph
    cdef double sre = 0.0, sim = 0.0
    cdef long count = 0
    if g > 16:
        raise ValueError("genus too large for compiled theta kernel")
    if g == 0:
        return 1.0, 0.0, 1
    for i in range(g):
        n[i] = lo[i]
    while True:
        for i in range(g):
            v[i] = n[i] + a[i]
        qy = 0.0
        qx = 0.0
        lin = 0.0
        for i in range(g):
            lin += v[i] * b[i]
            qy += y[i, i] * v[i] * v[i]
            qx += x[i, i] * v[i] * v[i]
            for j in range(i + 1, g):
                qy += 2.0 * y[i, j] * v[i] * v[j]
                qx += 2.0 * x[i, j] * v[i] * v[j]
        if qy <= cutoff:
            mag = exp(-M_PI * qy)
            ph = M_PI * qx + 2.0 * M_PI * lin
            sre += mag * cos(ph)
            sim += mag * sin(ph)
            count += 1
        i = 0
        while i < g:
            n[i] += 1
            if n[i] <= hi[i]:
                break
            n[i] = lo[i]
            i += 1
        if i == g:
            break
    return sre, sim, count
