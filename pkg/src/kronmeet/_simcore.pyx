# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled stepping kernel for the joint walker simulation.

Mirrors ``_simpure.run_pair`` exactly: same splitmix64 streams, same
inverse-CDF scan, bit-identical outcomes.
"""

from libc.stdint cimport int64_t, uint64_t

import numpy as np

cdef uint64_t GOLDEN = 0x9E3779B97F4A7C15ULL
cdef double INV_2_53 = 1.0 / 9007199254740992.0


cdef inline uint64_t _mix(uint64_t z) nogil:
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL
    return z ^ (z >> 31)


def run_pair(double[:, ::1] cum_p, double[:, ::1] cum_e,
             Py_ssize_t i0, Py_ssize_t j0,
             Py_ssize_t trials, Py_ssize_t max_steps,
             unsigned long long key):
    """Meeting step per trial (int64; 0 marks a censored trial)."""
    out = np.zeros(trials, dtype=np.int64)
    cdef int64_t[::1] times = out
    cdef uint64_t state, base = key
    cdef Py_ssize_t t, step, p, e, k
    cdef double u
    with nogil:
        for t in range(trials):
            state = _mix(base ^ ((<uint64_t> (t + 1)) * GOLDEN))
            p = i0
            e = j0
            for step in range(1, max_steps + 1):
                state += GOLDEN
                u = <double> (_mix(state) >> 11) * INV_2_53
                k = 0
                while u >= cum_p[p, k]:
                    k += 1
                p = k
                state += GOLDEN
                u = <double> (_mix(state) >> 11) * INV_2_53
                k = 0
                while u >= cum_e[e, k]:
                    k += 1
                e = k
                if p == e:
                    times[t] = step
                    break
    return out
