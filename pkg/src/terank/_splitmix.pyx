# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled SplitMix64 / Box-Muller fill kernels.

Must stay bit-identical to _splitmix_py: same operation order, same libm
calls, no fused multiply-adds (see -ffp-contract=off in setup.py).
"""
from libc.math cimport cos, log, sin, sqrt

cdef unsigned long long GOLDEN = 0x9E3779B97F4A7C15ULL
cdef double TWO_NEG53 = 1.0 / 9007199254740992.0
cdef double TWO_PI = 6.283185307179586


cdef inline unsigned long long _mix(unsigned long long z) nogil:
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL
    return z ^ (z >> 31)


def fill_uniform(double[::1] out, state):
    """Fill `out` with uniforms in [0, 1); returns the advanced state."""
    cdef unsigned long long s = state
    cdef Py_ssize_t i, n = out.shape[0]
    with nogil:
        for i in range(n):
            s += GOLDEN
            out[i] = (_mix(s) >> 11) * TWO_NEG53
    return s


def fill_gaussian(double[::1] out, state, has_spare, spare):
    """Fill `out` with standard normals via Box-Muller.

    Consumes two uniforms per pair; the second normal of a pair is
    returned as the spare when the request length is odd. Returns
    (state, has_spare, spare).
    """
    cdef unsigned long long s = state
    cdef bint hs = has_spare
    cdef double sp = spare
    cdef Py_ssize_t i = 0, n = out.shape[0]
    cdef double u1, u2, r, theta, z1
    if hs and n > 0:
        out[0] = sp
        hs = False
        sp = 0.0
        i = 1
    with nogil:
        while i < n:
            s += GOLDEN
            u1 = (_mix(s) >> 11) * TWO_NEG53
            s += GOLDEN
            u2 = (_mix(s) >> 11) * TWO_NEG53
            if u1 <= 0.0:
                u1 = TWO_NEG53
            r = sqrt(-2.0 * log(u1))
            theta = TWO_PI * u2
            out[i] = r * cos(theta)
            z1 = r * sin(theta)
            i += 1
            if i < n:
                out[i] = z1
                i += 1
            else:
                hs = True
                sp = z1
    return s, hs, sp
