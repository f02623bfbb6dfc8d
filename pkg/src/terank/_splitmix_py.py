"""Pure-Python twin of the compiled _splitmix kernels.

Both backends call the same libm routines (math.log is C log, etc.) in
the same order, so they produce bit-identical streams; tests assert it.
"""
import math

_MASK = 0xFFFFFFFFFFFFFFFF
_GOLDEN = 0x9E3779B97F4A7C15
_TWO_NEG53 = 1.0 / 9007199254740992.0
_TWO_PI = 6.283185307179586


def _mix(z):
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


def fill_uniform(out, state):
    for i in range(out.shape[0]):
        state = (state + _GOLDEN) & _MASK
        out[i] = (_mix(state) >> 11) * _TWO_NEG53
    return state


def fill_gaussian(out, state, has_spare, spare):
    i = 0
    n = out.shape[0]
    if has_spare and n > 0:
        out[0] = spare
        has_spare = False
        spare = 0.0
        i = 1
    while i < n:
        state = (state + _GOLDEN) & _MASK
        u1 = (_mix(state) >> 11) * _TWO_NEG53
        state = (state + _GOLDEN) & _MASK
        u2 = (_mix(state) >> 11) * _TWO_NEG53
        if u1 <= 0.0:
            u1 = _TWO_NEG53
        r = math.sqrt(-2.0 * math.log(u1))
        theta = _TWO_PI * u2
        out[i] = r * math.cos(theta)
        z1 = r * math.sin(theta)
        i += 1
        if i < n:
            out[i] = z1
            i += 1
        else:
            has_spare = True
            spare = z1
    return state, has_spare, spare
