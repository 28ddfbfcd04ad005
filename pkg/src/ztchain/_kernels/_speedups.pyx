# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled twin of ``pure.py``. Keep arithmetic bit-identical: same state
derivation, same double conversions, same scan order. See pure.py for the
parity constraints."""

from libc.stdint cimport uint64_t, int64_t
from libc.stdlib cimport malloc, free

BACKEND = "cython"

cdef uint64_t _GAMMA = 0x9E3779B97F4A7C15ULL
cdef uint64_t _STREAM_SALT = 0x1F123BB5159A55E5ULL
cdef double _INV_2_53 = 1.0 / 9007199254740992.0

MAX_STAKE_TOTAL = 1 << 53


cdef inline uint64_t _mix64(uint64_t z) nogil:
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL
    return z ^ (z >> 31)


cdef inline uint64_t _derive(uint64_t seed, uint64_t stream) nogil:
    return _mix64(seed ^ _mix64(stream * _GAMMA + _STREAM_SALT))


def mix64(z):
    return int(_mix64(<uint64_t> (z & 0xFFFFFFFFFFFFFFFF)))


def derive_state(seed, stream):
    return int(_derive(<uint64_t> (seed & 0xFFFFFFFFFFFFFFFF),
                       <uint64_t> (stream & 0xFFFFFFFFFFFFFFFF)))


def next_u64(state):
    cdef uint64_t s = <uint64_t> (state & 0xFFFFFFFFFFFFFFFF)
    s = s + _GAMMA
    return int(_mix64(s)), int(s)


def uniform_fill(seed, stream, n):
    cdef uint64_t state = _derive(<uint64_t> (seed & 0xFFFFFFFFFFFFFFFF),
                                  <uint64_t> (stream & 0xFFFFFFFFFFFFFFFF))
    cdef Py_ssize_t i, count = n
    out = [0.0] * count
    for i in range(count):
        state = state + _GAMMA
        out[i] = <double> (_mix64(state) >> 11) * _INV_2_53
    return out


def uniform_range_fill(seed, stream, n, double low, double high):
    cdef uint64_t state = _derive(<uint64_t> (seed & 0xFFFFFFFFFFFFFFFF),
                                  <uint64_t> (stream & 0xFFFFFFFFFFFFFFFF))
    cdef double span = high - low
    cdef Py_ssize_t i, count = n
    out = [0.0] * count
    for i in range(count):
        state = state + _GAMMA
        out[i] = low + (<double> (_mix64(state) >> 11) * _INV_2_53) * span
    return out


cdef int _fill_cum(object stakes, double *cum, int64_t *stk, Py_ssize_t n) except -1:
    cdef int64_t total = 0
    cdef Py_ssize_t i
    cdef double acc = 0.0
    for i in range(n):
        stk[i] = stakes[i]
        total += stk[i]
    for i in range(n):
        acc += (<double> stk[i]) / (<double> total)
        cum[i] = acc
    cum[n - 1] = 1.0
    return 0


def cumulative_probabilities(stakes):
    cdef Py_ssize_t n = len(stakes)
    cdef double *cum = <double *> malloc(n * sizeof(double))
    cdef int64_t *stk = <int64_t *> malloc(n * sizeof(int64_t))
    if cum == NULL or stk == NULL:
        free(cum); free(stk)
        raise MemoryError()
    try:
        _fill_cum(stakes, cum, stk, n)
        return [cum[i] for i in range(n)]
    finally:
        free(cum); free(stk)


def select_index(cum, stakes, double r):
    cdef Py_ssize_t i, n = len(cum)
    for i in range(n):
        if r <= <double> cum[i] and <int64_t> stakes[i] > 0:
            return i + 1
    raise AssertionError("no selectable validator")


def select_many(stakes, rs):
    cdef Py_ssize_t n = len(stakes)
    cdef Py_ssize_t m = len(rs)
    cdef double *cum = <double *> malloc(n * sizeof(double))
    cdef int64_t *stk = <int64_t *> malloc(n * sizeof(int64_t))
    if cum == NULL or stk == NULL:
        free(cum); free(stk)
        raise MemoryError()
    cdef Py_ssize_t i, j
    cdef double r
    out = [0] * m
    try:
        _fill_cum(stakes, cum, stk, n)
        for j in range(m):
            r = rs[j]
            for i in range(n):
                if r <= cum[i] and stk[i] > 0:
                    out[j] = i + 1
                    break
            else:
                raise AssertionError("no selectable validator")
        return out
    finally:
        free(cum); free(stk)


def selection_counts(stakes, draws, seed, stream):
    cdef Py_ssize_t n = len(stakes)
    cdef Py_ssize_t m = draws
    cdef double *cum = <double *> malloc(n * sizeof(double))
    cdef int64_t *stk = <int64_t *> malloc(n * sizeof(int64_t))
    cdef int64_t *counts = <int64_t *> malloc(n * sizeof(int64_t))
    if cum == NULL or stk == NULL or counts == NULL:
        free(cum); free(stk); free(counts)
        raise MemoryError()
    cdef uint64_t state = _derive(<uint64_t> (seed & 0xFFFFFFFFFFFFFFFF),
                                  <uint64_t> (stream & 0xFFFFFFFFFFFFFFFF))
    cdef Py_ssize_t i, j
    cdef double r
    try:
        _fill_cum(stakes, cum, stk, n)
        for i in range(n):
            counts[i] = 0
        with nogil:
            for j in range(m):
                state = state + _GAMMA
                r = <double> (_mix64(state) >> 11) * _INV_2_53
                for i in range(n):
                    if r <= cum[i] and stk[i] > 0:
                        counts[i] += 1
                        break
        return [int(counts[i]) for i in range(n)]
    finally:
        free(cum); free(stk); free(counts)
