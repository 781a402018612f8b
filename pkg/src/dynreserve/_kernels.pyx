# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled per-record kernels.

Both kernels work on a half-open record range so the parallel engine can hand
each worker a contiguous shard. They release the GIL for the whole scan.

Accumulation is blocked pairwise summation: records are summed naively in
blocks of ``BLOCK`` and block sums are merged with a binary-counter tree, which
keeps rounding error at O(log N) instead of O(N).
"""
from libc.math cimport INFINITY, nextafter
from libc.stdlib cimport malloc, free
from libc.string cimport memset

DEF BLOCK = 128
DEF MAX_DEPTH = 64
DEF MAX_NUDGE = 64

# layout of the accumulator vector written by evaluate_range
PRIMAL = 0
POSITIVE = 1
COUNT = 2
CONS = 3


cdef inline void _push(double* stack, int* levels, int* depth,
                       double* block, Py_ssize_t width) noexcept nogil:
    cdef Py_ssize_t j
    cdef int lvl = 0
    cdef double* top
    # merge equal-level partials before pushing, like carrying in a binary counter
    while depth[0] > 0 and levels[depth[0] - 1] == lvl:
        top = stack + (depth[0] - 1) * width
        for j in range(width):
            block[j] = top[j] + block[j]
        depth[0] -= 1
        lvl += 1
    top = stack + depth[0] * width
    for j in range(width):
        top[j] = block[j]
    levels[depth[0]] = lvl
    depth[0] += 1


def evaluate_range(const double[::1] c, const double[::1, :] b, const double[::1] lam,
                   Py_ssize_t start, Py_ssize_t stop,
                   unsigned char[::1] x, double[::1] out):
    """Apply the positive-adjusted-cost rule to records ``[start, stop)``.

    Writes decisions into ``x[start:stop]`` and the shard partials into
    ``out``: selected value, sum of positive adjusted costs, selected count,
    then one constraint accumulator per multiplier.
    """
    cdef Py_ssize_t L = lam.shape[0]
    cdef Py_ssize_t width = 3 + L
    cdef Py_ssize_t i, k, j, filled
    cdef double adj
    cdef int depth = 0
    cdef double* stack
    cdef double* block
    cdef int* levels
    if out.shape[0] != width:
        raise ValueError("accumulator width mismatch")

    stack = <double*> malloc(MAX_DEPTH * width * sizeof(double))
    block = <double*> malloc(width * sizeof(double))
    levels = <int*> malloc(MAX_DEPTH * sizeof(int))
    if stack == NULL or block == NULL or levels == NULL:
        free(stack); free(block); free(levels)
        raise MemoryError()

    with nogil:
        memset(block, 0, width * sizeof(double))
        filled = 0
        for i in range(start, stop):
            adj = c[i]
            for k in range(L):
                adj = adj + lam[k] * b[i, k]
            if adj > 0.0:
                x[i] = 1
                block[0] += c[i]
                block[1] += adj
                block[2] += 1.0
                for k in range(L):
                    block[3 + k] += b[i, k]
            else:
                x[i] = 0
            filled += 1
            if filled == BLOCK:
                _push(stack, levels, &depth, block, width)
                memset(block, 0, width * sizeof(double))
                filled = 0
        if filled > 0:
            _push(stack, levels, &depth, block, width)
        # fold the remaining partials from smallest to largest level
        memset(block, 0, width * sizeof(double))
        while depth > 0:
            depth -= 1
            for j in range(width):
                block[j] = stack[depth * width + j] + block[j]
        for j in range(width):
            out[j] = block[j]

    free(stack); free(block); free(levels)


cdef inline double _adjusted_at(const double[::1] c, const double[::1, :] b,
                                const double[::1] lam, Py_ssize_t i, Py_ssize_t k,
                                double v) noexcept nogil:
    # same operation order as evaluate_range, with lambda_k replaced by v
    cdef Py_ssize_t j
    cdef double adj = c[i]
    for j in range(lam.shape[0]):
        adj = adj + (v if j == k else lam[j]) * b[i, j]
    return adj


def roots_range(const double[::1] c, const double[::1, :] b, const double[::1] lam,
                Py_ssize_t k, Py_ssize_t start, Py_ssize_t stop, double[::1] roots):
    """Positive zero crossings in coordinate ``k`` of each record's adjusted cost.

    Each root is moved by single ulps until the record's evaluated adjusted
    cost is not positive there, so the record is deselected at its own
    candidate exactly as it would be in exact arithmetic.
    Roots are packed into ``roots[start:start + count]``; returns ``count``.
    """
    cdef Py_ssize_t L = lam.shape[0]
    cdef Py_ssize_t i, j
    cdef Py_ssize_t count = 0
    cdef int step
    cdef double rest, bik, r, toward
    with nogil:
        for i in range(start, stop):
            bik = b[i, k]
            if bik == 0.0:
                continue
            rest = c[i]
            for j in range(L):
                if j != k:
                    rest = rest + lam[j] * b[i, j]
            r = -rest / bik
            toward = INFINITY if bik < 0.0 else -INFINITY
            step = 0
            while step < MAX_NUDGE and _adjusted_at(c, b, lam, i, k, r) > 0.0:
                r = nextafter(r, toward)
                step += 1
            if r > 0.0:
                roots[start + count] = r
                count += 1
    return count
