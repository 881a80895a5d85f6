# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled scoring kernels over CSR adjacency arrays.

Mirrors topicforge._ngdpy exactly; topicforge.kernels picks one of the two
at import time.
"""

from libc.math cimport log, INFINITY, NAN

import numpy as np

cimport numpy as cnp

cnp.import_array()


cpdef long long intersect_size(const int[::1] a, const int[::1] b):
    """Size of the intersection of two sorted, duplicate-free int32 arrays."""
    cdef Py_ssize_t i = 0, j = 0
    cdef Py_ssize_t na = a.shape[0], nb = b.shape[0]
    cdef long long n = 0
    while i < na and j < nb:
        if a[i] < b[j]:
            i += 1
        elif a[i] > b[j]:
            j += 1
        else:
            n += 1
            i += 1
            j += 1
    return n


def score_pairs(const long long[::1] indptr,
                const int[::1] indices,
                const int[::1] a_ids,
                const int[::1] b_ids,
                long long total_articles):
    """Relatedness score for each (a_ids[i], b_ids[i]) pair.

    ``indptr``/``indices`` hold the inbound-link CSR (rows sorted ascending).
    Returns float64 scores; +inf marks pairs with no co-linking article (or an
    empty inlink set on either side), NaN marks a zero denominator, which the
    caller turns into an error.
    """
    cdef Py_ssize_t n_pairs = a_ids.shape[0]
    cdef cnp.ndarray[double, ndim=1] out = np.empty(n_pairs, dtype=np.float64)
    cdef double[::1] out_v = out
    cdef double log_w = log(<double> total_articles)
    cdef Py_ssize_t k, i, j, ia0, ia1, ib0, ib1
    cdef long long na, nb, inter
    cdef double num, den

    for k in range(n_pairs):
        ia0 = indptr[a_ids[k]]
        ia1 = indptr[a_ids[k] + 1]
        ib0 = indptr[b_ids[k]]
        ib1 = indptr[b_ids[k] + 1]
        na = ia1 - ia0
        nb = ib1 - ib0
        if na == 0 or nb == 0:
            out_v[k] = INFINITY
            continue
        inter = 0
        i = ia0
        j = ib0
        while i < ia1 and j < ib1:
            if indices[i] < indices[j]:
                i += 1
            elif indices[i] > indices[j]:
                j += 1
            else:
                inter += 1
                i += 1
                j += 1
        if inter == 0:
            out_v[k] = INFINITY
            continue
        if (na if na < nb else nb) == total_articles:
            out_v[k] = NAN
            continue
        num = log(<double> (na if na > nb else nb)) - log(<double> inter)
        den = log_w - log(<double> (na if na < nb else nb))
        out_v[k] = num / den
    return out
