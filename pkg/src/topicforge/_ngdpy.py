"""Pure-Python scoring kernels, used when the compiled extension is absent.

Same contract as topicforge._ngdkern; see topicforge.kernels for selection.
"""

import math

import numpy as np


def intersect_size(a, b):
    """Size of the intersection of two sorted, duplicate-free int32 arrays."""
    if len(a) == 0 or len(b) == 0:
        return 0
    return int(np.intersect1d(a, b, assume_unique=True).size)


def score_pairs(indptr, indices, a_ids, b_ids, total_articles):
    """Relatedness score for each (a_ids[i], b_ids[i]) pair.

    ``indptr``/``indices`` hold the inbound-link CSR (rows sorted ascending).
    Returns float64 scores; +inf marks pairs with no co-linking article (or an
    empty inlink set on either side), NaN marks a zero denominator, which the
    caller turns into an error.
    """
    indptr = np.asarray(indptr)
    indices = np.asarray(indices)
    out = np.empty(len(a_ids), dtype=np.float64)
    log_w = math.log(total_articles)
    for k in range(len(a_ids)):
        a, b = a_ids[k], b_ids[k]
        row_a = indices[indptr[a]:indptr[a + 1]]
        row_b = indices[indptr[b]:indptr[b + 1]]
        na, nb = row_a.size, row_b.size
        if na == 0 or nb == 0:
            out[k] = math.inf
            continue
        inter = np.intersect1d(row_a, row_b, assume_unique=True).size
        if inter == 0:
            out[k] = math.inf
            continue
        if min(na, nb) == total_articles:
            out[k] = math.nan
            continue
        num = math.log(max(na, nb)) - math.log(inter)
        den = log_w - math.log(min(na, nb))
        out[k] = num / den
    return out
