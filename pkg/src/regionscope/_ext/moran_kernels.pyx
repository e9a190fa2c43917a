# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Permutation inner loops for global and local Moran statistics.

Weights arrive in CSR form. Every routine writes into a caller-owned slice
of ``out`` and releases the GIL, so disjoint ranges can run on threads.
"""


def global_cross_products(const double[::1] z,
                          const long long[::1] indptr,
                          const long long[::1] indices,
                          const double[::1] data,
                          const long long[:, ::1] perms,
                          double[::1] out,
                          Py_ssize_t start,
                          Py_ssize_t stop):
    """out[p] = sum_i z[perm_i] * sum_j w_ij z[perm_j] for p in [start, stop)."""
    cdef Py_ssize_t n = z.shape[0]
    cdef Py_ssize_t p, i, k
    cdef double acc, lag
    with nogil:
        for p in range(start, stop):
            acc = 0.0
            for i in range(n):
                lag = 0.0
                for k in range(indptr[i], indptr[i + 1]):
                    lag = lag + data[k] * z[perms[p, indices[k]]]
                acc = acc + z[perms[p, i]] * lag
            out[p] = acc


def local_conditional_lags(const double[::1] z,
                           const long long[::1] indptr,
                           const double[::1] data,
                           const long long[:, ::1] rids,
                           double[:, ::1] out,
                           Py_ssize_t istart,
                           Py_ssize_t istop):
    """out[i, p]: spatial lag of unit i with the other n-1 values permuted.

    ``rids[p]`` is a permutation of 0..n-2 indexing the units other than i;
    neighbour slot t of unit i receives the value at other-index rids[p, t].
    Only the weights matter here, not which units the neighbours are.
    """
    cdef Py_ssize_t nperm = rids.shape[0]
    cdef Py_ssize_t i, p, k, t
    cdef long long r
    cdef double lag
    with nogil:
        for i in range(istart, istop):
            for p in range(nperm):
                lag = 0.0
                t = 0
                for k in range(indptr[i], indptr[i + 1]):
                    r = rids[p, t]
                    if r >= i:
                        r = r + 1
                    lag = lag + data[k] * z[r]
                    t = t + 1
                out[i, p] = lag
