# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled Kelso-Crawford kernel; same contract as ``_kc_py``."""
from libc.stdlib cimport malloc, free
from libc.stdint cimport int64_t


cdef inline bint _before(int64_t wa, int ha, int ia, int64_t wb, int hb, int ib) nogil:
    # descending weight, held riders first, then lowest rider index
    if wa != wb:
        return wa > wb
    if ha != hb:
        return ha > hb
    return ia < ib


cdef int _demand(int l, int64_t* eta, int64_t* theta, int* owner, int64_t* util,
                 int64_t eps, int n, int cap, int64_t* w, int* held, int* idx, int* out) nogil:
    cdef int m, i, j, k, best_k, hk, count
    cdef int64_t best, prefix, val, held_best, tw
    cdef int th, ti
    for m in range(n):
        idx[m] = m
        if owner[m] == l:
            w[m] = eta[l * n + m]
            held[m] = 1
        else:
            w[m] = eta[l * n + m] - util[m] - eps
            held[m] = 0
    # insertion sort of idx by (weight desc, held first, index)
    for i in range(1, n):
        ti = idx[i]
        j = i - 1
        while j >= 0 and _before(w[ti], held[ti], ti, w[idx[j]], held[idx[j]], idx[j]):
            idx[j + 1] = idx[j]
            j -= 1
        idx[j + 1] = ti
    best = 0
    best_k = 0
    prefix = 0
    k = cap if cap < n else n
    for i in range(k):
        prefix += w[idx[i]]
        val = prefix - theta[l * (cap + 1) + i + 1]
        if val > best:
            best = val
            best_k = i + 1
    if best_k == 0:
        return 0
    held_best = 0
    prefix = 0
    hk = 0
    for i in range(n):
        if not held[idx[i]]:
            continue
        hk += 1
        if hk > cap:
            break
        prefix += w[idx[i]]
        val = prefix - theta[l * (cap + 1) + hk]
        if val > held_best:
            held_best = val
    if best <= held_best:
        return 0
    count = 0
    for i in range(best_k):
        if not held[idx[i]]:
            out[count] = idx[i]
            count += 1
    return count


def run_auction(eta, theta, long long eps, long long max_iter):
    cdef int n_aux = len(eta)
    cdef int n = len(eta[0]) if n_aux else 0
    cdef int cap = len(theta[0]) - 1 if n_aux else 0
    cdef int l, m, c, count
    cdef long long iterations = 0
    cdef bint moved
    if n_aux == 0 or n == 0:
        return [-1] * n, [0] * n, 0
    cdef int64_t* ceta = <int64_t*> malloc(n_aux * n * sizeof(int64_t))
    cdef int64_t* ctheta = <int64_t*> malloc(n_aux * (cap + 1) * sizeof(int64_t))
    cdef int* owner = <int*> malloc(n * sizeof(int))
    cdef int64_t* util = <int64_t*> malloc(n * sizeof(int64_t))
    cdef int64_t* w = <int64_t*> malloc(n * sizeof(int64_t))
    cdef int* held = <int*> malloc(n * sizeof(int))
    cdef int* idx = <int*> malloc(n * sizeof(int))
    cdef int* out = <int*> malloc(n * sizeof(int))
    try:
        for l in range(n_aux):
            for m in range(n):
                ceta[l * n + m] = eta[l][m]
            for c in range(cap + 1):
                ctheta[l * (cap + 1) + c] = theta[l][c]
        for m in range(n):
            owner[m] = -1
            util[m] = 0
        with nogil:
            while True:
                moved = False
                for l in range(n_aux):
                    count = _demand(l, ceta, ctheta, owner, util, eps, n, cap, w, held, idx, out)
                    if count:
                        for c in range(count):
                            owner[out[c]] = l
                            util[out[c]] += eps
                        iterations += 1
                        moved = True
                        break
                if not moved:
                    break
                if iterations >= max_iter:
                    iterations = -1
                    break
        return [owner[m] for m in range(n)], [util[m] for m in range(n)], iterations
    finally:
        free(ceta); free(ctheta); free(owner); free(util)
        free(w); free(held); free(idx); free(out)
