# cython: boundscheck=False, wraparound=False, nonecheck=False, cdivision=True
"""Compiled dynamic-programming kernels.

Contract-identical twin of capedit._kernels_py; see that module for the
cost model and the canonical-walk definition.
"""

from libc.stdint cimport int32_t, int64_t
from libc.stdlib cimport free, malloc

OP_KEEP = 0
OP_DELETE = 1
OP_ADD = 2

cdef enum:
    _KEEP = 0
    _DELETE = 1
    _ADD = 2


cdef inline int32_t _lcs_row(const int32_t* a, Py_ssize_t la,
                             const int32_t* b, Py_ssize_t lb,
                             int32_t* row) noexcept nogil:
    cdef Py_ssize_t i, j
    cdef int32_t diag, tmp, v
    for j in range(lb + 1):
        row[j] = 0
    for i in range(1, la + 1):
        diag = 0
        for j in range(1, lb + 1):
            tmp = row[j]
            if a[i - 1] == b[j - 1]:
                v = diag + 1
            else:
                v = row[j] if row[j] >= row[j - 1] else row[j - 1]
            row[j] = v
            diag = tmp
    return row[lb]


cdef inline int32_t _dist_row(const int32_t* a, Py_ssize_t la,
                              const int32_t* b, Py_ssize_t lb,
                              int32_t* row) noexcept nogil:
    cdef Py_ssize_t i, j
    cdef int32_t diag, tmp, v
    for j in range(lb + 1):
        row[j] = <int32_t> j
    for i in range(1, la + 1):
        diag = row[0]
        row[0] = <int32_t> i
        for j in range(1, lb + 1):
            tmp = row[j]
            if a[i - 1] == b[j - 1]:
                v = diag
            else:
                v = (row[j] if row[j] < row[j - 1] else row[j - 1]) + 1
            row[j] = v
            diag = tmp
    return row[lb]


cdef inline Py_ssize_t _ops_walk(const int32_t* a, Py_ssize_t la,
                                 const int32_t* b, Py_ssize_t lb,
                                 int32_t* cost, unsigned char* ops) noexcept nogil:
    # cost must hold (la+1)*(lb+1) entries; ops must hold la+lb entries
    cdef Py_ssize_t i, j, n = 0
    cdef Py_ssize_t w = lb + 1
    cdef int32_t dn, ad
    for j in range(lb + 1):
        cost[la * w + j] = <int32_t> (lb - j)
    for i in range(la - 1, -1, -1):
        cost[i * w + lb] = <int32_t> (la - i)
        for j in range(lb - 1, -1, -1):
            if a[i] == b[j]:
                cost[i * w + j] = cost[(i + 1) * w + j + 1]
            else:
                dn = cost[(i + 1) * w + j]
                ad = cost[i * w + j + 1]
                cost[i * w + j] = (dn if dn < ad else ad) + 1
    i = 0
    j = 0
    while i < la or j < lb:
        if i < la and j < lb and a[i] == b[j] and cost[i * w + j] == cost[(i + 1) * w + j + 1]:
            ops[n] = _KEEP
            i += 1
            j += 1
        elif i < la and cost[i * w + j] == cost[(i + 1) * w + j] + 1:
            ops[n] = _DELETE
            i += 1
        else:
            ops[n] = _ADD
            j += 1
        n += 1
    return n


def lcs_len(int32_t[::1] a, int32_t[::1] b):
    cdef Py_ssize_t la = a.shape[0], lb = b.shape[0]
    if la == 0 or lb == 0:
        return 0
    cdef int32_t* row = <int32_t*> malloc((lb + 1) * sizeof(int32_t))
    if row == NULL:
        raise MemoryError()
    cdef int32_t res
    with nogil:
        res = _lcs_row(&a[0], la, &b[0], lb, row)
    free(row)
    return res


def edit_distance(int32_t[::1] a, int32_t[::1] b):
    cdef Py_ssize_t la = a.shape[0], lb = b.shape[0]
    if la == 0:
        return lb
    if lb == 0:
        return la
    cdef int32_t* row = <int32_t*> malloc((lb + 1) * sizeof(int32_t))
    if row == NULL:
        raise MemoryError()
    cdef int32_t res
    with nogil:
        res = _dist_row(&a[0], la, &b[0], lb, row)
    free(row)
    return res


def edit_ops(int32_t[::1] a, int32_t[::1] b):
    cdef Py_ssize_t la = a.shape[0], lb = b.shape[0]
    if la == 0:
        return bytes([OP_ADD]) * lb
    if lb == 0:
        return bytes([OP_DELETE]) * la
    buf = bytearray(la + lb)
    cdef unsigned char[::1] mv = buf
    cdef int32_t* cost = <int32_t*> malloc((la + 1) * (lb + 1) * sizeof(int32_t))
    if cost == NULL:
        raise MemoryError()
    cdef Py_ssize_t n
    with nogil:
        n = _ops_walk(&a[0], la, &b[0], lb, cost, &mv[0])
    free(cost)
    return bytes(buf[:n])


def edit_distance_block(int32_t[::1] flat_a, int64_t[::1] off_a,
                        int32_t[::1] flat_b, int64_t[::1] off_b,
                        int64_t[::1] idx_a, int64_t[::1] idx_b,
                        int32_t[::1] out):
    cdef Py_ssize_t n_pairs = idx_a.shape[0]
    if n_pairs == 0:
        return
    cdef Py_ssize_t i, L, max_b = 0
    for i in range(off_b.shape[0] - 1):
        L = off_b[i + 1] - off_b[i]
        if L > max_b:
            max_b = L
    cdef int32_t* row = <int32_t*> malloc((max_b + 1) * sizeof(int32_t))
    if row == NULL:
        raise MemoryError()
    cdef const int32_t* pa = NULL
    cdef const int32_t* pb = NULL
    if flat_a.shape[0] > 0:
        pa = &flat_a[0]
    if flat_b.shape[0] > 0:
        pb = &flat_b[0]
    cdef Py_ssize_t k, ia, ib, la, lb
    with nogil:
        for k in range(n_pairs):
            ia = idx_a[k]
            ib = idx_b[k]
            la = off_a[ia + 1] - off_a[ia]
            lb = off_b[ib + 1] - off_b[ib]
            out[k] = _dist_row(pa + off_a[ia], la, pb + off_b[ib], lb, row)
    free(row)


def edit_steps_block(int32_t[::1] flat_a, int64_t[::1] off_a,
                     int32_t[::1] flat_b, int64_t[::1] off_b,
                     int64_t[::1] idx_a, int64_t[::1] idx_b,
                     int32_t[::1] out):
    cdef Py_ssize_t n_pairs = idx_a.shape[0]
    if n_pairs == 0:
        return
    cdef Py_ssize_t i, L, max_a = 0, max_b = 0
    for i in range(off_a.shape[0] - 1):
        L = off_a[i + 1] - off_a[i]
        if L > max_a:
            max_a = L
    for i in range(off_b.shape[0] - 1):
        L = off_b[i + 1] - off_b[i]
        if L > max_b:
            max_b = L
    cdef int32_t* cost = <int32_t*> malloc((max_a + 1) * (max_b + 1) * sizeof(int32_t))
    cdef unsigned char* ops = <unsigned char*> malloc(max_a + max_b + 1)
    if cost == NULL or ops == NULL:
        free(cost)
        free(ops)
        raise MemoryError()
    cdef const int32_t* pa = NULL
    cdef const int32_t* pb = NULL
    if flat_a.shape[0] > 0:
        pa = &flat_a[0]
    if flat_b.shape[0] > 0:
        pb = &flat_b[0]
    cdef Py_ssize_t k, ia, ib, la, lb, n, t
    cdef int32_t steps
    with nogil:
        for k in range(n_pairs):
            ia = idx_a[k]
            ib = idx_b[k]
            la = off_a[ia + 1] - off_a[ia]
            lb = off_b[ib + 1] - off_b[ib]
            n = _ops_walk(pa + off_a[ia], la, pb + off_b[ib], lb, cost, ops)
            steps = 0
            for t in range(n):
                if ops[t] != _KEEP:
                    steps += 1
            out[k] = steps
    free(cost)
    free(ops)
