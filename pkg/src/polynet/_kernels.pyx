# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels: hyperplane enumeration for depth/center regions and Jacobi sweeps.

Signatures and return conventions mirror ``polynet._pykernels``.

Hyperplanes through (r-1)-subsets of the rows are enumerated in lexicographic
order.  The first r-2 rows of a subset (the prefix) are deflated one level at a
time: the Householder reflection sending the chosen row to a multiple of e_1 is
applied to every row and the first coordinate dropped, so level l holds all rows
in coordinates of the orthogonal complement of the first l prefix rows.  With
the prefix complete every row is a 2-vector, the normal through prefix + row
``(a, b)`` is ``(-b, a)/|(a, b)|`` and each subset costs O(N).  A dependent
prefix is skipped together with every subset extending it.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, fabs
from libc.stdlib cimport malloc, realloc, free

cnp.import_array()

cdef double IMPROVE_TOL = 1e-12


cdef struct Buffer:
    double* data
    Py_ssize_t len
    Py_ssize_t cap


cdef int _push(Buffer* b, const double* vals, Py_ssize_t count) noexcept nogil:
    cdef Py_ssize_t i, newcap
    cdef double* p
    if b.len + count > b.cap:
        newcap = 2 * b.cap + count
        p = <double*> realloc(b.data, newcap * sizeof(double))
        if p == NULL:
            return -1
        b.data = p
        b.cap = newcap
    for i in range(count):
        b.data[b.len + i] = vals[i]
    b.len += count
    return 0


cdef object _buffer_to_array(Buffer* b, Py_ssize_t width):
    cdef Py_ssize_t rows_out = b.len // width if width > 0 else 0
    out = np.empty((rows_out, width), dtype=np.float64)
    cdef double[:, ::1] ov = out
    cdef Py_ssize_t i, c
    for i in range(rows_out):
        for c in range(width):
            ov[i, c] = b.data[i * width + c]
    return out


cdef struct ScanState:
    # inputs
    int mode                 # 0 = depth, 1 = constraints
    double z_mass
    double threshold
    double total
    double on_tol
    double dep_tol
    # depth results
    double best
    int best_sign
    # workspace
    double* W                # deflated rows per level, level l has r - l columns
    Py_ssize_t* woff
    double* V                # Householder vectors per level
    double* vbeta
    Py_ssize_t* voff
    double* u
    double* tmp
    double* bestu
    double* rownorm
    Py_ssize_t* idx
    Py_ssize_t* bestidx
    Buffer out


cdef void _full_normal(ScanState* st, Py_ssize_t r, Py_ssize_t nlev, double n0, double n1) noexcept nogil:
    """Map a normal given in the final 2-d coordinates back to R^r into st.u."""
    cdef Py_ssize_t lev, dim, c
    cdef double* v
    cdef double d
    st.tmp[0] = n0
    st.tmp[1] = n1
    for lev in range(nlev - 1, -1, -1):
        dim = r - lev
        # y = [0; tmp[0:dim-1]], then apply the reflection of this level
        for c in range(dim - 1, 0, -1):
            st.tmp[c] = st.tmp[c - 1]
        st.tmp[0] = 0.0
        v = st.V + st.voff[lev]
        d = 0.0
        for c in range(dim):
            d += v[c] * st.tmp[c]
        d *= st.vbeta[lev]
        for c in range(dim):
            st.tmp[c] -= d * v[c]
    for c in range(r):
        st.u[c] = st.tmp[c]


cdef int _scan_last(ScanState* st, double* W2, Py_ssize_t N, Py_ssize_t r, Py_ssize_t k,
                    const double[::1] w, Py_ssize_t last_lo, Py_ssize_t last_hi) noexcept nogil:
    """Process every subset formed by the current prefix plus one row in [last_lo, last_hi)."""
    cdef Py_ssize_t j, c, last, non
    cdef double alpha, beta, nr, inv, s, pos, neg, onm, cut
    for last in range(last_lo, last_hi):
        alpha = W2[2 * last]
        beta = W2[2 * last + 1]
        nr = sqrt(alpha * alpha + beta * beta)
        if nr <= st.dep_tol * st.rownorm[last] or nr == 0.0:
            continue
        inv = 1.0 / nr
        if st.mode == 0:
            cut = st.best - st.z_mass
        else:
            cut = st.total - st.threshold
        pos = 0.0
        neg = 0.0
        onm = 0.0
        non = 0
        for j in range(N):
            if pos >= cut and neg >= cut:
                break
            s = (alpha * W2[2 * j + 1] - beta * W2[2 * j]) * inv
            if fabs(s) <= st.on_tol * st.rownorm[j]:
                non += 1
                onm += w[j]
            elif s > 0:
                pos += w[j]
            else:
                neg += w[j]
        else:
            if st.mode == 0:
                st.idx[k - 1] = last
                if non == k:
                    if pos + st.z_mass < st.best - IMPROVE_TOL:
                        st.best = pos + st.z_mass
                        st.best_sign = 1
                        _full_normal(st, r, k - 1, -beta * inv, alpha * inv)
                        for c in range(r):
                            st.bestu[c] = st.u[c]
                        for c in range(k):
                            st.bestidx[c] = st.idx[c]
                    if neg + st.z_mass < st.best - IMPROVE_TOL:
                        st.best = neg + st.z_mass
                        st.best_sign = -1
                        _full_normal(st, r, k - 1, -beta * inv, alpha * inv)
                        for c in range(r):
                            st.bestu[c] = st.u[c]
                        for c in range(k):
                            st.bestidx[c] = st.idx[c]
                elif (pos if pos < neg else neg) + st.z_mass < st.best - IMPROVE_TOL:
                    _full_normal(st, r, k - 1, -beta * inv, alpha * inv)
                    st.u[r] = pos
                    st.u[r + 1] = neg
                    if _push(&st.out, st.u, r + 2) != 0:
                        return -1
            else:
                if pos + onm > st.threshold or neg + onm > st.threshold:
                    _full_normal(st, r, k - 1, -beta * inv, alpha * inv)
                if pos + onm > st.threshold:
                    if _push(&st.out, st.u, r) != 0:
                        return -1
                if neg + onm > st.threshold:
                    for c in range(r):
                        st.u[c] = -st.u[c]
                    if _push(&st.out, st.u, r) != 0:
                        return -1
    return 0


cdef int _scan(ScanState* st, const double[:, ::1] rows, const double[::1] w,
               Py_ssize_t N, Py_ssize_t r, Py_ssize_t lo, Py_ssize_t hi) noexcept nogil:
    cdef Py_ssize_t k = r - 1
    cdef Py_ssize_t level, c, j, top, i, dim
    cdef double* Wl
    cdef double* Wn
    cdef double* x
    cdef double* y
    cdef double* v
    cdef double nx, d, vv
    for j in range(N):
        for c in range(r):
            st.W[j * r + c] = rows[j, c]
    if k == 1:
        # the prefix is empty; the range restricts the only index
        if lo < 0:
            lo = 0
        if hi > N:
            hi = N
        if lo >= hi:
            return 0
        return _scan_last(st, st.W, N, r, k, w, lo, hi)
    top = hi
    if top > N - k + 1:
        top = N - k + 1
    level = 0
    st.idx[0] = lo - 1
    while True:
        st.idx[level] += 1
        if (level == 0 and st.idx[0] >= top) or st.idx[level] > N - k + level:
            level -= 1
            if level < 0:
                break
            continue
        i = st.idx[level]
        dim = r - level
        Wl = st.W + st.woff[level]
        x = Wl + i * dim
        nx = 0.0
        for c in range(dim):
            nx += x[c] * x[c]
        nx = sqrt(nx)
        if nx <= st.dep_tol * st.rownorm[i] or nx == 0.0:
            continue
        # Householder reflection sending x to a multiple of e_1
        v = st.V + st.voff[level]
        for c in range(dim):
            v[c] = x[c]
        if x[0] >= 0:
            v[0] += nx
        else:
            v[0] -= nx
        vv = 0.0
        for c in range(dim):
            vv += v[c] * v[c]
        st.vbeta[level] = 2.0 / vv
        Wn = st.W + st.woff[level + 1]
        for j in range(N):
            y = Wl + j * dim
            d = 0.0
            for c in range(dim):
                d += v[c] * y[c]
            d *= st.vbeta[level]
            for c in range(1, dim):
                Wn[j * (dim - 1) + c - 1] = y[c] - d * v[c]
        if level < k - 2:
            level += 1
            st.idx[level] = st.idx[level - 1]
            continue
        if _scan_last(st, Wn, N, r, k, w, st.idx[level] + 1, N) != 0:
            return -1
    return 0


cdef int _init_state(ScanState* st, const double[:, ::1] rows, Py_ssize_t N, Py_ssize_t r):
    cdef Py_ssize_t j, c, k = r - 1, lev, wtot = 0, vtot = 0
    cdef double nrm
    st.woff = <Py_ssize_t*> malloc((r + 1) * sizeof(Py_ssize_t))
    st.voff = <Py_ssize_t*> malloc((r + 1) * sizeof(Py_ssize_t))
    st.W = NULL
    st.V = NULL
    st.vbeta = <double*> malloc((r + 1) * sizeof(double))
    st.u = <double*> malloc((r + 2) * sizeof(double))
    st.tmp = <double*> malloc((r + 2) * sizeof(double))
    st.bestu = <double*> malloc(r * sizeof(double))
    st.rownorm = <double*> malloc(N * sizeof(double))
    st.idx = <Py_ssize_t*> malloc(k * sizeof(Py_ssize_t))
    st.bestidx = <Py_ssize_t*> malloc(k * sizeof(Py_ssize_t))
    st.out.data = NULL
    st.out.len = 0
    st.out.cap = 0
    if (st.woff == NULL or st.voff == NULL or st.vbeta == NULL or st.u == NULL
            or st.tmp == NULL or st.bestu == NULL or st.rownorm == NULL
            or st.idx == NULL or st.bestidx == NULL):
        return -1
    for lev in range(r):
        st.woff[lev] = wtot
        st.voff[lev] = vtot
        wtot += N * (r - lev)
        vtot += r - lev
    st.W = <double*> malloc((wtot + 1) * sizeof(double))
    st.V = <double*> malloc((vtot + 1) * sizeof(double))
    if st.W == NULL or st.V == NULL:
        return -1
    for j in range(N):
        nrm = 0.0
        for c in range(r):
            nrm += rows[j, c] * rows[j, c]
        st.rownorm[j] = sqrt(nrm)
    for c in range(r):
        st.bestu[c] = 0.0
    for c in range(k):
        st.bestidx[c] = -1
        st.idx[c] = 0
    st.best = 1e300
    st.best_sign = 0
    return 0


cdef void _free_state(ScanState* st):
    free(st.W)
    free(st.woff)
    free(st.V)
    free(st.vbeta)
    free(st.voff)
    free(st.u)
    free(st.tmp)
    free(st.bestu)
    free(st.rownorm)
    free(st.idx)
    free(st.bestidx)
    free(st.out.data)


def depth_scan(rows_in, weights_in, double z_mass, double on_tol, double dep_tol,
               Py_ssize_t lo, Py_ssize_t hi):
    cdef const double[:, ::1] rows = np.ascontiguousarray(rows_in, dtype=np.float64)
    cdef const double[::1] w = np.ascontiguousarray(weights_in, dtype=np.float64)
    cdef Py_ssize_t N = rows.shape[0], r = rows.shape[1]
    cdef Py_ssize_t k = r - 1, c
    cdef int status
    cdef ScanState st
    if k < 1:
        raise ValueError("depth_scan needs rows of dimension >= 2")
    st.mode = 0
    st.z_mass = z_mass
    st.threshold = 0.0
    st.total = 0.0
    st.on_tol = on_tol
    st.dep_tol = dep_tol
    try:
        if _init_state(&st, rows, N, r) != 0:
            raise MemoryError()
        with nogil:
            status = _scan(&st, rows, w, N, r, lo, hi)
        if status != 0:
            raise MemoryError()
        subset = np.array([st.bestidx[c] for c in range(k)], dtype=np.int64)
        normal = np.array([st.bestu[c] for c in range(r)], dtype=np.float64)
        degenerate = _buffer_to_array(&st.out, r + 2)
        value = float(st.best) if st.best_sign != 0 else float("inf")
        return value, subset, st.best_sign, normal, degenerate
    finally:
        _free_state(&st)


def constraint_scan(rows_in, weights_in, double threshold, double on_tol, double dep_tol,
                    Py_ssize_t lo, Py_ssize_t hi):
    cdef const double[:, ::1] rows = np.ascontiguousarray(rows_in, dtype=np.float64)
    cdef const double[::1] w = np.ascontiguousarray(weights_in, dtype=np.float64)
    cdef Py_ssize_t N = rows.shape[0], r = rows.shape[1]
    cdef Py_ssize_t k = r - 1, j
    cdef int status
    cdef ScanState st
    if k < 1:
        raise ValueError("constraint_scan needs rows of dimension >= 2")
    st.mode = 1
    st.z_mass = 0.0
    st.threshold = threshold
    st.total = 0.0
    for j in range(N):
        st.total += w[j]
    st.on_tol = on_tol
    st.dep_tol = dep_tol
    try:
        if _init_state(&st, rows, N, r) != 0:
            raise MemoryError()
        with nogil:
            status = _scan(&st, rows, w, N, r, lo, hi)
        if status != 0:
            raise MemoryError()
        return _buffer_to_array(&st.out, r)
    finally:
        _free_state(&st)


def jacobi_eigh(A, int max_sweeps, double tol):
    a_arr = np.array(A, dtype=np.float64, order="C", copy=True)
    cdef double[:, ::1] a = a_arr
    cdef Py_ssize_t n = a.shape[0]
    v_arr = np.eye(n, dtype=np.float64)
    cdef double[:, ::1] v = v_arr
    cdef Py_ssize_t p, q, i
    cdef int sweeps = 0, converged = 0, it
    cdef double apq, theta, t, c, s, x, y, off, scale = 0.0
    with nogil:
        for p in range(n):
            for q in range(n):
                scale += a[p, q] * a[p, q]
        scale = sqrt(scale)
        if scale < 1e-300:
            scale = 1e-300
        for it in range(1, max_sweeps + 2):
            off = 0.0
            for p in range(n):
                for q in range(n):
                    if p != q:
                        off += a[p, q] * a[p, q]
            if sqrt(off) <= tol * scale:
                converged = 1
                break
            if it > max_sweeps:
                break
            sweeps = it
            for p in range(n - 1):
                for q in range(p + 1, n):
                    apq = a[p, q]
                    if fabs(apq) <= 1e-300:
                        continue
                    theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                    t = 1.0 / (fabs(theta) + sqrt(theta * theta + 1.0))
                    if theta < 0:
                        t = -t
                    c = 1.0 / sqrt(t * t + 1.0)
                    s = t * c
                    for i in range(n):
                        x = a[i, p]
                        y = a[i, q]
                        a[i, p] = c * x - s * y
                        a[i, q] = s * x + c * y
                    for i in range(n):
                        x = a[p, i]
                        y = a[q, i]
                        a[p, i] = c * x - s * y
                        a[q, i] = s * x + c * y
                    a[p, q] = 0.0
                    a[q, p] = 0.0
                    for i in range(n):
                        x = v[i, p]
                        y = v[i, q]
                        v[i, p] = c * x - s * y
                        v[i, q] = s * x + c * y
    return np.diag(a_arr).copy(), v_arr, sweeps, bool(converged)
