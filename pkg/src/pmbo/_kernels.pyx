# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled Newton-basis kernels.

For a point ``x`` and generating nodes ``g`` the basis function of the
multi-index ``a`` is ``N_a(x) = prod_i prod_{j<a_i} (x_i - g_j)``. Each kernel
first builds the per-coordinate tables ``T[i, j] = prod_{l<j} (x_i - g_l)``
(and their derivatives), then combines them per multi-index.
"""
import numpy as np
cimport numpy as cnp
from libc.stdlib cimport malloc, free

cnp.import_array()


cdef inline Py_ssize_t _max_exp(const long long[:, ::1] exps) noexcept nogil:
    cdef Py_ssize_t k, i, mx = 0
    for k in range(exps.shape[0]):
        for i in range(exps.shape[1]):
            if exps[k, i] > mx:
                mx = exps[k, i]
    return mx


cdef inline void _fill_tables(const double[::1] x, const double[::1] nodes,
                              Py_ssize_t width, double* T, double* dT) noexcept nogil:
    cdef Py_ssize_t i, j, m = x.shape[0]
    cdef double diff
    for i in range(m):
        T[i * width] = 1.0
        if dT != NULL:
            dT[i * width] = 0.0
        for j in range(width - 1):
            diff = x[i] - nodes[j]
            T[i * width + j + 1] = T[i * width + j] * diff
            if dT != NULL:
                dT[i * width + j + 1] = dT[i * width + j] * diff + T[i * width + j]


def newton_basis(X, exps, nodes):
    cdef const double[:, ::1] Xv = np.ascontiguousarray(X, dtype=np.float64)
    cdef const long long[:, ::1] E = np.ascontiguousarray(exps, dtype=np.int64)
    cdef const double[::1] g = np.ascontiguousarray(nodes, dtype=np.float64)
    cdef Py_ssize_t n = Xv.shape[0], m = Xv.shape[1], nt = E.shape[0]
    cdef Py_ssize_t width = _max_exp(E) + 1
    out = np.empty((n, nt), dtype=np.float64)
    cdef double[:, ::1] D = out
    cdef Py_ssize_t p, k, i
    cdef double prod
    cdef double* T = <double*> malloc(m * width * sizeof(double))
    if T == NULL:
        raise MemoryError()
    try:
        with nogil:
            for p in range(n):
                _fill_tables(Xv[p], g, width, T, NULL)
                for k in range(nt):
                    prod = 1.0
                    for i in range(m):
                        prod = prod * T[i * width + E[k, i]]
                    D[p, k] = prod
    finally:
        free(T)
    return out


def newton_eval(X, exps, nodes, coeffs):
    cdef const double[:, ::1] Xv = np.ascontiguousarray(X, dtype=np.float64)
    cdef const long long[:, ::1] E = np.ascontiguousarray(exps, dtype=np.int64)
    cdef const double[::1] g = np.ascontiguousarray(nodes, dtype=np.float64)
    cdef const double[::1] c = np.ascontiguousarray(coeffs, dtype=np.float64)
    cdef Py_ssize_t n = Xv.shape[0], m = Xv.shape[1], nt = E.shape[0]
    cdef Py_ssize_t width = _max_exp(E) + 1
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] y = out
    cdef Py_ssize_t p, k, i
    cdef double prod, acc
    cdef double* T = <double*> malloc(m * width * sizeof(double))
    if T == NULL:
        raise MemoryError()
    try:
        with nogil:
            for p in range(n):
                _fill_tables(Xv[p], g, width, T, NULL)
                acc = 0.0
                for k in range(nt):
                    prod = c[k]
                    for i in range(m):
                        prod = prod * T[i * width + E[k, i]]
                    acc = acc + prod
                y[p] = acc
    finally:
        free(T)
    return out


cdef void _eval_grad_point(const double[::1] x, const long long[:, ::1] E,
                           const double[::1] g, const double[::1] c,
                           Py_ssize_t width, double* T, double* dT,
                           double* pre, double* val, double[::1] grad) noexcept nogil:
    # pre[i] = prod_{l<i} T_l; suffix product is accumulated on the way back
    cdef Py_ssize_t m = x.shape[0], nt = E.shape[0], k, i
    cdef double suf, acc = 0.0
    _fill_tables(x, g, width, T, dT)
    for i in range(m):
        grad[i] = 0.0
    for k in range(nt):
        pre[0] = 1.0
        for i in range(m):
            pre[i + 1] = pre[i] * T[i * width + E[k, i]]
        acc = acc + c[k] * pre[m]
        suf = c[k]
        for i in range(m - 1, -1, -1):
            grad[i] = grad[i] + pre[i] * dT[i * width + E[k, i]] * suf
            suf = suf * T[i * width + E[k, i]]
    val[0] = acc


def newton_eval_grad(X, exps, nodes, coeffs):
    cdef const double[:, ::1] Xv = np.ascontiguousarray(X, dtype=np.float64)
    cdef const long long[:, ::1] E = np.ascontiguousarray(exps, dtype=np.int64)
    cdef const double[::1] g = np.ascontiguousarray(nodes, dtype=np.float64)
    cdef const double[::1] c = np.ascontiguousarray(coeffs, dtype=np.float64)
    cdef Py_ssize_t n = Xv.shape[0], m = Xv.shape[1]
    cdef Py_ssize_t width = _max_exp(E) + 1
    vals = np.empty(n, dtype=np.float64)
    grads = np.empty((n, m), dtype=np.float64)
    cdef double[::1] y = vals
    cdef double[:, ::1] G = grads
    cdef Py_ssize_t p
    cdef double* T = <double*> malloc(m * width * sizeof(double))
    cdef double* dT = <double*> malloc(m * width * sizeof(double))
    cdef double* pre = <double*> malloc((m + 1) * sizeof(double))
    if T == NULL or dT == NULL or pre == NULL:
        free(T); free(dT); free(pre)
        raise MemoryError()
    try:
        with nogil:
            for p in range(n):
                _eval_grad_point(Xv[p], E, g, c, width, T, dT, pre, &y[p], G[p])
    finally:
        free(T)
        free(dT)
        free(pre)
    return vals, grads


def newton_grad(X, exps, nodes, coeffs):
    return newton_eval_grad(X, exps, nodes, coeffs)[1]


cdef double _eval_point(const double[::1] x, const long long[:, ::1] E,
                        const double[::1] g, const double[::1] c,
                        Py_ssize_t width, double* T) noexcept nogil:
    cdef Py_ssize_t m = x.shape[0], nt = E.shape[0], k, i
    cdef double prod, acc = 0.0
    _fill_tables(x, g, width, T, NULL)
    for k in range(nt):
        prod = c[k]
        for i in range(m):
            prod = prod * T[i * width + E[k, i]]
        acc = acc + prod
    return acc


def box_pgd(X0, exps, nodes, coeffs, Py_ssize_t max_iter=200, double tol=1e-9,
            double armijo=1e-4, double min_step=1e-20):
    """Projected gradient descent on [-1, 1]^m from every row of ``X0``.

    Backtracking halves the step from 1.0 until
    ``Q(x+) <= Q(x) + armijo * grad . (x+ - x)`` with a strict decrease
    direction. Returns the final points and their values.
    """
    cdef const long long[:, ::1] E = np.ascontiguousarray(exps, dtype=np.int64)
    cdef const double[::1] g = np.ascontiguousarray(nodes, dtype=np.float64)
    cdef const double[::1] c = np.ascontiguousarray(coeffs, dtype=np.float64)
    Xout = np.array(X0, dtype=np.float64, order="C", copy=True)
    cdef double[:, ::1] X = Xout
    cdef Py_ssize_t n = X.shape[0], m = X.shape[1]
    cdef Py_ssize_t width = _max_exp(E) + 1
    vals = np.empty(n, dtype=np.float64)
    cdef double[::1] V = vals
    grad_arr = np.empty(m, dtype=np.float64)
    trial_arr = np.empty(m, dtype=np.float64)
    cdef double[::1] grad = grad_arr
    cdef double[::1] xt = trial_arr
    cdef Py_ssize_t p, it, i
    cdef double v, vt, t, pgn, d, dec, z
    cdef bint accepted
    cdef double* T = <double*> malloc(m * width * sizeof(double))
    cdef double* dT = <double*> malloc(m * width * sizeof(double))
    cdef double* pre = <double*> malloc((m + 1) * sizeof(double))
    if T == NULL or dT == NULL or pre == NULL:
        free(T); free(dT); free(pre)
        raise MemoryError()
    try:
        with nogil:
            for p in range(n):
                _eval_grad_point(X[p], E, g, c, width, T, dT, pre, &v, grad)
                for it in range(max_iter):
                    pgn = 0.0
                    for i in range(m):
                        z = X[p, i] - grad[i]
                        if z > 1.0:
                            z = 1.0
                        elif z < -1.0:
                            z = -1.0
                        d = X[p, i] - z
                        pgn = pgn + d * d
                    if pgn <= tol * tol:
                        break
                    t = 1.0
                    accepted = False
                    while t >= min_step:
                        dec = 0.0
                        for i in range(m):
                            z = X[p, i] - t * grad[i]
                            if z > 1.0:
                                z = 1.0
                            elif z < -1.0:
                                z = -1.0
                            xt[i] = z
                            dec = dec + grad[i] * (z - X[p, i])
                        if dec < 0.0:
                            vt = _eval_point(xt, E, g, c, width, T)
                            if vt <= v + armijo * dec:
                                accepted = True
                                break
                        t = t * 0.5
                    if not accepted:
                        break
                    for i in range(m):
                        X[p, i] = xt[i]
                    _eval_grad_point(X[p], E, g, c, width, T, dT, pre, &v, grad)
                V[p] = v
    finally:
        free(T)
        free(dT)
        free(pre)
    return Xout, vals
