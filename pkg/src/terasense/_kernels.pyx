# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot loops. Signatures and results match ``_fallback``."""

import numpy as np
cimport numpy as cnp
from libc.math cimport tanh, exp, log, sqrt, M_PI

cnp.import_array()


cdef Py_ssize_t _lower_bound(const double[::1] a, double v) noexcept nogil:
    cdef Py_ssize_t lo = 0, hi = a.shape[0], mid
    while lo < hi:
        mid = (lo + hi) >> 1
        if a[mid] < v:
            lo = mid + 1
        else:
            hi = mid
    return lo


cdef Py_ssize_t _upper_bound(const double[::1] a, double v) noexcept nogil:
    cdef Py_ssize_t lo = 0, hi = a.shape[0], mid
    while lo < hi:
        mid = (lo + hi) >> 1
        if a[mid] <= v:
            lo = mid + 1
        else:
            hi = mid
    return lo


def lbl_absorption(freqs, centers, halfwidths, amplitudes, double beta, cutoffs):
    cdef const double[::1] f = np.ascontiguousarray(freqs, dtype=np.float64)
    cdef const double[::1] fc = np.ascontiguousarray(centers, dtype=np.float64)
    cdef const double[::1] wl = np.ascontiguousarray(halfwidths, dtype=np.float64)
    cdef const double[::1] amp = np.ascontiguousarray(amplitudes, dtype=np.float64)
    cdef const double[::1] cut = np.ascontiguousarray(cutoffs, dtype=np.float64)
    cdef Py_ssize_t n = f.shape[0], nl = fc.shape[0]
    out_arr = np.zeros(n, dtype=np.float64)
    cdef double[::1] out = out_arr
    tanh_arr = np.tanh(beta * np.asarray(f))
    cdef const double[::1] tf = tanh_arr
    cdef Py_ssize_t l, i, lo, hi
    cdef double c, w, w2, a, inv_tc, x, shape
    with nogil:
        for l in range(nl):
            a = amp[l]
            if a == 0.0:
                continue
            c = fc[l]
            w = wl[l]
            w2 = w * w
            lo = _lower_bound(f, c - cut[l])
            hi = _upper_bound(f, c + cut[l])
            inv_tc = 1.0 / tanh(beta * c)
            for i in range(lo, hi):
                x = f[i]
                shape = (w * x / (M_PI * c)) * (1.0 / ((x - c) * (x - c) + w2) + 1.0 / ((x + c) * (x + c) + w2))
                out[i] += a * shape * (x / c) * (tf[i] * inv_tc)
    return out_arr


def tsne_grad(P, Y, bint with_cost=False):
    cdef const double[:, ::1] p = np.ascontiguousarray(P, dtype=np.float64)
    cdef const double[:, ::1] y = np.ascontiguousarray(Y, dtype=np.float64)
    cdef Py_ssize_t m = y.shape[0], d = y.shape[1], i, j, k
    num_arr = np.empty((m, m), dtype=np.float64)
    cdef double[:, ::1] num = num_arr
    grad_arr = np.zeros((m, d), dtype=np.float64)
    cdef double[:, ::1] g = grad_arr
    cdef double z = 0.0, d2, diff, coef, cost = 0.0, q
    with nogil:
        for i in range(m):
            num[i, i] = 0.0
            for j in range(i + 1, m):
                d2 = 0.0
                for k in range(d):
                    diff = y[i, k] - y[j, k]
                    d2 = d2 + diff * diff
                num[i, j] = 1.0 / (1.0 + d2)
                num[j, i] = num[i, j]
                z = z + 2.0 * num[i, j]
        for i in range(m):
            for j in range(m):
                if i == j:
                    continue
                coef = (p[i, j] - num[i, j] / z) * num[i, j]
                for k in range(d):
                    g[i, k] = g[i, k] + 4.0 * coef * (y[i, k] - y[j, k])
        if with_cost:
            for i in range(m):
                for j in range(m):
                    if i != j and p[i, j] > 0.0:
                        q = num[i, j] / z
                        if q < 1e-300:
                            q = 1e-300
                        cost = cost + p[i, j] * log(p[i, j] / q)
    if not with_cost:
        return grad_arr, float("nan")
    return grad_arr, cost


cdef inline double _sigmoid(double x) noexcept nogil:
    return 1.0 / (1.0 + exp(-x))


def bpnn_epoch(X, T, double[:, ::1] W1, double[:, ::1] W2, order, double lr):
    cdef const double[:, ::1] x = np.ascontiguousarray(X, dtype=np.float64)
    cdef const double[:, ::1] t = np.ascontiguousarray(T, dtype=np.float64)
    cdef const Py_ssize_t[::1] idx = np.ascontiguousarray(order, dtype=np.intp)
    cdef Py_ssize_t H = W1.shape[0], D = W1.shape[1], K = W2.shape[0]
    cdef Py_ssize_t s, n, m, k, H1 = H + 1
    z_arr = np.ones(H + 1, dtype=np.float64)
    dhid_arr = np.empty(H, dtype=np.float64)
    cdef double[::1] z_v = z_arr
    cdef double[::1] dhid_v = dhid_arr
    cdef double* z = &z_v[0]
    cdef double* dhid = &dhid_v[0]
    cdef double* w1 = &W1[0, 0]
    cdef double* w2 = &W2[0, 0]
    cdef double* row
    cdef const double* xr
    cdef const double* tr
    cdef double acc, o, err, dk, sse = 0.0
    if idx.shape[0] == 0:
        return 0.0
    with nogil:
        for s in range(idx.shape[0]):
            xr = &x[idx[s], 0]
            tr = &t[idx[s], 0]
            for n in range(H):
                acc = 0.0
                row = w1 + n * D
                for m in range(D):
                    acc = acc + row[m] * xr[m]
                z[n] = _sigmoid(acc)
                dhid[n] = 0.0
            # output layer: forward, error, hidden back-propagation (old weights), update
            for k in range(K):
                row = w2 + k * H1
                acc = 0.0
                for n in range(H1):
                    acc = acc + row[n] * z[n]
                o = _sigmoid(acc)
                err = o - tr[k]
                sse = sse + 0.5 * err * err
                dk = err * o * (1.0 - o)
                for n in range(H):
                    dhid[n] = dhid[n] + row[n] * dk
                for n in range(H1):
                    row[n] = row[n] - lr * dk * z[n]
            for n in range(H):
                dk = dhid[n] * z[n] * (1.0 - z[n])
                row = w1 + n * D
                for m in range(D):
                    row[m] = row[m] - lr * dk * xr[m]
    return sse


cdef double _primal(const double[:, ::1] x, const double[::1] y, double[::1] a,
                    double b, double c) noexcept nogil:
    cdef Py_ssize_t i, k, n = x.shape[0], d = x.shape[1]
    cdef double obj = 0.0, hinge = 0.0, s
    for k in range(d):
        obj = obj + a[k] * a[k]
    obj = 0.5 * obj
    for i in range(n):
        s = b
        for k in range(d):
            s = s + a[k] * x[i, k]
        s = 1.0 - y[i] * s
        if s > 0.0:
            hinge = hinge + s
    return obj + c * hinge


def svm_pegasos(X, Y, double c, orders):
    cdef const double[:, ::1] x = np.ascontiguousarray(X, dtype=np.float64)
    cdef const double[::1] y = np.ascontiguousarray(Y, dtype=np.float64)
    cdef const Py_ssize_t[:, ::1] ords = np.ascontiguousarray(orders, dtype=np.intp)
    cdef Py_ssize_t n = x.shape[0], d = x.shape[1], e, s, r, k
    a_arr = np.zeros(d, dtype=np.float64)
    best_arr = np.zeros(d, dtype=np.float64)
    cdef double[::1] a = a_arr
    cdef double[::1] best = best_arr
    cdef double b = 0.0, best_b = 0.0
    cdef double lam = 1.0 / (c * n)
    cdef double radius = 1.0 / sqrt(lam)
    cdef double eta, margin, shrink, norm, obj
    cdef double best_obj = _primal(x, y, a, b, c)
    cdef long t = 0
    with nogil:
        for e in range(ords.shape[0]):
            for s in range(ords.shape[1]):
                r = ords[e, s]
                t = t + 1
                eta = 1.0 / (lam * t)
                margin = b
                for k in range(d):
                    margin = margin + a[k] * x[r, k]
                margin = margin * y[r]
                shrink = 1.0 - eta * lam
                for k in range(d):
                    a[k] = a[k] * shrink
                b = b * shrink
                if margin < 1.0:
                    for k in range(d):
                        a[k] = a[k] + eta * y[r] * x[r, k]
                    b = b + eta * y[r]
                norm = b * b
                for k in range(d):
                    norm = norm + a[k] * a[k]
                norm = sqrt(norm)
                if norm > radius:
                    for k in range(d):
                        a[k] = a[k] * radius / norm
                    b = b * radius / norm
            obj = _primal(x, y, a, b, c)
            if obj < best_obj:
                best_obj = obj
                best_b = b
                for k in range(d):
                    best[k] = a[k]
    return best_arr, best_b, best_obj
