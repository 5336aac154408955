# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Cython implementations of the numeric kernels (compiled lane).

Mirrors ``_kernels_py`` exactly: same signatures, same tie-breaking, same
clamp behavior. Keep the two lanes in lockstep.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport INFINITY, cos, exp, fabs, isfinite, log

cnp.import_array()

LOG_2PI = 1.8378770664093453


def logpdf_weibull(x, double shape, double scale):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] xv = np.ascontiguousarray(x, dtype=np.float64).ravel()
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(xv.shape[0], dtype=np.float64)
    cdef Py_ssize_t i, n = xv.shape[0]
    cdef double c = log(shape / scale)
    cdef double xs
    for i in range(n):
        if xv[i] > 0.0:
            xs = xv[i] / scale
            out[i] = c + (shape - 1.0) * log(xs) - xs**shape
        else:
            out[i] = -INFINITY
    return out.reshape(np.shape(x))


def logpdf_exponential(x, double rate):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] xv = np.ascontiguousarray(x, dtype=np.float64).ravel()
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(xv.shape[0], dtype=np.float64)
    cdef Py_ssize_t i, n = xv.shape[0]
    cdef double lr = log(rate)
    for i in range(n):
        if xv[i] >= 0.0:
            out[i] = lr - rate * xv[i]
        else:
            out[i] = -INFINITY
    return out.reshape(np.shape(x))


def logpdf_lognormal(x, double mu, double sigma):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] xv = np.ascontiguousarray(x, dtype=np.float64).ravel()
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(xv.shape[0], dtype=np.float64)
    cdef Py_ssize_t i, n = xv.shape[0]
    cdef double ls = log(sigma)
    cdef double lx
    for i in range(n):
        if xv[i] > 0.0:
            lx = log(xv[i])
            out[i] = -((lx - mu) ** 2) / (2.0 * sigma * sigma) - lx - ls - 0.5 * LOG_2PI
        else:
            out[i] = -INFINITY
    return out.reshape(np.shape(x))


def logpdf_vonmises(x, double mu, double kappa, double log_norm):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] xv = np.ascontiguousarray(x, dtype=np.float64).ravel()
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(xv.shape[0], dtype=np.float64)
    cdef Py_ssize_t i, n = xv.shape[0]
    for i in range(n):
        out[i] = kappa * cos(xv[i] - mu) - log_norm
    return out.reshape(np.shape(x))


def weibull_mle_shape(x, double init=1.0, int max_iter=50, double tol=1e-8):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] xv = np.ascontiguousarray(x, dtype=np.float64).ravel()
    cdef Py_ssize_t i, n = xv.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] lx = np.empty(n, dtype=np.float64)
    cdef double lbar = 0.0
    for i in range(n):
        lx[i] = log(xv[i])
        lbar += lx[i]
    lbar /= n
    cdef double k = init
    cdef double tmax, s0, s1, s2, w, r, g, gp, k_new
    cdef int it
    for it in range(max_iter):
        tmax = -INFINITY
        for i in range(n):
            if k * lx[i] > tmax:
                tmax = k * lx[i]
        s0 = 0.0
        s1 = 0.0
        s2 = 0.0
        for i in range(n):
            w = exp(k * lx[i] - tmax)
            s0 += w
            s1 += w * lx[i]
            s2 += w * lx[i] * lx[i]
        r = s1 / s0
        g = r - 1.0 / k - lbar
        gp = (s2 * s0 - s1 * s1) / (s0 * s0) + 1.0 / (k * k)
        k_new = k - g / gp
        if k_new <= 0.0:
            k_new = k / 2.0
        if k_new > 1e3:
            k_new = 1e3
        if fabs(k_new - k) < tol:
            k = k_new
            break
        k = k_new
    return k


def lloyd(points, centroids, int max_iter=200, double tol=1e-6):
    cdef cnp.ndarray[cnp.float64_t, ndim=2] pts = np.ascontiguousarray(points, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] cent = np.array(centroids, dtype=np.float64, copy=True)
    cdef Py_ssize_t n = pts.shape[0], d = pts.shape[1], k = cent.shape[0]
    cdef cnp.ndarray[cnp.int64_t, ndim=1] labels = np.zeros(n, dtype=np.int64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] mind2 = np.zeros(n, dtype=np.float64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] counts = np.zeros(k, dtype=np.int64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] sums = np.zeros((k, d), dtype=np.float64)
    history = []
    cdef double prev = INFINITY, best, dist, diff, inertia
    cdef Py_ssize_t i, j, h, far, it, bi
    for it in range(max_iter):
        for i in range(n):
            best = INFINITY
            bi = 0
            for h in range(k):
                dist = 0.0
                for j in range(d):
                    diff = pts[i, j] - cent[h, j]
                    dist += diff * diff
                if dist < best:
                    best = dist
                    bi = h
            labels[i] = bi
            mind2[i] = best
        counts[:] = 0
        sums[:, :] = 0.0
        for i in range(n):
            counts[labels[i]] += 1
            for j in range(d):
                sums[labels[i], j] += pts[i, j]
        for h in range(k):
            if counts[h] == 0:
                far = 0
                best = -1.0
                for i in range(n):
                    if mind2[i] > best:
                        best = mind2[i]
                        far = i
                for j in range(d):
                    cent[h, j] = pts[far, j]
                labels[far] = h
                mind2[far] = 0.0
            else:
                for j in range(d):
                    cent[h, j] = sums[h, j] / counts[h]
        inertia = 0.0
        for i in range(n):
            for j in range(d):
                diff = pts[i, j] - cent[labels[i], j]
                inertia += diff * diff
        history.append(inertia)
        if prev - inertia <= tol * max(prev, 1e-300):
            break
        prev = inertia
    return np.asarray(cent), np.asarray(labels), history


def nearest_centroid(centroids, point):
    cdef cnp.ndarray[cnp.float64_t, ndim=2] c = np.ascontiguousarray(centroids, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] p = np.ascontiguousarray(point, dtype=np.float64)
    cdef Py_ssize_t h, j, k = c.shape[0], d = c.shape[1]
    cdef double best = INFINITY, dist, diff
    cdef Py_ssize_t bi = 0
    for h in range(k):
        dist = 0.0
        for j in range(d):
            diff = c[h, j] - p[j]
            dist += diff * diff
        if dist < best:
            best = dist
            bi = h
    return int(bi)


def dp_decode(m, log_trans, log_start, lmax):
    cdef cnp.ndarray[cnp.float64_t, ndim=3] mv = np.ascontiguousarray(m, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] lt = np.ascontiguousarray(log_trans, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] st = np.ascontiguousarray(log_start, dtype=np.float64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] lm = np.ascontiguousarray(lmax, dtype=np.int64)
    cdef Py_ssize_t S = mv.shape[0], T = mv.shape[1], L = mv.shape[2]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] b = np.full((S, T), -INFINITY)
    cdef cnp.ndarray[cnp.int32_t, ndim=2] best_len = np.zeros((S, T), dtype=np.int32)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] p = np.full((S, T), -INFINITY)
    cdef Py_ssize_t t, s, l, sp, cap, start
    cdef double best, tot, prev, v
    for t in range(T):
        for s in range(S):
            cap = lm[s]
            if cap > t + 1:
                cap = t + 1
            if cap > L:
                cap = L
            best = -INFINITY
            for l in range(1, cap + 1):
                start = t - l + 1
                if start == 0:
                    prev = st[s]
                else:
                    prev = p[s, start - 1]
                tot = mv[s, t, l - 1] + prev
                if tot > best:
                    best = tot
                    best_len[s, t] = <int> l
            if isfinite(best):
                b[s, t] = best
            else:
                best_len[s, t] = 0
        for s in range(S):
            best = -INFINITY
            for sp in range(S):
                if sp == s:
                    continue
                v = b[sp, t] + lt[sp, s]
                if v > best:
                    best = v
            p[s, t] = best
    return np.asarray(b), np.asarray(best_len)
