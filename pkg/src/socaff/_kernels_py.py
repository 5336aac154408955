"""NumPy implementations of the numeric kernels (fallback lane).

Same call signatures and accumulation order as the Cython lane in
``_kernels_cy.pyx`` so that both lanes agree to floating-point noise.
"""

import numpy as np

LOG_2PI = float(np.log(2.0 * np.pi))


def logpdf_weibull(x, shape, scale):
    """Elementwise log density of Weibull(shape, scale); -inf outside x > 0."""
    x = np.asarray(x, dtype=np.float64)
    out = np.full(x.shape, -np.inf)
    ok = x > 0.0
    xs = x[ok] / scale
    out[ok] = np.log(shape / scale) + (shape - 1.0) * np.log(xs) - xs**shape
    return out


def logpdf_exponential(x, rate):
    """Elementwise log density of Exponential(rate); -inf for x < 0."""
    x = np.asarray(x, dtype=np.float64)
    out = np.full(x.shape, -np.inf)
    ok = x >= 0.0
    out[ok] = np.log(rate) - rate * x[ok]
    return out


def logpdf_lognormal(x, mu, sigma):
    """Elementwise log density of LogNormal(mu, sigma); -inf outside x > 0."""
    x = np.asarray(x, dtype=np.float64)
    out = np.full(x.shape, -np.inf)
    ok = x > 0.0
    lx = np.log(x[ok])
    out[ok] = -((lx - mu) ** 2) / (2.0 * sigma * sigma) - lx - np.log(sigma) - 0.5 * LOG_2PI
    return out


def logpdf_vonmises(x, mu, kappa, log_norm):
    """Elementwise von Mises log density; log_norm = log(2*pi*I0(kappa))."""
    x = np.asarray(x, dtype=np.float64)
    return kappa * np.cos(x - mu) - log_norm


def weibull_mle_shape(x, init=1.0, max_iter=50, tol=1e-8):
    """Newton-Raphson solution of the Weibull shape profile equation.

    Works on log(x) with a running max subtracted so x**k never over/underflows.
    Returns the raw root; range clamping is the caller's job.
    """
    lx = np.log(np.asarray(x, dtype=np.float64))
    lbar = float(np.mean(lx))
    k = float(init)
    for _ in range(max_iter):
        t = k * lx
        t -= t.max()
        w = np.exp(t)
        s0 = float(np.sum(w))
        s1 = float(np.sum(w * lx))
        s2 = float(np.sum(w * lx * lx))
        r = s1 / s0
        g = r - 1.0 / k - lbar
        gp = (s2 * s0 - s1 * s1) / (s0 * s0) + 1.0 / (k * k)
        step = g / gp
        k_new = k - step
        if k_new <= 0.0:
            k_new = k / 2.0
        if k_new > 1e3:
            k_new = 1e3
        if abs(k_new - k) < tol:
            k = k_new
            break
        k = k_new
    return k


def lloyd(points, centroids, max_iter=200, tol=1e-6):
    """Lloyd iterations from the given initial centroids.

    Empty clusters are re-seeded with the point currently farthest from its
    centroid (deterministic). Returns (centroids, labels, inertia_history).
    """
    pts = np.asarray(points, dtype=np.float64)
    cent = np.array(centroids, dtype=np.float64, copy=True)
    k = cent.shape[0]
    history = []
    labels = np.zeros(pts.shape[0], dtype=np.int64)
    prev = np.inf
    for _ in range(max_iter):
        d2 = ((pts[:, None, :] - cent[None, :, :]) ** 2).sum(axis=2)
        labels = np.argmin(d2, axis=1)
        mind2 = d2[np.arange(pts.shape[0]), labels]
        for h in range(k):
            mask = labels == h
            if not np.any(mask):
                far = int(np.argmax(mind2))
                cent[h] = pts[far]
                labels[far] = h
                mind2[far] = 0.0
            else:
                cent[h] = pts[mask].mean(axis=0)
        inertia = float(((pts - cent[labels]) ** 2).sum())
        history.append(inertia)
        if prev - inertia <= tol * max(prev, 1e-300):
            break
        prev = inertia
    return cent, labels, history


def nearest_centroid(centroids, point):
    """Index of the closest centroid (squared Euclidean, lowest index on ties)."""
    d2 = ((np.asarray(centroids) - np.asarray(point)[None, :]) ** 2).sum(axis=1)
    return int(np.argmin(d2))


def dp_decode(m, log_trans, log_start, lmax):
    """Best-scoring segmental labeling via the b(s, t) recursion.

    m[s, t, l-1] is the score of labeling frames [t-l+1, t] (0-based t) with
    type s, excluding the transition term. lmax[s] caps segment length.
    Returns (b, best_len) where b[s, t] is the highest total score of a
    labeling of frames 0..t whose last segment has type s, and best_len[s, t]
    is the length of that last segment (0 where unreachable).
    """
    S, T, L = m.shape
    b = np.full((S, T), -np.inf)
    best_len = np.zeros((S, T), dtype=np.int32)
    # p[s, t] = max over s' != s of b[s', t] + log_trans[s', s]
    p = np.full((S, T), -np.inf)
    for t in range(T):
        for s in range(S):
            cap = min(int(lmax[s]), t + 1, L)
            if cap <= 0:
                continue
            ls = np.arange(1, cap + 1)
            starts = t - ls + 1
            prev = np.where(starts == 0, log_start[s], p[s, np.maximum(starts - 1, 0)])
            tot = m[s, t, :cap] + prev
            j = int(np.argmax(tot))
            if np.isfinite(tot[j]):
                b[s, t] = tot[j]
                best_len[s, t] = j + 1
        for s in range(S):
            best = -np.inf
            for sp in range(S):
                if sp == s:
                    continue
                v = b[sp, t] + log_trans[sp, s]
                if v > best:
                    best = v
            p[s, t] = best
    return b, best_len
