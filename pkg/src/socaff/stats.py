"""Probability distributions (log-density, MLE fit, sampling) and K-means.

All densities are natural-log; out-of-support points return -inf, never NaN.
Parameters are clamped to numerically safe ranges at construction:
Weibull shape in [0.1, 50], von Mises kappa in [0, 100], log-normal sigma
>= 0.05, Bernoulli p in [0.01, 0.99]. Fits with fewer than 3 samples fall
back to weak priors (few noisy training instances make tiny cells common).

Sampling takes an explicit numpy Generator; callers own determinism.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.special import i0e

from . import kernels

WEIBULL_SHAPE_RANGE = (0.1, 50.0)
VONMISES_KAPPA_MAX = 100.0
LOGNORMAL_SIGMA_MIN = 0.05
BERNOULLI_P_RANGE = (0.01, 0.99)
_SCALE_FLOOR = 1e-9

_TWO_PI = 2.0 * np.pi


def _shape_out(x, values):
    """Return a scalar for scalar input, else the array."""
    if np.ndim(x) == 0:
        return float(np.asarray(values).reshape(()))
    return np.asarray(values)


@dataclass(frozen=True)
class Weibull:
    shape: float
    scale: float

    def __post_init__(self):
        object.__setattr__(self, "shape", float(np.clip(self.shape, *WEIBULL_SHAPE_RANGE)))
        object.__setattr__(self, "scale", float(max(self.scale, _SCALE_FLOOR)))

    def log_pdf(self, x):
        return _shape_out(x, kernels.logpdf_weibull(np.atleast_1d(x), self.shape, self.scale))

    def sample(self, rng, size=None):
        return self.scale * rng.weibull(self.shape, size=size)


@dataclass(frozen=True)
class Exponential:
    rate: float

    def __post_init__(self):
        object.__setattr__(self, "rate", float(max(self.rate, _SCALE_FLOOR)))

    def log_pdf(self, x):
        return _shape_out(x, kernels.logpdf_exponential(np.atleast_1d(x), self.rate))

    def sample(self, rng, size=None):
        return rng.exponential(1.0 / self.rate, size=size)


@dataclass(frozen=True)
class LogNormal:
    mu: float
    sigma: float

    def __post_init__(self):
        object.__setattr__(self, "mu", float(self.mu))
        object.__setattr__(self, "sigma", float(max(self.sigma, LOGNORMAL_SIGMA_MIN)))

    def log_pdf(self, x):
        return _shape_out(x, kernels.logpdf_lognormal(np.atleast_1d(x), self.mu, self.sigma))

    def sample(self, rng, size=None):
        return np.exp(rng.normal(self.mu, self.sigma, size=size))

    @property
    def mode(self):
        return float(np.exp(self.mu - self.sigma**2))

    @property
    def mean(self):
        return float(np.exp(self.mu + self.sigma**2 / 2.0))


@dataclass(frozen=True)
class VonMises:
    mu: float
    kappa: float

    def __post_init__(self):
        object.__setattr__(self, "mu", float(self.mu))
        object.__setattr__(self, "kappa", float(np.clip(self.kappa, 0.0, VONMISES_KAPPA_MAX)))

    @cached_property
    def _log_norm(self):
        # log(2*pi*I0(kappa)) computed via the exponentially scaled Bessel i0e
        return float(np.log(_TWO_PI) + np.log(i0e(self.kappa)) + self.kappa)

    def log_pdf(self, x):
        return _shape_out(x, kernels.logpdf_vonmises(np.atleast_1d(x), self.mu, self.kappa, self._log_norm))

    def sample(self, rng, size=None):
        return rng.vonmises(self.mu, self.kappa, size=size)


@dataclass(frozen=True)
class Bernoulli:
    """Sign distribution: success means a positive value (+1), failure -1."""

    p: float

    def __post_init__(self):
        object.__setattr__(self, "p", float(np.clip(self.p, *BERNOULLI_P_RANGE)))

    def log_pdf(self, x):
        xv = np.atleast_1d(np.asarray(x, dtype=float))
        out = np.where(xv > 0.0, np.log(self.p), np.log(1.0 - self.p))
        return _shape_out(x, out)

    def sample(self, rng, size=None):
        draws = rng.random(size=size)
        return np.where(draws < self.p, 1.0, -1.0) if size is not None else (1.0 if draws < self.p else -1.0)


DISTRIBUTION_KINDS = {
    "weibull": Weibull,
    "exponential": Exponential,
    "lognormal": LogNormal,
    "vonmises": VonMises,
    "bernoulli": Bernoulli,
}
_KIND_NAMES = {cls: name for name, cls in DISTRIBUTION_KINDS.items()}


def log_pdf(dist, x):
    return dist.log_pdf(x)


def sample(dist, rng, size=None):
    return dist.sample(rng, size=size)


def dist_to_json(dist) -> dict:
    out = {"kind": _KIND_NAMES[type(dist)]}
    for k, v in dist.__dict__.items():
        if not k.startswith("_"):
            out[k] = v
    return out


def dist_from_json(obj: dict):
    cls = DISTRIBUTION_KINDS[obj["kind"]]
    kwargs = {k: v for k, v in obj.items() if k != "kind"}
    return cls(**kwargs)


def circular_mean(angles):
    a = np.asarray(angles, dtype=float)
    return float(np.arctan2(np.sum(np.sin(a)), np.sum(np.cos(a))))


def _fit_weibull(x):
    n = x.size
    if n < 3:
        return Weibull(1.0, float(np.mean(x)))
    k = kernels.weibull_mle_shape(x, init=1.0, max_iter=50, tol=1e-8)
    k = float(np.clip(k, *WEIBULL_SHAPE_RANGE))
    lam = float(np.mean(x**k) ** (1.0 / k))
    return Weibull(k, lam)


def _fit_exponential(x):
    return Exponential(1.0 / float(np.mean(x)))


def _fit_lognormal(x):
    lx = np.log(x)
    mu = float(np.mean(lx))
    if x.size < 3:
        return LogNormal(mu, 0.5)
    return LogNormal(mu, float(np.std(lx)))


def _fit_vonmises(x):
    mu = circular_mean(x)
    if x.size < 3:
        return VonMises(mu, 1.0)
    rbar = float(np.hypot(np.mean(np.cos(x)), np.mean(np.sin(x))))
    if rbar >= 1.0 - 1e-12:
        kappa = VONMISES_KAPPA_MAX
    else:
        kappa = rbar * (2.0 - rbar**2) / (1.0 - rbar**2)  # Banerjee approximation
    return VonMises(mu, kappa)


def _fit_bernoulli(x):
    return Bernoulli(float(np.mean(np.asarray(x) > 0.0)))


_FITTERS = {
    "weibull": _fit_weibull,
    "exponential": _fit_exponential,
    "lognormal": _fit_lognormal,
    "vonmises": _fit_vonmises,
    "bernoulli": _fit_bernoulli,
}


def fit_mle(kind, samples):
    """Maximum-likelihood fit, clamped; weak-prior fallback below 3 samples."""
    if not isinstance(kind, str):
        kind = _KIND_NAMES[kind]
    x = np.asarray(samples, dtype=float).ravel()
    if x.size == 0:
        raise ValueError(f"fit_mle({kind}): empty sample list")
    return _FITTERS[kind](x)


@dataclass(frozen=True)
class KMeansModel:
    centroids: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.centroids, dtype=float)
        if c.ndim != 2 or not np.all(np.isfinite(c)):
            raise ValueError("centroids must be a finite (k, d) array")
        c.setflags(write=False)
        object.__setattr__(self, "centroids", c)

    @property
    def k(self):
        return self.centroids.shape[0]

    @property
    def feature_dim(self):
        return self.centroids.shape[1]


def _kmeanspp_init(points, k, rng):
    n = points.shape[0]
    centroids = np.empty((k, points.shape[1]))
    first = int(rng.integers(n))
    centroids[0] = points[first]
    d2 = ((points - centroids[0]) ** 2).sum(axis=1)
    for i in range(1, k):
        total = float(d2.sum())
        if total <= 0.0:
            idx = int(rng.integers(n))
        else:
            idx = int(rng.choice(n, p=d2 / total))
        centroids[i] = points[idx]
        d2 = np.minimum(d2, ((points - centroids[i]) ** 2).sum(axis=1))
    return centroids


def kmeans_fit(points, k, seed) -> KMeansModel:
    """Lloyd's algorithm with k-means++ init; deterministic given seed."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2:
        raise ValueError("points must be an (n, d) array")
    if not 1 <= k <= pts.shape[0]:
        raise ValueError(f"k={k} must satisfy 1 <= k <= {pts.shape[0]} points")
    rng = np.random.default_rng(seed)
    init = _kmeanspp_init(pts, k, rng)
    centroids, _, _ = kernels.lloyd(pts, init, max_iter=200, tol=1e-6)
    return KMeansModel(centroids=centroids)


def kmeans_inertia_history(points, k, seed):
    """Per-iteration inertia of kmeans_fit (non-increasing by construction)."""
    pts = np.asarray(points, dtype=float)
    rng = np.random.default_rng(seed)
    init = _kmeanspp_init(pts, k, rng)
    _, _, history = kernels.lloyd(pts, init, max_iter=200, tol=1e-6)
    return history


def kmeans_assign(model: KMeansModel, point) -> int:
    """Index of the nearest centroid; ties break to the lowest index."""
    p = np.asarray(point, dtype=float)
    if p.shape != (model.feature_dim,):
        raise ValueError(f"point dimension {p.shape} != ({model.feature_dim},)")
    return kernels.nearest_centroid(model.centroids, p)


def kmeans_assign_batch(model: KMeansModel, points):
    pts = np.asarray(points, dtype=float)
    d2 = ((pts[:, None, :] - model.centroids[None, :, :]) ** 2).sum(axis=2)
    return np.argmin(d2, axis=1)
