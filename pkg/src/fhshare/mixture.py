"""Zero-mean Gaussian mixtures: densities, entropies, and entropy bounds.

Everything that reports an entropy does so in bits (log base 2); raw log
densities are natural logs. Scalar mixtures get a deterministic quadrature
entropy; vector mixtures with diagonal covariances get a Monte Carlo
plug-in estimate that is reproducible for a fixed seed and independent of
how its sample partitions are scheduled across workers.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence, Tuple, Union

import numpy as np
from scipy.integrate import quad
from scipy.special import logsumexp
from scipy.stats import norm

_LN2 = math.log(2.0)
_LN_2PI = math.log(2.0 * math.pi)
_WEIGHT_TOL = 1e-12

# Sample partition width for Monte Carlo entropy. Fixed so that results do
# not depend on the worker count: partition j always owns the same samples.
MC_PARTITION = 1 << 16


def gaussian_entropy(variance: float) -> float:
    """Differential entropy of N(0, variance), in bits."""
    if variance <= 0:
        raise ValueError("variance must be positive")
    return 0.5 * math.log2(2.0 * math.pi * math.e * variance)


@dataclass(frozen=True, eq=False)
class GaussianMixture1D:
    """Finite zero-mean scalar Gaussian mixture.

    components is a tuple of (weight, variance) pairs; weights sum to 1
    and variances are strictly positive.
    """

    components: tuple

    def __post_init__(self):
        comps = tuple((float(w), float(v)) for w, v in self.components)
        if not comps:
            raise ValueError("mixture needs at least one component")
        if any(w < 0 for w, _ in comps):
            raise ValueError("weights must be nonnegative")
        if abs(sum(w for w, _ in comps) - 1.0) > _WEIGHT_TOL:
            raise ValueError("weights must sum to 1 within 1e-12")
        comps = tuple((w, v) for w, v in comps if w > 0)
        if any(v <= 0 for _, v in comps):
            raise ValueError("variances must be positive")
        object.__setattr__(self, "components", comps)

    @classmethod
    def of(cls, *components: Tuple[float, float]) -> "GaussianMixture1D":
        return cls(components=tuple(components))

    @property
    def weights(self) -> np.ndarray:
        return np.array([w for w, _ in self.components])

    @property
    def component_variances(self) -> np.ndarray:
        return np.array([v for _, v in self.components])

    def variance(self) -> float:
        """Total variance of the mixture."""
        return float((self.weights * self.component_variances).sum())

    def as_diag(self) -> "GaussianMixtureDiag":
        return GaussianMixtureDiag(
            weights=self.weights, variances=self.component_variances[:, None]
        )

    def logpdf(self, x) -> np.ndarray:
        """Natural-log density at scalar or array x."""
        x = np.asarray(x, dtype=float)
        w = self.weights
        var = self.component_variances
        logs = (
            np.log(w)
            - 0.5 * (_LN_2PI + np.log(var))
            - x[..., None] * x[..., None] / (2.0 * var)
        )
        return logsumexp(logs, axis=-1)


@dataclass(frozen=True, eq=False)
class GaussianMixtureDiag:
    """Zero-mean vector Gaussian mixture with diagonal covariances.

    variances has shape (n_components, dim) and may contain zeros: such a
    coordinate is an exact point mass at 0 for that component, and the
    density is taken with respect to Lebesgue measure on the non-degenerate
    coordinates.
    """

    weights: np.ndarray
    variances: np.ndarray

    def __post_init__(self):
        w = np.array(self.weights, dtype=float)
        v = np.array(self.variances, dtype=float)
        if v.ndim != 2:
            raise ValueError("variances must be 2-D (components x dim)")
        if w.ndim != 1 or w.shape[0] != v.shape[0]:
            raise ValueError("one weight per component required")
        if np.any(w < 0):
            raise ValueError("weights must be nonnegative")
        if abs(w.sum() - 1.0) > _WEIGHT_TOL:
            raise ValueError("weights must sum to 1 within 1e-12")
        if np.any(v < 0):
            raise ValueError("variances must be nonnegative")
        keep = w > 0
        w, v = w[keep], v[keep]
        if w.size == 0:
            raise ValueError("mixture needs at least one component")
        w.flags.writeable = False
        v.flags.writeable = False
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "variances", v)

    @property
    def n_components(self) -> int:
        return self.weights.shape[0]

    @property
    def dim(self) -> int:
        return self.variances.shape[1]

    def as_diag(self) -> "GaussianMixtureDiag":
        return self


AnyMixture = Union[GaussianMixture1D, GaussianMixtureDiag]


def _log_density_rows(m: GaussianMixtureDiag, x: np.ndarray) -> np.ndarray:
    """Natural-log densities for rows of x, shape (n, dim) -> (n,)."""
    x = np.asarray(x, dtype=float)
    n, t = x.shape
    var = m.variances
    logw = np.log(m.weights)
    if np.all(var > 0.0):
        inv = 1.0 / var
        logdet = -0.5 * (t * _LN_2PI + np.log(var).sum(axis=1))
        out = np.empty(n)
        chunk = max(1, int(4_000_000 / max(m.n_components, 1)))
        for s in range(0, n, chunk):
            xs = x[s : s + chunk]
            quad_form = (xs * xs) @ (0.5 * inv).T
            out[s : s + chunk] = logsumexp(logw + logdet - quad_form, axis=1)
        return out

    # Components with zero-variance coordinates live on a subspace: they
    # contribute only where x is exactly 0 on those coordinates.
    cols = np.full((n, m.n_components), -np.inf)
    for l in range(m.n_components):
        v = var[l]
        live = v > 0.0
        if live.all():
            ok = np.ones(n, dtype=bool)
        else:
            ok = np.all(x[:, ~live] == 0.0, axis=1)
        if not ok.any():
            continue
        if live.any():
            q = 0.5 * np.sum(x[np.ix_(ok, live)] ** 2 / v[live], axis=1)
            logdet = -0.5 * (int(live.sum()) * _LN_2PI + np.log(v[live]).sum())
        else:
            q = np.zeros(int(ok.sum()))
            logdet = 0.0
        cols[ok, l] = logw[l] + logdet - q
    with np.errstate(invalid="ignore"):
        return logsumexp(cols, axis=1)


def log_density(m: AnyMixture, x: Sequence[float]) -> float:
    """Natural-log mixture density at one point x (length = dim)."""
    diag = m.as_diag()
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.shape[0] != diag.dim:
        raise ValueError(f"x has length {x.shape[0]}, mixture dim is {diag.dim}")
    return float(_log_density_rows(diag, x[None, :])[0])


def entropy_quadrature(m: GaussianMixture1D, tol: float = 1e-6) -> float:
    """Differential entropy of a scalar mixture in bits, by adaptive
    quadrature of -p log2 p.

    The integration window is wide enough that the neglected tail mass is
    below tol/10; the quadrature itself is pushed below tol and an error
    is raised if the integrator cannot certify that.
    """
    if not isinstance(m, GaussianMixture1D):
        raise TypeError("entropy_quadrature takes a 1-D mixture")
    if tol <= 0:
        raise ValueError("tol must be positive")
    w = m.weights
    var = m.component_variances
    sig = np.sqrt(var)
    logw = np.log(w)
    # Window: norm.isf on the widest component keeps tail mass << tol/10.
    z = float(norm.isf(min(tol, 1e-3) / 40.0)) + 4.0
    span = z * float(sig.max())

    # Seed break points on each component's own scale so narrow spikes
    # are not stepped over; 8 per smallest sigma, coarser for the rest.
    pts = set()
    for s in sorted(set(sig.tolist()))[:12]:
        for k in (1.0, 2.0, 4.0, 8.0):
            pts.add(k * s)
    s_min = float(sig.min())
    for k in range(1, 9):
        pts.add(k * s_min)
    points = sorted(p for q in pts for p in (-q, q) if q < span)

    def integrand(x: float) -> float:
        logs = logw - 0.5 * (_LN_2PI + np.log(var)) - x * x / (2.0 * var)
        lp = float(logsumexp(logs))
        p = math.exp(lp)
        if p <= 0.0:
            return 0.0
        return -p * lp / _LN2

    value, err = quad(
        integrand,
        -span,
        span,
        points=points,
        limit=max(200, 20 + 10 * len(points)),
        epsabs=tol / 4.0,
        epsrel=1e-12,
    )
    if err > tol:
        raise RuntimeError(
            f"entropy quadrature did not converge: estimated error {err:g} > tol {tol:g}"
        )
    return float(value)


def _mc_partitions(n_samples: int):
    sizes = []
    left = n_samples
    j = 0
    while left > 0:
        take = min(MC_PARTITION, left)
        sizes.append((j, take))
        left -= take
        j += 1
    return sizes


def entropy_mc(
    m: AnyMixture,
    n_samples: int,
    seed: int,
    threads: int = 1,
    stream: int = 0,
) -> Tuple[float, float]:
    """Plug-in Monte Carlo entropy of a mixture, in bits.

    Returns (estimate, standard_error). Samples are drawn in fixed-size
    partitions whose generators are keyed by (seed, stream, partition), so
    the result depends only on (n_samples, seed, stream), never on the
    worker count. Zero-variance coordinates are sampled exactly at 0 and
    handled by the density's support rule.
    """
    if n_samples < 100:
        raise ValueError("n_samples must be at least 100")
    diag = m.as_diag()
    std = np.sqrt(diag.variances)
    w = diag.weights
    entropy_key = int(seed) & ((1 << 128) - 1)

    def one(part) -> Tuple[float, float]:
        j, size = part
        rng = np.random.default_rng(
            np.random.SeedSequence(entropy=entropy_key, spawn_key=(int(stream), j))
        )
        idx = rng.choice(diag.n_components, size=size, p=w)
        z = rng.standard_normal((size, diag.dim))
        x = z * std[idx, :]
        ll = _log_density_rows(diag, x) / _LN2
        return float(ll.sum()), float((ll * ll).sum())

    parts = _mc_partitions(n_samples)
    if threads > 1 and len(parts) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(one, parts))
    else:
        results = [one(p) for p in parts]

    total = 0.0
    total_sq = 0.0
    for s, s2 in results:
        total += s
        total_sq += s2
    mean = total / n_samples
    var = max((total_sq - n_samples * mean * mean) / (n_samples - 1), 0.0)
    se = math.sqrt(var / n_samples)
    return -mean, se


def entropy_upper_bound(m: GaussianMixture1D) -> float:
    """Closed-form entropy bound for a scalar mixture, in bits.

    With levels sorted by variance, ambient variance s0 and top variance
    sL, the bound is

        (1 - a0)/2 * log2(sL / s0) + log2(sqrt(2 pi e) * sqrt(s0)) + H,

    where a0 is the ambient level's probability and H the entropy of the
    level index. Always >= the true mixture entropy.
    """
    w = m.weights
    var = m.component_variances
    order = np.argsort(var)
    w, var = w[order], var[order]

    # Merge levels whose variances agree within 1e-9 relative so H counts
    # distinct levels only (weighted mean keeps moments).
    mw, mv = [w[0]], [var[0]]
    for i in range(1, len(w)):
        if var[i] - mv[-1] <= 1e-9 * mv[-1]:
            tot = mw[-1] + w[i]
            mv[-1] = (mv[-1] * mw[-1] + var[i] * w[i]) / tot
            mw[-1] = tot
        else:
            mw.append(w[i])
            mv.append(var[i])
    a = np.array(mw)
    v = np.array(mv)
    h_levels = float(-(a * np.log2(a)).sum())
    return (
        0.5 * (1.0 - a[0]) * math.log2(v[-1] / v[0])
        + 0.5 * math.log2(2.0 * math.pi * math.e * v[0])
        + h_levels
    )
