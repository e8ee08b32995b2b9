"""Sum multiplexing gain algebra and hopping-parameter selection.

The asymptotic per-user rate grows like (vbar_i / 2) * prod_{k != i}
(1 - vbar_k / u) per doubling of SNR; the sum of those prefactors is the
sum multiplexing gain (SMG). This module provides the SMG forms, the
fair (common-v) special case, integer hop-count mixing for fractional
targets, occupancy sampling, and the 1-D maximizer used by the measure
optimizers.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Tuple

import numpy as np

from .model import HoppingProfile

_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class SmgProfile:
    """Mean hop counts of all users, one entry per user."""

    vbar: tuple

    def __post_init__(self):
        object.__setattr__(self, "vbar", tuple(float(v) for v in self.vbar))
        if not self.vbar:
            raise ValueError("vbar must be nonempty")


def _vbar_array(vbar, u: float) -> np.ndarray:
    if isinstance(vbar, SmgProfile):
        vbar = vbar.vbar
    arr = np.asarray(vbar, dtype=float)
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError("vbar must be a nonempty vector")
    if np.any(arr < 0) or np.any(arr > u):
        raise ValueError("each mean hop count must lie in [0, u]")
    return arr


def _leave_one_out_products(factors: np.ndarray) -> np.ndarray:
    """prod_{k != i} factors[k] for every i, tolerant of zero factors."""
    n = factors.size
    prefix = np.ones(n + 1)
    suffix = np.ones(n + 1)
    for i in range(n):
        prefix[i + 1] = prefix[i] * factors[i]
        suffix[n - 1 - i] = suffix[n - i] * factors[n - 1 - i]
    return prefix[:n] * suffix[1:]


def per_user_gains(vbar, u: float) -> np.ndarray:
    """Asymptotic rate prefactor (bits per doubling of SNR) of each user."""
    arr = _vbar_array(vbar, u)
    others = _leave_one_out_products(1.0 - arr / u)
    return 0.5 * arr * others


def smg(vbar, u: float) -> float:
    """Sum multiplexing gain sum_i (vbar_i/2) prod_{k != i}(1 - vbar_k/u)."""
    return float(per_user_gains(vbar, u).sum())


def smg_fair(v: float, n: int, u: float) -> float:
    """SMG when all n users share the hop count v: (n/2) v (1-v/u)^(n-1)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if not 0 <= v <= u:
        raise ValueError("v must lie in [0, u]")
    return 0.5 * n * v * (1.0 - v / u) ** (n - 1)


def v_opt(n: int, u: float) -> float:
    """Maximizer of smg_fair over v: spread the band evenly, v = u/n."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return u / n


def smg_fair_opt(n: int, u: float) -> float:
    """sup_v smg_fair(v, n, u) = (u/2)(1 - 1/n)^(n-1)."""
    return smg_fair(v_opt(n, u), n, u)


def integer_hop_mixture(v_real: float, u: float) -> Tuple[int, int, float]:
    """Split a fractional hop count across two integers.

    Returns (v_floor, v_ceil, mu) with mu = probability of using v_floor,
    chosen so mu*v_floor + (1-mu)*v_ceil = v_real exactly. An integer
    v_real keeps all mass on itself (mu = 1).
    """
    if not 0 <= v_real <= u:
        raise ValueError("v_real must lie in [0, u]")
    floor = math.floor(v_real)
    if floor == v_real:
        return int(floor), int(floor) + 1, 1.0
    ceil = floor + 1
    return int(floor), int(ceil), float(ceil - v_real)


def two_generator_profile(v_real: float, u: int) -> HoppingProfile:
    """Hopping profile realizing a fractional mean hop count exactly."""
    floor, ceil, mu = integer_hop_mixture(v_real, u)
    w = np.zeros(u + 1)
    w[floor] += mu
    if mu < 1.0:
        w[ceil] += 1.0 - mu
    return HoppingProfile.from_pmf(w)


def sample_occupancy(
    profile: HoppingProfile, u: int, rng: np.random.Generator, n_slots: int
) -> Tuple[np.ndarray, np.ndarray]:
    """Vectorized occupancy draws for one user.

    Returns (occupancy, counts): a boolean (n_slots, u) matrix whose rows
    are uniformly random v-subsets, and the per-slot hop counts v.
    """
    if n_slots < 1:
        raise ValueError("n_slots must be >= 1")
    if profile.is_fixed:
        if profile.fixed_v > u:
            raise ValueError("fixed_v exceeds u")
        counts = np.full(n_slots, profile.fixed_v, dtype=np.int64)
    else:
        w = profile.pmf_for(u)
        counts = rng.choice(u + 1, size=n_slots, p=w).astype(np.int64)
    scores = rng.random((n_slots, u))
    order = np.argsort(scores, axis=1)
    ranks = np.empty_like(order)
    np.put_along_axis(ranks, order, np.broadcast_to(np.arange(u), (n_slots, u)), axis=1)
    occupancy = ranks < counts[:, None]
    return occupancy, counts


def sample_hop(profile: HoppingProfile, u: int, rng: np.random.Generator) -> frozenset:
    """One slot's occupied sub-band set (indices in 0..u-1)."""
    if profile.is_fixed:
        v = profile.fixed_v
        if v > u:
            raise ValueError("fixed_v exceeds u")
    else:
        v = int(rng.choice(u + 1, p=profile.pmf_for(u)))
    if v == 0:
        return frozenset()
    return frozenset(int(j) for j in rng.choice(u, size=v, replace=False))


def proportional_fair_objective(vbar, u: float, gamma: Optional[float] = None) -> float:
    """Sum of log rates at high SNR: sum_i log2 of user i's gain.

    Any user whose prefactor vanishes (vbar_i = 0, or someone else holding
    the whole band) sends the objective to -inf. When gamma is given the
    constant n*log2(log2(gamma)) is added; it does not move the argmax.
    """
    gains_vec = per_user_gains(vbar, u)
    if np.any(gains_vec <= 0.0):
        return float("-inf")
    val = float(np.log2(gains_vec).sum())
    if gamma is not None:
        if gamma <= 2.0:
            raise ValueError("gamma must exceed 2 for the log-log offset")
        val += gains_vec.size * math.log2(math.log2(gamma))
    return val


def maximize_on_interval(
    f: Callable[[np.ndarray], np.ndarray],
    lo: float,
    hi: float,
    grid_points: int = 4097,
    rel_tol: float = 1e-9,
) -> Tuple[float, float]:
    """Deterministic 1-D maximizer: coarse grid, then golden-section.

    f must accept a 1-D numpy array and return values elementwise. The
    grid holds grid_points evenly spaced abscissae including both ends;
    the best bracket is refined until its width is rel_tol * (hi - lo).
    Ties resolve toward the smaller argument.
    """
    if not hi > lo:
        raise ValueError("need hi > lo")
    xs = np.linspace(lo, hi, grid_points)
    fx = np.asarray(f(xs), dtype=float)
    if fx.shape != xs.shape:
        raise ValueError("objective must map arrays elementwise")
    i = int(np.argmax(fx))
    best_x, best_f = float(xs[i]), float(fx[i])

    def f_scalar(x: float) -> float:
        return float(np.asarray(f(np.array([x])), dtype=float)[0])

    a = float(xs[i - 1]) if i > 0 else float(xs[0])
    b = float(xs[i + 1]) if i + 1 < grid_points else float(xs[-1])
    tol = rel_tol * (hi - lo)
    if b - a > tol:
        c = b - _INVPHI * (b - a)
        d = a + _INVPHI * (b - a)
        fc, fd = f_scalar(c), f_scalar(d)
        while b - a > tol:
            if fc >= fd:
                b, d, fd = d, c, fc
                c = b - _INVPHI * (b - a)
                fc = f_scalar(c)
            else:
                a, c, fc = c, d, fd
                d = a + _INVPHI * (b - a)
                fd = f_scalar(d)
        for xx, ff in ((c, fc), (d, fd), ((a + b) / 2.0, f_scalar((a + b) / 2.0))):
            if ff > best_f or (ff == best_f and xx < best_x):
                best_x, best_f = float(xx), float(ff)
    return best_x, best_f
