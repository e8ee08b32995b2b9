"""Scheme comparison measures under a random user count.

Four measures compare randomized frequency hopping (FH) against fixed
frequency-division allocation (FD) and against adaptive hopping (AFH)
when the number of active pairs N is random with a known pmf:

  eta1  best expected sum multiplexing gain,
  eta2  best expected worst-user gain with every user served,
  eta3  deterministic worst-case per-user gain at the design load,
  eta4  expected fraction of users served.

FD splits the band into n_des equal slices and turns away users beyond
n_des; FH with v < u always serves everyone. All measures scale linearly
in the band size u and are reported in absolute terms.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Tuple

import numpy as np
from scipy.special import gammaln
from scipy.stats import poisson as poisson_dist

from .gains import maximize_on_interval, smg_fair

_PROB_TOL = 1e-12
_POISSON_TAIL = 1e-12


@dataclass(frozen=True)
class UserCountPmf:
    """Distribution of the number of simultaneously active pairs.

    weights[n] is P{N = n}. Finite pmfs carry their exact weights; a
    Poisson law is truncated where its tail mass drops below 1e-12 (and
    no earlier than 20*lambda), so truncation error is negligible against
    every tolerance used here.
    """

    weights: tuple
    poisson_lambda: Optional[float] = None

    def __post_init__(self):
        w = tuple(float(x) for x in self.weights)
        if len(w) < 2:
            raise ValueError("need weights for at least n in {0, 1}")
        if any(x < 0 for x in w):
            raise ValueError("weights must be nonnegative")
        if self.poisson_lambda is None and abs(sum(w) - 1.0) > _PROB_TOL:
            raise ValueError("finite pmf must sum to 1 within 1e-12")
        object.__setattr__(self, "weights", w)

    @classmethod
    def finite(cls, q) -> "UserCountPmf":
        """Finite pmf; q[n] = P{N = n} starting at n = 0."""
        return cls(weights=tuple(q))

    @classmethod
    def poisson(cls, lam: float, truncation_n: Optional[int] = None) -> "UserCountPmf":
        if not lam > 0:
            raise ValueError("lambda must be positive")
        if truncation_n is None:
            truncation_n = max(int(math.ceil(20.0 * lam)), 20)
            while poisson_dist.sf(truncation_n, lam) >= _POISSON_TAIL:
                truncation_n *= 2
        else:
            if poisson_dist.sf(truncation_n, lam) >= _POISSON_TAIL:
                raise ValueError(
                    f"truncation_n={truncation_n} leaves tail mass >= 1e-12"
                )
        n = np.arange(truncation_n + 1)
        logs = -lam + n * math.log(lam) - gammaln(n + 1)
        return cls(weights=tuple(np.exp(logs)), poisson_lambda=float(lam))

    @property
    def is_finite(self) -> bool:
        return self.poisson_lambda is None

    @property
    def n_top(self) -> int:
        """Largest n carried (truncation point for Poisson)."""
        return len(self.weights) - 1

    @property
    def n_max(self) -> Optional[int]:
        """Largest possible user count; None for Poisson (unbounded)."""
        if not self.is_finite:
            return None
        return max(n for n, w in enumerate(self.weights) if w > 0)

    @property
    def q(self) -> np.ndarray:
        return np.asarray(self.weights, dtype=float)

    def mean(self) -> float:
        return float((np.arange(len(self.weights)) * self.q).sum())

    def expect(self, f: Callable[[np.ndarray], np.ndarray]) -> float:
        """sum_{n >= 1} q_n f(n) with f vectorized over integer n."""
        n = np.arange(1, len(self.weights))
        return float((self.q[1:] * np.asarray(f(n), dtype=float)).sum())


@dataclass(frozen=True)
class FdConfig:
    """Fixed-allocation design: the band is cut into n_des equal slices."""

    n_des: int

    def __post_init__(self):
        if self.n_des < 1:
            raise ValueError("n_des must be >= 1")

    @classmethod
    def default_for(cls, pmf: UserCountPmf, u: float) -> "FdConfig":
        """Serve as many users as fit: n_des = min(n_max, u)."""
        u_int = int(u)
        if pmf.is_finite:
            return cls(n_des=min(pmf.n_max, u_int) if pmf.n_max else u_int)
        return cls(n_des=u_int)

    def check_divisible(self, u: float) -> None:
        if int(u) != u or int(u) % self.n_des != 0:
            raise ValueError(f"u={u} is not an integer multiple of n_des={self.n_des}")


def fd_smg(n_des: int, n: int, u: float) -> float:
    """FD sum multiplexing gain with n active users: each served user gets
    a u/n_des slice, so (n/2)(u/n_des) until the band is full, then u/2."""
    if n <= n_des:
        return 0.5 * n * u / n_des
    return 0.5 * u


def fd_n_served(n_des: int, n: int) -> int:
    return min(n, n_des)


def fh_n_served(v: float, n: int, u: float) -> int:
    """FH serves everyone unless several users each demand the whole band."""
    if n == 1 or v < u:
        return n
    return 0


def _fh_smg_mean_curve(pmf: UserCountPmf, u: float) -> Callable[[np.ndarray], np.ndarray]:
    """v -> E{SMG(v, N)}, vectorized over v."""
    n = np.arange(1, len(pmf.weights))
    qn = pmf.q[1:] * n

    def f(v: np.ndarray) -> np.ndarray:
        v = np.asarray(v, dtype=float)
        om = 1.0 - v / u
        return 0.5 * v * (om[:, None] ** (n - 1) @ qn)

    return f


def _fh_min_gain_curve(pmf: UserCountPmf, u: float) -> Callable[[np.ndarray], np.ndarray]:
    """v -> E{SMG(v, N)/N} for v < u, vectorized over v."""
    n = np.arange(1, len(pmf.weights))
    qn = pmf.q[1:]

    def f(v: np.ndarray) -> np.ndarray:
        v = np.asarray(v, dtype=float)
        om = 1.0 - v / u
        return 0.5 * v * (om[:, None] ** (n - 1) @ qn)

    return f


def eta1_fh(pmf: UserCountPmf, u: float) -> Tuple[float, float]:
    """Best expected SMG of FH and its hop count: (value, v_star)."""
    v_star, value = maximize_on_interval(_fh_smg_mean_curve(pmf, u), 0.0, u)
    return value, v_star


def eta1_fd(pmf: UserCountPmf, fd: FdConfig, u: float) -> float:
    """Expected SMG of FD with n_des slices."""
    n_des = fd.n_des

    def f(n: np.ndarray) -> np.ndarray:
        return np.where(n <= n_des, 0.5 * n * u / n_des, 0.5 * u)

    return pmf.expect(f)


def eta2_fh(pmf: UserCountPmf, u: float) -> Tuple[float, float]:
    """Best expected worst-user gain of FH with everyone served.

    The objective is continuous on [0, u); the boundary point v = u is
    scored separately under the service rule (only N = 1 counts there)
    and compared against the interior optimum.
    """
    v_dag, value = maximize_on_interval(_fh_min_gain_curve(pmf, u), 0.0, u)
    q1 = pmf.q[1] if len(pmf.weights) > 1 else 0.0
    boundary = 0.5 * u * q1
    if boundary > value:
        return boundary, u
    return value, v_dag


def eta2_fd(pmf: UserCountPmf, fd: FdConfig, u: float) -> float:
    """Expected worst-user gain of FD: (u / 2 n_des) P{1 <= N <= n_des}."""
    n_des = fd.n_des
    q = pmf.q
    served = q[1 : n_des + 1].sum()
    return 0.5 * u / n_des * float(served)


def eta2_fh_poisson_closed(lam: float, u: float) -> Tuple[float, float]:
    """Closed-form eta2 for FH under a Poisson(lam) user count.

    Writing omega = 1 - v/u, the optimum for lam > 2 solves
    exp(-lam*omega) = 1 - lam*omega + lam*omega^2, found by bisection to
    1e-12; for lam <= 2 the optimum sits at v = u (omega = 0). Returns
    (value, omega_dagger).
    """
    if not lam > 0:
        raise ValueError("lambda must be positive")
    if lam <= 2.0:
        return 0.5 * u * lam * math.exp(-lam), 0.0

    def g(om: float) -> float:
        return math.exp(-lam * om) - 1.0 + lam * om - lam * om * om

    lo, hi = 1e-8, 1.0 - 1e-15
    if g(lo) <= 0.0:
        lo = 1e-12
    f_lo = g(lo)
    while hi - lo > 1e-12:
        mid = 0.5 * (lo + hi)
        f_mid = g(mid)
        if (f_mid > 0.0) == (f_lo > 0.0):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    omega = 0.5 * (lo + hi)
    value = math.exp(-lam) * (1.0 - omega) * (math.expm1(lam * omega)) * u / (2.0 * omega)
    return value, omega


def eta3(scheme: str, n_max: int, u: float, v: Optional[float] = None) -> float:
    """Deterministic worst-case per-user gain with n_max users present.

    FD: u / (2 n_max). FH: SMG(v, n_max)/n_max at the design hop count v,
    defaulting to the even split v = u/n_max.
    """
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    if scheme == "fd":
        return 0.5 * u / n_max
    if scheme == "fh":
        if v is None:
            v = u / n_max
        return smg_fair(v, n_max, u) / n_max
    raise ValueError(f"unknown scheme {scheme!r}")


def eta4(
    scheme: str,
    pmf: UserCountPmf,
    u: float,
    v: Optional[float] = None,
    fd: Optional[FdConfig] = None,
) -> float:
    """Expected fraction of users served.

    FH serves everyone whenever v < u (value 1); at v = u only a lone
    user is served, giving P{N = 1}. FD turns away arrivals beyond
    n_des: 1 - sum_{n > n_des} q_n (1 - n_des/n).
    """
    if scheme == "fh":
        if v is None:
            raise ValueError("eta4 for FH needs the hop count v")
        if v < u:
            return 1.0
        return float(pmf.q[1]) if len(pmf.weights) > 1 else 0.0
    if scheme == "fd":
        if fd is None:
            raise ValueError("eta4 for FD needs an FdConfig")
        n_des = fd.n_des
        q = pmf.q
        n = np.arange(len(q))
        over = n > n_des
        loss = float((q[over] * (1.0 - n_des / n[over])).sum())
        return 1.0 - loss
    raise ValueError(f"unknown scheme {scheme!r}")


def eta_afh(measure: int, pmf: UserCountPmf, u: float) -> float:
    """Adaptive hopping: every slot uses the load-matched v = u/N.

    measure 1 gives E{sup_v SMG(v, N)} = (u/2) E{(1 - 1/N)^(N-1)};
    measure 2 the per-user version with 1/N inside the expectation.
    """
    if measure not in (1, 2):
        raise ValueError("measure must be 1 or 2")

    def f(n: np.ndarray) -> np.ndarray:
        n = n.astype(float)
        base = (1.0 - 1.0 / n) ** (n - 1.0)
        return base if measure == 1 else base / n

    return 0.5 * u * pmf.expect(f)


@dataclass(frozen=True)
class BackoffComparison:
    """FH at the near-full hop count v = u - epsilon versus FD.

    For two-valued loads (n_max = 2, q0 = 0) the exact algebra is carried
    along: FH wins eta1 iff q1 > q1_multiplier * q2, and wins eta2 iff
    q2 < q2_bound.
    """

    epsilon: float
    fh_eta1: float
    fd_eta1: float
    eta1_holds: bool
    fh_eta2: float
    fd_eta2: float
    eta2_holds: bool
    q1_multiplier: Optional[float] = None
    q1_threshold: Optional[float] = None
    q2_bound: Optional[float] = None


def epsilon_backoff_region(
    pmf: UserCountPmf, u: float, epsilon: float, fd: Optional[FdConfig] = None
) -> BackoffComparison:
    """Score FH at v = u - epsilon against FD on eta1 and eta2.

    Backing off keeps every user served (v < u) while giving up order
    epsilon of gain; this reports whether FH still wins both measures.
    """
    if not 0.0 < epsilon < 0.5 * u:
        raise ValueError("epsilon must lie in (0, u/2)")
    if fd is None:
        fd = FdConfig.default_for(pmf, u)
    v = u - epsilon
    fh1 = float(_fh_smg_mean_curve(pmf, u)(np.array([v]))[0])
    fh2 = float(_fh_min_gain_curve(pmf, u)(np.array([v]))[0])
    fd1 = eta1_fd(pmf, fd, u)
    fd2 = eta2_fd(pmf, fd, u)

    mult = thresh = bound = None
    if pmf.is_finite and pmf.n_max == 2:
        e = epsilon / u
        k = (1.0 - 2.0 * e * (1.0 - e)) / (1.0 - 2.0 * e)
        mult = 2.0 * k
        thresh = mult / (1.0 + mult)
        rho = 1.0 - e
        bound = (1.0 / rho) * (1.0 - 1.0 / (2.0 * rho))
    return BackoffComparison(
        epsilon=epsilon,
        fh_eta1=fh1,
        fd_eta1=fd1,
        eta1_holds=fh1 > fd1,
        fh_eta2=fh2,
        fd_eta2=fd2,
        eta2_holds=fh2 > fd2,
        q1_multiplier=mult,
        q1_threshold=thresh,
        q2_bound=bound,
    )


@dataclass(frozen=True)
class ConditionCheck:
    """A sufficient condition and the direct comparison it promises."""

    condition_holds: bool
    inequality_verified: bool


def eta1_sufficient_condition(
    pmf: UserCountPmf, n_max: Optional[int] = None
) -> ConditionCheck:
    """Mean-load test guaranteeing FH beats FD on eta1.

    If E{N} < (1/2) ln((e^2 - 1) n_max) then eta1_fh > eta1_fd. The
    direct comparison is evaluated alongside; a condition that holds
    while the comparison fails would contradict the guarantee, so that
    combination raises.
    """
    if n_max is None:
        n_max = pmf.n_max
    if n_max is None:
        raise ValueError("n_max required for a Poisson user count")
    cond = pmf.mean() < 0.5 * math.log((math.e**2 - 1.0) * n_max)
    fh, _ = eta1_fh(pmf, 1.0)
    fd = eta1_fd(pmf, FdConfig(n_des=n_max), 1.0)
    verified = fd < fh
    if cond and not verified:
        raise AssertionError(
            "mean-load condition held but the eta1 comparison failed"
        )
    return ConditionCheck(condition_holds=cond, inequality_verified=verified)


def eta2_sufficient_condition(
    pmf: UserCountPmf, n_max: Optional[int] = None
) -> ConditionCheck:
    """Mean-load test guaranteeing FH beats FD on eta2.

    If (1/E{N})(1 - 1/E{N})^(E{N}-1) > 1/n_max then eta2_fh > eta2_fd.
    """
    if n_max is None:
        n_max = pmf.n_max
    if n_max is None:
        raise ValueError("n_max required for a Poisson user count")
    mean_n = pmf.mean()
    # loads with no mass at zero have E{N} >= 1 exactly; allow roundoff
    if mean_n < 1.0 - 1e-9:
        raise ValueError("E{N} must be at least 1")
    mean_n = max(mean_n, 1.0)
    lhs = (1.0 / mean_n) * (1.0 - 1.0 / mean_n) ** (mean_n - 1.0)
    cond = lhs > 1.0 / n_max
    fh, _ = eta2_fh(pmf, 1.0)
    fd = eta2_fd(pmf, FdConfig(n_des=n_max), 1.0)
    verified = fd < fh
    if cond and not verified:
        raise AssertionError(
            "mean-load condition held but the eta2 comparison failed"
        )
    return ConditionCheck(condition_holds=cond, inequality_verified=verified)


# Reference ten-user count distribution used in the comparison suite.
TEN_USER_MIX = UserCountPmf.finite(
    (0.0, 0.22, 0.24, 0.24, 0.24, 0.01, 0.01, 0.01, 0.01, 0.01, 0.01)
)

# A quoted companion value for TEN_USER_MIX puts FD's eta2 at u/16, which
# the direct formula does not reproduce: n_des = n_max = 10 gives u/20.
# u/16 equals u/(2*8), the n_des = 8 value with the 2% overflow mass
# ignored. Both numbers are reported side by side rather than silently
# picking one.
REPORTED_TEN_USER_ETA2_FD_PER_U = 1.0 / 16.0


@dataclass(frozen=True)
class ReferenceValueCheck:
    computed: float
    reported: float
    matches: bool
    note: str


def ten_user_fd_eta2_check(u: float) -> ReferenceValueCheck:
    """eta2 of FD for TEN_USER_MIX: direct formula vs the quoted value."""
    computed = eta2_fd(TEN_USER_MIX, FdConfig(n_des=10), u)
    reported = REPORTED_TEN_USER_ETA2_FD_PER_U * u
    matches = math.isclose(computed, reported, rel_tol=1e-9)
    note = (
        "direct formula with n_des = 10; the quoted u/16 equals u/(2*8), "
        "the n_des = 8 value with the 2% overflow mass ignored"
        if not matches
        else "values agree"
    )
    return ReferenceValueCheck(
        computed=computed, reported=reported, matches=matches, note=note
    )


@dataclass(frozen=True)
class MeasureReport:
    """All four measures for one scheme, with the tuning that achieved
    them. Fields that do not apply to a scheme are None."""

    scheme: str
    eta1: Optional[float] = None
    eta2: Optional[float] = None
    eta3: Optional[float] = None
    eta4: Optional[float] = None
    v_star: Optional[float] = None
    v_dagger: Optional[float] = None
    n_des: Optional[int] = None
    eta3_v: Optional[float] = None
    eta4_v: Optional[float] = None
    epsilon: Optional[float] = None


def build_measure_reports(
    pmf: UserCountPmf,
    u: float,
    n_des: Optional[int] = None,
    epsilon: Optional[float] = None,
    eta3_v: Optional[float] = None,
) -> Tuple[MeasureReport, MeasureReport, MeasureReport]:
    """Measure reports for FH, FD and AFH on a common user count law.

    epsilon is the hop-count backoff used for FH's service measure when
    the eta1 optimum sits at v = u; it defaults to u/1000.
    """
    if epsilon is None:
        epsilon = 1e-3 * u
    fd_cfg = FdConfig(n_des=n_des) if n_des is not None else FdConfig.default_for(pmf, u)
    n_max = pmf.n_max if pmf.is_finite else None

    e1_fh, v_star = eta1_fh(pmf, u)
    e2_fh, v_dag = eta2_fh(pmf, u)
    eta4_v = v_star if v_star < u else u - epsilon
    e3_fh = eta3("fh", n_max, u, v=eta3_v) if n_max else None
    fh = MeasureReport(
        scheme="fh",
        eta1=e1_fh,
        eta2=e2_fh,
        eta3=e3_fh,
        eta4=eta4("fh", pmf, u, v=eta4_v),
        v_star=v_star,
        v_dagger=v_dag,
        eta3_v=(eta3_v if eta3_v is not None else (u / n_max if n_max else None)),
        eta4_v=eta4_v,
        epsilon=epsilon,
    )
    fd = MeasureReport(
        scheme="fd",
        eta1=eta1_fd(pmf, fd_cfg, u),
        eta2=eta2_fd(pmf, fd_cfg, u),
        eta3=eta3("fd", n_max, u) if n_max else None,
        eta4=eta4("fd", pmf, u, fd=fd_cfg),
        n_des=fd_cfg.n_des,
    )
    afh = MeasureReport(
        scheme="afh",
        eta1=eta_afh(1, pmf, u),
        eta2=eta_afh(2, pmf, u),
        eta3=eta3("fh", n_max, u) if n_max else None,
        eta4=1.0,
    )
    return fh, fd, afh
