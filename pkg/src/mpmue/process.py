"""Counting process N(t) = N1(xi * mu(t)): a unit-rate Poisson process run on
the clock mu, sped up by one Max-U-Exp draw xi per path.

Counts at a single time follow the mixed Poisson law whose pmf is
m^n / n! * E(xi^n e^(-m xi)) with m = mu(t); joint laws over several times
reduce to the same tilted-moment kernel evaluated at the latest clock value.
The shared xi makes increments dependent (overdispersed), yet given
N(t) = n the earlier count N(s) is plain Binomial(n, mu(s)/mu(t)).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Protocol, Sequence

from .distribution import MaxUExp
from .errors import DomainError, RangeError
from .numerics import gamma_lower_reg, gamma_upper_reg
from .rng import RandomStream


class TimeTransform(Protocol):
    def value(self, t: float) -> float: ...

    def inverse(self, y: float) -> float: ...


class PowerTransform:
    """mu(t) = t^c for c > 0; c = 1 is the homogeneous clock."""

    __slots__ = ("c",)

    def __init__(self, c: float = 1.0):
        c = float(c)
        if not math.isfinite(c) or c <= 0.0:
            raise DomainError(f"power exponent must be finite and positive, got {c!r}")
        self.c = c

    def value(self, t: float) -> float:
        if t < 0.0:
            raise DomainError(f"time must be >= 0, got {t!r}")
        return t**self.c

    def inverse(self, y: float) -> float:
        if y < 0.0:
            raise DomainError(f"clock value must be >= 0, got {y!r}")
        return y ** (1.0 / self.c)


class TableTransform:
    """Piecewise-linear mu through (t_i, mu_i) anchors, starting at (0, 0).

    Both coordinates must be strictly increasing, which makes each segment
    exactly invertible.  Queries beyond the last anchor raise RangeError
    rather than extrapolate.
    """

    __slots__ = ("ts", "mus")

    def __init__(self, points: Sequence[tuple[float, float]]):
        pts = [(float(t), float(m)) for t, m in points]
        if len(pts) < 2:
            raise DomainError("table needs at least two points")
        if pts[0] != (0.0, 0.0):
            raise DomainError("table must start at (0, 0)")
        for (t0, m0), (t1, m1) in zip(pts[:-1], pts[1:]):
            if not (t1 > t0 and m1 > m0):
                raise DomainError("table coordinates must be strictly increasing")
        self.ts = [p[0] for p in pts]
        self.mus = [p[1] for p in pts]

    def _segment(self, xs: list[float], x: float) -> int:
        if x < xs[0] or x > xs[-1]:
            raise RangeError(f"{x!r} outside table range [{xs[0]}, {xs[-1]}]")
        lo, hi = 0, len(xs) - 1
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if xs[mid] <= x:
                lo = mid
            else:
                hi = mid
        return lo

    def value(self, t: float) -> float:
        i = self._segment(self.ts, t)
        w = (t - self.ts[i]) / (self.ts[i + 1] - self.ts[i])
        return self.mus[i] + w * (self.mus[i + 1] - self.mus[i])

    def inverse(self, y: float) -> float:
        i = self._segment(self.mus, y)
        w = (y - self.mus[i]) / (self.mus[i + 1] - self.mus[i])
        return self.ts[i] + w * (self.ts[i + 1] - self.ts[i])


@dataclass
class ProcessPath:
    xi: float
    events: list[float]
    horizon: float

    def count_at(self, t: float) -> int:
        """N(t): events at or before t."""
        if not (0.0 <= t <= self.horizon):
            raise DomainError(f"t must lie in [0, horizon], got {t!r}")
        return sum(1 for e in self.events if e <= t)


def to_increments(cumulative: Sequence[int]) -> list[int]:
    ks = [int(k) for k in cumulative]
    if any(k < 0 for k in ks):
        raise DomainError("counts must be >= 0")
    if any(b < a for a, b in zip(ks[:-1], ks[1:])):
        raise DomainError("cumulative counts must be non-decreasing")
    return [ks[0]] + [b - a for a, b in zip(ks[:-1], ks[1:])]


def to_cumulative(increments: Sequence[int]) -> list[int]:
    ms = [int(m) for m in increments]
    if any(m < 0 for m in ms):
        raise DomainError("increments must be >= 0")
    out: list[int] = []
    total = 0
    for m in ms:
        total += m
        out.append(total)
    return out


def conditional_binomial_pmf(n: int, mu_s: float, mu_t: float, j: int) -> float:
    """P(N(s) = j | N(t) = n) = Binomial(n, mu(s)/mu(t)) mass at j."""
    if not isinstance(n, int) or n < 0 or not isinstance(j, int):
        raise DomainError("n and j must be integers with n >= 0")
    if not (0.0 < mu_s < mu_t):
        raise DomainError(f"need 0 < mu_s < mu_t, got {mu_s!r}, {mu_t!r}")
    if j < 0 or j > n:
        return 0.0
    p = mu_s / mu_t
    return math.comb(n, j) * p**j * (1.0 - p) ** (n - j)


class MixedPoissonMaxUExp:
    """Count laws and path simulation for N(t) = N1(xi * mu(t))."""

    __slots__ = ("xi",)

    def __init__(self, xi: MaxUExp):
        if not isinstance(xi, MaxUExp):
            raise DomainError("xi must be a MaxUExp instance")
        self.xi = xi

    def __repr__(self) -> str:
        return f"MixedPoissonMaxUExp({self.xi!r})"

    # -- single-time laws -------------------------------------------------

    def _check_m(self, m: float) -> float:
        m = float(m)
        if not math.isfinite(m) or m <= 0.0:
            raise DomainError(f"clock value m must be finite and positive, got {m!r}")
        return m

    def pmf(self, m: float, n: int) -> float:
        """P(N = n) at clock value m = mu(t)."""
        m = self._check_m(m)
        if not isinstance(n, int) or n < 0:
            raise DomainError(f"count n must be an integer >= 0, got {n!r}")
        # Regularized composition of the tilted-moment kernel with the
        # Poisson weight: every factor stays within double range at counts
        # where the raw kernel and the n! prefactor both overflow.
        a, lam = self.xi.a, self.xi.lam
        c2 = a * (lam + m)
        log_rn = n * (math.log(m) - math.log(lam + m))
        total = gamma_lower_reg(n + 1.0, a * m) / (a * m)
        total += (
            gamma_lower_reg(n + 1.0, c2)
            * ((lam * n - m) / (a * (lam + m) ** 2))
            * math.exp(log_rn)
        )
        if n > 0:
            total += lam * gamma_upper_reg(float(n), c2) * math.exp(log_rn) / (lam + m)
        return max(0.0, total)

    def pmf_upper_tail_bound(self, m: float, kk: int) -> float:
        """Bound on P(N >= kk) from a falling-factorial moment (Markov)."""
        m = self._check_m(m)
        if kk < 1:
            return 1.0
        j = max(1, min(kk // 2, 50))
        log_fact = math.lgamma(kk + 1.0) - math.lgamma(kk - j + 1.0)
        log_num = j * math.log(m) + math.log(self.xi.moment(float(j)))
        return math.exp(log_num - log_fact)

    def truncation_point(self, m: float, tail: float = 1e-12) -> int:
        """Smallest count cutoff whose upper tail bound drops below ``tail``."""
        mean, var = self.mean_variance(m)
        kk = max(8, int(math.ceil(mean + 10.0 * math.sqrt(var))))
        while self.pmf_upper_tail_bound(m, kk) > tail:
            kk = int(math.ceil(kk * 1.4)) + 1
            if kk > 100_000:
                raise DomainError("truncation point exceeds sanity bound")
        return kk

    def mean_variance(self, m: float) -> tuple[float, float]:
        m = self._check_m(m)
        mu_xi = self.xi.mean()
        return m * mu_xi, m * mu_xi + m * m * self.xi.variance()

    def pgf(self, m: float, z: float) -> float:
        """E(z^N) = lst(m(1-z)) for |z| < 1."""
        m = self._check_m(m)
        if not (-1.0 < z < 1.0):
            raise DomainError(f"pgf requires |z| < 1, got {z!r}")
        return self.xi.lst(m * (1.0 - z))

    def posterior_pdf(self, m: float, n: int, x: float) -> float:
        """Density of xi given N = n at clock value m (Bayes weighting of the prior)."""
        m = self._check_m(m)
        if not isinstance(n, int) or n < 0:
            raise DomainError(f"count n must be an integer >= 0, got {n!r}")
        if x <= 0.0:
            return 0.0
        return x**n * math.exp(-m * x) * self.xi.pdf(x) / self.xi.tilted_moment(m, n)

    def posterior_mean(self, m: float, n: int) -> float:
        """E(xi | N = n), a ratio of consecutive tilted moments."""
        m = self._check_m(m)
        if not isinstance(n, int) or n < 0:
            raise DomainError(f"count n must be an integer >= 0, got {n!r}")
        return self.xi.tilted_moment(m, n + 1) / self.xi.tilted_moment(m, n)

    def factorial_moment(self, m: float, k: int) -> float:
        """E(N(N-1)...(N-k+1)) = m^k E(xi^k)."""
        m = self._check_m(m)
        if not isinstance(k, int) or k < 1:
            raise DomainError(f"order k must be an integer >= 1, got {k!r}")
        return m**k * self.xi.moment(float(k))

    # -- finite-dimensional laws ------------------------------------------

    def ordered_pmf(self, mus: Sequence[float], ks: Sequence[int]) -> float:
        """P(N(t_1) = k_1, ..., N(t_r) = k_r) for strictly increasing clock values."""
        mus = [self._check_m(m) for m in mus]
        ks = [int(k) for k in ks]
        if len(mus) != len(ks) or not mus:
            raise DomainError("mus and ks must be non-empty and equal length")
        if any(b <= a for a, b in zip(mus[:-1], mus[1:])):
            raise DomainError("clock values must be strictly increasing")
        if any(k < 0 for k in ks):
            raise DomainError("counts must be >= 0")
        if any(b < a for a, b in zip(ks[:-1], ks[1:])):
            return 0.0
        prev_m = 0.0
        prev_k = 0
        weight = 0.0
        for m, k in zip(mus, ks):
            dm, dk = m - prev_m, k - prev_k
            weight += dk * math.log(dm) - math.lgamma(dk + 1.0)
            prev_m, prev_k = m, k
        return math.exp(weight) * self.xi.tilted_moment(mus[-1], ks[-1])

    def increments_pmf(self, mus: Sequence[float], ms: Sequence[int]) -> float:
        """Joint pmf of the increments over consecutive clock intervals.

        Identical arithmetic to ``ordered_pmf`` after the cumulative-sum
        remap, so the two finite-dimensional views agree exactly.
        """
        return self.ordered_pmf(mus, to_cumulative(ms))

    # -- simulation ---------------------------------------------------------

    def simulate_path(
        self, transform: TimeTransform, horizon: float, stream: RandomStream
    ) -> ProcessPath:
        """One trajectory on [0, horizon]: draw xi, then unit-rate arrival
        epochs S_k accepted while S_k <= xi * mu(horizon), mapped back through
        the clock as t_k = mu^-1(S_k / xi)."""
        horizon = float(horizon)
        if not (horizon > 0.0) or not math.isfinite(horizon):
            raise DomainError(f"horizon must be finite and positive, got {horizon!r}")
        xi = self.xi.sample(stream)
        budget = xi * transform.value(horizon)
        events: list[float] = []
        s = 0.0
        while True:
            s += stream.exponential(1.0)
            if s > budget:
                break
            events.append(min(transform.inverse(s / xi), horizon))
        return ProcessPath(xi=xi, events=events, horizon=horizon)

    def simulate_paths(
        self, transform: TimeTransform, horizon: float, count: int, seed: int
    ) -> list[ProcessPath]:
        """Batch of paths on per-path substreams of one seed, so any prefix of
        the batch is reproducible independently of the others."""
        if count < 0:
            raise DomainError("count must be >= 0")
        root = RandomStream(seed)
        return [
            self.simulate_path(transform, horizon, root.substream(i)) for i in range(count)
        ]
