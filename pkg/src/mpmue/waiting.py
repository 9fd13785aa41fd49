"""Waiting times of a Poisson process whose rate is a Max-U-Exp draw.

Conditional on the mixing rate xi = x, inter-arrival times are Exp(x) and
the n-th arrival is Gamma(n, x).  Mixing over x gives every closed form
here; they all route through ``MaxUExp.tilted_moment``.  The unconditional
inter-arrival tail decays like 2*lam/(a*t^2), so the mean is finite but the
variance is not, and moments E(T^q) exist exactly for q < 2.
"""

from __future__ import annotations

import math

import numpy as np

from .distribution import MaxUExp, _require_positive
from .errors import DomainError
from .numerics import integrate, log_gamma
from .rng import RandomStream


def _em2(z: float) -> float:
    """(1 - e^-z - z e^-z) / z^2, series-stabilized below z = 1e-3."""
    if z < 0.0:
        raise DomainError(f"_em2 requires z >= 0, got {z!r}")
    if z < 1e-3:
        return 0.5 - z / 3.0 + z * z / 8.0 - z**3 / 30.0 + z**4 / 144.0
    ez = math.exp(-z)
    return (-math.expm1(-z) - z * ez) / (z * z)


class ExpMaxUExp:
    """Inter-arrival time eta / xi with eta a unit exponential independent of xi."""

    __slots__ = ("xi",)

    def __init__(self, a: float, lam: float):
        self.xi = MaxUExp(a, lam)

    @property
    def a(self) -> float:
        return self.xi.a

    @property
    def lam(self) -> float:
        return self.xi.lam

    def __repr__(self) -> str:
        return f"ExpMaxUExp(a={self.a}, lam={self.lam})"

    def pdf(self, t: float) -> float:
        if t <= 0.0:
            return 0.0
        a, lam = self.a, self.lam
        s = lam + t
        first = a * _em2(a * t)
        second = (lam - t) * (-math.expm1(-a * s)) / (a * s**3)
        third = t * math.exp(-a * s) / (s * s)
        return first + second + third

    def cdf(self, t: float) -> float:
        if t <= 0.0:
            return 0.0
        a, lam = self.a, self.lam
        s = lam + t
        return 1.0 - (-math.expm1(-a * t)) / (a * t) + t * (-math.expm1(-a * s)) / (a * s * s)

    def sample(self, stream: RandomStream) -> float:
        """One draw as eta / xi; consumes three stream values (eta first, then xi)."""
        eta = stream.exponential(1.0)
        return eta / self.xi.sample(stream)

    def sample_many(self, stream: RandomStream, count: int) -> np.ndarray:
        u = stream.uniforms(3 * count)
        eta = -np.log(u[0::3])
        theta = self.a * u[1::3]
        tail = -np.log(u[2::3]) / self.lam
        return eta / np.maximum(theta, tail)

    def moment(self, q: float) -> float:
        """E(T^q) = Gamma(q+1) E(xi^-q); finite exactly for 0 < q < 2."""
        return math.exp(log_gamma(q + 1.0)) * self.xi.neg_moment(q)

    def joint_pdf(self, t: float, x: float) -> float:
        """Joint density of (T, xi) at (t, x): x e^(-tx) times the mixing density."""
        if t <= 0.0 or x <= 0.0:
            return 0.0
        return x * math.exp(-t * x) * self.xi.pdf(x)

    def conditional_mixing_pdf(self, t: float, x: float) -> float:
        """Density of xi given T = t (the joint renormalized by the T marginal)."""
        if not (t > 0.0):
            raise DomainError(f"conditioning requires t > 0, got {t!r}")
        return self.joint_pdf(t, x) / self.pdf(t)

    def mean_mixing_given_arrival(self, t: float) -> float:
        """E(xi | T = t), a ratio of tilted moments."""
        if not (t > 0.0):
            raise DomainError(f"requires t > 0, got {t!r}")
        return self.xi.tilted_moment(t, 2) / self.xi.tilted_moment(t, 1)

    def mean_arrival_given_mixing(self, x: float) -> float:
        """E(T | xi = x) = 1/x."""
        x = _require_positive("x", x)
        return 1.0 / x

    def joint_interarrival_pdf(self, ts) -> float:
        """Joint density of the first k inter-arrival times at (t_1, ..., t_k).

        A single mixing draw couples the coordinates, so this depends on the
        arguments only through their sum.
        """
        ts = [float(t) for t in ts]
        if not ts:
            raise DomainError("need at least one coordinate")
        if any(t <= 0.0 for t in ts):
            return 0.0
        return self.xi.tilted_moment(sum(ts), len(ts))


class ErlangMaxUExp:
    """Time of the n-th arrival: Gamma(n, 1) / xi with one shared mixing draw."""

    __slots__ = ("n", "xi")

    def __init__(self, n: int, a: float, lam: float):
        if not isinstance(n, int) or n < 1:
            raise DomainError(f"order n must be an integer >= 1, got {n!r}")
        self.n = n
        self.xi = MaxUExp(a, lam)

    @property
    def a(self) -> float:
        return self.xi.a

    @property
    def lam(self) -> float:
        return self.xi.lam

    def __repr__(self) -> str:
        return f"ErlangMaxUExp(n={self.n}, a={self.a}, lam={self.lam})"

    def pdf(self, t: float) -> float:
        if t <= 0.0:
            return 0.0
        n = self.n
        return t ** (n - 1) / math.factorial(n - 1) * self.xi.tilted_moment(t, n)

    def cdf(self, t: float) -> float:
        """No closed form; quadrature of the density.  Large arguments go
        through the complementary tail integral, which the infinite-range
        transform resolves far better than a wide finite panel."""
        if t <= 0.0:
            return 0.0
        if t > 20.0 * self.n:
            tail = integrate(self.pdf, t, math.inf, tol=1e-12).value
            return max(0.0, 1.0 - tail)
        return min(1.0, integrate(self.pdf, 0.0, t, tol=1e-11).value)

    def sample(self, stream: RandomStream) -> float:
        """One draw; consumes n + 2 stream values (n exponential legs, then xi)."""
        top = stream.gamma_int(self.n, 1.0)
        return top / self.xi.sample(stream)

    def sample_many(self, stream: RandomStream, count: int) -> np.ndarray:
        w = self.n + 2
        u = stream.uniforms(w * count).reshape(count, w)
        top = -np.log(u[:, : self.n]).sum(axis=1)
        theta = self.a * u[:, self.n]
        tail = -np.log(u[:, self.n + 1]) / self.lam
        return top / np.maximum(theta, tail)

    def moment(self, q: float) -> float:
        """E(T_n^q) = (Gamma(q+n)/Gamma(n)) E(xi^-q); finite exactly for 0 < q < 2."""
        scale = math.exp(log_gamma(q + self.n) - log_gamma(float(self.n)))
        return scale * self.xi.neg_moment(q)
