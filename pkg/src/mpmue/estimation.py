"""Parameter estimation for Max-U-Exp samples.

Method of moments: with x = a*lam and y = lam the first two moments become
E(X)  = (x^2/2 + 1 - e^-x) / (x y)
E(X^2) = (x^3/3 + 4 - 2 e^-x (x + 2)) / (x y^2)
so the scale-free ratio E(X^2)/E(X)^2 equals

    g(x) = x (x^3/3 + 4 - 2 e^-x (x + 2)) / (x^2/2 + 1 - e^-x)^2.

g decreases from 2 at the origin to a minimum of about 1.24523 at
x ~ 4.02317, then climbs back toward 4/3; it crosses 4/3 on the way down at
x ~ 2.17382.  A sample ratio therefore lands in one of four regimes: a
unique root, a two-root ambiguity resolved by the least-squares criterion,
a fallback to the curve minimum, or a clamp for ratios at or above the
exponential limit 2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

import numpy as np

from .errors import (
    DegenerateSampleError,
    DomainError,
    InsufficientDataError,
)
from .numerics import find_root, least_squares, minimize

FOUR_THIRDS = 4.0 / 3.0
_CLAMP_EPS = 1e-6


def validate_sample(values) -> np.ndarray:
    """Coerce observations to a sorted 1-D float array; all finite and positive."""
    arr = np.asarray(values, dtype=float).ravel()
    if arr.size == 0:
        raise InsufficientDataError("sample is empty")
    if not np.all(np.isfinite(arr)):
        raise DomainError("sample contains non-finite values")
    if np.any(arr <= 0.0):
        raise DomainError("sample contains non-positive values")
    return np.sort(arr)


def empirical_moments(values) -> tuple[float, float, float]:
    """(m1, m2, unbiased mean square (n m1^2 - m2)/(n - 1)); needs n >= 2."""
    x = validate_sample(values)
    n = x.size
    if n < 2:
        raise InsufficientDataError("need at least two observations")
    m1 = float(np.mean(x))
    m2 = float(np.mean(x * x))
    return m1, m2, (n * m1 * m1 - m2) / (n - 1)


def ratio_stat(values, variant: str = "unbiased") -> float:
    """Sample analogue of E(X^2)/E(X)^2.

    ``plain`` is m2/m1^2; ``unbiased`` replaces the squared mean with its
    unbiased estimate, giving m2 (n-1) / (n m1^2 - m2).  The plain variant
    is never below the unbiased one.
    """
    m1, m2, ms_unbiased = empirical_moments(values)
    if variant == "plain":
        return m2 / (m1 * m1)
    if variant != "unbiased":
        raise DomainError(f"unknown variant {variant!r}")
    if ms_unbiased <= 0.0:
        raise DegenerateSampleError("unbiased mean square is not positive")
    return m2 / ms_unbiased


def mom_curve(x: float) -> float:
    """The moment-ratio curve g(x) for x > 0; series below 1e-3 avoids the
    0/0 cancellation at the origin (limit 2)."""
    x = float(x)
    if not (x > 0.0) or not math.isfinite(x):
        raise DomainError(f"mom_curve requires finite x > 0, got {x!r}")
    if x < 1e-3:
        return 2.0 - 2.0 * x * x / 3.0 + x**3 / 3.0 + x**4 / 12.0
    ex = math.exp(-x)
    num = x * (x**3 / 3.0 + 4.0 - 2.0 * ex * (x + 2.0))
    root = x * x / 2.0 - math.expm1(-x)
    return num / (root * root)


@lru_cache(maxsize=1)
def mom_curve_extrema() -> tuple[float, float, float]:
    """(crossing of 4/3, argmin, min value) of the moment-ratio curve,
    located by the package's own optimizer and root-finder."""
    argmin = float(minimize(lambda v: mom_curve(v[0]), [3.5], bounds=[(0.5, 50.0)], tol=1e-13)[0])
    gmin = mom_curve(argmin)
    x43 = find_root(lambda v: mom_curve(v) - FOUR_THIRDS, 0.5, argmin, tol=1e-12)
    return x43, argmin, gmin


@dataclass
class FitReport:
    a: float
    lam: float
    x_product: float
    r_hat: float
    r_hat_variant: str
    branch: str
    objective: float | None = None
    warnings: list[str] = field(default_factory=list)
    candidates: list[tuple[float, float]] = field(default_factory=list)

    def params(self) -> tuple[float, float]:
        return self.a, self.lam


def _params_from_x(x: float, m1: float) -> tuple[float, float]:
    # Second moment equation: lam = (x^2/2 + 1 - e^-x) / (x m1), a = x / lam.
    y = (x * x / 2.0 - math.expm1(-x)) / (x * m1)
    return x / y, y


def solve_mom(values, variant: str = "unbiased") -> FitReport:
    """Method-of-moments fit via the ratio statistic and the curve g.

    Regimes by the observed ratio r:
      r >= 2          clamp to the near-zero root of g = 2 - 1e-6 (warned);
      4/3 < r < 2     unique root left of the 4/3 crossing;
      gmin <= r <= 4/3  two candidate roots bracketing the argmin, both
                      reported, selection deferred to least squares;
      r < gmin        the curve cannot reach r; use the argmin (warned).
    """
    x = validate_sample(values)
    m1 = float(np.mean(x))
    r = ratio_stat(x, variant)
    x43, argmin, gmin = mom_curve_extrema()
    warnings: list[str] = []
    candidates: list[tuple[float, float]] = []

    if r >= 2.0:
        warnings.append(
            f"ratio {r:.6g} is at or above the exponential limit 2; clamped to g(x) = 2 - 1e-6"
        )
        xr = find_root(lambda v: mom_curve(v) - (2.0 - _CLAMP_EPS), 1e-9, x43, tol=1e-12)
        branch = "unique"
    elif r > FOUR_THIRDS:
        xr = find_root(lambda v: mom_curve(v) - r, 1e-9, x43, tol=1e-12)
        branch = "unique"
    elif r >= gmin:
        branch = "ambiguous_two_roots"
        lo_root = find_root(lambda v: mom_curve(v) - r, x43, argmin, tol=1e-12)
        candidates.append(_params_from_x(lo_root, m1))
        hi = argmin * 2.0
        while mom_curve(hi) <= r and hi < 1e9:
            hi *= 2.0
        if mom_curve(hi) > r:
            hi_root = find_root(lambda v: mom_curve(v) - r, argmin, hi, tol=1e-12)
            candidates.append(_params_from_x(hi_root, m1))
        else:
            warnings.append(
                "ratio sits at the 4/3 boundary; the upper candidate diverges and is dropped"
            )
        xr = lo_root
    else:
        warnings.append(
            f"ratio {r:.6g} is below the curve minimum {gmin:.6g}; using the argmin"
        )
        xr = argmin
        branch = "fallback_min"

    a, lam = _params_from_x(xr, m1)
    return FitReport(
        a=a,
        lam=lam,
        x_product=xr,
        r_hat=r,
        r_hat_variant=variant,
        branch=branch,
        warnings=warnings,
        candidates=candidates,
    )


def _trimmed(values: np.ndarray, trim: float) -> tuple[np.ndarray, int]:
    if not (0.0 <= trim < 1.0):
        raise DomainError(f"trim must lie in [0, 1), got {trim!r}")
    n = values.size
    if n < 2:
        raise InsufficientDataError("need at least two observations")
    # Keep at least two order statistics no matter how aggressive the trim.
    drop = min(math.ceil(trim * n), n - 2)
    return values[: n - drop], n


def lsq_objective(values, a: float, lam: float, trim: float = 0.25) -> float:
    """Sum of squared gaps between plotting positions i/(n+1) (n the original
    size) and the uniform-branch cdf (x_i/a)(1 - e^(-lam x_i)) over the
    retained (smallest) order statistics."""
    x = validate_sample(values)
    kept, n = _trimmed(x, trim)
    i = np.arange(1, kept.size + 1, dtype=float)
    positions = i / (n + 1.0)
    model = (kept / a) * (-np.expm1(-lam * kept))
    gaps = positions - model
    return float(np.dot(gaps, gaps))


def lsq_fit(values, init: tuple[float, float], trim: float = 0.25) -> FitReport:
    """Trimmed least squares on the empirical cdf, constrained to a at least
    the largest retained observation (the model branch assumes x <= a)."""
    x = validate_sample(values)
    kept, n = _trimmed(x, trim)
    a_floor = float(kept[-1])
    i = np.arange(1, kept.size + 1, dtype=float)
    positions = i / (n + 1.0)

    def objective(p) -> float:
        a, lam = p
        model = (kept / a) * (-np.expm1(-lam * kept))
        gaps = positions - model
        return float(np.dot(gaps, gaps))

    def residuals(p) -> np.ndarray:
        a, lam = p
        return positions - (kept / a) * (-np.expm1(-lam * kept))

    a0 = max(float(init[0]), a_floor)
    lam0 = max(float(init[1]), 1e-12)
    big = max(1e6, 1e4 * a_floor)
    best = least_squares(residuals, [a0, lam0], bounds=[(a_floor, big), (1e-12, big)], tol=1e-14)
    a, lam = float(best[0]), float(best[1])
    m1 = float(np.mean(x))
    m2 = float(np.mean(x * x))
    return FitReport(
        a=a,
        lam=lam,
        x_product=a * lam,
        r_hat=m2 / (m1 * m1),
        r_hat_variant="plain",
        branch="lsq_refined",
        objective=objective([a, lam]),
    )


def histogram_init(values, drop_factor: float = 0.5) -> tuple[float, float]:
    """Crude (a, lam) start values from the shape of a square-root-rule histogram.

    The density drops sharply past a, so a is read off as the left edge of
    the first post-peak bin whose height falls below ``drop_factor`` times
    its predecessor (else the sample maximum).  The tail beyond a is
    memoryless, so lam is the inverted mean exceedance when at least five
    observations land there, else 1/mean.
    """
    x = validate_sample(values)
    n = x.size
    if n < 20:
        raise InsufficientDataError("histogram heuristic needs at least 20 observations")
    if not (0.0 < drop_factor < 1.0):
        raise DomainError(f"drop_factor must lie in (0, 1), got {drop_factor!r}")
    top = float(x[-1])
    counts, edges = np.histogram(x, bins=math.ceil(math.sqrt(n)), range=(0.0, top))
    peak = int(np.argmax(counts))
    a0 = top
    for i in range(peak + 1, counts.size):
        if counts[i - 1] > 0 and counts[i] < drop_factor * counts[i - 1]:
            a0 = float(edges[i])
            break
    tail = x[x > a0]
    if tail.size >= 5:
        lam0 = 1.0 / float(np.mean(tail - a0))
    else:
        lam0 = 1.0 / float(np.mean(x))
    return a0, lam0


def exceedance_confidence(n: int, p: float, max_exceed: int) -> float:
    """P(Binomial(n, p) <= max_exceed): chance the count of tail exceedances
    stays within the allowance."""
    if not isinstance(n, int) or n < 1:
        raise DomainError(f"n must be an integer >= 1, got {n!r}")
    if not isinstance(max_exceed, int) or max_exceed < 0:
        raise DomainError(f"max_exceed must be an integer >= 0, got {max_exceed!r}")
    if not (0.0 < p < 1.0):
        raise DomainError(f"p must lie in (0, 1), got {p!r}")
    kk = min(max_exceed, n)
    total = sum(math.comb(n, i) * p**i * (1.0 - p) ** (n - i) for i in range(kk + 1))
    return min(1.0, total)


def fit_auto(values, trim: float = 0.25, variant: str = "unbiased") -> FitReport:
    """Moment fit with automatic disambiguation.

    The unique branch is returned as is (no least-squares polish).  An
    ambiguous ratio picks the candidate with the lower trimmed
    least-squares objective.  The fallback branch refits by least squares
    seeded from the histogram heuristic (or the argmin parameters when the
    sample is too small for it).
    """
    x = validate_sample(values)
    rep = solve_mom(x, variant)
    if rep.branch == "unique":
        return rep
    if rep.branch == "ambiguous_two_roots":
        scored = [
            (lsq_objective(x, a, lam, trim), (a, lam)) for a, lam in rep.candidates
        ]
        obj, (a, lam) = min(scored, key=lambda s: s[0])
        return FitReport(
            a=a,
            lam=lam,
            x_product=a * lam,
            r_hat=rep.r_hat,
            r_hat_variant=variant,
            branch="lsq_refined",
            objective=obj,
            warnings=rep.warnings
            + [f"ambiguous ratio: kept the candidate with objective {obj:.6g}"],
            candidates=rep.candidates,
        )
    # fallback_min: refine by least squares from the histogram start.
    warnings = list(rep.warnings)
    try:
        init = histogram_init(x)
    except InsufficientDataError:
        init = (rep.a, rep.lam)
        warnings.append("sample too small for the histogram start; seeding from the argmin fit")
    refined = lsq_fit(x, init, trim)
    refined.r_hat = rep.r_hat
    refined.r_hat_variant = variant
    refined.warnings = warnings + refined.warnings
    refined.candidates = [(rep.a, rep.lam)]
    return refined


class MaxUExpEstimator:
    """Thin estimator wrapper with the scikit-learn calling convention.

    ``fit(X)`` accepts a 1-D array (or single-column matrix) of positive
    observations and exposes the fitted parameters as ``a_`` and
    ``lambda_`` with the full ``FitReport`` in ``report_``.
    """

    def __init__(self, method: str = "auto", trim: float = 0.25, variant: str = "unbiased"):
        self.method = method
        self.trim = trim
        self.variant = variant

    def get_params(self, deep: bool = True) -> dict:
        return {"method": self.method, "trim": self.trim, "variant": self.variant}

    def set_params(self, **params) -> "MaxUExpEstimator":
        for key, value in params.items():
            if key not in ("method", "trim", "variant"):
                raise DomainError(f"unknown parameter {key!r}")
            setattr(self, key, value)
        return self

    def fit(self, X, y=None) -> "MaxUExpEstimator":
        arr = np.asarray(X, dtype=float)
        if arr.ndim == 2 and arr.shape[1] == 1:
            arr = arr[:, 0]
        if arr.ndim != 1:
            raise DomainError("expected a 1-D array or a single-column matrix")
        if self.method == "auto":
            report = fit_auto(arr, trim=self.trim, variant=self.variant)
        elif self.method == "mom":
            report = solve_mom(arr, variant=self.variant)
        elif self.method == "lsq":
            start = solve_mom(arr, variant=self.variant)
            report = lsq_fit(arr, (start.a, start.lam), trim=self.trim)
        else:
            raise DomainError(f"unknown method {self.method!r}")
        self.report_ = report
        self.a_ = report.a
        self.lambda_ = report.lam
        return self
