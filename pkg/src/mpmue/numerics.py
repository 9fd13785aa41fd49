"""Scalar numerical kernels: incomplete gamma functions, bracketed
root-finding, bounded derivative-free minimization, and adaptive quadrature.

The incomplete gamma pair is implemented directly (power series below the
``x = alpha + 1`` switch point, modified-Lentz continued fraction above it)
because the closed-form evaluators need the *non-normalized* functions at
non-integer order.  Quadrature and simplex minimization delegate to scipy,
which stays behind the signatures below.
"""

from __future__ import annotations

import math
from typing import Callable, NamedTuple, Sequence

import numpy as np
from scipy.integrate import quad as _scipy_quad
from scipy.optimize import least_squares as _scipy_least_squares
from scipy.optimize import minimize as _scipy_minimize

from .errors import BracketError, DomainError, NumericError

_EPS = 1e-16
_FPMIN = 1e-300
_MAX_ITER = 500


def log_gamma(x: float) -> float:
    """Natural log of the gamma function for x > 0."""
    if not (x > 0.0) or math.isinf(x):
        raise DomainError(f"log_gamma requires finite x > 0, got {x!r}")
    return math.lgamma(x)


def _gamma_series_core(alpha: float, x: float) -> float:
    # Power-series factor for the lower integral; valid for x < alpha + 1.
    # gamma(alpha, x) = core * exp(alpha ln x - x); the core stays moderate
    # even when gamma or Gamma(alpha) would overflow a double.
    term = 1.0 / alpha
    total = term
    denom = alpha
    for _ in range(_MAX_ITER):
        denom += 1.0
        term *= x / denom
        total += term
        if abs(term) < abs(total) * _EPS:
            return total
    raise NumericError(f"gamma series failed to converge (alpha={alpha}, x={x})")


def _gamma_cf_core(alpha: float, x: float) -> float:
    # Continued-fraction factor for the upper integral by modified Lentz;
    # valid for x >= alpha + 1.  Gamma(alpha, x) = core * exp(alpha ln x - x).
    b = x + 1.0 - alpha
    c = 1.0 / _FPMIN
    d = 1.0 / b
    h = d
    for i in range(1, _MAX_ITER + 1):
        an = -i * (i - alpha)
        b += 2.0
        d = an * d + b
        if abs(d) < _FPMIN:
            d = _FPMIN
        c = b + an / c
        if abs(c) < _FPMIN:
            c = _FPMIN
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            return h
    raise NumericError(f"gamma continued fraction failed to converge (alpha={alpha}, x={x})")


def _check_gamma_args(alpha: float, x: float) -> None:
    if not (alpha > 0.0) or math.isinf(alpha):
        raise DomainError(f"incomplete gamma requires finite alpha > 0, got {alpha!r}")
    if not (x >= 0.0):
        raise DomainError(f"incomplete gamma requires x >= 0, got {x!r}")


def gamma_lower(alpha: float, x: float) -> float:
    """Non-normalized lower incomplete gamma: integral of t^(alpha-1) e^-t over (0, x).

    Assembled in log space so that values representable as doubles come out
    finite even when Gamma(alpha) itself would overflow (alpha beyond ~171).
    """
    _check_gamma_args(alpha, x)
    if x == 0.0:
        return 0.0
    log_pre = alpha * math.log(x) - x
    if x < alpha + 1.0:
        return math.exp(log_pre + math.log(_gamma_series_core(alpha, x)))
    log_full = math.lgamma(alpha)
    q = math.exp(log_pre + math.log(_gamma_cf_core(alpha, x)) - log_full)
    return (1.0 - q) * math.exp(log_full)


def gamma_upper(alpha: float, x: float) -> float:
    """Non-normalized upper incomplete gamma: integral of t^(alpha-1) e^-t over (x, inf)."""
    _check_gamma_args(alpha, x)
    if x == 0.0:
        return math.exp(math.lgamma(alpha))
    log_pre = alpha * math.log(x) - x
    if x >= alpha + 1.0:
        return math.exp(log_pre + math.log(_gamma_cf_core(alpha, x)))
    log_full = math.lgamma(alpha)
    p = math.exp(log_pre + math.log(_gamma_series_core(alpha, x)) - log_full)
    return (1.0 - p) * math.exp(log_full)


def gamma_lower_reg(alpha: float, x: float) -> float:
    """Regularized lower incomplete gamma P(alpha, x), always within [0, 1].

    Stays finite at alpha where the non-normalized integral overflows doubles.
    """
    _check_gamma_args(alpha, x)
    if x == 0.0:
        return 0.0
    log_pre = alpha * math.log(x) - x - math.lgamma(alpha)
    if x < alpha + 1.0:
        return math.exp(log_pre + math.log(_gamma_series_core(alpha, x)))
    return 1.0 - math.exp(log_pre + math.log(_gamma_cf_core(alpha, x)))


def gamma_upper_reg(alpha: float, x: float) -> float:
    """Regularized upper incomplete gamma Q(alpha, x), always within [0, 1]."""
    _check_gamma_args(alpha, x)
    if x == 0.0:
        return 1.0
    log_pre = alpha * math.log(x) - x - math.lgamma(alpha)
    if x >= alpha + 1.0:
        return math.exp(log_pre + math.log(_gamma_cf_core(alpha, x)))
    return 1.0 - math.exp(log_pre + math.log(_gamma_series_core(alpha, x)))


def find_root(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    tol: float = 1e-12,
    max_iter: int = 200,
) -> float:
    """Root of f on [lo, hi] by bisection with secant acceleration.

    Requires a sign change over the bracket (an endpoint with f == 0 counts).
    Stops once the bracket width drops below ``tol``; the bracket is halved at
    least every other step, so convergence is guaranteed.
    """
    if not (lo < hi):
        raise DomainError(f"invalid bracket [{lo}, {hi}]")
    if not (tol > 0.0):
        raise DomainError("tol must be positive")
    flo = f(lo)
    fhi = f(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if (flo > 0.0) == (fhi > 0.0):
        raise BracketError(f"no sign change on [{lo}, {hi}]: f(lo)={flo}, f(hi)={fhi}")
    use_secant = True
    for _ in range(max_iter):
        if hi - lo <= tol:
            break
        mid = 0.5 * (lo + hi)
        if use_secant and fhi != flo:
            cand = (lo * fhi - hi * flo) / (fhi - flo)
            # Keep the secant step only when it lands safely inside the bracket.
            if not (lo + 0.01 * (hi - lo) < cand < hi - 0.01 * (hi - lo)):
                cand = mid
        else:
            cand = mid
        use_secant = not use_secant
        fc = f(cand)
        if fc == 0.0:
            return cand
        if (fc > 0.0) == (flo > 0.0):
            lo, flo = cand, fc
        else:
            hi, fhi = cand, fc
    return 0.5 * (lo + hi)


def minimize(
    f: Callable[[Sequence[float]], float],
    start: Sequence[float],
    bounds: Sequence[tuple[float, float]] | None = None,
    tol: float = 1e-10,
) -> np.ndarray:
    """Derivative-free simplex descent from ``start``, deterministic, bounds by clipping.

    Restarts the simplex from its own optimum until the objective stops
    improving, which guards against premature shrinkage.  The result never
    has a larger objective than the (clipped) start point.
    """
    x0 = np.asarray(start, dtype=float)
    if bounds is not None:
        lob = np.array([b[0] for b in bounds])
        hib = np.array([b[1] for b in bounds])
        x0 = np.clip(x0, lob, hib)
    best_x = x0
    best_f = f(x0)
    for _ in range(4):
        res = _scipy_minimize(
            f,
            best_x,
            method="Nelder-Mead",
            bounds=bounds,
            options={"xatol": tol, "fatol": tol, "maxiter": 2000},
        )
        if res.fun < best_f - 1e-15:
            best_x, best_f = res.x, res.fun
        else:
            if res.fun <= best_f:
                best_x, best_f = res.x, res.fun
            break
    best_x = np.asarray(best_x, dtype=float)
    if bounds is not None:
        # The simplex solver clips evaluation points but can report a vertex
        # slightly outside the box; the contract promises an in-bounds result.
        best_x = np.clip(best_x, lob, hib)
    return best_x


def least_squares(
    residuals: Callable[[Sequence[float]], np.ndarray],
    start: Sequence[float],
    bounds: Sequence[tuple[float, float]] | None = None,
    tol: float = 1e-12,
) -> np.ndarray:
    """Bounded nonlinear least squares via a trust-region solver.

    ``residuals`` maps a parameter vector to a residual vector; the result
    minimizes the residual sum of squares and always lies inside ``bounds``.
    Curved valleys that stall a simplex are handled well here, which is why
    the cdf fitters use this entry point instead of ``minimize``.
    """
    x0 = np.asarray(start, dtype=float)
    if bounds is not None:
        lob = np.array([b[0] for b in bounds])
        hib = np.array([b[1] for b in bounds])
        x0 = np.clip(x0, lob, hib)
        box = (lob, hib)
    else:
        box = (-np.inf, np.inf)
    tol = max(tol, 1e-14)
    res = _scipy_least_squares(
        residuals, x0, bounds=box, xtol=tol, ftol=tol, gtol=tol, max_nfev=10_000
    )
    out = np.asarray(res.x, dtype=float)
    if bounds is not None:
        out = np.clip(out, lob, hib)
    return out


class QuadResult(NamedTuple):
    value: float
    err_estimate: float
    evaluations: int


def integrate(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    tol: float = 1e-10,
    breakpoints: Sequence[float] = (),
) -> QuadResult:
    """Adaptive quadrature of f over (lo, hi); hi may be math.inf.

    The interval is split at the supplied interior breakpoints (known kinks
    or jumps) and each piece is integrated adaptively; a semi-infinite tail
    piece is handled by the integrator's variable substitution.
    """
    if not (tol > 0.0):
        raise DomainError("tol must be positive")
    if math.isinf(lo):
        raise DomainError("lower limit must be finite")
    if not (lo < hi):
        raise DomainError(f"invalid interval [{lo}, {hi}]")
    cuts = sorted(b for b in breakpoints if lo < b < hi)
    edges = [lo, *cuts, hi]
    value = 0.0
    err = 0.0
    evals = 0
    for a, b in zip(edges[:-1], edges[1:]):
        v, e, info = _scipy_quad(f, a, b, epsabs=tol, epsrel=tol, limit=200, full_output=1)[:3]
        value += v
        err += e
        evals += info["neval"]
    return QuadResult(value, err, evals)
