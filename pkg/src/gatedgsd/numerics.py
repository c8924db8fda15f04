"""Normal distribution helpers, root finding, and quadrature grids.

Self-contained numerical layer for the boundary solver. Everything here is
pure and stateless.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

__all__ = ["Grid", "gauss_grid", "norm_cdf", "norm_pdf", "norm_quantile", "find_root", "BracketError"]

_SQRT2 = math.sqrt(2.0)
_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


class BracketError(ValueError):
    """Raised when a root bracket does not enclose a sign change."""


@dataclass(frozen=True)
class Grid:
    """Fixed quadrature grid: abscissae, weights, and the covered range."""

    points: np.ndarray
    weights: np.ndarray
    lo: float
    hi: float

    def __post_init__(self):
        if len(self.points) != len(self.weights):
            raise ValueError("points and weights must have equal length")
        if np.any(np.diff(self.points) <= 0):
            raise ValueError("points must be strictly increasing")
        if np.any(self.weights <= 0):
            raise ValueError("weights must be positive")


@lru_cache(maxsize=64)
def _leggauss(n: int):
    x, w = np.polynomial.legendre.leggauss(n)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def gauss_grid(lo: float, hi: float, n: int) -> Grid:
    """Gauss-Legendre grid with `n` nodes on [lo, hi]."""
    if hi <= lo:
        raise ValueError(f"empty integration range [{lo}, {hi}]")
    x, w = _leggauss(n)
    half = 0.5 * (hi - lo)
    return Grid(points=half * (x + 1.0) + lo, weights=half * w, lo=lo, hi=hi)


def norm_cdf(x: float) -> float:
    """Standard normal CDF via the complementary error function."""
    return 0.5 * math.erfc(-x / _SQRT2)


def norm_pdf(x):
    return _INV_SQRT_2PI * np.exp(-0.5 * np.square(x))


# Coefficients of Acklam's rational approximation to the normal quantile.
_A = (-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
      1.383577518672690e+02, -3.066479806614716e+01, 2.506628277459239e+00)
_B = (-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
      6.680131188771972e+01, -1.328068155288572e+01)
_C = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
      -2.549732539343734e+00, 4.374664141464968e+00, 2.938163982698783e+00)
_D = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
      3.754408661907416e+00)
_P_LOW = 0.02425


def norm_quantile(p: float) -> float:
    """Inverse standard normal CDF.

    Acklam's rational approximation polished with one Halley step against
    erfc, which brings the result to near machine precision.
    """
    if not 0.0 < p < 1.0:
        raise ValueError(f"quantile argument must lie in (0, 1), got {p}")
    if p < _P_LOW:
        q = math.sqrt(-2.0 * math.log(p))
        x = ((((((_C[0] * q + _C[1]) * q + _C[2]) * q + _C[3]) * q + _C[4]) * q + _C[5])
             / ((((_D[0] * q + _D[1]) * q + _D[2]) * q + _D[3]) * q + 1.0))
    elif p <= 1.0 - _P_LOW:
        q = p - 0.5
        r = q * q
        x = ((((((_A[0] * r + _A[1]) * r + _A[2]) * r + _A[3]) * r + _A[4]) * r + _A[5]) * q
             / (((((_B[0] * r + _B[1]) * r + _B[2]) * r + _B[3]) * r + _B[4]) * r + 1.0))
    else:
        q = math.sqrt(-2.0 * math.log(1.0 - p))
        x = -((((((_C[0] * q + _C[1]) * q + _C[2]) * q + _C[3]) * q + _C[4]) * q + _C[5])
              / ((((_D[0] * q + _D[1]) * q + _D[2]) * q + _D[3]) * q + 1.0))
    # Halley refinement: e = CDF(x) - p, u = e / pdf(x).
    e = 0.5 * math.erfc(-x / _SQRT2) - p
    u = e * math.sqrt(2.0 * math.pi) * math.exp(0.5 * x * x)
    return x - u / (1.0 + 0.5 * x * u)


def find_root(f, lo: float, hi: float, tol: float = 1e-10, max_iter: int = 200) -> float:
    """Root of a continuous function on a sign-changing bracket.

    Bisection with secant acceleration: the secant step is used whenever it
    falls inside the current bracket, otherwise the step falls back to the
    midpoint. Deterministic, and converges for any continuous f with
    f(lo) * f(hi) <= 0.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    flo, fhi = f(lo), f(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if flo * fhi > 0:
        raise BracketError(f"f({lo})={flo} and f({hi})={fhi} have the same sign")
    for _ in range(max_iter):
        if hi - lo <= tol:
            break
        if flo != fhi:
            x = lo - flo * (hi - lo) / (fhi - flo)
            # Keep secant iterates strictly interior to guarantee progress.
            margin = 0.01 * (hi - lo)
            if not (lo + margin < x < hi - margin):
                x = 0.5 * (lo + hi)
        else:
            x = 0.5 * (lo + hi)
        fx = f(x)
        if fx == 0.0:
            return x
        if flo * fx < 0:
            hi, fhi = x, fx
        else:
            lo, flo = x, fx
    return 0.5 * (lo + hi)
