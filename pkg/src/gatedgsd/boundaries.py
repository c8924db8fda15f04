"""Alpha-spending functions and group-sequential efficacy boundaries.

Boundaries are solved look by look: the sub-density of the underlying
Brownian-motion statistic is propagated on a quadrature grid restricted to
the continuation region, and each critical value is the root of
"incremental crossing probability equals incremental alpha spend".
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy.special import erfc
from scipy.stats import multivariate_normal

from .numerics import find_root, gauss_grid, norm_cdf, norm_pdf, norm_quantile

__all__ = [
    "SpendingKind",
    "SpendingFunction",
    "BoundarySet",
    "SpendingError",
    "spend",
    "compute_boundaries",
    "crossing_probability",
    "crossing_probability_mvn",
    "cached_boundaries",
]

# Grid resolution: >= 6.5 sd of the running statistic, enough nodes that
# doubling them moves critical values by well under 1e-4.
_GRID_NODES = 320
_GRID_SD = 6.5
_Z_CAP = 12.0  # saturate instead of chasing underflowing spends


class SpendingError(ValueError):
    """Raised for infeasible (non-increasing) cumulative spend."""


class SpendingKind(Enum):
    LAN_DEMETS_OBF = "lan_demets_obf"
    POCOCK_LIKE = "pocock_like"
    TABULATED = "tabulated"


@dataclass(frozen=True)
class SpendingFunction:
    """Cumulative one-sided alpha spend s(t; alpha) over information time."""

    kind: SpendingKind = SpendingKind.LAN_DEMETS_OBF
    # For TABULATED: cumulative spend fractions (of alpha) per look.
    table: Optional[Tuple[float, ...]] = None

    def __call__(self, alpha_total: float, t: float, look: Optional[int] = None) -> float:
        return spend(self, alpha_total, t, look)


def spend(fn: SpendingFunction, alpha_total: float, t: float, look: Optional[int] = None) -> float:
    """Cumulative alpha spent at information fraction t."""
    if not 0.0 < alpha_total < 0.5:
        raise ValueError(f"alpha_total must be in (0, 0.5), got {alpha_total}")
    if t <= 0.0:
        raise ValueError(f"information fraction must be positive, got {t}")
    t = min(t, 1.0)
    if fn.kind is SpendingKind.LAN_DEMETS_OBF:
        if t >= 1.0:
            return alpha_total
        return 2.0 * (1.0 - norm_cdf(norm_quantile(1.0 - alpha_total / 2.0) / math.sqrt(t)))
    if fn.kind is SpendingKind.POCOCK_LIKE:
        return alpha_total * math.log(1.0 + (math.e - 1.0) * t)
    if fn.kind is SpendingKind.TABULATED:
        if fn.table is None or look is None:
            raise ValueError("tabulated spending needs a table and a look index")
        return alpha_total * fn.table[look]
    raise ValueError(f"unknown spending kind {fn.kind}")


@dataclass(frozen=True)
class BoundarySet:
    """Z-scale efficacy boundaries c_k with their nominal p-value forms."""

    fractions: Tuple[float, ...]
    z_bounds: Tuple[float, ...]
    nominal_p: Tuple[float, ...]
    alpha_total: float
    spending: SpendingFunction = field(default_factory=SpendingFunction)

    def __len__(self) -> int:
        return len(self.fractions)


def _validate_fractions(fractions: Sequence[float]) -> Tuple[float, ...]:
    fr = tuple(float(t) for t in fractions)
    if not fr:
        raise ValueError("at least one information fraction is required")
    if any(t <= 0.0 or t > 1.0 for t in fr):
        raise ValueError(f"fractions must lie in (0, 1]: {fr}")
    if any(b <= a for a, b in zip(fr, fr[1:])):
        raise ValueError(f"fractions must be strictly increasing: {fr}")
    return fr


def compute_boundaries(
    alpha_total: float,
    fractions: Sequence[float],
    fn: SpendingFunction = SpendingFunction(),
    grid_nodes: int = _GRID_NODES,
) -> BoundarySet:
    """Solve the z-boundaries that realize the spending function.

    Works on the S-scale (S_k = sqrt(t_k) Z_k has independent increments).
    For each look the critical value is found with a bracketed root search;
    the continuation sub-density is then advanced by convolution with the
    increment normal density.
    """
    fr = _validate_fractions(fractions)
    spent_prev = 0.0
    grid = None
    density = None  # sub-density values on grid.points
    z_bounds = []
    for k, t in enumerate(fr):
        spent = spend(fn, alpha_total, t, look=k)
        inc = spent - spent_prev
        if inc < -1e-15:
            raise SpendingError(
                f"cumulative spend decreases at look {k + 1}: {spent} < {spent_prev}"
            )
        inc = max(inc, 0.0)
        sd_k = math.sqrt(t)
        if k == 0:
            def exceed(b, _s=sd_k):
                return 1.0 - norm_cdf(b / _s)
        else:
            sigma = math.sqrt(t - fr[k - 1])
            pts, wts, dens = grid.points, grid.weights, density

            def exceed(b, _p=pts, _w=wts, _d=dens, _s=sigma):
                # P(S_k >= b | S_{k-1} = p), integrated over the sub-density.
                tail = 0.5 * erfc((b - _p) / (_s * math.sqrt(2.0)))
                return float(np.sum(_w * _d * tail))

        if exceed(_Z_CAP * sd_k) >= inc:
            b_k = _Z_CAP * sd_k
        else:
            b_k = find_root(lambda b: exceed(b) - inc, -_Z_CAP * sd_k, _Z_CAP * sd_k, tol=1e-10)
        z_bounds.append(b_k / sd_k)
        if k < len(fr) - 1:
            new_grid = gauss_grid(-_GRID_SD * sd_k, b_k, grid_nodes)
            if k == 0:
                new_density = norm_pdf(new_grid.points / sd_k) / sd_k
            else:
                sigma = math.sqrt(t - fr[k - 1])
                diff = (new_grid.points[:, None] - grid.points[None, :]) / sigma
                kernel = norm_pdf(diff) / sigma
                new_density = kernel @ (grid.weights * density)
            grid, density = new_grid, new_density
        spent_prev = spent
    nominal = tuple(1.0 - norm_cdf(c) for c in z_bounds)
    return BoundarySet(
        fractions=fr,
        z_bounds=tuple(z_bounds),
        nominal_p=nominal,
        alpha_total=alpha_total,
        spending=fn,
    )


def crossing_probability(bounds: BoundarySet, grid_nodes: int = 480) -> float:
    """P(Z_k >= c_k for some k) under H0.

    Forward pass written independently of compute_boundaries: it works on the
    Z scale with the Markov conditional Z_{k+1} | Z_k = r z + s N(0,1),
    r = sqrt(t_k / t_{k+1}), s = sqrt(1 - r^2), marching the continuation
    density over a Gauss grid below each boundary. The boundary solver and
    this integrator can therefore certify each other via round-trips.
    """
    fr = bounds.fractions
    cb = [min(c, 38.0) for c in bounds.z_bounds]
    if len(bounds) == 1:
        return 1.0 - norm_cdf(cb[0])
    lo = -9.0
    grid = gauss_grid(lo, cb[0], grid_nodes)
    density = norm_pdf(grid.points)
    for k in range(1, len(bounds)):
        r = math.sqrt(fr[k - 1] / fr[k])
        s = math.sqrt(1.0 - r * r)
        new_grid = gauss_grid(lo, cb[k], grid_nodes)
        kernel = norm_pdf((new_grid.points[:, None] - r * grid.points[None, :]) / s) / s
        density = kernel @ (grid.weights * density)
        grid = new_grid
    return float(1.0 - np.sum(grid.weights * density))


def crossing_probability_mvn(bounds: BoundarySet, abseps: float = 1e-8) -> float:
    """Same quantity via the multivariate-normal CDF over the canonical
    correlation Cov(Z_i, Z_j) = sqrt(t_i / t_j). Slow but a third,
    library-backed route used to certify the other two in tests.
    """
    k = len(bounds)
    if k == 1:
        return 1.0 - norm_cdf(bounds.z_bounds[0])
    fr = np.asarray(bounds.fractions)
    cov = np.sqrt(np.minimum.outer(fr, fr) / np.maximum.outer(fr, fr))
    upper = np.minimum(np.asarray(bounds.z_bounds), 38.0)
    p_none = multivariate_normal.cdf(
        upper, mean=np.zeros(k), cov=cov, allow_singular=True,
        maxpts=2_000_000 * k, abseps=abseps, releps=0.0)
    return float(1.0 - p_none)


@lru_cache(maxsize=8192)
def cached_boundaries(alpha_total: float, fractions: Tuple[float, ...], kind: SpendingKind) -> BoundarySet:
    """Memoized front end for the simulation engine (alphas repeat heavily)."""
    return compute_boundaries(alpha_total, fractions, SpendingFunction(kind=kind))
