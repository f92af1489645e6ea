"""Throughput optimization: the best mean photon number per distance,
the maximum operating range, and rate-vs-distance curves.

S(mu) is treated as unimodal on the search bracket (a single stationary
point); a fixed 101-point pre-scan guards the assumption and falls back
to grid-argmax plus local refinement when several local maxima appear.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .params import Scenario, SourceKind, SystemConfig
from .secrecy import LeakageModel, SecrecyPoint, secrecy_capacity

__all__ = [
    "CurvePoint",
    "RateCurve",
    "RangeResult",
    "NoCapacityError",
    "MU_BRACKET",
    "optimal_mu",
    "max_range",
    "rate_curve",
    "default_distance_grid",
]

MU_BRACKET = (1e-4, 3.0)   # below: overhead-dominated; above: nu-dominated
_PRESCAN_POINTS = 101
_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0
_INV_PHI2 = (3.0 - math.sqrt(5.0)) / 2.0


class NoCapacityError(RuntimeError):
    """No parameter choice yields positive secrecy capacity."""


def _golden_section(f, lo: float, hi: float, tol: float) -> float:
    """Maximize a unimodal f on [lo, hi] to absolute tolerance tol."""
    a, b = lo, hi
    h = b - a
    c = a + _INV_PHI2 * h
    d = a + _INV_PHI * h
    fc, fd = f(c), f(d)
    while h > tol:
        h *= _INV_PHI
        if fc > fd:
            b, d, fd = d, c, fc
            c = a + _INV_PHI2 * h
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INV_PHI * h
            fd = f(d)
    return (a + b) / 2.0


def optimal_mu(config: SystemConfig, scenario: Scenario,
               model: LeakageModel,
               bracket: tuple[float, float] = MU_BRACKET,
               tol: float = 1e-6) -> tuple[float, float]:
    """Mean photon number maximizing S for a weak coherent source, and
    the capacity there.  S_opt < 0 signals that no positive-capacity mu
    exists on the bracket.
    """
    if config.source.kind is not SourceKind.WEAK_COHERENT:
        raise ValueError("mu optimization applies to weak coherent "
                         "sources only")

    def S(mu: float) -> float:
        return secrecy_capacity(config, scenario, mu, model).capacity_S

    lo, hi = bracket
    step = (hi - lo) / (_PRESCAN_POINTS - 1)
    grid = [lo + i * step for i in range(_PRESCAN_POINTS)]
    values = [S(mu) for mu in grid]

    best = max(range(_PRESCAN_POINTS), key=values.__getitem__)
    maxima = sum(
        1 for i in range(1, _PRESCAN_POINTS - 1)
        if values[i] > values[i - 1] and values[i] > values[i + 1])
    # >1 interior maxima would break golden section on the full
    # bracket; both paths refine around the grid argmax, which is safe
    # either way
    sub_lo = grid[max(best - 1, 0)]
    sub_hi = grid[min(best + 1, _PRESCAN_POINTS - 1)]
    mu_opt = _golden_section(S, sub_lo, sub_hi, tol)
    s_opt = S(mu_opt)
    if values[best] > s_opt:
        mu_opt, s_opt = grid[best], values[best]
    return mu_opt, s_opt


def _capacity_at(config: SystemConfig, km: float, scenario: Scenario,
                 model: LeakageModel) -> SecrecyPoint:
    cfg = config.with_fiber_length(km)
    if config.source.kind is SourceKind.WEAK_COHERENT:
        mu, _ = optimal_mu(cfg, scenario, model)
    else:
        mu = 1.0
    return secrecy_capacity(cfg, scenario, mu, model)


@dataclass(frozen=True)
class RangeResult:
    km: float
    saturated: bool   # S still positive at the search ceiling

    def __float__(self) -> float:
        return self.km


def max_range(config: SystemConfig, scenario: Scenario,
              model: LeakageModel, tol_km: float = 0.01,
              ceiling_km: float = 1000.0) -> RangeResult:
    """Largest fiber length with positive secrecy capacity, bisected to
    tol_km.  If S > 0 even at ceiling_km (e.g. a lossless idealized
    link), returns the ceiling with saturated=True."""
    if _capacity_at(config, 0.0, scenario, model).capacity_S <= 0:
        raise NoCapacityError("secrecy capacity non-positive at zero "
                              "fiber length")
    if _capacity_at(config, ceiling_km, scenario, model).capacity_S > 0:
        return RangeResult(ceiling_km, saturated=True)
    lo, hi = 0.0, ceiling_km
    while hi - lo > tol_km:
        mid = (lo + hi) / 2.0
        if _capacity_at(config, mid, scenario, model).capacity_S > 0:
            lo = mid
        else:
            hi = mid
    return RangeResult(lo, saturated=False)


@dataclass(frozen=True)
class CurvePoint:
    L_km: float
    alpha: float
    mu: float
    S: float
    R: float
    error: str | None = None


@dataclass(frozen=True)
class RateCurve:
    points: tuple[CurvePoint, ...]
    config_digest: str


def default_distance_grid(max_km: float = 60.0,
                          step_km: float = 0.5) -> list[float]:
    n = int(round(max_km / step_km))
    return [round(i * step_km, 9) for i in range(n + 1)]


def rate_curve(config: SystemConfig, scenario: Scenario,
               distances: list[float], model: LeakageModel) -> RateCurve:
    """One capacity/rate point per distance; weak-coherent sources use
    the per-distance optimal mu.  A failure at one distance marks that
    point instead of aborting the curve."""
    if any(b <= a for a, b in zip(distances, distances[1:])):
        raise ValueError("distances must be strictly increasing")
    points = []
    for km in distances:
        try:
            pt = _capacity_at(config, km, scenario, model)
            points.append(CurvePoint(km, pt.alpha, pt.mu_used,
                                     pt.capacity_S, pt.rate_R))
        except Exception as exc:  # constraint violations etc.
            points.append(CurvePoint(km, float("nan"), float("nan"),
                                     float("nan"), float("nan"), str(exc)))
    return RateCurve(tuple(points), config.digest())
