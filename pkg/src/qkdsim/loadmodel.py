"""Classical computational-load bound per processed block and the
sustained instruction rate it implies.

The reconciliation iteration count uses a Poisson odd-parity decay
model: a block whose error count is odd yields exactly one correction,
so per iteration the error population shrinks by the factor
1 - e^-rho sinh(rho)/rho.  This is a documented stand-in for the exact
iteration statistics, chosen because it reproduces the reference
worked totals at the standard parameter set.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .params import BlockSpec, SecurityParams

__all__ = [
    "LoadBreakdown",
    "iteration_counts",
    "computational_load",
    "computation_rate",
    "default_n2_total",
]


@dataclass(frozen=True)
class LoadBreakdown:
    """Per-term decomposition of the load bound (operations/block)."""

    overhead_LB0: float
    sifting_term: float
    ec_bracket_term: float
    quadratic_term: float
    N1: int
    N2_total: int

    @property
    def total_LB(self) -> float:
        return (self.overhead_LB0 + self.sifting_term
                + self.ec_bracket_term + self.quadratic_term)


def iteration_counts(e0: float, rho: float) -> tuple[int, list[float]]:
    """Error-correction iteration count N1 and the expected error
    trajectory.

    Block count per iteration is J = ceil(e/rho); iterations stop once
    the next J would be <= 2.  Errors decay per iteration by
    1 - e^-rho sinh(rho)/rho (probability a block's error count is
    odd, yielding one correction).
    """
    if e0 <= 0 or rho <= 0:
        raise ValueError("e0 and rho must be positive")
    decay = 1.0 - math.exp(-rho) * math.sinh(rho) / rho
    e = e0
    trajectory = [e0]
    n1 = 0
    while math.ceil(e / rho) > 2:
        e *= decay
        trajectory.append(e)
        n1 += 1
    return n1, trajectory


def default_n2_total(sec: SecurityParams, measured_failures: int = 3) -> int:
    """Total validation iterations: the required consecutive passes
    plus failed iterations (default +3, typical at ~1% residual
    error rates)."""
    return sec.n2_required + measured_failures


def computational_load(block: BlockSpec, sec: SecurityParams, n: int,
                       e0: float, n2_total: int) -> LoadBreakdown:
    """Upper bound on instructions needed to process one raw block:

        L_B <= L_B0
             + (50 + 220/g_auth) n (1 + log2 m)
             + [200 + 25 N1 + 12.5 (1 - e^-2rho) N1 + 25 rho
                + 37.5 N2_total + 43/w + 220/g_auth + 110/g_EC] n
             + 46 n^2 / w^2
    """
    if n <= 0 or e0 <= 0 or n2_total <= 0:
        raise ValueError("n, e0 and n2_total must be positive")
    m = block.raw_block_m
    w = block.machine_word_w
    g_auth = sec.g_auth
    g_ec = sec.g_EC
    rho = sec.rho
    n1, _ = iteration_counts(e0, rho)

    sifting = (50.0 + 220.0 / g_auth) * n * (1.0 + math.log2(m))
    bracket = (200.0 + 25.0 * n1
               + 12.5 * (1.0 - math.exp(-2.0 * rho)) * n1
               + 25.0 * rho + 37.5 * n2_total
               + 43.0 / w + 220.0 / g_auth + 110.0 / g_ec)
    return LoadBreakdown(
        overhead_LB0=float(block.overhead_LB0),
        sifting_term=sifting,
        ec_bracket_term=bracket * n,
        quadratic_term=46.0 * n * n / (w * w),
        N1=n1,
        N2_total=n2_total,
    )


def computation_rate(load: LoadBreakdown, m: int, tau: float) -> float:
    """Sustained instruction rate to keep up with the link: the block
    load divided by the block transmission time m*tau."""
    if m <= 0 or tau <= 0:
        raise ValueError("m and tau must be positive")
    return load.total_LB / (m * tau)
