"""Privacy-amplification compression, the leakage subtraction ledger,
secrecy capacity S, the effective rate R = S/tau, and the information
bounds that hold for the final key.

Capacity is defined per transmitted pulse: S = L/m where L is the final
key length and m the raw block size.  A block yields secret key iff
S > 0.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass

from .params import (Scenario, SecurityParams, SourceKind, SystemConfig,
                     Y_BOUND_ELIMINATED, Y_BOUND_INTACT)
from .photonics import SiftStats, expected_sift_stats, psi_geq, \
    transmission_probability

__all__ = [
    "LeakageKind",
    "LeakageModel",
    "PrivacyAmpBudget",
    "SecrecyPoint",
    "BoundsReport",
    "ConstraintError",
    "binary_entropy",
    "nu_max",
    "leakage_factors",
    "secrecy_capacity",
    "final_key_length",
    "secrecy_bounds_report",
]

_SQRT2 = math.sqrt(2.0)


class ConstraintError(ValueError):
    """A multi-photon compression constraint is violated."""


class LeakageKind(enum.Enum):
    ANALYTIC_SHANNON = "analytic_shannon"
    TRANSCRIPT_MEASURED = "transcript_measured"
    CONSTANT_FACTORS = "constant_factors"


@dataclass(frozen=True)
class LeakageModel:
    """How the reconciliation (q = Q*e_T) and side-information
    (t = T*e_T) leak terms are obtained.

    The closed forms for Q and T are intentionally pluggable: the
    analytic mode charges the Shannon-deficit reconciliation cost, the
    transcript mode counts actually-disclosed parity bits from a
    simulated session, and the constant mode pins both factors.
    epsilon is carried for a future exact T expression and is unused.
    """

    kind: LeakageKind = LeakageKind.ANALYTIC_SHANNON
    Q: float = 0.0
    T: float = 1.0
    epsilon: float = 0.0

    def __post_init__(self):
        if self.Q < 0 or self.T < 0:
            raise ValueError("Q and T must be non-negative")


@dataclass(frozen=True)
class PrivacyAmpBudget:
    """Subtraction ledger determining the final key length
    L = n - (e_T + q + t + nu) - (a + g_pa)."""

    n: float
    e_T: float = 0.0
    q: float = 0.0
    t: float = 0.0
    nu: float = 0.0
    g_pa: int = 0
    a: float = 0.0

    def __post_init__(self):
        for name in ("n", "e_T", "q", "t", "nu", "g_pa", "a"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")

    @property
    def raw_length(self) -> float:
        return self.n - (self.e_T + self.q + self.t + self.nu) \
            - (self.a + self.g_pa)

    @property
    def zero_capacity(self) -> bool:
        return self.raw_length <= 0


@dataclass(frozen=True)
class SecrecyPoint:
    capacity_S: float        # secret bits per transmitted pulse
    rate_R: float            # bits per second, max(S,0)/tau
    mu_used: float
    alpha: float
    scenario: Scenario


@dataclass(frozen=True)
class BoundsReport:
    """Security guarantees implied by the g parameters."""

    expected_info_bound: float       # Eve's expected info, bits
    forgery_bound: float             # tag forgery, fresh index
    reuse_forgery_bound: float       # forgery after one observed pair
    equivalence_miss_bound: float    # unequal strings, equal tags
    key_length: int
    category: str = "secrecy in the sense of privacy amplification"


def binary_entropy(p: float) -> float:
    """Shannon entropy of a Bernoulli(p) bit, in bits."""
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must be in [0,1]")
    if p == 0.0 or p == 1.0:
        return 0.0
    return -p * math.log2(p) - (1.0 - p) * math.log2(1.0 - p)


def nu_max(mu: float, config: SystemConfig, scenario: Scenario) -> float:
    """Maximum privacy-amplification compression (bits) charged against
    multi-photon pulses, for a weak coherent source of mean mu.

    Two regimes.  If the eavesdropper can strip the line attenuation,
    y = eta and

        nu = (m/2)[psi_{>=2}(mu)
                   - (1-y)^{-1}(e^{-y mu} - e^{-mu}(1 + mu(1-y)))],

    valid for y > 1 - 1/sqrt(2).  If the attenuation stays in place,
    y = eta*alpha and

        nu = (m/2)[psi_{>=2}(mu)*y + 1
                   - e^{-mu}(sqrt(2) sinh(mu/sqrt(2))
                             + 2 cosh(mu/sqrt(2)) - 1)],

    valid for y < 1 - 2^{-1/3}.  Single-photon sources never emit
    multi-photon pulses, so nu = 0.
    """
    if mu < 0:
        raise ValueError("mu must be >= 0")
    if config.source.kind is SourceKind.SINGLE_PHOTON:
        return 0.0
    m = config.block.raw_block_m
    eta = config.detector.efficiency_eta

    if scenario is Scenario.ATTENUATION_ELIMINATED:
        y = eta
        if y <= Y_BOUND_ELIMINATED:
            raise ConstraintError(
                f"attenuation-eliminated compression requires eta > "
                f"1 - 1/sqrt(2) ~= {Y_BOUND_ELIMINATED:.4f}; got eta = {y}")
        brace = psi_geq(2, mu) - (
            math.exp(-y * mu)
            - math.exp(-mu) * (1.0 + mu * (1.0 - y))
        ) / (1.0 - y)
    else:
        alpha = transmission_probability(config.channel)
        y = eta * alpha
        if y >= Y_BOUND_INTACT:
            raise ConstraintError(
                f"attenuation-intact compression requires eta*alpha < "
                f"1 - 2^(-1/3) ~= {Y_BOUND_INTACT:.4f}; got eta*alpha = {y}")
        brace = psi_geq(2, mu) * y + 1.0 - math.exp(-mu) * (
            _SQRT2 * math.sinh(mu / _SQRT2)
            + 2.0 * math.cosh(mu / _SQRT2) - 1.0)

    nu = 0.5 * m * brace
    if nu < 0.0:
        if nu < -1e-9 * m:
            warnings.warn(
                f"nu_max evaluated negative ({nu:.3g} bits) and was "
                "clamped to 0; likely floating-point cancellation at "
                f"mu={mu}", RuntimeWarning)
        return 0.0
    return nu


def leakage_factors(stats: SiftStats, sec: SecurityParams,
                    model: LeakageModel,
                    transcript=None) -> tuple[float, float]:
    """The (Q, T) pair defining q = Q*e_T and t = T*e_T.

    AnalyticShannon charges total reconciliation disclosure
    x*n*h2(e_T/n); since e_T is subtracted from the key separately,
    q is that total minus e_T.  TranscriptMeasured takes q directly
    from a session ledger's disclosed-parity count.
    """
    e_T = stats.expected_errors_eT
    if model.kind is LeakageKind.CONSTANT_FACTORS:
        return model.Q, model.T
    if model.kind is LeakageKind.TRANSCRIPT_MEASURED:
        if transcript is None:
            raise ValueError("transcript-measured leakage needs a ledger")
        if e_T <= 0:
            return 0.0, model.T
        return transcript.parity_bits_disclosed / e_T, model.T
    # analytic Shannon-deficit model
    if e_T <= 0:
        warnings.warn("no expected errors: reconciliation leak Q set to 0",
                      RuntimeWarning)
        return 0.0, model.T
    n = stats.expected_sifted_n
    q = sec.shannon_deficit_x * n * binary_entropy(e_T / n) - e_T
    return max(q, 0.0) / e_T, model.T


def secrecy_capacity(config: SystemConfig, scenario: Scenario, mu: float,
                     model: LeakageModel,
                     auth_spend_a: float | None = None) -> SecrecyPoint:
    """Secrecy capacity S (secret bits per transmitted pulse) and the
    effective rate R = max(S,0)/tau.

    Weak coherent source:
        S = (1/2)[psi_{>=1}(eta mu alpha)(1 - f r_c)
                  + (1 - f/2) r_d - 2 nu/m] - (g_pa + a)/m,
    single photon source:
        S = (1/2)[eta alpha (1 - f r_c) + (1 - f/2) r_d] - (g_pa + a)/m,
    with f = 1 + Q + T.  Negative S is returned as-is so callers can
    bisect on its sign; only R is clamped at zero.
    """
    alpha = transmission_probability(config.channel)
    eta = config.detector.efficiency_eta
    r_c = config.channel.intrinsic_error_rc
    r_d = config.detector.dark_count_rd
    m = config.block.raw_block_m
    g_pa = config.security.g_pa
    is_wcs = config.source.kind is SourceKind.WEAK_COHERENT

    eff = config.with_mu(mu) if is_wcs else config
    stats = expected_sift_stats(eff)
    Q, T = leakage_factors(stats, config.security, model)
    f = 1.0 + Q + T

    if auth_spend_a is None:
        from .hashing import auth_spend_estimate
        auth_spend_a = auth_spend_estimate(eff)

    if is_wcs:
        psi1 = psi_geq(1, eta * mu * alpha)
        nu_tilde = 2.0 * nu_max(mu, eff, scenario) / m
        S = 0.5 * (psi1 * (1.0 - f * r_c)
                   + (1.0 - f / 2.0) * r_d - nu_tilde)
        mu_used = mu
    else:
        S = 0.5 * (eta * alpha * (1.0 - f * r_c) + (1.0 - f / 2.0) * r_d)
        mu_used = 1.0
    S -= (g_pa + auth_spend_a) / m
    tau = config.source.pulse_period_tau
    return SecrecyPoint(capacity_S=S, rate_R=max(S, 0.0) / tau,
                        mu_used=mu_used, alpha=alpha, scenario=scenario)


def final_key_length(budget: PrivacyAmpBudget) -> int:
    """Final key length: floor of the budget's remaining bits, clamped
    at zero (zero capacity is signalled by budget.zero_capacity)."""
    return max(0, math.floor(budget.raw_length))


def secrecy_bounds_report(sec: SecurityParams, key_len: int) -> BoundsReport:
    """Security bounds for a delivered key: Eve's expected information
    is at most 2^-g_pa/ln 2 bits; tag forgery succeeds with probability
    at most 2^-g_auth (2^{1-g_auth} after one observed message/tag
    pair); the equivalence check misses an unequal pair with
    probability at most 2^-g_EC."""
    if sec.g_pa < 1:
        raise ValueError("g_pa must be >= 1")
    return BoundsReport(
        expected_info_bound=2.0 ** -sec.g_pa / math.log(2.0),
        forgery_bound=2.0 ** -sec.g_auth,
        reuse_forgery_bound=2.0 ** (1 - sec.g_auth),
        equivalence_miss_bound=2.0 ** -sec.g_EC,
        key_length=key_len,
    )
