"""Channel transmission, Poisson photon statistics, and the expected
size and error content of the sifted string for both source types.

All quantities here are expectations over an m-pulse transmission; the
Monte-Carlo counterpart lives in the protocol module.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .params import ChannelSpec, SourceKind, SystemConfig

__all__ = [
    "SiftStats",
    "transmission_probability",
    "psi_geq",
    "expected_sift_stats",
]


@dataclass(frozen=True)
class SiftStats:
    """Expected sifted-string statistics for one m-pulse block."""

    expected_sifted_n: float       # bits
    expected_errors_eT: float      # bits
    detection_prob_per_pulse: float

    def __post_init__(self):
        if not (0.0 <= self.expected_errors_eT <= self.expected_sifted_n):
            raise ValueError("expected errors must lie in [0, n]")
        if not (0.0 <= self.detection_prob_per_pulse <= 1.0):
            raise ValueError("detection probability must lie in [0,1]")

    @property
    def error_fraction(self) -> float:
        if self.expected_sifted_n == 0:
            return 0.0
        return self.expected_errors_eT / self.expected_sifted_n


def transmission_probability(channel: ChannelSpec) -> float:
    """Probability that a photon entering the channel reaches the
    detector optics: alpha = 10^-(A*L + kappa)/10."""
    db = channel.attenuation_A * channel.fiber_length_km + channel.bulk_loss_kappa
    return 10.0 ** (-db / 10.0)


def psi_geq(k: int, X: float) -> float:
    """Probability that a Poisson(X) pulse carries at least k photons,
    for k in {1, 2}.

    >>> psi_geq(1, 0.0)
    0.0
    """
    if X < 0:
        raise ValueError("X must be >= 0")
    if k == 1:
        return -math.expm1(-X)
    if k == 2:
        return -math.expm1(-X) - X * math.exp(-X)
    raise ValueError("k must be 1 or 2")


def expected_sift_stats(config: SystemConfig, exact: bool = False) -> SiftStats:
    """Expected sifted length n and error count e_T for one block.

    Weak coherent source:  n = (m/2)[psi_{>=1}(eta*mu*alpha) + r_d],
                           e_T = (m/2)[psi_{>=1}(eta*mu*alpha)*r_c + r_d/2].
    Single photon source:  n = (m/2)(eta*alpha + r_d),
                           e_T = (m/2)(eta*alpha*r_c + r_d/2),
    independent of mu.  These are the r_d << 1 simplifications; with
    exact=True dark counts are only credited on pulses with no signal
    detection, i.e. the r_d terms gain a (1 - p_signal) factor.
    """
    alpha = transmission_probability(config.channel)
    eta = config.detector.efficiency_eta
    r_d = config.detector.dark_count_rd
    r_c = config.channel.intrinsic_error_rc
    m = config.block.raw_block_m

    if config.source.kind is SourceKind.WEAK_COHERENT:
        p_sig = psi_geq(1, eta * config.source.mu * alpha)
    else:
        p_sig = eta * alpha

    dark_weight = (1.0 - p_sig) if exact else 1.0
    p_detect = p_sig + dark_weight * r_d
    n = 0.5 * m * p_detect
    e_T = 0.5 * m * (p_sig * r_c + dark_weight * r_d / 2.0)
    return SiftStats(expected_sifted_n=n, expected_errors_eT=e_T,
                     detection_prob_per_pulse=min(p_detect, 1.0))
