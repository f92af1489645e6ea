"""Classical computational-load bound and sustained-rate arithmetic."""

import math

import pytest

from qkdsim.loadmodel import (LoadBreakdown, computation_rate,
                              computational_load, default_n2_total,
                              iteration_counts)
from qkdsim.params import BlockSpec, ChannelSpec, DetectorSpec, Scenario, \
    SecurityParams, SourceKind, SourceSpec, SystemConfig
from qkdsim.protocol import run_session
from qkdsim.secrecy import LeakageModel


def test_iteration_count_reference_point():
    n1, trajectory = iteration_counts(2000.0, 0.5)
    assert n1 == 8
    assert trajectory[0] == 2000.0
    decay = 1.0 - math.exp(-0.5) * math.sinh(0.5) / 0.5
    assert trajectory[1] == pytest.approx(2000.0 * decay)
    assert len(trajectory) == n1 + 1
    # the loop stops once the block count would drop to <= 2
    assert math.ceil(trajectory[-1] / 0.5) <= 2
    assert math.ceil(trajectory[-2] / 0.5) > 2


def test_iteration_counts_decrease_with_larger_blocks():
    n1_small, _ = iteration_counts(1000.0, 0.25)
    n1_large, _ = iteration_counts(1000.0, 1.0)
    assert n1_small > 0 and n1_large > 0
    with pytest.raises(ValueError):
        iteration_counts(0.0, 0.5)
    with pytest.raises(ValueError):
        iteration_counts(10.0, -1.0)


def test_load_terms_match_the_documented_formula():
    block = BlockSpec()          # m = 2e8, w = 64, overhead 1e6
    sec = SecurityParams()       # g = 30, rho = 0.5
    n, e0, n2_total = 200_000, 2000.0, 33
    load = computational_load(block, sec, n, e0, n2_total)
    n1, _ = iteration_counts(e0, sec.rho)

    assert load.overhead_LB0 == 1e6
    assert load.sifting_term == pytest.approx(
        (50 + 220 / 30) * n * (1 + math.log2(2e8)), rel=1e-12)
    bracket = (200 + 25 * n1 + 12.5 * (1 - math.exp(-1.0)) * n1
               + 25 * 0.5 + 37.5 * n2_total + 43 / 64 + 220 / 30 + 110 / 30)
    assert load.ec_bracket_term == pytest.approx(bracket * n, rel=1e-12)
    assert load.quadratic_term == pytest.approx(46 * n * n / 4096, rel=1e-12)
    assert load.total_LB == pytest.approx(
        1e6 + load.sifting_term + load.ec_bracket_term + load.quadratic_term)


def test_quadratic_term_dominates_large_blocks():
    load = computational_load(BlockSpec(), SecurityParams(), 200_000,
                              2000.0, 33)
    assert load.quadratic_term > 0.3 * load.total_LB


def test_computation_rate_scales_inversely_with_block_time():
    load = LoadBreakdown(1e6, 1e8, 1e8, 4e8, 8, 33)
    assert computation_rate(load, 200_000_000, 1e-6) == pytest.approx(
        load.total_LB / 200.0)
    assert computation_rate(load, 200_000_000, 2e-6) == pytest.approx(
        load.total_LB / 400.0)
    with pytest.raises(ValueError):
        computation_rate(load, 0, 1e-6)


def test_default_validation_iteration_total():
    assert default_n2_total(SecurityParams()) == 33
    assert default_n2_total(SecurityParams(n2_required=10),
                            measured_failures=5) == 15


def test_simulated_session_respects_the_iteration_model():
    # the analytic model budgets N1 reconciliation iterations computed
    # from the initial error estimate; a real session uses exactly the
    # modeled count, and its validation phase fixes precisely the
    # residual errors reconciliation left behind
    cfg = SystemConfig(
        source=SourceSpec(kind=SourceKind.SINGLE_PHOTON, mu=0.0,
                          pulse_period_tau=2e-4),
        channel=ChannelSpec(fiber_length_km=40.0),
        block=BlockSpec(raw_block_m=1 << 20))
    report = run_session(cfg, Scenario.ATTENUATION_INTACT, LeakageModel(),
                         2)
    led = report.ledger
    e0 = report.qber_observed * (report.sifted_n
                                 - round(0.05 * report.sifted_n))
    assert e0 > 0
    n1, _ = iteration_counts(e0, cfg.security.rho)
    assert len(led.ec_iterations) == n1
    ec_fixed = sum(found for _, found in led.ec_iterations)
    assert ec_fixed + led.validation_failures == report.errors_corrected
    assert led.validation_passes >= cfg.security.n2_required
