"""Deterministic seeded simulation of one BB84 post-processing block:
quantum exchange, sifting, error correction, validation, equivalence
check, authentication accounting, and privacy amplification.

All randomness derives from a single seed through a fixed draw order,
so identical (config, seed) pairs reproduce sessions bit-for-bit on
either kernel backend.  Shared randomness (the reconciliation shuffle,
validation subsets, hash indices) is modeled as a seed-derived stream
both parties hold; its disclosure does not weaken the protocol.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import backend
from .gf2 import padded_length
from .hashing import (AuthKeyIndex, AuthTag, PAHashParams, equivalence_tag,
                      pa_hash, wc_index_length, wc_tag)
from .params import Scenario, SecurityParams, SourceKind, SystemConfig
from .photonics import transmission_probability
from .secrecy import (LeakageModel, PrivacyAmpBudget, final_key_length,
                      nu_max)

__all__ = [
    "QuantumExchangeRecord",
    "TranscriptLedger",
    "SessionReport",
    "QBERAbortError",
    "SimulationSizeError",
    "SIM_MAX_M",
    "QBER_SAMPLE_FRACTION",
    "QBER_THRESHOLD",
    "simulate_quantum_exchange",
    "sift",
    "error_correct",
    "validate_strings",
    "run_session",
    "dump_transcript",
]

SIM_MAX_M = 1 << 26            # per-pulse arrays beyond this exceed desk RAM
QBER_SAMPLE_FRACTION = 0.05    # sifted bits sacrificed for the error estimate
QBER_THRESHOLD = 0.05          # abort above this observed error rate


class QBERAbortError(RuntimeError):
    """Observed error rate exceeded the abort threshold."""

    def __init__(self, qber_observed: float, threshold: float):
        super().__init__(
            f"observed QBER {qber_observed:.4f} exceeds threshold "
            f"{threshold:.4f}; block discarded")
        self.qber_observed = qber_observed
        self.threshold = threshold


class SimulationSizeError(ValueError):
    """Block size too large for per-pulse simulation."""


@dataclass(frozen=True)
class QuantumExchangeRecord:
    """Raw outcome of transmitting one m-pulse block."""

    alice_bits: np.ndarray
    alice_bases: np.ndarray
    bob_bases: np.ndarray
    detection_indices: np.ndarray   # strictly increasing pulse indices
    detection_bits: np.ndarray      # Bob's measured bit per detection
    detection_dark: np.ndarray      # 1 where the click was dark-only

    @property
    def m(self) -> int:
        return self.alice_bits.size


@dataclass
class TranscriptLedger:
    """Classical-channel accounting for one session.

    Counters reflect the chosen message encodings: Bob announces each
    detection with its pulse index (ceil(log2 m) bits) plus his basis
    bit, and Alice replies one keep/discard bit per detection; with d
    detections those are d*(1+ceil(log2 m)) and d bits, d ~= 2n.
    parity_bits_disclosed counts every parity revealed during error
    correction and validation.
    """

    sift_bits_bob_to_alice: int = 0
    sift_bits_alice_to_bob: int = 0
    parity_bits_disclosed: int = 0
    auth_bits_spent_a: int = 0
    ec_iterations: list = field(default_factory=list)   # (J, errors_found)
    validation_passes: int = 0
    validation_failures: int = 0
    tags: list = field(default_factory=list)
    events: list = field(default_factory=list)          # (phase, dir, bits, tag)

    def record(self, phase: str, direction: str, bits: int,
               tag: AuthTag | None = None) -> None:
        self.events.append(
            (phase, direction, int(bits), tag.hex() if tag else "-"))
        if tag is not None:
            self.tags.append(tag)

    def merge(self, other: "TranscriptLedger") -> None:
        self.sift_bits_bob_to_alice += other.sift_bits_bob_to_alice
        self.sift_bits_alice_to_bob += other.sift_bits_alice_to_bob
        self.parity_bits_disclosed += other.parity_bits_disclosed
        self.auth_bits_spent_a += other.auth_bits_spent_a
        self.ec_iterations.extend(other.ec_iterations)
        self.validation_passes += other.validation_passes
        self.validation_failures += other.validation_failures
        self.tags.extend(other.tags)
        self.events.extend(other.events)


@dataclass(frozen=True)
class SessionReport:
    sifted_n: int
    errors_injected: int
    errors_corrected: int
    equivalence_passed: bool
    final_key_alice: np.ndarray
    final_key_bob: np.ndarray
    budget: PrivacyAmpBudget
    ledger: TranscriptLedger
    qber_observed: float


def _check_sim_size(m: int) -> None:
    if m > SIM_MAX_M:
        raise SimulationSizeError(
            f"simulation supports raw blocks up to 2^26 pulses; got m={m}")


def simulate_quantum_exchange(config: SystemConfig,
                              seed) -> QuantumExchangeRecord:
    """Sample one block of pulses through source, channel, detector and
    (optionally) an intercept-resend eavesdropper.

    Per pulse: photon count Poisson(mu) (weak coherent) or exactly 1
    (single photon); each photon independently reaches the detector and
    fires it with probability eta*alpha, an independent dark count
    fires with probability r_d, and a compatible-basis signal bit flips
    with probability r_c.  Incompatible bases and dark-only clicks
    yield uniform bits.
    """
    m = int(round(config.block.raw_block_m))
    _check_sim_size(m)
    rng = np.random.default_rng(seed)
    alpha = transmission_probability(config.channel)
    eta = config.detector.efficiency_eta

    alice_bits = rng.integers(0, 2, size=m, dtype=np.uint8)
    alice_bases = rng.integers(0, 2, size=m, dtype=np.uint8)
    bob_bases = rng.integers(0, 2, size=m, dtype=np.uint8)

    src_bits, src_bases = alice_bits, alice_bases
    phi = config.attack.eve_intercept_fraction_phi
    if phi > 0.0:
        attacked = rng.random(m) < phi
        eve_bases = rng.integers(0, 2, size=m, dtype=np.uint8)
        eve_rand = rng.integers(0, 2, size=m, dtype=np.uint8)
        eve_bits = np.where(eve_bases == alice_bases, alice_bits, eve_rand)
        src_bits = np.where(attacked, eve_bits, alice_bits).astype(np.uint8)
        src_bases = np.where(attacked, eve_bases, alice_bases).astype(np.uint8)

    p_photon = min(eta * alpha, 1.0)
    if config.source.kind is SourceKind.WEAK_COHERENT:
        photons = rng.poisson(config.source.mu, size=m)
        if p_photon < 1.0:
            p_detect = -np.expm1(np.log1p(-p_photon) * photons)
        else:
            p_detect = (photons > 0).astype(np.float64)
    else:
        p_detect = np.full(m, p_photon)

    u_sig = rng.random(m)
    u_dark = rng.random(m)
    u_err = rng.random(m)
    rand_bits = rng.integers(0, 2, size=m, dtype=np.uint8)

    detected, bob_bits, dark_only = backend.exchange_outcomes(
        src_bits, src_bases, bob_bases, p_detect, u_sig, u_dark, u_err,
        rand_bits, config.detector.dark_count_rd,
        config.channel.intrinsic_error_rc)

    idx = np.flatnonzero(detected)
    return QuantumExchangeRecord(
        alice_bits=alice_bits, alice_bases=alice_bases, bob_bases=bob_bases,
        detection_indices=idx, detection_bits=bob_bits[idx],
        detection_dark=dark_only[idx])


def sift(record: QuantumExchangeRecord
         ) -> tuple[np.ndarray, np.ndarray, TranscriptLedger]:
    """Keep detections measured in the compatible basis; returns both
    parties' aligned sifted strings and the message-size ledger."""
    idx = record.detection_indices
    compatible = record.alice_bases[idx] == record.bob_bases[idx]
    kept = idx[compatible]
    alice_sifted = record.alice_bits[kept].copy()
    bob_sifted = record.detection_bits[compatible].copy()

    d = idx.size
    idx_width = max(1, math.ceil(math.log2(max(record.m, 2))))
    ledger = TranscriptLedger(
        sift_bits_bob_to_alice=d * (1 + idx_width),
        sift_bits_alice_to_bob=d)
    ledger.record("sift", "bob->alice", d * (1 + idx_width))
    ledger.record("sift", "alice->bob", d)
    return alice_sifted, bob_sifted, ledger


def _range_parity(prefix: np.ndarray, start: int, end: int) -> int:
    return int(prefix[end] - prefix[start]) & 1


def error_correct(alice: np.ndarray, bob: np.ndarray, sec: SecurityParams,
                  seed, e0: float
                  ) -> tuple[np.ndarray, np.ndarray, TranscriptLedger]:
    """Interactive parity reconciliation.

    Both strings are shuffled by a shared permutation, split into
    J = ceil(e/rho) blocks, and block parities compared; each
    mismatched block is bisected (all blocks in lockstep, one parity
    per block per halving) down to the single erroneous bit, which Bob
    inverts.  The expected error count decays by 1 - e^-rho sinh(rho)/rho
    per iteration and iterations stop once the next J would be <= 2.
    No inter-iteration reshuffle is applied.
    """
    alice = np.asarray(alice, dtype=np.uint8)
    bob = np.asarray(bob, dtype=np.uint8)
    if alice.size != bob.size:
        raise ValueError("strings must have equal length")
    n = alice.size
    ledger = TranscriptLedger()
    if n == 0 or e0 <= 0:
        return alice.copy(), bob.copy(), ledger

    rng = np.random.default_rng(seed)
    perm = rng.permutation(n)
    a = alice[perm]
    b = bob[perm].copy()
    rho = sec.rho
    decay = 1.0 - math.exp(-rho) * math.sinh(rho) / rho
    e_est = float(e0)

    while math.ceil(e_est / rho) > 2:
        J = min(math.ceil(e_est / rho), n)
        edges = (np.arange(J + 1, dtype=np.int64) * n) // J
        pa = np.concatenate([[0], np.cumsum(a, dtype=np.int64)])
        pb = np.concatenate([[0], np.cumsum(b, dtype=np.int64)])
        par_a = (pa[edges[1:]] - pa[edges[:-1]]) & 1
        par_b = (pb[edges[1:]] - pb[edges[:-1]]) & 1
        ledger.parity_bits_disclosed += int(J)
        ledger.record("ec-parities", "alice->bob", int(J))

        bad = np.flatnonzero(par_a != par_b)
        spans = [(int(edges[i]), int(edges[i + 1])) for i in bad]
        bisect_bits = 0
        while spans:
            done = []
            nxt = []
            for start, end in spans:
                if end - start == 1:
                    done.append(start)
                    continue
                mid = (start + end) // 2
                bisect_bits += 1
                if _range_parity(pa, start, mid) != _range_parity(pb, start, mid):
                    nxt.append((start, mid))
                else:
                    nxt.append((mid, end))
            for pos in done:
                b[pos] ^= 1
            spans = nxt
        ledger.parity_bits_disclosed += bisect_bits
        if bisect_bits:
            ledger.record("ec-bisect", "alice->bob", bisect_bits)
        ledger.ec_iterations.append((int(J), int(bad.size)))
        e_est *= decay

    inv = np.empty(n, dtype=np.int64)
    inv[perm] = np.arange(n)
    return a[inv], b[inv], ledger


def validate_strings(alice: np.ndarray, bob: np.ndarray,
                     sec: SecurityParams, seed
                     ) -> tuple[np.ndarray, np.ndarray, int, int,
                                TranscriptLedger]:
    """Random-subset parity validation: compare parities of shared
    random subsets, bisecting to fix one bit on each mismatch, until
    n2_required consecutive matches occur.  Empty strings pass
    immediately with zero iterations."""
    alice = np.asarray(alice, dtype=np.uint8)
    bob = np.asarray(bob, dtype=np.uint8)
    if alice.size != bob.size:
        raise ValueError("strings must have equal length")
    n = alice.size
    ledger = TranscriptLedger()
    if n == 0:
        return alice.copy(), bob.copy(), 0, 0, ledger

    rng = np.random.default_rng(seed)
    b = bob.copy()
    passes = failures = consecutive = 0
    while consecutive < sec.n2_required:
        mask = rng.integers(0, 2, size=n, dtype=np.uint8).astype(bool)
        ledger.parity_bits_disclosed += 1
        if (int(alice[mask].sum()) & 1) == (int(b[mask].sum()) & 1):
            passes += 1
            consecutive += 1
            continue
        failures += 1
        consecutive = 0
        idxs = np.flatnonzero(mask)
        lo, hi = 0, idxs.size
        while hi - lo > 1:
            mid = (lo + hi) // 2
            ledger.parity_bits_disclosed += 1
            sel = idxs[lo:mid]
            if (int(alice[sel].sum()) & 1) != (int(b[sel].sum()) & 1):
                hi = mid
            else:
                lo = mid
        b[idxs[lo]] ^= 1
    ledger.validation_passes = passes
    ledger.validation_failures = failures
    ledger.record("validate", "both", passes + failures)
    return alice.copy(), b, passes, failures, ledger


def _encode_sift_message(record: QuantumExchangeRecord) -> np.ndarray:
    """Bob's announcement: per detection, the pulse index (MSB-first,
    ceil(log2 m) bits) followed by his basis bit."""
    idx = record.detection_indices
    width = max(1, math.ceil(math.log2(max(record.m, 2))))
    shifts = np.arange(width - 1, -1, -1, dtype=np.int64)
    index_bits = ((idx[:, None] >> shifts) & 1).astype(np.uint8)
    basis_bits = record.bob_bases[idx][:, None]
    return np.concatenate([index_bits, basis_bits], axis=1).ravel()


def _shared_index(rng: np.random.Generator, g: int,
                  c: int) -> tuple[AuthKeyIndex, AuthKeyIndex]:
    """One shared secret index, held by both parties."""
    n = wc_index_length(g, c)
    bits = rng.integers(0, 2, size=n, dtype=np.uint8)
    return AuthKeyIndex(bits, g, c), AuthKeyIndex(bits.copy(), g, c)


def run_session(config: SystemConfig, scenario: Scenario,
                model: LeakageModel, seed: int) -> SessionReport:
    """One full post-processing session; see the module docstring.

    Raises QBERAbortError if the sampled error rate exceeds the
    threshold.  An equivalence-check failure does not raise: the report
    carries equivalence_passed=False and empty keys.
    """
    _check_sim_size(config.block.raw_block_m)
    sec = config.security
    ss = np.random.SeedSequence(seed)
    s_exchange, s_sample, s_ec, s_val, s_auth = ss.spawn(5)

    record = simulate_quantum_exchange(config, s_exchange)
    alice_s, bob_s, ledger = sift(record)
    n0 = alice_s.size

    # sacrificed-sample QBER estimate
    rng_sample = np.random.default_rng(s_sample)
    k = int(round(QBER_SAMPLE_FRACTION * n0))
    if n0 > 0:
        k = max(1, min(k, n0))
        sample = rng_sample.choice(n0, size=k, replace=False)
        qber = float(np.sum(alice_s[sample] != bob_s[sample])) / k
        keep = np.ones(n0, dtype=bool)
        keep[sample] = False
        alice_s, bob_s = alice_s[keep], bob_s[keep]
        ledger.record("qber-sample", "both", 2 * k)
    else:
        qber = 0.0
    if qber > QBER_THRESHOLD:
        raise QBERAbortError(qber, QBER_THRESHOLD)

    errors_injected = int(np.sum(alice_s != bob_s))
    e0 = qber * alice_s.size

    alice_c, bob_c, led_ec = error_correct(alice_s, bob_s, sec, s_ec, e0)
    ledger.merge(led_ec)
    ec_flips = sum(found for _, found in led_ec.ec_iterations)

    alice_v, bob_v, _, failures, led_val = validate_strings(
        alice_c, bob_c, sec, s_val)
    ledger.merge(led_val)
    errors_corrected = ec_flips + failures

    # authentication of the classical messages
    rng_auth = np.random.default_rng(s_auth)
    sift_msg = _encode_sift_message(record)
    d_idx = record.detection_indices
    reply_msg = (record.alice_bases[d_idx]
                 == record.bob_bases[d_idx]).astype(np.uint8)
    auth_spend = 0
    for phase, direction, message, g in (
            ("auth-sift", "bob->alice", sift_msg, sec.g_auth),
            ("auth-reply", "alice->bob", reply_msg, sec.g_auth)):
        c = max(4, message.size)
        idx_s, idx_r = _shared_index(rng_auth, g, c)
        tag = wc_tag(message, idx_s, g)
        if wc_tag(message, idx_r, g) != tag:
            raise AssertionError("shared-index tag mismatch")
        auth_spend += wc_index_length(g, c)
        ledger.record(phase, direction, message.size, tag)

    # equivalence check, one round per direction
    n_ec = alice_v.size
    c_eq = max(4, n_ec)
    equivalence_passed = True
    for direction in ("alice->bob", "bob->alice"):
        idx_a, idx_b = _shared_index(rng_auth, sec.g_EC, c_eq)
        tag_a = equivalence_tag(alice_v, idx_a, sec.g_EC)
        tag_b = equivalence_tag(bob_v, idx_b, sec.g_EC)
        equivalence_passed &= (tag_a == tag_b)
        auth_spend += wc_index_length(sec.g_EC, c_eq)
        ledger.record("equivalence", direction, n_ec,
                      tag_a if direction == "alice->bob" else tag_b)
    ledger.auth_bits_spent_a = auth_spend

    # privacy amplification
    if config.source.kind is SourceKind.WEAK_COHERENT:
        nu = nu_max(config.source.mu, config, scenario)
    else:
        nu = 0.0
    budget = PrivacyAmpBudget(
        n=float(n_ec), e_T=float(errors_corrected),
        q=float(ledger.parity_bits_disclosed),
        t=model.T * errors_corrected, nu=nu, g_pa=sec.g_pa,
        a=float(auth_spend))
    key_len = final_key_length(budget)

    empty = np.zeros(0, dtype=np.uint8)
    key_a = key_b = empty
    if equivalence_passed and key_len > 0 and n_ec > 0:
        n_pad = padded_length(n_ec)
        if 2 * n_pad <= record.m:
            pa_bits = record.bob_bases
        else:  # tiny blocks: extend the shared random supply
            pa_bits = np.random.default_rng(ss.spawn(1)[0]).integers(
                0, 2, size=2 * n_pad, dtype=np.uint8)
        params = PAHashParams(pa_bits[:n_pad], pa_bits[n_pad:2 * n_pad])
        pad_a = np.zeros(n_pad, dtype=np.uint8)
        pad_a[:n_ec] = alice_v
        pad_b = np.zeros(n_pad, dtype=np.uint8)
        pad_b[:n_ec] = bob_v
        key_a = pa_hash(pad_a, params, key_len)
        key_b = pa_hash(pad_b, params, key_len)
        ledger.record("privacy-amp", "both", key_len)

    return SessionReport(
        sifted_n=n0, errors_injected=errors_injected,
        errors_corrected=errors_corrected,
        equivalence_passed=bool(equivalence_passed),
        final_key_alice=key_a, final_key_bob=key_b,
        budget=budget, ledger=ledger, qber_observed=qber)


def dump_transcript(report: SessionReport, fh) -> None:
    """Write the audit transcript: one line per classical-channel event
    as 'phase<TAB>direction<TAB>payload-bit-count<TAB>tag-hex'."""
    for phase, direction, bits, tag_hex in report.ledger.events:
        fh.write(f"{phase}\t{direction}\t{bits}\t{tag_hex}\n")
