"""Universal hash families for authentication, the equivalence check,
and privacy amplification.

Three constructions live here:

* Tag hashing (wc_tag / equivalence_tag): an iterated two-to-one
  compression tree.  Each round hashes 2s-bit chunks to s bits,
  s = g + ceil(log2 log2 c), with one strongly-universal multiply-add
  sub-hash over a prime field per round; the final s-bit result is
  XOR-masked and truncated to g bits.  The mask makes a fresh tag
  exactly uniform, so blind forgery succeeds with probability exactly
  2^-g, and the chain's pairwise collision bound gives <= 2^(1-g) after
  one observed (message, tag) pair.

* Privacy amplification (pa_hash): h(x) = truncate(a (*) x xor b) where
  (*) is carry-less multiplication reduced by an irreducible polynomial
  of degree n.  The index is exactly 2n bits (a and b, each as long as
  the input), and the family is strongly universal: for x != x' every
  output pair is hit by exactly 2^(2n - out_len) parameter choices.

Indices are single-use: a new secret index must be consumed for every
message.  Bit-strings are MSB-first; serialization is length-prefixed
(64-bit big-endian bit count) packed bytes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .gf2 import bits_to_int, gf2_mul_mod, int_to_bits, irreducible_modulus
from .params import SystemConfig

__all__ = [
    "AuthKeyIndex",
    "AuthTag",
    "PAHashParams",
    "SingleUseError",
    "wc_index_length",
    "wc_tag",
    "equivalence_tag",
    "pa_hash",
    "auth_spend_estimate",
    "is_prime",
    "next_prime",
]


class SingleUseError(RuntimeError):
    """An authentication index was presented twice."""


# ---------------------------------------------------------------------------
# primality (for the per-round sub-hash field)

_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)
_MR_DETERMINISTIC_LIMIT = 3_317_044_064_679_887_385_961_981


def is_prime(n: int) -> bool:
    """Strong-pseudoprime test; deterministic below ~3.3e24 with the
    first twelve prime bases, extended with fixed extra bases above."""
    if n < 2:
        return False
    for p in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if n % p == 0:
            return n == p
    d = n - 1
    r = 0
    while d % 2 == 0:
        d //= 2
        r += 1
    bases = _MR_BASES
    if n >= _MR_DETERMINISTIC_LIMIT:
        bases = _MR_BASES + tuple(41 + 2 * k for k in range(20))
    for a in bases:
        x = pow(a, d, n)
        if x == 1 or x == n - 1:
            continue
        for _ in range(r - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def next_prime(n: int) -> int:
    """Smallest prime >= n."""
    if n <= 2:
        return 2
    n |= 1
    while not is_prime(n):
        n += 2
    return n


# ---------------------------------------------------------------------------
# index sizing

def wc_index_length(g: int, c: int) -> int:
    """Secret-index length (bits) needed to pick an authentication hash
    producing g-bit tags for messages up to c bits:
    ceil(4 (g + log2 log2 c) log2 c)."""
    if g < 1:
        raise ValueError("g must be >= 1")
    if c < 4:
        raise ValueError("c must be >= 4 (log2 log2 c must be >= 1)")
    lg = math.log2(c)
    return math.ceil(4.0 * (g + math.log2(lg)) * lg)


def _sub_hash_width(g: int, c: int) -> int:
    """Per-round output width s = g + ceil(log2 log2 c)."""
    c_eff = max(c, 4)
    return g + math.ceil(math.log2(math.log2(c_eff)))


@dataclass(eq=False)
class AuthKeyIndex:
    """Single-use secret index selecting one tag-hash function.

    bits must be exactly wc_index_length(g, c) long; c is the maximum
    message length the index is sized for.
    """

    bits: np.ndarray
    g: int
    c: int
    consumed: bool = False

    def __post_init__(self):
        self.bits = np.asarray(self.bits, dtype=np.uint8)
        want = wc_index_length(self.g, self.c)
        if self.bits.size != want:
            raise ValueError(
                f"index for (g={self.g}, c={self.c}) must be {want} bits, "
                f"got {self.bits.size}")

    @classmethod
    def from_rng(cls, rng: np.random.Generator, g: int, c: int) -> "AuthKeyIndex":
        n = wc_index_length(g, c)
        return cls(rng.integers(0, 2, size=n, dtype=np.uint8), g, c)

    def consume(self) -> np.ndarray:
        if self.consumed:
            raise SingleUseError(
                "authentication index already used; a fresh index is "
                "required for every message")
        self.consumed = True
        return self.bits

    def clone(self) -> "AuthKeyIndex":
        """Unconsumed copy (test/determinism checks only)."""
        return AuthKeyIndex(self.bits.copy(), self.g, self.c)


@dataclass(frozen=True)
class AuthTag:
    bits: np.ndarray

    @property
    def g(self) -> int:
        return self.bits.size

    def hex(self) -> str:
        return np.packbits(self.bits).tobytes().hex()

    def __eq__(self, other) -> bool:
        return (isinstance(other, AuthTag)
                and self.bits.size == other.bits.size
                and bool(np.array_equal(self.bits, other.bits)))


class _IndexReader:
    """Sequential bit supply from a consumed index; wraps around (with
    a shift) in the rare regimes where the schedule outruns the index."""

    def __init__(self, bits: np.ndarray):
        self._bits = bits
        self._pos = 0

    def take_int(self, k: int) -> int:
        n = self._bits.size
        idx = (self._pos + np.arange(k)) % n
        self._pos += k
        return bits_to_int(self._bits[idx])


def _round_key(reader: _IndexReader, s: int, p: int) -> tuple[int, int]:
    a = 1 + reader.take_int(2 * s) % (p - 1)
    b = reader.take_int(2 * s)
    return a, b


def _compress_round(values: list, s: int, a: int, b: int, p: int) -> list:
    """One tree level: pairs of s-bit values -> one s-bit value each via
    ((a*chunk + b) mod p) mod 2^s on the concatenated 2s-bit chunk."""
    if len(values) % 2:
        values = values + [0]
    mask = (1 << s) - 1
    return [(a * ((int(values[i]) << s) | int(values[i + 1])) + b) % p & mask
            for i in range(0, len(values), 2)]


def _tag(message: np.ndarray, index: AuthKeyIndex, g: int) -> AuthTag:
    message = np.asarray(message, dtype=np.uint8)
    if index.g != g:
        raise ValueError(f"index sized for g={index.g}, tag wants g={g}")
    if message.size > index.c:
        raise ValueError(
            f"message of {message.size} bits exceeds the index's maximum "
            f"c={index.c}")
    bits = index.consume()
    reader = _IndexReader(bits)

    c_eff = max(index.c, 4)
    s = _sub_hash_width(g, c_eff)
    p = next_prime(1 << (2 * s))

    # zero-pad to whole s-bit chunks, with at least one full 2s-bit
    # merge so every tag passes through a compression round (an empty
    # message hashes a single zero chunk)
    n_chunks = max(2, -(-message.size // s))
    padded = np.zeros(n_chunks * s, dtype=np.uint8)
    padded[:message.size] = message
    rows = padded.reshape(-1, s)
    if s < 64:
        weights = (np.uint64(1) << np.arange(s - 1, -1, -1, dtype=np.uint64))
        values = (rows.astype(np.uint64) * weights).sum(axis=1).tolist()
    else:
        values = [bits_to_int(chunk) for chunk in rows]

    while len(values) > 1:
        a, b = _round_key(reader, s, p)
        values = _compress_round(values, s, a, b, p)

    masked = int(values[0]) ^ reader.take_int(s)
    return AuthTag(int_to_bits(masked, s)[:g])


def wc_tag(message: np.ndarray, index: AuthKeyIndex, g: int) -> AuthTag:
    """g-bit authentication tag for a message, consuming the index."""
    return _tag(message, index, g)


def equivalence_tag(string: np.ndarray, index: AuthKeyIndex,
                    g_EC: int) -> AuthTag:
    """Tag for the post-reconciliation equivalence check.  Identical
    strings always produce equal tags; unequal strings collide with
    probability bounded by the family guarantee (2^(1-g_EC) worst
    case, ~2^-g_EC typically)."""
    return _tag(string, index, g_EC)


# ---------------------------------------------------------------------------
# privacy amplification

@dataclass(frozen=True)
class PAHashParams:
    """Index of a privacy-amplification hash: two parameters, each
    exactly as long as the input string (2n index bits total)."""

    param_a: np.ndarray
    param_b: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "param_a",
                           np.asarray(self.param_a, dtype=np.uint8))
        object.__setattr__(self, "param_b",
                           np.asarray(self.param_b, dtype=np.uint8))
        if self.param_a.size != self.param_b.size:
            raise ValueError("param_a and param_b must have equal length")

    @property
    def n(self) -> int:
        return self.param_a.size

    @classmethod
    def from_bits(cls, bits: np.ndarray) -> "PAHashParams":
        bits = np.asarray(bits, dtype=np.uint8)
        if bits.size % 2:
            raise ValueError("need an even number of index bits")
        half = bits.size // 2
        return cls(bits[:half], bits[half:])


def pa_hash(input_bits: np.ndarray, params: PAHashParams,
            out_len: int) -> np.ndarray:
    """Strongly-universal compression for privacy amplification:
    truncate(out_len, a (*) x xor b) with (*) the product in the field
    GF(2^n).  a = 1, b = 0 is the identity member (first out_len bits
    of the input)."""
    x = np.asarray(input_bits, dtype=np.uint8)
    n = x.size
    if params.n != n:
        raise ValueError(
            f"params sized for n={params.n}, input has n={n} bits")
    if not 0 <= out_len <= n:
        raise ValueError("out_len must be in [0, n]")
    if n == 0:
        return np.zeros(0, dtype=np.uint8)
    exps = irreducible_modulus(n)
    y = gf2_mul_mod(bits_to_int(params.param_a), bits_to_int(x), exps) \
        ^ bits_to_int(params.param_b)
    return int_to_bits(y, n)[:out_len]


# ---------------------------------------------------------------------------
# per-block authentication spend

def auth_spend_estimate(config: SystemConfig) -> float:
    """Secret bits consumed per block authenticating the classical
    messages: Bob's sift message (~2n detections, each carrying a basis
    bit and a ceil(log2 m)-bit index), Alice's 2n-bit keep/discard
    reply, and each party's equivalence tag over the ~n-bit
    reconciled string."""
    from .photonics import expected_sift_stats

    stats = expected_sift_stats(config)
    n = stats.expected_sifted_n
    m = config.block.raw_block_m
    g_auth = config.security.g_auth
    g_ec = config.security.g_EC
    idx_width = math.ceil(math.log2(m))
    c_sift = max(4, math.ceil(2 * n * (1 + idx_width)))
    c_reply = max(4, math.ceil(2 * n))
    c_equiv = max(4, math.ceil(n))
    return float(wc_index_length(g_auth, c_sift)
                 + wc_index_length(g_auth, c_reply)
                 + 2 * wc_index_length(g_ec, c_equiv))
