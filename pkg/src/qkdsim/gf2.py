"""Bit-string utilities and GF(2) polynomial arithmetic.

Bit-strings are numpy uint8 arrays of 0/1 values, most significant bit
first: index 0 is the first bit on the wire.  The integer form of a
bit-string of length n puts bit 0 at position n-1.

Polynomials over GF(2) are Python ints (bit i = coefficient of x^i).
"""

from __future__ import annotations

import functools
import warnings

import numpy as np

from .backend import clmul_int

__all__ = [
    "bits_to_int",
    "int_to_bits",
    "pack_bits",
    "unpack_bits",
    "clmul",
    "gf2_mul_mod",
    "irreducible_modulus",
    "padded_length",
    "PA_LENGTH_LADDER",
]


def bits_to_int(bits: np.ndarray) -> int:
    """Integer value of an MSB-first bit array."""
    bits = np.asarray(bits, dtype=np.uint8)
    if bits.size == 0:
        return 0
    packed = np.packbits(bits)
    pad = (-bits.size) % 8
    return int.from_bytes(packed.tobytes(), "big") >> pad


def int_to_bits(value: int, n: int) -> np.ndarray:
    """MSB-first bit array of width n for a non-negative integer."""
    if value < 0:
        raise ValueError("value must be non-negative")
    if value >> n:
        raise ValueError(f"value does not fit in {n} bits")
    nbytes = (n + 7) // 8
    raw = (value << ((-n) % 8)).to_bytes(nbytes, "big")
    return np.unpackbits(np.frombuffer(raw, dtype=np.uint8))[:n].copy()


def pack_bits(bits: np.ndarray) -> bytes:
    """Length-prefixed serialization: 64-bit big-endian bit count, then
    packed bytes, MSB-first."""
    bits = np.asarray(bits, dtype=np.uint8)
    return len(bits).to_bytes(8, "big") + np.packbits(bits).tobytes()


def unpack_bits(blob: bytes) -> np.ndarray:
    """Inverse of pack_bits."""
    if len(blob) < 8:
        raise ValueError("truncated bit-string blob")
    n = int.from_bytes(blob[:8], "big")
    body = np.frombuffer(blob[8:], dtype=np.uint8)
    if body.size != (n + 7) // 8:
        raise ValueError("bit-string blob length mismatch")
    return np.unpackbits(body)[:n].copy()


def clmul(a: int, b: int) -> int:
    """Carry-less (polynomial) product of two GF(2) polynomials."""
    return clmul_int(a, b)


# ---------------------------------------------------------------------------
# squaring via bit spreading: (sum a_i x^i)^2 = sum a_i x^(2i) over GF(2)

_SPREAD = np.zeros(256, dtype=np.uint16)
for _b in range(256):
    _s = 0
    for _i in range(8):
        if _b >> _i & 1:
            _s |= 1 << (2 * _i)
    _SPREAD[_b] = _s
del _b, _s, _i


def _gf2_square(a: int) -> int:
    if a == 0:
        return 0
    raw = a.to_bytes((a.bit_length() + 7) // 8, "little")
    arr = np.frombuffer(raw, dtype=np.uint8)
    spread = _SPREAD[arr].astype("<u2")
    return int.from_bytes(spread.tobytes(), "little")


def _mod_sparse(v: int, exps: tuple[int, ...]) -> int:
    """Reduce v modulo the sparse polynomial with the given exponents
    (descending, exps[0] = degree)."""
    n = exps[0]
    mask = (1 << n) - 1
    low = exps[1:]
    while v >> n:
        hi = v >> n
        v &= mask
        for e in low:
            v ^= hi << e
    return v


def _deg(a: int) -> int:
    return a.bit_length() - 1


def _gf2_gcd(a: int, b: int) -> int:
    while b:
        if _deg(a) < _deg(b):
            a, b = b, a
            continue
        while a and _deg(a) >= _deg(b):
            a ^= b << (_deg(a) - _deg(b))
        a, b = b, a
    return a


def gf2_mul_mod(a: int, b: int, exps: tuple[int, ...]) -> int:
    """Product of a and b in GF(2)[x] reduced by the sparse modulus."""
    return _mod_sparse(clmul_int(a, b), exps)


# ---------------------------------------------------------------------------
# irreducibility testing (Rabin) and modulus search

def _sparse_to_int(exps: tuple[int, ...]) -> int:
    f = 0
    for e in exps:
        f ^= 1 << e
    return f


@functools.lru_cache(maxsize=None)
def _small_irreducibles(max_deg: int) -> tuple[int, ...]:
    """All irreducible polynomials over GF(2) of degree 2..max_deg,
    found by sieving."""
    limit = 1 << (max_deg + 1)
    composite = bytearray(limit)
    out = []
    for p in range(2, limit):
        if composite[p]:
            continue
        if p >= 4:  # degree >= 2
            out.append(p)
        # mark multiples p*q with deg(pq) <= max_deg
        dp = _deg(p)
        for q in range(2, 1 << (max_deg - dp) + 1):
            prod = clmul_int(p, q)
            if prod < limit:
                composite[prod] = 1
    return tuple(out)


def _prime_factors(n: int) -> list[int]:
    out = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 1
    if n > 1:
        out.append(n)
    return out


def _has_small_factor(exps: tuple[int, ...], powers_cache: dict) -> bool:
    """Check the sparse candidate for irreducible factors of degree <= 12
    by direct evaluation of x^e mod p for each small irreducible p."""
    n = exps[0]
    for p in _small_irreducibles(12):
        if _deg(p) >= n:
            break
        key = p
        tab = powers_cache.get(key)
        if tab is None:
            # x^(2^j) mod p for j up to 25, and x^j for small j
            sq = [2 % p if _deg(p) == 1 else 2]
            x = 2
            xs = [1, 2]
            for _ in range(62):
                xs.append(_mod_sparse_poly(clmul_int(xs[-1], 2), p))
            for _ in range(25):
                x = _mod_sparse_poly(_gf2_square(x), p)
                sq.append(x)
            tab = (sq, xs)
            powers_cache[key] = tab
        sq, xs = tab
        r = 0
        for e in exps:
            if e < len(xs):
                r ^= xs[e]
            else:
                # x^e = prod over set bits of e of x^(2^j)
                acc = 1
                j = 0
                ee = e
                while ee:
                    if ee & 1:
                        acc = _mod_sparse_poly(clmul_int(acc, sq[j]), p)
                    ee >>= 1
                    j += 1
                r ^= acc
        if r == 0:
            return True
    return False


def _mod_sparse_poly(v: int, f: int) -> int:
    """Reduce v modulo a dense small polynomial f."""
    df = _deg(f)
    while _deg(v) >= df:
        v ^= f << (_deg(v) - df)
    return v


def is_irreducible(exps: tuple[int, ...]) -> bool:
    """Rabin irreducibility test for a sparse polynomial over GF(2).

    exps lists exponents in descending order; the constant term (0) must
    be present for any irreducible of degree >= 1.
    """
    n = exps[0]
    if n == 1:
        return True
    if 0 not in exps:
        return False
    if len(exps) % 2 == 0:
        return False  # even number of terms -> divisible by x+1
    x = 2  # the polynomial x
    v = x
    checkpoints = {n // r for r in _prime_factors(n)}
    f_int = _sparse_to_int(exps)
    for i in range(1, n + 1):
        v = _mod_sparse(_gf2_square(v), exps)
        if i in checkpoints:
            if _gf2_gcd(v ^ x, f_int) != 1:
                return False
    return v == x


def _search_modulus(n: int) -> tuple[int, ...]:
    """Find an irreducible trinomial or pentanomial of degree n."""
    cache: dict = {}

    def candidates():
        for a in range(1, n):
            yield (n, a, 0)
        for a in range(3, n):
            for b in range(2, a):
                for c in range(1, b):
                    yield (n, a, b, c, 0)

    for exps in candidates():
        if 0 not in exps:
            continue
        if _has_small_factor(exps, cache):
            continue
        if is_irreducible(exps):
            return exps
    raise ValueError(f"no sparse irreducible modulus found for degree {n}")


# Verified sparse irreducible moduli (exponent tuples).  Small and
# power-of-two entries were found with tools/find_moduli.py and checked
# with the Rabin test; entries of degree 2*3^k are the cyclotomic
# trinomials x^(2*3^k) + x^(3^k) + 1, irreducible because 2 is a
# primitive root modulo 3^(k+1).
_MODULUS_TABLE: dict[int, tuple[int, ...]] = {
    n: (n, n // 2, 0)
    for n in (2, 6, 18, 54, 162, 486, 1458, 4374, 13122, 39366, 118098,
              354294, 1062882, 3188646, 9565938, 28697814, 86093442)
}

def _register(exps: tuple[int, ...]) -> None:
    _MODULUS_TABLE[exps[0]] = exps


for _exps in (
    (8, 4, 3, 1, 0),
    (12, 3, 0),
    (16, 5, 3, 1, 0),
    (24, 4, 3, 1, 0),
    (32, 7, 3, 2, 0),
    (48, 5, 3, 2, 0),
    (64, 4, 3, 1, 0),
    (96, 10, 9, 6, 0),
    (128, 7, 2, 1, 0),
    (192, 7, 2, 1, 0),
    (256, 10, 5, 2, 0),
    (384, 12, 3, 2, 0),
    (512, 8, 5, 2, 0),
    (768, 19, 17, 4, 0),
    (1024, 19, 6, 1, 0),
    (1536, 21, 6, 2, 0),
    (2048, 19, 14, 13, 0),
    (3072, 11, 10, 5, 0),
    (4096, 27, 15, 1, 0),
    (6144, 26, 7, 1, 0),
    (8192, 9, 5, 2, 0),
):
    _register(_exps)
del _exps

# Degrees with a tabulated modulus, used to pad variable-length hash
# inputs up to a size whose modulus is known.
PA_LENGTH_LADDER: tuple[int, ...] = tuple(sorted(_MODULUS_TABLE))


@functools.lru_cache(maxsize=None)
def irreducible_modulus(n: int) -> tuple[int, ...]:
    """Sparse irreducible polynomial of degree n, as an exponent tuple.

    Table entries are returned directly; other degrees trigger a search,
    which is fast for small n but can be slow for n in the thousands.
    """
    if n < 1:
        raise ValueError("degree must be >= 1")
    if n == 1:
        return (1, 0)
    hit = _MODULUS_TABLE.get(n)
    if hit is not None:
        return hit
    if n > 2048:
        warnings.warn(
            f"searching for an irreducible modulus of degree {n}; "
            "consider padding to a supported length (padded_length)",
            RuntimeWarning,
        )
    exps = _search_modulus(n)
    _MODULUS_TABLE[n] = exps
    return exps


def padded_length(n: int) -> int:
    """Smallest tabulated modulus degree >= n (for amortizing the
    modulus across hash inputs of nearby lengths)."""
    for size in PA_LENGTH_LADDER:
        if size >= n:
            return size
    raise ValueError(f"input length {n} exceeds the supported ladder")
