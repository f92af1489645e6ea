"""Pure-Python / numpy implementations of the hot kernels.

These are the reference semantics; the compiled extension in
_kernels.pyx must produce bit-identical results.
"""

from __future__ import annotations

import numpy as np

BACKEND_NAME = "python"


def clmul_int(a: int, b: int) -> int:
    """Carry-less product of two non-negative Python ints."""
    if a == 0 or b == 0:
        return 0
    if a.bit_length() < b.bit_length():
        a, b = b, a
    acc = 0
    while b:
        low = b & -b
        acc ^= a << (low.bit_length() - 1)
        b ^= low
    return acc


def exchange_outcomes(src_bit, src_basis, bob_basis, p_detect,
                      u_sig, u_dark, u_err, rand_bit, r_d, r_c):
    """Per-pulse detection and measured-bit outcomes.

    Returns (detected, bob_bit, dark_only) uint8 arrays.
    """
    sig = u_sig < p_detect
    dark = u_dark < r_d
    detected = sig | dark
    compatible = src_basis == bob_basis
    flip = u_err < r_c
    sig_bit = np.where(compatible, src_bit ^ flip, rand_bit)
    bob_bit = np.where(sig, sig_bit, rand_bit).astype(np.uint8)
    bob_bit[~detected] = 0
    dark_only = (dark & ~sig).astype(np.uint8)
    return detected.astype(np.uint8), bob_bit, dark_only
