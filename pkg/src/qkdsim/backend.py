"""Kernel backend selection.

The compiled extension (_kernels, built from _kernels.pyx) is used when
importable; the numpy/bigint fallback (_pykernels) otherwise.  Set
QKDSIM_BACKEND=py or QKDSIM_BACKEND=c to force a choice; forcing "c"
raises if the extension is missing.  Both backends produce bit-identical
results for identical inputs.
"""

from __future__ import annotations

import os

import numpy as np

from . import _pykernels

_choice = os.environ.get("QKDSIM_BACKEND", "auto").lower()

_ck = None
if _choice in ("auto", "c"):
    try:
        from . import _kernels as _ck  # type: ignore[no-redef]
    except ImportError:
        if _choice == "c":
            raise ImportError(
                "QKDSIM_BACKEND=c but the compiled extension is not built; "
                "run: python setup.py build_ext --inplace"
            )
        _ck = None

BACKEND_NAME = _ck.BACKEND_NAME if _ck is not None else _pykernels.BACKEND_NAME


def _int_to_words(v: int) -> np.ndarray:
    nw = max(1, (v.bit_length() + 63) // 64)
    return np.frombuffer(v.to_bytes(nw * 8, "little"), dtype="<u8").copy()


def _words_to_int(words: np.ndarray) -> int:
    return int.from_bytes(words.astype("<u8").tobytes(), "little")


def clmul_int(a: int, b: int) -> int:
    """Carry-less product of two non-negative ints."""
    if _ck is not None and min(a.bit_length(), b.bit_length()) > 256:
        return _words_to_int(_ck.clmul_words(_int_to_words(a), _int_to_words(b)))
    return _pykernels.clmul_int(a, b)


def exchange_outcomes(src_bit, src_basis, bob_basis, p_detect,
                      u_sig, u_dark, u_err, rand_bit, r_d, r_c):
    """Per-pulse detection/bit outcomes; see _pykernels.exchange_outcomes."""
    impl = _ck if _ck is not None else _pykernels
    return impl.exchange_outcomes(
        np.ascontiguousarray(src_bit, dtype=np.uint8),
        np.ascontiguousarray(src_basis, dtype=np.uint8),
        np.ascontiguousarray(bob_basis, dtype=np.uint8),
        np.ascontiguousarray(p_detect, dtype=np.float64),
        np.ascontiguousarray(u_sig, dtype=np.float64),
        np.ascontiguousarray(u_dark, dtype=np.float64),
        np.ascontiguousarray(u_err, dtype=np.float64),
        np.ascontiguousarray(rand_bit, dtype=np.uint8),
        float(r_d), float(r_c))
