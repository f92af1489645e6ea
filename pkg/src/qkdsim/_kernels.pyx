# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: carry-less multiplication and per-pulse
channel/detection outcomes.  Semantics must match _pykernels exactly."""

import numpy as np

cimport numpy as cnp
from libc.stdint cimport uint8_t, uint64_t

BACKEND_NAME = "cython"


def clmul_words(cnp.ndarray[cnp.uint64_t, ndim=1] a,
                cnp.ndarray[cnp.uint64_t, ndim=1] b):
    """Carry-less product of two little-endian uint64 word arrays."""
    cdef Py_ssize_t na = a.shape[0]
    cdef Py_ssize_t nb = b.shape[0]
    cdef cnp.ndarray[cnp.uint64_t, ndim=1] out = np.zeros(na + nb, dtype=np.uint64)
    cdef uint64_t[:] av = a
    cdef uint64_t[:] bv = b
    cdef uint64_t[:] ov = out
    cdef Py_ssize_t i, k
    cdef int bit
    cdef uint64_t bw, w
    for i in range(nb):
        bw = bv[i]
        if bw == 0:
            continue
        for bit in range(64):
            if (bw >> bit) & 1:
                if bit == 0:
                    for k in range(na):
                        ov[i + k] ^= av[k]
                else:
                    for k in range(na):
                        w = av[k]
                        ov[i + k] ^= w << bit
                        ov[i + k + 1] ^= w >> (64 - bit)
    return out


def exchange_outcomes(cnp.ndarray[cnp.uint8_t, ndim=1] src_bit,
                      cnp.ndarray[cnp.uint8_t, ndim=1] src_basis,
                      cnp.ndarray[cnp.uint8_t, ndim=1] bob_basis,
                      cnp.ndarray[cnp.float64_t, ndim=1] p_detect,
                      cnp.ndarray[cnp.float64_t, ndim=1] u_sig,
                      cnp.ndarray[cnp.float64_t, ndim=1] u_dark,
                      cnp.ndarray[cnp.float64_t, ndim=1] u_err,
                      cnp.ndarray[cnp.uint8_t, ndim=1] rand_bit,
                      double r_d, double r_c):
    cdef Py_ssize_t m = src_bit.shape[0]
    cdef cnp.ndarray[cnp.uint8_t, ndim=1] detected = np.zeros(m, dtype=np.uint8)
    cdef cnp.ndarray[cnp.uint8_t, ndim=1] bob_bit = np.zeros(m, dtype=np.uint8)
    cdef cnp.ndarray[cnp.uint8_t, ndim=1] dark_only = np.zeros(m, dtype=np.uint8)
    cdef uint8_t[:] sb = src_bit
    cdef uint8_t[:] sbas = src_basis
    cdef uint8_t[:] bbas = bob_basis
    cdef double[:] pd = p_detect
    cdef double[:] us = u_sig
    cdef double[:] ud = u_dark
    cdef double[:] ue = u_err
    cdef uint8_t[:] rb = rand_bit
    cdef uint8_t[:] det = detected
    cdef uint8_t[:] bb = bob_bit
    cdef uint8_t[:] dko = dark_only
    cdef Py_ssize_t i
    cdef bint sig, dark
    for i in range(m):
        sig = us[i] < pd[i]
        dark = ud[i] < r_d
        if not (sig or dark):
            continue
        det[i] = 1
        if sig:
            if sbas[i] == bbas[i]:
                bb[i] = sb[i] ^ (ue[i] < r_c)
            else:
                bb[i] = rb[i]
        else:
            bb[i] = rb[i]
            dko[i] = 1
    return detected, bob_bit, dark_only
