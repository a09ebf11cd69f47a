"""Brute-force reference calculations used to cross-check the fast paths.

The evolution here never touches a permanent: the n-photon sector matrix
is built by expanding products of transformed creation operators as
polynomials over occupation monomials. Slow and exponential in photon
number, which is fine for the <= 3-photon checks it serves.
"""

from __future__ import annotations

import math

import numpy as np

from .fock import FockState, enumerate_fock_states


def induced_sector_matrix(u: np.ndarray, total_photons: int) -> tuple[np.ndarray, list[FockState]]:
    """Matrix of the network unitary on the total_photons Fock sector.

    Each creation operator transforms as a+_j -> sum_i u[i, j] a+_i; an
    input state is a normalized product of creation operators applied to
    vacuum, expanded monomial by monomial.

    Returns (T, basis) with T[i_out, i_in] = <basis[i_out]|U|basis[i_in]>.
    """
    u = np.asarray(u, dtype=complex)
    m = u.shape[0]
    basis = enumerate_fock_states(m, total_photons)
    index = {s: i for i, s in enumerate(basis)}
    t = np.zeros((len(basis), len(basis)), dtype=complex)
    for j_in, state_in in enumerate(basis):
        # polynomial over occupation monomials, seeded with the vacuum
        poly: dict[tuple[int, ...], complex] = {(0,) * m: 1.0 + 0.0j}
        for mode_j, nj in enumerate(state_in.occupations):
            for _ in range(nj):
                nxt: dict[tuple[int, ...], complex] = {}
                for mono, coeff in poly.items():
                    for i in range(m):
                        amp = u[i, mode_j]
                        if amp == 0:
                            continue
                        bumped = list(mono)
                        bumped[i] += 1
                        key = tuple(bumped)
                        nxt[key] = nxt.get(key, 0.0 + 0.0j) + coeff * amp
                poly = nxt
        in_norm = math.sqrt(math.prod(math.factorial(n) for n in state_in.occupations))
        for mono, coeff in poly.items():
            out_norm = math.sqrt(math.prod(math.factorial(n) for n in mono))
            t[index[FockState(mono)], j_in] = coeff * out_norm / in_norm
    return t, basis


def sector_amplitude(u: np.ndarray, input_state: FockState, output_state: FockState) -> complex:
    """<output|U|input> via the explicit sector matrix."""
    t, basis = induced_sector_matrix(u, input_state.total_photons)
    index = {s: i for i, s in enumerate(basis)}
    return complex(t[index[output_state], index[input_state]])


def coincidence_probability_reference(u: np.ndarray, overlap: float) -> float:
    """Two-photon coincidence probability for |1,1> in, |1,1> out, with
    partial distinguishability treated as a convex mixture.

    The indistinguishable branch uses the sector matrix; the
    distinguishable branch routes the photons one at a time through the
    single-photon sector and sums the two detector assignments.
    """
    one_one = FockState((1, 1))
    t2, basis2 = induced_sector_matrix(u, 2)
    idx2 = {s: i for i, s in enumerate(basis2)}
    p_indist = abs(t2[idx2[one_one], idx2[one_one]]) ** 2

    t1, basis1 = induced_sector_matrix(u, 1)
    idx1 = {s: i for i, s in enumerate(basis1)}
    photon_a = FockState((1, 0))
    photon_b = FockState((0, 1))
    p_a = np.abs(t1[:, idx1[photon_a]]) ** 2
    p_b = np.abs(t1[:, idx1[photon_b]]) ** 2
    out0 = idx1[FockState((1, 0))]
    out1 = idx1[FockState((0, 1))]
    p_dist = p_a[out0] * p_b[out1] + p_a[out1] * p_b[out0]

    return overlap * p_indist + (1.0 - overlap) * p_dist


def haar_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed n x n unitary via QR with phase correction."""
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / math.sqrt(2.0)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    return q * (d / np.abs(d))
