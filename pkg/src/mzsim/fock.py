"""Fock-state bookkeeping and multi-photon transition amplitudes.

A linear-optical network acting on m modes is described by an m-by-m
unitary; the amplitude for a given photon-number input to appear as a
given output is the permanent of a row/column-repeated submatrix,
normalized by the occupation factorials. This module owns that
machinery plus the wavepacket-overlap model used for partial
distinguishability.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import permutations

import numpy as np

from .errors import (
    DimensionError,
    PhotonConservationError,
    SizeLimitError,
    UnitarityError,
    UnsupportedModelError,
)

SPEED_OF_LIGHT = 299_792_458.0  # m/s

# exact in double precision up to 12!
_FACTORIALS = tuple(float(math.factorial(k)) for k in range(13))

# Ryser blows up factorially in memory for the naive route and 2^n for
# Gray-code; nothing in this package needs more than a handful of
# photons, so cap hard.
PERMANENT_SIZE_LIMIT = 12

UNITARY_TOL = 1e-10


@dataclass(frozen=True)
class FockState:
    """Occupation-number state: occupations[i] photons in mode i."""

    occupations: tuple[int, ...]

    def __post_init__(self):
        occ = tuple(int(n) for n in self.occupations)
        if any(n < 0 for n in occ):
            raise ValueError(f"occupations must be non-negative, got {occ}")
        object.__setattr__(self, "occupations", occ)

    @property
    def mode_count(self) -> int:
        return len(self.occupations)

    @property
    def total_photons(self) -> int:
        return sum(self.occupations)

    def __str__(self) -> str:
        return "|" + ",".join(str(n) for n in self.occupations) + ">"


@dataclass(frozen=True)
class PhotonWavepacket:
    """Single-photon wavepacket: Gaussian spectrum plus polarization factor.

    center_wavelength_nm / bandwidth_fwhm_nm describe the spectral
    intensity (FWHM); delay_fs is the arrival time; polarization_overlap
    is the scalar projection of this photon's polarization onto the
    reference axis, in [0, 1].
    """

    center_wavelength_nm: float
    bandwidth_fwhm_nm: float
    delay_fs: float = 0.0
    polarization_overlap: float = 1.0

    def __post_init__(self):
        if self.center_wavelength_nm <= 0:
            raise ValueError("center_wavelength_nm must be positive")
        if self.bandwidth_fwhm_nm <= 0:
            raise ValueError("bandwidth_fwhm_nm must be positive")
        if not 0.0 <= self.polarization_overlap <= 1.0:
            raise ValueError("polarization_overlap must lie in [0, 1]")

    @property
    def spectral_sigma_rad_per_s(self) -> float:
        """Angular-frequency standard deviation of the spectral intensity."""
        lam = self.center_wavelength_nm * 1e-9
        dlam = self.bandwidth_fwhm_nm * 1e-9
        fwhm_hz = SPEED_OF_LIGHT * dlam / lam**2
        sigma_hz = fwhm_hz / (2.0 * math.sqrt(2.0 * math.log(2.0)))
        return 2.0 * math.pi * sigma_hz


def _as_square_matrix(m: np.ndarray) -> np.ndarray:
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {m.shape}")
    return m


def check_unitary(u: np.ndarray, tol: float = UNITARY_TOL) -> np.ndarray:
    """Validate that u is unitary within tol (max-abs of U+U - I)."""
    u = _as_square_matrix(u)
    defect = np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0])))
    if defect > tol:
        raise UnitarityError(f"matrix fails unitarity by {defect:.3e} (tol {tol:.1e})")
    return u


def permanent(m: np.ndarray) -> complex:
    """Matrix permanent (determinant without signs).

    Naive expansion up to 4x4, Ryser with Gray-code updates above; sizes
    beyond PERMANENT_SIZE_LIMIT are rejected.
    """
    m = _as_square_matrix(m)
    n = m.shape[0]
    if n > PERMANENT_SIZE_LIMIT:
        raise SizeLimitError(f"permanent limited to n <= {PERMANENT_SIZE_LIMIT}, got {n}")
    if n == 0:
        return complex(1.0)
    if n <= 4:
        total = 0.0 + 0.0j
        for perm in permutations(range(n)):
            prod = 1.0 + 0.0j
            for i, j in enumerate(perm):
                prod *= m[i, j]
            total += prod
        return complex(total)
    return _permanent_ryser(m)


def _permanent_ryser(m: np.ndarray) -> complex:
    # Ryser's formula with Gray-code subset updates:
    # perm(A) = (-1)^n sum_{S != {}} (-1)^|S| prod_i sum_{j in S} A_ij
    n = m.shape[0]
    row_sums = np.zeros(n, dtype=complex)
    total = 0.0 + 0.0j
    gray = 0
    size = 0
    for k in range(1, 1 << n):
        new_gray = k ^ (k >> 1)
        bit = gray ^ new_gray
        j = bit.bit_length() - 1
        if new_gray & bit:
            row_sums += m[:, j]
            size += 1
        else:
            row_sums -= m[:, j]
            size -= 1
        gray = new_gray
        total += (-1) ** size * np.prod(row_sums)
    return complex((-1) ** n * total)


def _occupation_factor(state: FockState) -> float:
    prod = 1.0
    for n in state.occupations:
        if n >= len(_FACTORIALS):
            raise SizeLimitError(f"occupation {n} exceeds supported range")
        prod *= _FACTORIALS[n]
    return prod


def transition_amplitude(u: np.ndarray, input_state: FockState, output_state: FockState) -> complex:
    """Amplitude <output| U |input> for photons through the mode unitary u.

    Equals perm(u_sub) / sqrt(prod in_j! prod out_i!), where u_sub
    repeats column j of u in_j times and row i out_i times.
    """
    u = check_unitary(u)
    m = u.shape[0]
    if input_state.mode_count != m or output_state.mode_count != m:
        raise DimensionError(
            f"states must have {m} modes, got "
            f"{input_state.mode_count} and {output_state.mode_count}"
        )
    if input_state.total_photons != output_state.total_photons:
        raise PhotonConservationError(
            f"photon number mismatch: {input_state.total_photons} in, "
            f"{output_state.total_photons} out"
        )
    n = input_state.total_photons
    if n == 0:
        return complex(1.0)
    if n > PERMANENT_SIZE_LIMIT:
        raise SizeLimitError(f"supports at most {PERMANENT_SIZE_LIMIT} photons, got {n}")
    cols = [j for j, nj in enumerate(input_state.occupations) for _ in range(nj)]
    rows = [i for i, ni in enumerate(output_state.occupations) for _ in range(ni)]
    sub = u[np.ix_(rows, cols)]
    norm = math.sqrt(_occupation_factor(input_state) * _occupation_factor(output_state))
    return complex(permanent(sub) / norm)


def enumerate_fock_states(mode_count: int, total_photons: int) -> list[FockState]:
    """All occupation vectors of mode_count modes summing to total_photons,
    in lexicographic order (deterministic)."""
    states: list[FockState] = []

    def build(prefix: list[int], remaining: int, modes_left: int):
        if modes_left == 1:
            states.append(FockState(tuple(prefix + [remaining])))
            return
        for k in range(remaining + 1):
            build(prefix + [k], remaining - k, modes_left - 1)

    if mode_count < 1:
        raise DimensionError("mode_count must be >= 1")
    build([], total_photons, mode_count)
    return states


def output_distribution(u: np.ndarray, input_state: FockState) -> dict[FockState, float]:
    """Probability of each photon-number output for the given input."""
    u = check_unitary(u)
    dist: dict[FockState, float] = {}
    for out in enumerate_fock_states(input_state.mode_count, input_state.total_photons):
        amp = transition_amplitude(u, input_state, out)
        dist[out] = abs(amp) ** 2
    return dist


def mode_overlap(a: PhotonWavepacket, b: PhotonWavepacket) -> float:
    """Squared spectral-intensity overlap at the wavepackets' relative
    delay, times both polarization factors.

    Only identical Gaussian spectra are supported; for those the
    normalized Fourier integral of the spectral intensity at lag tau
    gives exp(-(sigma_w * tau)^2).
    """
    if not (
        math.isclose(a.center_wavelength_nm, b.center_wavelength_nm, rel_tol=1e-12)
        and math.isclose(a.bandwidth_fwhm_nm, b.bandwidth_fwhm_nm, rel_tol=1e-12)
    ):
        raise UnsupportedModelError(
            "wavepackets with unequal spectra are not supported; "
            "both photons must share center wavelength and bandwidth"
        )
    tau_s = (a.delay_fs - b.delay_fs) * 1e-15
    sigma_w = a.spectral_sigma_rad_per_s
    spectral = math.exp(-((sigma_w * tau_s) ** 2))
    return a.polarization_overlap * b.polarization_overlap * spectral
