"""Two-photon coincidence observables with partial distinguishability.

Partial distinguishability is a convex mixture: with weight M (the
wavepacket overlap) the photons interfere as identical bosons, with
weight 1 - M they are routed independently. Exact for two photons with
a real, non-negative spectral overlap, which covers delay and
polarization mismatch.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .circuit import Coupler, coupler_unitary, compose, mzi_network
from .errors import DimensionError
from .fock import FockState, PhotonWavepacket, mode_overlap, transition_amplitude

_ONE_ONE = FockState((1, 1))


@dataclass(frozen=True)
class TwoPhotonInput:
    """One photon per input mode of a two-mode network."""

    wavepacket_a: PhotonWavepacket
    wavepacket_b: PhotonWavepacket

    @property
    def input_state(self) -> FockState:
        return _ONE_ONE

    @property
    def overlap(self) -> float:
        return mode_overlap(self.wavepacket_a, self.wavepacket_b)


@dataclass(frozen=True)
class InterferenceCurve:
    """Noiseless probability curve over a settings axis (fs or rad)."""

    settings: tuple[float, ...]
    probabilities: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "settings", tuple(float(s) for s in self.settings))
        object.__setattr__(self, "probabilities", tuple(float(p) for p in self.probabilities))
        if len(self.settings) != len(self.probabilities):
            raise ValueError("settings and probabilities must have equal length")
        if any(not 0.0 <= p <= 1.0 + 1e-12 for p in self.probabilities):
            raise ValueError("probabilities must lie in [0, 1]")


def standard_wavepacket_pair(
    overlap: float,
    center_wavelength_nm: float = 830.0,
    bandwidth_fwhm_nm: float = 3.0,
) -> TwoPhotonInput:
    """Zero-delay photon pair whose mode overlap equals `overlap`, with
    the mismatch booked entirely against one photon's polarization."""
    a = PhotonWavepacket(center_wavelength_nm, bandwidth_fwhm_nm, 0.0, 1.0)
    b = PhotonWavepacket(center_wavelength_nm, bandwidth_fwhm_nm, 0.0, overlap)
    return TwoPhotonInput(a, b)


def coincidence_probability(u: np.ndarray, photons: TwoPhotonInput) -> float:
    """Probability of one photon at each output of the 2x2 unitary u.

    P = M * |<1,1|U|1,1>|^2 + (1 - M) * (|u00 u11|^2 + |u01 u10|^2).
    """
    u = np.asarray(u, dtype=complex)
    if u.shape != (2, 2):
        raise DimensionError(
            f"expected a 2x2 unitary (reduce larger networks first), got {u.shape}"
        )
    m = photons.overlap
    amp = transition_amplitude(u, _ONE_ONE, _ONE_ONE)
    p_indist = abs(amp) ** 2
    p_dist = (abs(u[0, 0]) * abs(u[1, 1])) ** 2 + (abs(u[0, 1]) * abs(u[1, 0])) ** 2
    p = m * p_indist + (1.0 - m) * p_dist
    return float(min(max(p, 0.0), 1.0))


def hom_dip_curve(eta: float, photons: TwoPhotonInput, delays_fs) -> InterferenceCurve:
    """Coincidence probability vs delay-line setting at a single coupler.

    Each setting adds to photon b's arrival time, so the dip is centered
    where the wavepacket delays coincide. The |tau| -> inf baseline is
    eta^2 + (1 - eta)^2.
    """
    if not 0.0 <= eta <= 1.0:
        raise ValueError(f"eta must lie in [0, 1], got {eta}")
    u = coupler_unitary(Coupler(0, 1, eta), 2)
    probs = []
    for d in delays_fs:
        shifted = replace(photons.wavepacket_b, delay_fs=photons.wavepacket_b.delay_fs + d)
        probs.append(coincidence_probability(u, TwoPhotonInput(photons.wavepacket_a, shifted)))
    return InterferenceCurve(tuple(float(d) for d in delays_fs), tuple(probs))


def noon_fringe_curve(
    photons: TwoPhotonInput,
    phases_rad,
    eta_first: float = 0.5,
    eta_second: float = 0.5,
) -> InterferenceCurve:
    """Coincidence probability vs MZI internal phase.

    For perfectly overlapping photons through the balanced MZI the curve
    is (1 + cos 2*phi)/2: two fringes per 2*pi of phase.
    """
    probs = []
    for phi in phases_rad:
        u = compose(mzi_network(phi, eta_first, eta_second))
        probs.append(coincidence_probability(u, photons))
    return InterferenceCurve(tuple(float(p) for p in phases_rad), tuple(probs))


def singles_fringe_curve(
    input_mode: int,
    phases_rad,
    eta_first: float = 0.5,
    eta_second: float = 0.5,
) -> InterferenceCurve:
    """Single-photon cross-port probability vs MZI internal phase.

    This is the classical fringe, (1 + cos phi)/2 for the balanced MZI:
    one fringe per 2*pi, half the rate of the two-photon pattern.
    """
    if input_mode not in (0, 1):
        raise DimensionError("input_mode must be 0 or 1 for the two-mode MZI")
    out_mode = 1 - input_mode
    probs = []
    for phi in phases_rad:
        u = compose(mzi_network(phi, eta_first, eta_second))
        probs.append(float(abs(u[out_mode, input_mode]) ** 2))
    return InterferenceCurve(tuple(float(p) for p in phases_rad), tuple(probs))
