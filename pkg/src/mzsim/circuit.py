"""Circuit construction: couplers, phase shifters, network compilation,
and the thermo-optic phase actuator.

Convention: a coupler with reflectivity eta maps its two modes by
[[sqrt(eta), i*sqrt(1-eta)], [i*sqrt(1-eta), sqrt(eta)]] (symmetric
i-phase). All observables exported by this package are independent of
that choice; the interference tests assert as much against the real
sign convention.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, UnitarityError


@dataclass(frozen=True)
class Coupler:
    """Two-mode coupler with effective beam-splitter reflectivity eta."""

    mode_a: int
    mode_b: int
    eta: float

    def __post_init__(self):
        if self.mode_a == self.mode_b:
            raise ValueError("coupler modes must differ")
        if not 0.0 <= self.eta <= 1.0:
            raise ValueError(f"eta must lie in [0, 1], got {self.eta}")


@dataclass(frozen=True)
class PhaseShifter:
    """Single-mode phase shift, stored unwrapped in radians."""

    mode: int
    phase: float

    def __post_init__(self):
        if not math.isfinite(self.phase):
            raise ValueError("phase must be finite")


@dataclass(frozen=True)
class CircuitNetwork:
    """Ordered list of elements over mode_count modes; first element acts
    first on the optical state."""

    mode_count: int
    elements: tuple

    def __post_init__(self):
        if self.mode_count < 1:
            raise DimensionError("mode_count must be >= 1")
        object.__setattr__(self, "elements", tuple(self.elements))
        for el in self.elements:
            modes = (el.mode_a, el.mode_b) if isinstance(el, Coupler) else (el.mode,)
            for m in modes:
                if not 0 <= m < self.mode_count:
                    raise DimensionError(
                        f"element mode {m} out of range for {self.mode_count} modes"
                    )


@dataclass(frozen=True)
class ThermoOpticCalibration:
    """Heater calibration: alpha in deg/mW, resistance in ohm, phi0 the
    zero-power phase offset in radians."""

    alpha: float
    resistance: float
    phi0: float = 0.0

    def __post_init__(self):
        if self.alpha <= 0:
            raise ValueError("alpha must be positive")
        if self.resistance <= 0:
            raise ValueError("resistance must be positive")


def coupler_unitary(c: Coupler, mode_count: int) -> np.ndarray:
    """Mode unitary of a single coupler embedded in mode_count modes."""
    if not (0 <= c.mode_a < mode_count and 0 <= c.mode_b < mode_count):
        raise DimensionError(
            f"coupler modes ({c.mode_a}, {c.mode_b}) out of range for {mode_count} modes"
        )
    u = np.eye(mode_count, dtype=complex)
    t = math.sqrt(c.eta)
    r = 1j * math.sqrt(1.0 - c.eta)
    u[c.mode_a, c.mode_a] = t
    u[c.mode_b, c.mode_b] = t
    u[c.mode_a, c.mode_b] = r
    u[c.mode_b, c.mode_a] = r
    return u


def phase_unitary(p: PhaseShifter, mode_count: int) -> np.ndarray:
    """Diagonal unitary applying exp(i*phase) on the shifted mode."""
    if not 0 <= p.mode < mode_count:
        raise DimensionError(f"phase-shifter mode {p.mode} out of range for {mode_count} modes")
    u = np.eye(mode_count, dtype=complex)
    u[p.mode, p.mode] = np.exp(1j * p.phase)
    return u


def element_unitary(element, mode_count: int) -> np.ndarray:
    if isinstance(element, Coupler):
        return coupler_unitary(element, mode_count)
    if isinstance(element, PhaseShifter):
        return phase_unitary(element, mode_count)
    raise TypeError(f"unknown circuit element {type(element).__name__}")


def compose(network: CircuitNetwork) -> np.ndarray:
    """Compile the network to its mode unitary (first element acts first).

    An empty network compiles to the identity. The result is checked
    unitary within 1e-10, which it is by construction unless an element
    produced a malformed matrix.
    """
    u = np.eye(network.mode_count, dtype=complex)
    for el in network.elements:
        u = element_unitary(el, network.mode_count) @ u
    defect = np.max(np.abs(u.conj().T @ u - np.eye(network.mode_count)))
    if defect > 1e-10:
        raise UnitarityError(f"compiled network fails unitarity by {defect:.3e}")
    return u


def mzi_network(
    internal_phase: float,
    eta_first: float = 0.5,
    eta_second: float = 0.5,
) -> CircuitNetwork:
    """Two-coupler Mach-Zehnder on modes (0, 1) with the phase shifter on
    the upper arm."""
    return CircuitNetwork(
        mode_count=2,
        elements=(
            Coupler(0, 1, eta_first),
            PhaseShifter(0, internal_phase),
            Coupler(0, 1, eta_second),
        ),
    )


def mzi_effective_reflectivity(delta_phi: float) -> float:
    """Effective beam-splitter reflectivity of a balanced MZI with
    internal phase difference delta_phi: (1 + cos(delta_phi)) / 2."""
    return (1.0 + math.cos(delta_phi)) / 2.0


def thermo_phase(voltage: float, cal: ThermoOpticCalibration) -> float:
    """Phase in radians at a heater drive voltage.

    Dissipated power P = V^2/R (converted to mW); the phase is
    alpha * P degrees on top of the zero-power offset phi0.
    """
    if voltage < 0:
        raise ValueError("voltage must be non-negative")
    power_mw = voltage * voltage / cal.resistance * 1e3
    return math.radians(cal.alpha * power_mw) + cal.phi0


def voltage_for_phase(phase: float, cal: ThermoOpticCalibration) -> float:
    """Heater voltage that produces the requested phase (inverse of
    thermo_phase). Raises if the phase lies below phi0."""
    delta_deg = math.degrees(phase - cal.phi0)
    if delta_deg < 0:
        raise ValueError("requested phase below the zero-power offset")
    power_mw = delta_deg / cal.alpha
    return math.sqrt(power_mw * 1e-3 * cal.resistance)
