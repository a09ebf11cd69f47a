"""Built-in consistency checks.

Three suites cross-check the simulator against slower, independent
computations: composed networks stay unitary, permanent amplitudes agree
with a brute-force operator expansion, and the dip and fringe visibilities
obey their closed-form overlap laws. The bias knob shifts every measured
deviation before comparison; it exists so tests can prove the suites fail
when the numbers drift.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .circuit import CircuitNetwork, Coupler, PhaseShifter, compose
from .fock import enumerate_fock_states, transition_amplitude
from .interference import (
    coincidence_probability,
    noon_fringe_curve,
    standard_wavepacket_pair,
)
from .reference import (
    coincidence_probability_reference,
    haar_unitary,
    sector_amplitude,
)

DEFAULT_SEED = 20260817


@dataclass(frozen=True)
class SuiteResult:
    name: str
    passed: bool
    max_deviation: float
    tolerance: float
    detail: str

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return (
            f"{status} {self.name}: max deviation {self.max_deviation:.3e} "
            f"(tolerance {self.tolerance:.1e}) {self.detail}"
        )


def _random_network(rng: np.random.Generator) -> CircuitNetwork:
    modes = int(rng.integers(2, 5))
    n_el = int(rng.integers(1, 7))
    elements = []
    for _ in range(n_el):
        if rng.random() < 0.6:
            a, b = rng.choice(modes, size=2, replace=False)
            elements.append(Coupler(int(a), int(b), float(rng.random())))
        else:
            elements.append(
                PhaseShifter(int(rng.integers(0, modes)), float(rng.uniform(-math.pi, math.pi)))
            )
    return CircuitNetwork(mode_count=modes, elements=tuple(elements))


def suite_unitarity(bias: float = 0.0, seed: int = DEFAULT_SEED, trials: int = 100) -> SuiteResult:
    rng = np.random.default_rng([seed, 0])
    worst = 0.0
    for _ in range(trials):
        u = compose(_random_network(rng))
        defect = float(np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0]))))
        worst = max(worst, defect)
    worst += bias
    tol = 1e-10
    return SuiteResult(
        "network-unitarity", worst < tol, worst, tol, f"over {trials} random networks"
    )


def suite_oracle_equivalence(
    bias: float = 0.0, seed: int = DEFAULT_SEED, trials: int = 100
) -> SuiteResult:
    rng = np.random.default_rng([seed, 1])
    worst = 0.0
    for _ in range(trials):
        modes = int(rng.integers(2, 4))
        photons = int(rng.integers(1, 4))
        u = haar_unitary(modes, rng)
        states = enumerate_fock_states(modes, photons)
        fock_in = states[int(rng.integers(0, len(states)))]
        fock_out = states[int(rng.integers(0, len(states)))]
        a_perm = transition_amplitude(u, fock_in, fock_out)
        a_ref = sector_amplitude(u, fock_in, fock_out)
        worst = max(worst, abs(a_perm - a_ref))
    worst += bias
    tol = 1e-10
    return SuiteResult(
        "oracle-equivalence", worst < tol, worst, tol,
        f"permanent vs operator expansion, {trials} random unitaries",
    )


def suite_visibility_laws(bias: float = 0.0, seed: int = DEFAULT_SEED) -> SuiteResult:
    from .circuit import coupler_unitary

    worst = 0.0
    half = coupler_unitary(Coupler(0, 1, 0.5), 2)
    for overlap in (0.0, 0.25, 0.5, 0.872, 1.0):
        photons = standard_wavepacket_pair(overlap)

        # dip visibility at a balanced coupler equals the overlap
        p_dip = coincidence_probability(half, photons)
        p_ref = coincidence_probability_reference(half, photons.overlap)
        worst = max(worst, abs(p_dip - p_ref))
        visibility = 1.0 - p_dip / 0.5
        worst = max(worst, abs(visibility - overlap))

        # fringe contrast of the phase-doubled pair fringe
        phases = np.linspace(0.0, math.pi, 181)
        curve = noon_fringe_curve(photons, phases)
        p = np.asarray(curve.probabilities)
        contrast = (p.max() - p.min()) / (p.max() + p.min())
        law = (1.0 + overlap) / (3.0 - overlap)
        worst = max(worst, abs(contrast - law))
    worst += bias
    tol = 1e-10
    return SuiteResult(
        "visibility-laws", worst < tol, worst, tol, "dip and fringe contrast vs overlap"
    )


def run_selftest(bias: float = 0.0, seed: int = DEFAULT_SEED) -> list[SuiteResult]:
    return [
        suite_unitarity(bias=bias, seed=seed),
        suite_oracle_equivalence(bias=bias, seed=seed),
        suite_visibility_laws(bias=bias, seed=seed),
    ]
